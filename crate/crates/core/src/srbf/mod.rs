//! Multi-fidelity stochastic radial basis function surrogates.
//!
//! A stochastic RBF treats the kernel exponent `tau` of
//! `f(y, tau) = sum_j w_j ||y - c_j||^tau` as uniformly distributed; the
//! prediction is the expectation over `tau` and the uncertainty the width of
//! the central 95% band. Fidelities are stacked additively through
//! inter-level error surrogates, and the training sets grow by parallel
//! infill at the point of largest uncertainty.

mod adaptive;
mod kmeans;
mod loocv;
mod multifidelity;
mod rbf;

pub use adaptive::{
    infill_point, srbf_quadrature, ComponentLog, ComponentTuning, InfillLog, InitialDesign, Srbf,
    SrbfConfig, SrbfIterationLog, SrbfStop,
};
pub use kmeans::kmeans_centers;
pub use loocv::{loocv_rmse, loocv_select_k, LoocvResult};
pub use multifidelity::{choose_fidelity, MultiFidelitySurrogate, TrainingSets};
pub use rbf::{
    band_width, empirical_quantile, rbf_fit, FitMode, RbfFit, SrbfSurrogate, SurrogateMode,
    TauSamples, DUPLICATE_TOL,
};
