//! Multi-fidelity forward uncertainty quantification.
//!
//! Two adaptive estimators of the statistics of a scalar quantity of
//! interest `G_alpha(y)` computed by a model with several fidelity levels
//! `alpha` and uniformly distributed parameters `y`:
//!
//! * [`misc`]: multi-index stochastic collocation, a profit-driven sparse
//!   combination of tensor Clenshaw–Curtis quadratures over fidelity and
//!   parameter levels.
//! * [`srbf`]: multi-fidelity stochastic radial basis function surrogates
//!   refined by uncertainty-driven parallel infill.
//!
//! Models are accessed through [`model::Evaluator`], which caches every
//! evaluation and keeps the cost ledger.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod misc;
pub mod model;
pub mod multiindex;
pub mod optimize;
pub mod quadrature;
pub mod report;
pub mod run;
pub mod srbf;
pub mod stats;

pub use error::{Error, Result};
pub use multiindex::{IndexSet, MultiIndex};
pub use quadrature::ParamDomain;
