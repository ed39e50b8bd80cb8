//! Histogram and log-space KDE of the noise-free benchmark response.

use mfuq::model::default_benchmark;
use mfuq::stats::{qoi_distribution, DistributionConfig};

fn main() -> mfuq::Result<()> {
    let bench = default_benchmark().with_noise(0.0);
    let dom = bench.spec.domain.clone();
    let q = qoi_distribution(|y| bench.truth_at(y), &dom, 42, &DistributionConfig::default())?;
    println!(
        "sample mean {:.5} (exact {:.5}), std {:.5} (exact {:.5})",
        q.mean,
        bench.truth_mean(),
        q.std,
        bench.truth_std()
    );
    let peak = q.histogram.density.iter().cloned().fold(0.0, f64::max);
    for (i, d) in q.histogram.density.iter().enumerate() {
        let bar = "#".repeat((40.0 * d / peak).round() as usize);
        println!("{:>7.3} {bar}", q.histogram.edges[i]);
    }
    println!(
        "kde: {} points, bandwidth {:.4} (log space: {}), integral {:.4}",
        q.kde.x.len(),
        q.kde.bandwidth,
        q.kde.log_transformed,
        q.kde.integral()
    );
    Ok(())
}
