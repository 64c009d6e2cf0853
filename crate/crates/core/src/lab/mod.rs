//! Numerical witnesses for the qualitative statements about the flow:
//! lower bounds on the initial speed, collapse-time scaling, growth of the
//! critical ratio, similarity profiles, plus an independent Monte Carlo
//! velocity oracle.

mod bounds;
mod kernel_check;
mod oracle;
mod ratio;
mod scaling;
mod similarity;

pub use bounds::{default_bound_grid, fit_lower_bound, fit_lower_bound_with, BoundFitConfig, BoundFitReport, BoundKind};
pub use kernel_check::{default_kernel_grid, verify_kernel_properties, KernelCheck, KernelReport};
pub use oracle::{nbody_oracle_velocity, OracleEstimate};
pub use ratio::{critical_ratio_curve, write_ratio_csv, RatioCurve, RatioPoint};
pub use scaling::{collapse_scaling, CollapseTime, ScalingConfig, ScalingReport};
pub use similarity::{
    search_two_ring_similarity, search_two_ring_similarity_d2, similarity_residual, two_ring_inequality_witness,
    SimilarityReport, TwoRingSearch, POSITIVITY_THRESHOLD,
};

/// Least-squares line through `(x, y)`: slope, intercept and the standard
/// error of the slope (zero with fewer than three points).
pub(crate) fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let se = if x.len() > 2 {
        let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    (slope, intercept, se)
}

#[cfg(test)]
mod tests {
    use super::fit_line;

    #[test]
    fn exact_line() {
        let (s, c, se) = fit_line(&[0.0, 1.0, 2.0, 3.0], &[1.0, 3.0, 5.0, 7.0]);
        assert!((s - 2.0).abs() < 1e-14 && (c - 1.0).abs() < 1e-14 && se < 1e-14);
    }
}
