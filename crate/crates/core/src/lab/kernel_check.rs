use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{asymptotic_constant, phi_derivative, psi, DerivativeOrder, KernelParams, QuadratureConfig};

/// One property check; `margin > 0` exactly when it passed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelCheck {
    pub name: String,
    pub passed: bool,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelReport {
    pub d: usize,
    pub alpha: f64,
    pub passed: bool,
    pub checks: Vec<KernelCheck>,
}

/// 0 followed by 59 geometric points from 1e-3 to 1e3.
pub fn default_kernel_grid() -> Vec<f64> {
    std::iter::once(0.0)
        .chain((0..59).map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 58.0)))
        .collect()
}

const FLAT_TOLERANCE: f64 = 1e-8;
const ASYMPTOTE_TOLERANCE: f64 = 0.01;

fn check(name: &str, margin: f64) -> KernelCheck {
    KernelCheck {
        name: name.to_string(),
        passed: margin > 0.0,
        margin,
    }
}

/// Positivity and strict decrease of ψ on `grid`, approach to the asymptote
/// at its far end, and (for α = 1) the concavity pattern of φ that belongs
/// to the dimension.
pub fn verify_kernel_properties(params: &KernelParams, grid: &[f64]) -> Result<KernelReport> {
    params.require_sub_quadratic()?;
    if grid.len() < 50 {
        return Err(Error::domain("grid", format!("needs at least 50 points, got {}", grid.len())));
    }
    if !(grid[0] >= 0.0 && grid.windows(2).all(|w| w[0] < w[1])) {
        return Err(Error::domain("grid", "must be nonnegative and strictly increasing"));
    }
    let q = QuadratureConfig::default();
    let values = grid.iter().map(|&r| psi(r, params, &q)).collect::<Result<Vec<f64>>>()?;
    let mut checks = vec![
        check("psi_positive", values.iter().copied().fold(f64::INFINITY, f64::min)),
        check(
            "psi_decreasing",
            values.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min),
        ),
    ];
    let far = *grid.last().expect("non-empty");
    let limit = asymptotic_constant(params);
    let approach = (values[values.len() - 1] * far.powf(2.0 - params.alpha()) / limit - 1.0).abs();
    checks.push(check("psi_asymptote", ASYMPTOTE_TOLERANCE - approach));

    if params.alpha() == 1.0 {
        let d = params.d();
        let mut inner = Vec::new();
        let mut outer = Vec::new();
        for &r in grid.iter().filter(|&&r| r > 0.0 && r != 1.0) {
            let c = phi_derivative(r, d, DerivativeOrder::Second, &q)?;
            if r < 1.0 {
                inner.push(c);
            } else {
                outer.push(c);
            }
        }
        let most = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let least = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
        let largest_abs = |v: &[f64]| v.iter().map(|x| x.abs()).fold(0.0, f64::max);
        match d {
            2 => {
                // convex inside the unit ball, concave outside: one sign change at r = 1
                checks.push(check("phi_convex_inside", least(&inner)));
                checks.push(check("phi_concave_outside", -most(&outer)));
            }
            3 => {
                checks.push(check("phi_linear_inside", FLAT_TOLERANCE - largest_abs(&inner)));
                checks.push(check("phi_concave_outside", -most(&outer)));
            }
            _ => {
                checks.push(check("phi_concave", -most(&inner).max(most(&outer))));
            }
        }
    }
    Ok(KernelReport {
        d: params.d(),
        alpha: params.alpha(),
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}
