use serde::{Deserialize, Serialize};

use crate::dynamics::radial_velocity;
use crate::error::{Error, Result};
use crate::kernels::{psi, KernelParams, QuadratureConfig};
use crate::measure::{RadialMeasure, Ring};

/// Masses at or below this count as zero when judging a two-ring solution;
/// in three dimensions the exact solution sits on `m₁ = 0` and quadrature
/// noise lands on either side of it.
pub const POSITIVITY_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub lambda_hat: f64,
    pub residual: f64,
    pub support: Vec<f64>,
}

fn linear_params(d: usize) -> Result<KernelParams> {
    KernelParams::attractive(d, 1.0)
}

/// How far the α = 1 speed is from `λ ρ` on the support of `m`.
///
/// `λ̂` is the ring-mass-weighted mean of `|v(ρ_i)| / ρ_i`; the residual is
/// the largest deviation from it.
pub fn similarity_residual(m: &RadialMeasure, d: usize) -> Result<SimilarityReport> {
    let params = linear_params(d)?;
    if m.rings().is_empty() {
        return Err(Error::domain("measure", "needs at least one ring"));
    }
    let q = QuadratureConfig::default();
    let mut rates = Vec::with_capacity(m.rings().len());
    for ring in m.rings() {
        rates.push(radial_velocity(m, ring.radius, &params, &q)?.abs() / ring.radius);
    }
    let weight: f64 = m.rings().iter().map(|g| g.mass).sum();
    let lambda_hat = m.rings().iter().zip(&rates).map(|(g, w)| g.mass * w).sum::<f64>() / weight;
    let residual = rates.iter().map(|w| (w - lambda_hat).abs()).fold(0.0, f64::max);
    Ok(SimilarityReport {
        lambda_hat,
        residual,
        support: m.rings().iter().map(|g| g.radius).collect(),
    })
}

/// `w(ρ₁) - (ρ₁/ρ₂) w(ρ₂)` for the α = 1 measure
/// `(1 - m₁ - m₂) δ₀ + m₁ δ_{ρ₁} + m₂ δ_{ρ₂}`.
pub fn two_ring_inequality_witness(d: usize, rho1: f64, rho2: f64, m1: f64, m2: f64) -> Result<f64> {
    if d < 3 {
        return Err(Error::domain("d", format!("must be at least 3, got {d}")));
    }
    let params = linear_params(d)?;
    if !(rho1 > 0.0 && rho1 < rho2 && rho2.is_finite()) {
        return Err(Error::domain("rho1", format!("must satisfy 0 < rho1 < rho2, got {rho1}, {rho2}")));
    }
    if !(m1 > 0.0 && m2 > 0.0 && m1 + m2 <= 1.0 + 1e-15) {
        return Err(Error::domain("m1", format!("masses must be positive with m1 + m2 ≤ 1, got {m1}, {m2}")));
    }
    let m = RadialMeasure::new(
        (1.0 - m1 - m2).max(0.0),
        vec![Ring { mass: m1, radius: rho1 }, Ring { mass: m2, radius: rho2 }],
    )?;
    let q = QuadratureConfig::default();
    let w1 = radial_velocity(&m, rho1, &params, &q)?.abs();
    let w2 = radial_velocity(&m, rho2, &params, &q)?.abs();
    Ok(w1 - rho1 / rho2 * w2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TwoRingSearch {
    Feasible {
        m1: f64,
        m2: f64,
        measure: RadialMeasure,
        residual: f64,
    },
    /// The linear system's solution has a mass at or below
    /// [`POSITIVITY_THRESHOLD`].
    Infeasible { m1: f64, m2: f64 },
}

/// Unit-mass pair of rings at `ρ₁ < ρ₂` (no origin atom) whose α = 1 speeds
/// are proportional to radius, if one exists.
pub fn search_two_ring_similarity(d: usize, rho1: f64, rho2: f64, q: &QuadratureConfig) -> Result<TwoRingSearch> {
    let params = linear_params(d)?;
    if !(rho1 > 0.0 && rho1 < rho2 && rho2.is_finite()) {
        return Err(Error::domain("rho1", format!("must satisfy 0 < rho1 < rho2, got {rho1}, {rho2}")));
    }
    let self_term = psi(1.0, &params, q)?;
    // w(ρ_i)/ρ_i = (m₁ ψ(ρ₁/ρ_i) + m₂ ψ(ρ₂/ρ_i)) / ρ_i
    let a = self_term / rho1 - psi(rho1 / rho2, &params, q)? / rho2;
    let b = psi(rho2 / rho1, &params, q)? / rho1 - self_term / rho2;
    let det = a - b;
    if det.abs() <= 1e-14 * (a.abs() + b.abs()) {
        return Err(Error::Singular(format!("two-ring system at ({rho1}, {rho2}) has no unique solution")));
    }
    let m1 = -b / det;
    let m2 = 1.0 - m1;
    if m1 <= POSITIVITY_THRESHOLD || m2 <= POSITIVITY_THRESHOLD {
        return Ok(TwoRingSearch::Infeasible { m1, m2 });
    }
    let measure = RadialMeasure::new(0.0, vec![Ring { mass: m1, radius: rho1 }, Ring { mass: m2, radius: rho2 }])?;
    let residual = similarity_residual(&measure, d)?.residual;
    Ok(TwoRingSearch::Feasible { m1, m2, measure, residual })
}

pub fn search_two_ring_similarity_d2(rho1: f64, rho2: f64, q: &QuadratureConfig) -> Result<TwoRingSearch> {
    search_two_ring_similarity(2, rho1, rho2, q)
}
