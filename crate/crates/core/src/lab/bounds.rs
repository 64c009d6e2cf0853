use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::radial_velocity;
use crate::error::{Error, Result};
use crate::kernels::QuadratureConfig;
use crate::measure::{discretize, make_initial_data, GridSpec, InitialDataSpec, InitialKind, SUPPORT_RADIUS};

/// Which lower bound on the initial speed is being tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    /// `|v₀(r)| ≥ δ₁ r (-log r)^{1-k}`, α = 1 logarithmic data.
    Lemma25,
    /// `|v₀(r)| ≥ δ₁ r^{1-ε}`, power-law data.
    Lemma35,
    /// `|v₀(r)| ≥ δ₁ r (-log r)^{1-k}`, logarithmic data for general α.
    Lemma45,
}

impl BoundKind {
    pub fn for_spec(spec: &InitialDataSpec) -> Self {
        match spec.kind {
            InitialKind::LogCriticalAlpha1 => BoundKind::Lemma25,
            InitialKind::PowerLaw => BoundKind::Lemma35,
            InitialKind::LogCriticalGeneral => BoundKind::Lemma45,
        }
    }

    /// The comparison function the speed is divided by.
    pub fn comparison(self, spec: &InitialDataSpec, r: f64) -> f64 {
        match self {
            BoundKind::Lemma35 => r.powf(1.0 - spec.epsilon.unwrap_or(0.0)),
            _ => r * (-r.ln()).powf(1.0 - spec.k.unwrap_or(0.0)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundFitReport {
    pub kind: BoundKind,
    pub empirical_delta1: f64,
    pub grid: Vec<f64>,
    pub min_ratio_location: f64,
    /// `|v₀(r)|` over the comparison function at each grid radius.
    pub ratios: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundFitConfig {
    pub n_rings: usize,
    /// Innermost ring edge relative to the smallest grid radius.
    pub inner_reach: f64,
    pub quadrature: QuadratureConfig,
}

impl Default for BoundFitConfig {
    fn default() -> Self {
        Self {
            n_rings: 4000,
            inner_reach: 1e-3,
            quadrature: QuadratureConfig::default(),
        }
    }
}

/// 50 radii, geometric from 1e-6 to 1e-1.
pub fn default_bound_grid() -> Vec<f64> {
    let n = 50;
    (0..n)
        .map(|i| 10f64.powf(-6.0 + 5.0 * i as f64 / (n - 1) as f64))
        .collect()
}

pub fn fit_lower_bound(spec: &InitialDataSpec, grid: &[f64]) -> Result<BoundFitReport> {
    fit_lower_bound_with(spec, grid, &BoundFitConfig::default())
}

/// Initial speed over the family's comparison function, minimised over `grid`.
pub fn fit_lower_bound_with(spec: &InitialDataSpec, grid: &[f64], cfg: &BoundFitConfig) -> Result<BoundFitReport> {
    spec.validate()?;
    if grid.is_empty() {
        return Err(Error::domain("grid", "must not be empty"));
    }
    if let Some(&bad) = grid.iter().find(|&&r| !(r > 0.0 && r < SUPPORT_RADIUS)) {
        return Err(Error::domain("grid", format!("radii must lie in (0, 1/2), got {bad}")));
    }
    let params = spec.params()?;
    let kind = BoundKind::for_spec(spec);
    let smallest = grid.iter().copied().fold(f64::INFINITY, f64::min);
    let profile = make_initial_data(spec)?;
    let mesh = GridSpec::geometric(cfg.n_rings, smallest * cfg.inner_reach, SUPPORT_RADIUS)?;
    let measure = discretize(&profile, &mesh)?;

    let ratios = grid
        .par_iter()
        .map(|&r| Ok(radial_velocity(&measure, r, &params, &cfg.quadrature)?.abs() / kind.comparison(spec, r)))
        .collect::<Result<Vec<f64>>>()?;
    let (at, &min) = ratios
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("grid is non-empty");
    if !(min > 0.0) {
        return Err(Error::Diagnostic(format!(
            "speed ratio {min} at r = {} is not positive",
            grid[at]
        )));
    }
    Ok(BoundFitReport {
        kind,
        empirical_delta1: min,
        grid: grid.to_vec(),
        min_ratio_location: grid[at],
        ratios,
    })
}
