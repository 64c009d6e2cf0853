use serde::{Deserialize, Serialize};

use super::fit_line;
use crate::dynamics::{integrate_until, radial_velocity, EventKind, FlowState, SimConfig};
use crate::error::{Error, Result};
use crate::kernels::QuadratureConfig;
use crate::measure::{discretize, make_initial_data, GridSpec, InitialDataSpec, InitialKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingConfig {
    pub grid: GridSpec,
    pub sim: SimConfig,
    /// Runs stop at this multiple of the slowest predicted collapse.
    pub cap_factor: f64,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            grid: GridSpec::geometric(2000, 1e-6, 0.5).expect("valid default grid"),
            sim: SimConfig::default(),
            cap_factor: 10.0,
        }
    }
}

/// Absorption time of the ring nearest `r0`, `None` when censored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapseTime {
    pub r0: f64,
    pub label: f64,
    pub absorb_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub slope: f64,
    pub slope_std_error: f64,
    pub intercept: f64,
    pub censor_time: f64,
    pub times: Vec<CollapseTime>,
}

/// Fit `log t_absorb` against `log r₀` for power-law data.
///
/// The run ends once every tracked ring is absorbed or at the censoring
/// time, `cap_factor` times the largest `r₀^ε / (ε δ)` with `δ` the
/// smallest initial `|v₀(r₀)| / r₀^{1-ε}` among the tracked rings.
pub fn collapse_scaling(spec: &InitialDataSpec, r0_list: &[f64], cfg: &ScalingConfig) -> Result<ScalingReport> {
    spec.validate()?;
    if spec.kind != InitialKind::PowerLaw {
        return Err(Error::domain("data", "collapse scaling needs power_law data"));
    }
    let eps = spec.epsilon.expect("validated");
    if let Some(&bad) = r0_list.iter().find(|&&r| !(r > 0.0 && r < 0.25)) {
        return Err(Error::domain("r0", format!("values must lie in (0, 1/4), got {bad}")));
    }
    let lo = r0_list.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = r0_list.iter().copied().fold(0.0, f64::max);
    if !((hi / lo).log10() >= 1.5 - 1e-12) {
        return Err(Error::domain("r0", "values must span at least 1.5 decades"));
    }
    cfg.sim.validate()?;
    let params = spec.params()?;
    let profile = make_initial_data(spec)?;
    let measure = discretize(&profile, &cfg.grid)?;
    let labels: Vec<f64> = measure.rings().iter().map(|g| g.radius).collect();

    let nearest = |r0: f64| {
        let at = labels.partition_point(|&l| l < r0);
        let mut best = at.min(labels.len() - 1);
        if at > 0 && (labels[at - 1].ln() - r0.ln()).abs() < (labels[best].ln() - r0.ln()).abs() {
            best = at - 1;
        }
        labels[best]
    };
    let tracked: Vec<f64> = r0_list.iter().map(|&r| nearest(r)).collect();

    let q = QuadratureConfig::default();
    let mut delta = f64::INFINITY;
    for &l in &tracked {
        let v = radial_velocity(&measure, l, &params, &q)?;
        delta = delta.min(v.abs() / l.powf(1.0 - eps));
    }
    let censor_time = cfg.cap_factor * hi.powf(eps) / (eps * delta);

    let mut pending: Vec<f64> = tracked.clone();
    let mut seen = 0;
    let traj = integrate_until(&FlowState::initial(measure), &params, &cfg.sim, censor_time, |_, events| {
        for e in &events[seen..] {
            if let Some(slot) = pending.iter_mut().find(|l| **l == e.label) {
                match (e.kind, e.into) {
                    (EventKind::Merge, Some(into)) => *slot = into,
                    _ => *slot = f64::NAN,
                }
            }
        }
        seen = events.len();
        pending.iter().all(|l| l.is_nan())
    })?;

    let times: Vec<CollapseTime> = r0_list
        .iter()
        .zip(&tracked)
        .map(|(&r0, &label)| CollapseTime {
            r0,
            label,
            absorb_time: traj.absorb_time(label),
        })
        .collect();
    let (x, y): (Vec<f64>, Vec<f64>) = times
        .iter()
        .filter_map(|c| c.absorb_time.map(|t| (c.r0.ln(), t.ln())))
        .unzip();
    if x.len() < 2 {
        return Err(Error::Diagnostic(format!(
            "only {} of {} rings absorbed before t = {censor_time}",
            x.len(),
            times.len()
        )));
    }
    let (slope, intercept, slope_std_error) = fit_line(&x, &y);
    Ok(ScalingReport {
        slope,
        slope_std_error,
        intercept,
        censor_time,
        times,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn input_checks() {
        let spec = InitialDataSpec::power_law(3, 1.0, 0.5).unwrap();
        let cfg = ScalingConfig::default();
        assert!(collapse_scaling(&spec, &[0.01, 0.1], &cfg).is_err());
        assert!(collapse_scaling(&spec, &[0.001, 0.3], &cfg).is_err());
        let log = InitialDataSpec::log_critical_alpha1(3, 0.8).unwrap();
        assert!(collapse_scaling(&log, &[0.001, 0.1], &cfg).is_err());
    }

    #[test]
    fn coarse_slope() {
        let spec = InitialDataSpec::power_law(3, 1.0, 0.5).unwrap();
        let cfg = ScalingConfig {
            grid: GridSpec::geometric(300, 1e-5, 0.5).unwrap(),
            ..ScalingConfig::default()
        };
        let rep = collapse_scaling(&spec, &[1e-1, 10f64.powf(-1.5), 1e-2, 10f64.powf(-2.5)], &cfg).unwrap();
        assert!(rep.times.iter().all(|c| c.absorb_time.is_some()));
        assert!((rep.slope - 0.5).abs() < 0.1, "{}", rep.slope);
    }
}
