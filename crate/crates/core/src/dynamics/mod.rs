//! Lagrangian ring dynamics: every ring moves radially with the velocity
//! induced by the current measure, rings that reach the origin are absorbed
//! into the atom there.

mod evaluator;
mod output;
mod stepper;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{psi, KernelParams, QuadratureConfig};
use crate::measure::RadialMeasure;

pub use evaluator::VelocityEvaluator;
pub use output::{format_number, write_events_csv, write_trajectory_csv};
pub use stepper::{integrate, integrate_until, IntegrationError};

/// Radial velocity at radius `r`, by direct quadrature of every ring's ψ.
///
/// A ring sitting exactly at `r` contributes its self-term `m ψ(1)`.
pub fn radial_velocity(m: &RadialMeasure, r: f64, params: &KernelParams, q: &QuadratureConfig) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::domain("r", format!("must be positive and finite, got {r}")));
    }
    params.require_attractive()?;
    let mut sum = m.origin_mass();
    for ring in m.rings() {
        sum += ring.mass * psi(ring.radius / r, params, q)?;
    }
    let alpha = params.alpha();
    Ok(-alpha * r.powf(alpha - 1.0) * sum)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub absorb_radius: f64,
    pub merge_gap: f64,
    pub max_step: f64,
    pub record_every: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            absorb_radius: 1e-9,
            merge_gap: 0.0,
            max_step: 0.05,
            record_every: 0.01,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::domain(name, format!("must be positive and finite, got {v}")))
            }
        };
        positive("rel_tol", self.rel_tol)?;
        positive("abs_tol", self.abs_tol)?;
        positive("absorb_radius", self.absorb_radius)?;
        positive("max_step", self.max_step)?;
        positive("record_every", self.record_every)?;
        if !(self.merge_gap >= 0.0 && self.merge_gap.is_finite()) {
            return Err(Error::domain("merge_gap", format!("must be nonnegative, got {}", self.merge_gap)));
        }
        Ok(())
    }
}

/// The measure at some time together with the label (initial radius) of
/// each surviving ring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub time: f64,
    pub measure: RadialMeasure,
    pub initial_radii: Vec<f64>,
}

impl FlowState {
    /// Time zero, each ring labelled by its own radius.
    pub fn initial(measure: RadialMeasure) -> Self {
        let initial_radii = measure.rings().iter().map(|r| r.radius).collect();
        Self {
            time: 0.0,
            measure,
            initial_radii,
        }
    }

    pub fn new(time: f64, measure: RadialMeasure, initial_radii: Vec<f64>) -> Result<Self> {
        if !(time >= 0.0 && time.is_finite()) {
            return Err(Error::domain("time", format!("must be nonnegative, got {time}")));
        }
        if initial_radii.len() != measure.rings().len() {
            return Err(Error::InvalidMeasure(format!(
                "{} labels for {} rings",
                initial_radii.len(),
                measure.rings().len()
            )));
        }
        Ok(Self {
            time,
            measure,
            initial_radii,
        })
    }

    /// Current radius of the ring carrying `label`, if it survives.
    pub fn radius_of(&self, label: f64) -> Option<f64> {
        self.initial_radii
            .iter()
            .position(|&l| l == label)
            .map(|i| self.measure.rings()[i].radius)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Absorb,
    Merge,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Absorb => "absorb",
            EventKind::Merge => "merge",
        }
    }
}

/// Something that removed a ring. For a merge, `label` is the ring that
/// disappeared and `into` the inner ring that took its mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
    pub label: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub into: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub snapshots: Vec<FlowState>,
    pub events: Vec<Event>,
}

impl Trajectory {
    pub fn final_state(&self) -> Option<&FlowState> {
        self.snapshots.last()
    }

    /// Latest snapshot at or before `t`.
    pub fn snapshot_at(&self, t: f64) -> Option<&FlowState> {
        let i = self.snapshots.partition_point(|s| s.time <= t);
        i.checked_sub(1).map(|i| &self.snapshots[i])
    }

    /// Time at which `label` was absorbed, following merges to the ring that
    /// carried its mass.
    pub fn absorb_time(&self, label: f64) -> Option<f64> {
        let mut current = label;
        for e in &self.events {
            if e.label != current {
                continue;
            }
            match e.kind {
                EventKind::Absorb => return Some(e.time),
                EventKind::Merge => current = e.into.unwrap_or(current),
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Ring;

    fn q() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn single_ring_self_speed() {
        let p = KernelParams::new(3, 1.0).unwrap();
        let m = RadialMeasure::single_ring(1.0, 0.7).unwrap();
        assert!((radial_velocity(&m, 0.7, &p, &q()).unwrap() + 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn origin_atom_speed() {
        for d in 2..5 {
            let p = KernelParams::new(d, 1.0).unwrap();
            let m = RadialMeasure::origin_atom(0.3).unwrap();
            assert!((radial_velocity(&m, 2.5, &p, &q()).unwrap() + 0.3).abs() < 1e-14);
        }
    }

    #[test]
    fn two_rings_in_three_dimensions() {
        let p = KernelParams::new(3, 1.0).unwrap();
        let m = RadialMeasure::new(0.0, vec![Ring { mass: 0.5, radius: 1.0 }, Ring { mass: 0.5, radius: 2.0 }]).unwrap();
        assert!((radial_velocity(&m, 1.0, &p, &q()).unwrap() + 0.5).abs() < 1e-10);
        assert!((radial_velocity(&m, 2.0, &p, &q()).unwrap() + 19.0 / 24.0).abs() < 1e-10);
    }

    #[test]
    fn velocity_domain() {
        let p = KernelParams::new(3, 1.0).unwrap();
        let m = RadialMeasure::origin_atom(1.0).unwrap();
        assert!(radial_velocity(&m, 0.0, &p, &q()).is_err());
        assert!(radial_velocity(&m, -1.0, &p, &q()).is_err());
        assert!(radial_velocity(&m, 1.0, &KernelParams::new(3, -0.5).unwrap(), &q()).is_err());
        assert_eq!(radial_velocity(&RadialMeasure::zero(), 1.0, &p, &q()).unwrap(), 0.0);
    }

    #[test]
    fn sim_config_checks() {
        assert!(SimConfig::default().validate().is_ok());
        let bad = SimConfig { absorb_radius: 0.0, ..SimConfig::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn absorb_time_follows_merges() {
        let traj = Trajectory {
            snapshots: vec![],
            events: vec![
                Event { time: 0.1, kind: EventKind::Merge, label: 0.2, into: Some(0.1) },
                Event { time: 0.3, kind: EventKind::Absorb, label: 0.1, into: None },
            ],
        };
        assert_eq!(traj.absorb_time(0.2), Some(0.3));
        assert_eq!(traj.absorb_time(0.5), None);
    }
}
