use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::dynamics::{format_number, Trajectory};
use crate::error::{Error, Result};
use crate::kernels::KernelParams;
use crate::measure::{make_initial_data, InitialDataSpec, InitialKind, RadialProfile};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioPoint {
    pub r: f64,
    pub ratio: f64,
}

/// `μ₀(B_r) / R_t(r)^{2-α}` over surviving labels, largest label first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioCurve {
    pub time: f64,
    pub points: Vec<RatioPoint>,
}

impl RatioCurve {
    pub fn max_ratio(&self) -> Option<f64> {
        self.points.iter().map(|p| p.ratio).reduce(f64::max)
    }
}

/// Ratio curve at the latest snapshot not after `t`.
///
/// With `spec`, `μ₀(B_r)` is the exact initial ball mass of that
/// (logarithmic) profile; without it, the ball mass of the first snapshot.
pub fn critical_ratio_curve(
    traj: &Trajectory,
    t: f64,
    params: &KernelParams,
    spec: Option<&InitialDataSpec>,
) -> Result<RatioCurve> {
    let first = traj
        .snapshots
        .first()
        .ok_or_else(|| Error::domain("trajectory", "has no snapshots"))?;
    let last = traj.snapshots.last().expect("non-empty");
    if !(t >= first.time && t <= last.time) {
        return Err(Error::domain(
            "t",
            format!("must lie in the recorded range [{}, {}], got {t}", first.time, last.time),
        ));
    }
    let profile = match spec {
        Some(s) => {
            if s.kind == InitialKind::PowerLaw {
                return Err(Error::domain("data", "ratio curves need logarithmic data"));
            }
            Some(make_initial_data(s)?)
        }
        None => None,
    };
    let state = traj.snapshot_at(t).expect("t is inside the recorded range");
    let power = 2.0 - params.alpha();
    let mut points = Vec::with_capacity(state.initial_radii.len());
    for (ring, &label) in state.measure.rings().iter().zip(&state.initial_radii).rev() {
        let mass = match &profile {
            Some(p) => p.mass_in_ball(label)?,
            None => first.measure.mass_in_ball(label),
        };
        points.push(RatioPoint {
            r: label,
            ratio: mass / ring.radius.powf(power),
        });
    }
    Ok(RatioCurve { time: state.time, points })
}

/// Columns `r,ratio`.
pub fn write_ratio_csv<W: Write>(curve: &RatioCurve, mut w: W) -> io::Result<()> {
    writeln!(w, "r,ratio")?;
    for p in &curve.points {
        writeln!(w, "{},{}", format_number(p.r), format_number(p.ratio))?;
    }
    w.flush()
}
