//! Radially symmetric probability measures: an atom at the origin plus a
//! finite list of uniformly charged spheres ("rings").

mod grid;
mod initial;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::unit_sphere_area;

pub use grid::{discretize, GridSpec, Spacing};
pub use initial::{
    make_initial_data, InitialDataSpec, InitialKind, InitialProfile, RadialProfile, UniformBall, SUPPORT_RADIUS,
};

/// A sphere of radius `radius` carrying `mass`. Serialised as `[mass, radius]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(f64, f64)", into = "(f64, f64)")]
pub struct Ring {
    pub mass: f64,
    pub radius: f64,
}

impl From<(f64, f64)> for Ring {
    fn from((mass, radius): (f64, f64)) -> Self {
        Ring { mass, radius }
    }
}

impl From<Ring> for (f64, f64) {
    fn from(r: Ring) -> Self {
        (r.mass, r.radius)
    }
}

/// Origin atom plus rings with strictly increasing radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure", into = "RawMeasure")]
pub struct RadialMeasure {
    origin_mass: f64,
    rings: Vec<Ring>,
    total_mass: f64,
}

#[derive(Serialize, Deserialize)]
struct RawMeasure {
    origin_mass: f64,
    rings: Vec<Ring>,
}

impl TryFrom<RawMeasure> for RadialMeasure {
    type Error = Error;
    fn try_from(raw: RawMeasure) -> Result<Self> {
        RadialMeasure::new(raw.origin_mass, raw.rings)
    }
}

impl From<RadialMeasure> for RawMeasure {
    fn from(m: RadialMeasure) -> Self {
        RawMeasure {
            origin_mass: m.origin_mass,
            rings: m.rings,
        }
    }
}

impl RadialMeasure {
    pub fn new(origin_mass: f64, rings: Vec<Ring>) -> Result<Self> {
        if !(origin_mass.is_finite() && origin_mass >= 0.0) {
            return Err(Error::InvalidMeasure(format!("origin mass {origin_mass} must be finite and nonnegative")));
        }
        for (i, r) in rings.iter().enumerate() {
            if !(r.mass.is_finite() && r.mass > 0.0) {
                return Err(Error::InvalidMeasure(format!("ring {i} has non-positive mass {}", r.mass)));
            }
            if !(r.radius.is_finite() && r.radius > 0.0) {
                return Err(Error::InvalidMeasure(format!("ring {i} has non-positive radius {}", r.radius)));
            }
        }
        if let Some(i) = rings.windows(2).position(|w| w[1].radius <= w[0].radius) {
            return Err(Error::InvalidMeasure(format!(
                "radii must increase strictly: ring {} at {} follows {}",
                i + 1,
                rings[i + 1].radius,
                rings[i].radius
            )));
        }
        let total_mass = origin_mass + rings.iter().map(|r| r.mass).sum::<f64>();
        Ok(Self {
            origin_mass,
            rings,
            total_mass,
        })
    }

    /// `m δ₀`.
    pub fn origin_atom(mass: f64) -> Result<Self> {
        Self::new(mass, Vec::new())
    }

    pub fn single_ring(mass: f64, radius: f64) -> Result<Self> {
        Self::new(0.0, vec![Ring { mass, radius }])
    }

    pub fn zero() -> Self {
        Self {
            origin_mass: 0.0,
            rings: Vec::new(),
            total_mass: 0.0,
        }
    }

    pub fn origin_mass(&self) -> f64 {
        self.origin_mass
    }

    pub fn rings(&self) -> &[Ring] {
        &self.rings
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn is_empty(&self) -> bool {
        self.total_mass == 0.0
    }

    /// `μ(B̄_r)`: origin mass plus every ring with radius ≤ r.
    pub fn mass_in_ball(&self, r: f64) -> f64 {
        let n = self.rings.partition_point(|ring| ring.radius <= r);
        self.origin_mass + self.rings[..n].iter().map(|ring| ring.mass).sum::<f64>()
    }

    /// `∫ |x|² dμ`.
    pub fn second_moment(&self) -> f64 {
        self.rings.iter().map(|r| r.mass * r.radius * r.radius).sum()
    }

    /// Discrete `L^p` norm of the piecewise-constant density obtained by
    /// spreading each ring over the shell between the midpoints to its
    /// neighbours (the outermost shell is mirrored about its ring).
    pub fn lp_norm_estimate(&self, p: f64, d: usize) -> Result<f64> {
        if self.origin_mass > 0.0 {
            return Err(Error::NoDensity {
                origin_mass: self.origin_mass,
            });
        }
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::domain("p", format!("must be a finite number ≥ 1, got {p}")));
        }
        if d < 1 {
            return Err(Error::domain("d", "must be at least 1"));
        }
        let n = self.rings.len();
        if n < 2 {
            return Err(Error::domain("rings", "at least two rings are needed to reconstruct a density"));
        }
        let ball = unit_sphere_area(d)? / d as f64;
        let mut bounds = Vec::with_capacity(n + 1);
        bounds.push(0.0);
        for w in self.rings.windows(2) {
            bounds.push(0.5 * (w[0].radius + w[1].radius));
        }
        let last = self.rings[n - 1].radius;
        bounds.push(2.0 * last - bounds[n - 1]);
        let di = d as i32;
        let sum: f64 = self
            .rings
            .iter()
            .zip(bounds.windows(2))
            .map(|(ring, b)| {
                let vol = ball * (b[1].powi(di) - b[0].powi(di));
                (ring.mass / vol).powf(p) * vol
            })
            .sum();
        Ok(sum.powf(1.0 / p))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("measure serialises")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidMeasure(e.to_string()))
    }
}
