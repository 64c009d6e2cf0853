use serde::{Deserialize, Serialize};

use super::{RadialMeasure, RadialProfile, Ring};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Geometric,
    Uniform,
}

/// Shell edges `r_min = e₀ < … < e_n = r_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_rings: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub spacing: Spacing,
}

impl GridSpec {
    pub fn geometric(n_rings: usize, r_min: f64, r_max: f64) -> Result<Self> {
        let g = Self { n_rings, r_min, r_max, spacing: Spacing::Geometric };
        g.validate()?;
        Ok(g)
    }

    pub fn uniform(n_rings: usize, r_min: f64, r_max: f64) -> Result<Self> {
        let g = Self { n_rings, r_min, r_max, spacing: Spacing::Uniform };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rings < 1 {
            return Err(Error::domain("n_rings", "must be at least 1"));
        }
        if !(self.r_min > 0.0 && self.r_min < self.r_max && self.r_max.is_finite()) {
            return Err(Error::domain(
                "r_min",
                format!("must satisfy 0 < r_min < r_max, got r_min = {}, r_max = {}", self.r_min, self.r_max),
            ));
        }
        Ok(())
    }

    pub fn edges(&self) -> Vec<f64> {
        let n = self.n_rings;
        (0..=n)
            .map(|i| {
                if i == n {
                    return self.r_max;
                }
                let f = i as f64 / n as f64;
                match self.spacing {
                    Spacing::Geometric => self.r_min * (self.r_max / self.r_min).powf(f),
                    Spacing::Uniform => self.r_min + (self.r_max - self.r_min) * f,
                }
            })
            .collect()
    }
}

/// Replace a radial profile by rings at the mass centroids of the grid shells.
///
/// Mass inside `r_min` joins the innermost ring and mass beyond `r_max`
/// joins the outermost one, so the result has no atom. Ring masses are
/// rescaled by their sum so the total is one up to rounding.
pub fn discretize<P: RadialProfile + ?Sized>(profile: &P, grid: &GridSpec) -> Result<RadialMeasure> {
    grid.validate()?;
    let support = profile.support_radius();
    if grid.r_max > support {
        return Err(Error::domain(
            "r_max",
            format!("must not exceed the support radius {support}, got {}", grid.r_max),
        ));
    }
    let mut edges = grid.edges();
    edges[0] = 0.0;
    *edges.last_mut().unwrap() = support;

    let mut rings = Vec::with_capacity(grid.n_rings);
    for w in edges.windows(2) {
        let mass = profile.mass_between(w[0], w[1])?;
        let moment = profile.moment_between(w[0], w[1])?;
        if !(mass > 0.0) {
            return Err(Error::domain("grid", format!("shell [{}, {}] carries no mass", w[0], w[1])));
        }
        rings.push(Ring { mass, radius: moment / mass });
    }
    let total: f64 = rings.iter().map(|r| r.mass).sum();
    for r in &mut rings {
        r.mass /= total;
    }
    RadialMeasure::new(0.0, rings)
}
