use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelParams;
use crate::measure::RadialMeasure;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

/// Monte Carlo radial velocity at `x = r e₁`, summing the pairwise force
/// `-α |x - y|^{α-2} (x - y)` over points drawn uniformly on each ring.
///
/// Samples are split between rings in proportion to their mass (at least
/// two each); the origin atom is added exactly.
pub fn nbody_oracle_velocity(
    m: &RadialMeasure,
    r: f64,
    params: &KernelParams,
    n_samples: usize,
    seed: u64,
) -> Result<OracleEstimate> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::domain("r", format!("must be positive and finite, got {r}")));
    }
    if n_samples < 1000 {
        return Err(Error::domain("n_samples", format!("must be at least 1000, got {n_samples}")));
    }
    params.require_attractive()?;
    let d = params.d();
    let alpha = params.alpha();
    let mut estimate = -alpha * r.powf(alpha - 1.0) * m.origin_mass();
    let mut variance = 0.0;

    let ring_mass: f64 = m.rings().iter().map(|g| g.mass).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = vec![0.0f64; d];
    for ring in m.rings() {
        let n = ((n_samples as f64 * ring.mass / ring_mass).round() as usize).max(2);
        let rho = ring.radius;
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        let mut taken = 0;
        while taken < n {
            let mut norm = 0.0f64;
            for c in u.iter_mut() {
                *c = rng.sample(StandardNormal);
                norm += *c * *c;
            }
            let u1 = u[0] / norm.sqrt();
            let dx = r - rho * u1;
            let dist2 = (r * r + rho * rho - 2.0 * r * rho * u1).max(0.0);
            if dist2 == 0.0 {
                continue; // landed on the evaluation point; draw again
            }
            let f = -alpha * dist2.powf(0.5 * alpha - 1.0) * dx;
            sum += f;
            sum_sq += f * f;
            taken += 1;
        }
        let nf = n as f64;
        let mean = sum / nf;
        let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
        estimate += ring.mass * mean;
        variance += ring.mass * ring.mass * var / nf;
    }
    Ok(OracleEstimate {
        estimate,
        std_error: variance.sqrt(),
    })
}
