//! Velocity assembly for many rings at once.
//!
//! The speed at ring `i` is `α r_i^{α-1} (m₀ + Σ_j m_j ψ(ρ_j / r_i))`. Sources
//! far inside (`ρ_j < η r_i`) and far outside (`ρ_j > r_i / η`) are summed
//! through the power series of ψ, whose partial moments are carried along
//! two sweeps over the sorted radii and rescaled from one target to the
//! next. Only the band `η ≤ ρ_j / r_i ≤ 1/η` is summed pairwise, from a
//! tabulated ψ. For `d = 3`, `α = 1` the series terminate and the band is
//! empty, so assembly is linear in the number of rings.

use crate::error::Result;
use crate::kernels::{KernelParams, PsiExpansion, PsiTable};

const BAND: f64 = 0.5;
const SERIES_TERMS: usize = 26;
const TABLE_HALF_NODES: usize = 2048;

#[derive(Debug, Clone)]
pub struct VelocityEvaluator {
    alpha: f64,
    expansion: PsiExpansion,
    // None when the series are exact on either side of ρ = 1
    table: Option<PsiTable>,
    eta: f64,
}

impl VelocityEvaluator {
    pub fn new(params: &KernelParams) -> Result<Self> {
        params.require_attractive()?;
        if params.is_d3_linear() {
            return Ok(Self {
                alpha: 1.0,
                expansion: PsiExpansion::closed_form_d3(),
                table: None,
                eta: 1.0,
            });
        }
        let expansion = PsiExpansion::new(params, SERIES_TERMS)?;
        let table = PsiTable::new(params, (1.0 / BAND).ln() * 1.001, TABLE_HALF_NODES)?;
        Ok(Self {
            alpha: params.alpha(),
            expansion,
            table: Some(table),
            eta: BAND,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// ψ(ρ) through the same representation used by [`Self::speeds`].
    pub fn psi(&self, rho: f64) -> f64 {
        match &self.table {
            None => {
                if rho <= 1.0 {
                    self.expansion.inner_value(rho)
                } else {
                    self.expansion.outer_value(rho)
                }
            }
            Some(t) => {
                if rho < self.eta {
                    self.expansion.inner_value(rho)
                } else if rho > 1.0 / self.eta {
                    self.expansion.outer_value(rho)
                } else {
                    t.at_log_ratio(rho.ln().clamp(-t.half_width(), t.half_width()))
                }
            }
        }
    }

    /// Writes `m₀ + Σ_j m_j ψ(ρ_j / r_i)` for every ring into `out`.
    /// `radii` must be positive and non-decreasing.
    pub fn speeds(&self, origin_mass: f64, radii: &[f64], masses: &[f64], out: &mut [f64]) {
        let n = radii.len();
        debug_assert_eq!(masses.len(), n);
        debug_assert!(radii.windows(2).all(|w| w[0] <= w[1]));
        out[..n].iter_mut().for_each(|o| *o = origin_mass);
        if n == 0 {
            return;
        }
        let exact = self.table.is_none();
        let eta = self.eta;
        let inner = self.expansion.inner_coefficients();
        let outer = self.expansion.outer_coefficients();

        // inward sources: T_k = Σ m_j (ρ_j / r)^{2k}
        let mut acc = vec![0.0; inner.len()];
        let mut next = 0;
        let mut prev = radii[0];
        let mut band_lo = vec![0usize; n];
        for i in 0..n {
            let r = radii[i];
            if r != prev {
                let q = (prev / r) * (prev / r);
                let mut f = 1.0;
                for a in acc.iter_mut() {
                    *a *= f;
                    f *= q;
                }
                prev = r;
            }
            let limit = eta * r;
            while next < n && (radii[next] < limit || (exact && radii[next] <= limit)) {
                let s = (radii[next] / r) * (radii[next] / r);
                let mut p = masses[next];
                for a in acc.iter_mut() {
                    *a += p;
                    p *= s;
                }
                next += 1;
            }
            band_lo[i] = next;
            out[i] += inner.iter().zip(&acc).map(|(c, a)| c * a).sum::<f64>();
        }

        // outward sources: U_k = Σ m_j (r / ρ_j)^{2 - α + 2k}
        let lift = 2.0 - self.alpha;
        let mut acc = vec![0.0; outer.len()];
        let mut next = n; // sources [next, n) are in the outer set
        let mut prev = radii[n - 1];
        let mut band_hi = vec![n; n];
        for i in (0..n).rev() {
            let r = radii[i];
            if r != prev {
                let ratio = r / prev;
                let q = ratio * ratio;
                let mut f = ratio.powf(lift);
                for a in acc.iter_mut() {
                    *a *= f;
                    f *= q;
                }
                prev = r;
            }
            let limit = r / eta;
            while next > 0 && radii[next - 1] > limit {
                let j = next - 1;
                let ratio = r / radii[j];
                let s = ratio * ratio;
                let mut p = masses[j] * ratio.powf(lift);
                for a in acc.iter_mut() {
                    *a += p;
                    p *= s;
                }
                next -= 1;
            }
            band_hi[i] = next;
            out[i] += outer.iter().zip(&acc).map(|(c, a)| c * a).sum::<f64>();
        }

        if let Some(table) = &self.table {
            let w = table.half_width();
            let logs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
            for i in 0..n {
                let li = logs[i];
                let mut near = 0.0;
                for j in band_lo[i]..band_hi[i] {
                    let x = (logs[j] - li).clamp(-w, w);
                    near += masses[j] * table.at_log_ratio(x);
                }
                out[i] += near;
            }
        }
    }

    /// Radial velocities `-α r^{α-1} (m₀ + Σ m_j ψ(ρ_j/r))` of every ring.
    pub fn velocities(&self, origin_mass: f64, radii: &[f64], masses: &[f64], out: &mut [f64]) {
        self.speeds(origin_mass, radii, masses, out);
        let a = self.alpha;
        for (v, &r) in out.iter_mut().zip(radii) {
            let scale = if a == 1.0 { 1.0 } else { a * r.powf(a - 1.0) };
            *v *= -scale;
        }
    }
}
