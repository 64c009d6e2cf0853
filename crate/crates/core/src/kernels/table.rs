//! Tabulated ψ on a band of ratios around ρ = 1.
//!
//! Nodes are uniform in `y = sign(x)·|x|^{1/2}` with `x = ln ρ`, which packs
//! them towards ρ = 1 where ψ is only Hölder continuous when `d + α < 3`.
//! Interpolation is cubic Lagrange on stencils that never straddle `y = 0`.

use super::{psi, KernelParams, QuadratureConfig};
use crate::error::Result;

#[derive(Debug, Clone)]
pub struct PsiTable {
    half_width: f64,
    step: f64,
    inv_step: f64,
    half_nodes: usize,
    values: Vec<f64>,
}

impl PsiTable {
    /// Tabulate ψ for `|ln ρ| ≤ half_width` with `2·half_nodes + 1` nodes.
    pub fn new(params: &KernelParams, half_width: f64, half_nodes: usize) -> Result<Self> {
        assert!(half_width > 0.0 && half_nodes >= 4);
        let q = QuadratureConfig::tight();
        let step = half_width.sqrt() / half_nodes as f64;
        let values = (0..=2 * half_nodes)
            .map(|i| {
                let y = (i as f64 - half_nodes as f64) * step;
                psi((y.signum() * y * y).exp(), params, &q)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            half_width,
            step,
            inv_step: 1.0 / step,
            half_nodes,
            values,
        })
    }

    /// Largest |ln ρ| covered.
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// ψ(e^x) for `|x| ≤ half_width`.
    #[inline]
    pub fn at_log_ratio(&self, x: f64) -> f64 {
        debug_assert!(x.abs() <= self.half_width * (1.0 + 1e-12));
        let s = x.abs().sqrt() * self.inv_step;
        let n = self.half_nodes;
        let j0 = (s.floor() as usize).saturating_sub(1).min(n - 3);
        let u = s - j0 as f64;
        let w0 = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0;
        let w1 = u * (u - 2.0) * (u - 3.0) / 2.0;
        let w2 = -u * (u - 1.0) * (u - 3.0) / 2.0;
        let w3 = u * (u - 1.0) * (u - 2.0) / 6.0;
        let v = &self.values;
        if x >= 0.0 {
            let b = n + j0;
            w0 * v[b] + w1 * v[b + 1] + w2 * v[b + 2] + w3 * v[b + 3]
        } else {
            let b = n - j0;
            w0 * v[b] + w1 * v[b - 1] + w2 * v[b - 2] + w3 * v[b - 3]
        }
    }

    /// ψ(ρ) for ρ inside the band.
    pub fn at(&self, rho: f64) -> f64 {
        self.at_log_ratio(rho.ln())
    }

    pub fn node_spacing(&self) -> f64 {
        self.step
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::psi_closed_form_d3;

    #[test]
    fn reproduces_closed_form_in_three_dimensions() {
        let p = KernelParams::new(3, 1.0).unwrap();
        let t = PsiTable::new(&p, 2f64.ln(), 512).unwrap();
        assert!((t.at(1.0) - 2.0 / 3.0).abs() < 1e-12);
        let mut worst: f64 = 0.0;
        for i in 0..=1000 {
            let rho = 0.5 + 1.5 * i as f64 / 1000.0;
            worst = worst.max((t.at(rho) - psi_closed_form_d3(rho)).abs());
        }
        assert!(worst < 1e-9, "{worst}");
    }

    #[test]
    fn accurate_for_rough_kernels_away_from_one() {
        let p = KernelParams::new(2, 0.5).unwrap();
        let t = PsiTable::new(&p, 2f64.ln(), 2048).unwrap();
        let q = QuadratureConfig::tight();
        for &rho in &[0.5, 0.7, 0.9, 0.99, 1.01, 1.2, 1.9] {
            let exact = psi(rho, &p, &q).unwrap();
            assert!((t.at(rho) - exact).abs() < 1e-8, "ρ={rho}");
        }
    }
}
