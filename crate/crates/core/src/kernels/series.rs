//! Power-series representations of ψ away from ρ = 1.
//!
//! With `λ = (2 - α)/2` the Gegenbauer generating function gives
//! `|e₁ - ρy|^{α-2} = Σ Cₙ^λ(y₁) ρⁿ` for ρ < 1, so
//!
//! ```text
//! ψ(ρ) = Σ_k a_k ρ^{2k},            a_k = ⟨C_{2k}⟩ - ⟨y₁ C_{2k-1}⟩,   ρ < 1
//! ψ(ρ) = ρ^{α-2} Σ_k b_k ρ^{-2k},   b_k = ⟨C_{2k}⟩ - ⟨y₁ C_{2k+1}⟩,   ρ > 1
//! ```
//!
//! where ⟨·⟩ is the uniform average over the unit sphere. Odd powers vanish
//! by the symmetry `y → -y`. Both series converge geometrically once ρ (or
//! 1/ρ) is bounded away from 1.

use std::f64::consts::PI;

use super::{angular_weight, asymptotic_constant, integrate, KernelParams, QuadratureConfig};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct PsiExpansion {
    alpha: f64,
    inner: Vec<f64>,
    outer: Vec<f64>,
}

fn gegenbauer(n: usize, lambda: f64, t: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 2.0 * lambda * t;
    for m in 2..=n {
        let mf = m as f64;
        let next = (2.0 * t * (mf + lambda - 1.0) * cur - (mf + 2.0 * lambda - 2.0) * prev) / mf;
        prev = cur;
        cur = next;
    }
    cur
}

impl PsiExpansion {
    /// Coefficients `a_0..a_terms` and `b_0..b_terms`. Requires α < 2.
    pub fn new(params: &KernelParams, terms: usize) -> Result<Self> {
        let d = params.d();
        let alpha = params.alpha();
        let lambda = (2.0 - alpha) / 2.0;
        let w = angular_weight(d);
        let q = QuadratureConfig {
            abs_tol: 1e-13,
            rel_tol: 1e-13,
            max_subdivisions: 400,
            ..QuadratureConfig::default()
        };
        let sphere_avg = |n: usize, tilt: bool| -> Result<f64> {
            let est = integrate(
                |t| {
                    let c = t.cos();
                    let g = gegenbauer(n, lambda, c) * t.sin().powi(d as i32 - 2);
                    if tilt {
                        c * g
                    } else {
                        g
                    }
                },
                0.0,
                PI,
                &[0.25 * PI, 0.5 * PI, 0.75 * PI],
                &q,
            )?;
            Ok(w * est.value)
        };
        let mut inner = Vec::with_capacity(terms + 1);
        let mut outer = Vec::with_capacity(terms + 1);
        for k in 0..=terms {
            let even = sphere_avg(2 * k, false)?;
            let below = if k == 0 { 0.0 } else { sphere_avg(2 * k - 1, true)? };
            let above = sphere_avg(2 * k + 1, true)?;
            inner.push(even - below);
            outer.push(even - above);
        }
        inner[0] = 1.0;
        outer[0] = asymptotic_constant(params);
        Ok(Self { alpha, inner, outer })
    }

    /// The exact (terminating) expansion for `d = 3`, `α = 1`:
    /// `ψ = 1 - ρ²/3` inside, `ψ = (2/3) ρ^{-1}` outside.
    pub fn closed_form_d3() -> Self {
        Self {
            alpha: 1.0,
            inner: vec![1.0, -1.0 / 3.0],
            outer: vec![2.0 / 3.0],
        }
    }

    pub fn inner_coefficients(&self) -> &[f64] {
        &self.inner
    }

    pub fn outer_coefficients(&self) -> &[f64] {
        &self.outer
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Series value for ρ < 1.
    pub fn inner_value(&self, rho: f64) -> f64 {
        let x = rho * rho;
        self.inner.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Series value for ρ > 1.
    pub fn outer_value(&self, rho: f64) -> f64 {
        let x = 1.0 / (rho * rho);
        rho.powf(self.alpha - 2.0) * self.outer.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }
}
