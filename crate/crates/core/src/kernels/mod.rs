//! Sphere-averaged power-law kernels.
//!
//! For `K(x) = |x|^α` and a radially symmetric measure, the gradient of the
//! interaction potential at `x ≠ 0` is `α|x|^{α-1} ∫ ψ(ρ/|x|) dμ̂(ρ)` along
//! `x/|x|`, where
//!
//! ```text
//! ψ(ρ) = (ω_{d-1}/ω_d) ∫₀^π (1 - ρ cos θ) sin^{d-2}θ A(ρ,θ)^{α-2} dθ,
//! A(ρ,θ) = (1 + ρ² - 2ρ cos θ)^{1/2}.
//! ```
//!
//! For `α = 1` the same information is carried by `φ(r) = ψ(1/r)`, which is
//! the speed a unit-mass ring of radius 1 induces at radius `r`.

mod quadrature;
mod series;
mod table;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use quadrature::{integrate, integrate_to_infinity, Estimate, QuadratureConfig};
pub use series::PsiExpansion;
pub use table::PsiTable;

/// Dimension and exponent of the power-law kernel `K(x) = |x|^α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct KernelParams {
    d: usize,
    alpha: f64,
}

#[derive(Deserialize)]
struct RawParams {
    d: usize,
    alpha: f64,
}

impl TryFrom<RawParams> for KernelParams {
    type Error = Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        KernelParams::new(raw.d, raw.alpha)
    }
}

impl KernelParams {
    /// Requires `d ≥ 2` and `α > 2 - d`, the range where the sphere average
    /// of the kernel gradient is integrable.
    pub fn new(d: usize, alpha: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::domain("d", format!("must be at least 2, got {d}")));
        }
        let lower = 2.0 - d as f64;
        if !alpha.is_finite() || alpha <= lower {
            return Err(Error::domain(
                "alpha",
                format!("must exceed 2−d = {lower} for d = {d}, got {alpha}"),
            ));
        }
        Ok(Self { d, alpha })
    }

    /// Parameters for attractive dynamics, `α ∈ (0, 2)`.
    pub fn attractive(d: usize, alpha: f64) -> Result<Self> {
        let p = Self::new(d, alpha)?;
        p.require_attractive()?;
        Ok(p)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn require_attractive(&self) -> Result<()> {
        if self.alpha > 0.0 && self.alpha < 2.0 {
            Ok(())
        } else {
            Err(Error::domain(
                "alpha",
                format!("must lie in (0, 2) for attractive dynamics, got {}", self.alpha),
            ))
        }
    }

    /// `α < 2` on top of `α > 2 - d`, where ψ decays to zero.
    pub fn require_sub_quadratic(&self) -> Result<()> {
        if self.alpha < 2.0 {
            return Ok(());
        }
        let lower = 2.0 - self.d as f64;
        Err(Error::domain(
            "alpha",
            format!("must lie in (2−d, 2) = ({lower}, 2) for d = {}, got {}", self.d, self.alpha),
        ))
    }

    /// Critical Lebesgue exponent `p_s = d / (d + α - 2)`.
    pub fn critical_exponent(&self) -> f64 {
        self.d as f64 / (self.d as f64 + self.alpha - 2.0)
    }

    pub fn is_d3_linear(&self) -> bool {
        self.d == 3 && self.alpha == 1.0
    }
}

/// Surface area `ω_d = 2π^{d/2}/Γ(d/2)` of the unit sphere in `ℝ^d`,
/// by the exact recursion `ω_d = 2π ω_{d-2} / (d - 2)`.
pub fn unit_sphere_area(d: usize) -> Result<f64> {
    if d < 1 {
        return Err(Error::domain("d", "must be at least 1"));
    }
    let mut w = if d % 2 == 1 { 2.0 } else { 2.0 * PI };
    let mut k = if d % 2 == 1 { 1 } else { 2 };
    while k < d {
        k += 2;
        w *= 2.0 * PI / (k - 2) as f64;
    }
    Ok(w)
}

/// `ω_{d-1} / ω_d`, the normalisation of the θ-integrals.
pub(crate) fn angular_weight(d: usize) -> f64 {
    unit_sphere_area(d - 1).unwrap() / unit_sphere_area(d).unwrap()
}

/// `lim_{ρ→∞} ψ(ρ) ρ^{2-α} = (d + α - 2)/d`.
pub fn asymptotic_constant(params: &KernelParams) -> f64 {
    (params.d as f64 + params.alpha - 2.0) / params.d as f64
}

/// `A(ρ, θ)` written as `((1-ρ)² + 4ρ sin²(θ/2))^{1/2}` to keep relative
/// accuracy where it vanishes.
#[inline]
fn distance(rho: f64, half_sin_sq: f64) -> f64 {
    let g = 1.0 - rho;
    (g * g + 4.0 * rho * half_sin_sq).sqrt()
}

#[inline]
fn half_sin_sq(theta: f64) -> f64 {
    let s = (0.5 * theta).sin();
    s * s
}

/// Cut points that expose the `A → 0` corner at `θ ≈ |1 - ρ|`.
fn corner_breaks(rho: f64) -> Vec<f64> {
    let gap = (1.0 - rho).abs();
    if gap < 1.0 {
        [gap, 4.0 * gap].into_iter().filter(|&t| t > 0.0 && t < PI).collect()
    } else {
        Vec::new()
    }
}

fn check_radius(name: &'static str, x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(name, format!("must be a finite nonnegative number, got {x}")))
    }
}

/// The sphere-averaged kernel ψ(ρ).
pub fn psi(rho: f64, params: &KernelParams, q: &QuadratureConfig) -> Result<f64> {
    check_radius("rho", rho)?;
    if rho == 0.0 {
        return Ok(1.0);
    }
    let d = params.d;
    let alpha = params.alpha;
    if rho > q.asymptotic_switch {
        return Ok(asymptotic_constant(params) * rho.powf(alpha - 2.0));
    }
    let w = angular_weight(d);
    let est = if rho <= 2.0 {
        integrate(
            |t| {
                let h = half_sin_sq(t);
                let a = distance(rho, h);
                let lever = (1.0 - rho) + 2.0 * rho * h;
                lever * t.sin().powi(d as i32 - 2) * a.powf(alpha - 2.0)
            },
            0.0,
            PI,
            &corner_breaks(rho),
            q,
        )?
    } else {
        // Integrated-by-parts form; avoids the O(ρ) cancellation in 1 - ρ cos θ.
        let c = (alpha - 2.0) / (d as f64 - 1.0);
        integrate(
            |t| {
                let a = distance(rho, half_sin_sq(t));
                let s = t.sin();
                let sp = s.powi(d as i32 - 2);
                sp * a.powf(alpha - 2.0) + c * sp * s * s * rho * rho * a.powf(alpha - 4.0)
            },
            0.0,
            PI,
            &[],
            q,
        )?
    };
    Ok(w * est.value)
}

/// ψ'(ρ), negative for ρ > 0 whenever α < 2.
///
/// At ρ = 1 the integrand behaves like θ^{d+α-4}; it is refused when
/// `d + α ≤ 3`.
pub fn psi_prime(rho: f64, params: &KernelParams, q: &QuadratureConfig) -> Result<f64> {
    check_radius("rho", rho)?;
    let d = params.d;
    let alpha = params.alpha;
    if rho == 1.0 && d as f64 + alpha <= 3.0 {
        return Err(Error::domain(
            "rho",
            format!("must differ from 1 when d + α ≤ 3 (d = {d}, α = {alpha})"),
        ));
    }
    if rho == 0.0 {
        return Ok(0.0);
    }
    if rho > q.asymptotic_switch {
        return Ok((alpha - 2.0) * asymptotic_constant(params) * rho.powf(alpha - 3.0));
    }
    let df = d as f64;
    let pre = angular_weight(d) * (alpha - 2.0) * (df + alpha - 2.0) / (df - 1.0);
    let est = integrate(
        |t| {
            let a = distance(rho, half_sin_sq(t));
            rho * t.sin().powi(d as i32) * a.powf(alpha - 4.0)
        },
        0.0,
        PI,
        &corner_breaks(rho),
        q,
    )?;
    Ok(pre * est.value)
}

/// φ(r) for the `α = 1` kernel; equals ψ(1/r) for r > 0.
pub fn phi(r: f64, d: usize, q: &QuadratureConfig) -> Result<f64> {
    check_radius("r", r)?;
    if d < 2 {
        return Err(Error::domain("d", format!("must be at least 2, got {d}")));
    }
    let est = integrate(
        |t| {
            let h = half_sin_sq(t);
            let a = distance(r, h);
            ((r - 1.0) + 2.0 * h) * t.sin().powi(d as i32 - 2) / a
        },
        0.0,
        PI,
        &corner_breaks(r),
        q,
    )?;
    Ok(angular_weight(d) * est.value)
}

/// Order of a φ derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DerivativeOrder {
    First,
    Second,
}

/// φ'(r) or φ''(r).
pub fn phi_derivative(r: f64, d: usize, order: DerivativeOrder, q: &QuadratureConfig) -> Result<f64> {
    check_radius("r", r)?;
    if d < 2 {
        return Err(Error::domain("d", format!("must be at least 2, got {d}")));
    }
    let w = angular_weight(d);
    let di = d as i32;
    match order {
        DerivativeOrder::First => {
            if d == 2 && r == 1.0 {
                return Err(Error::domain("r", "φ' diverges at r = 1 when d = 2"));
            }
            let est = integrate(
                |t| {
                    let a = distance(r, half_sin_sq(t));
                    t.sin().powi(di) / (a * a * a)
                },
                0.0,
                PI,
                &corner_breaks(r),
                q,
            )?;
            Ok(w * est.value)
        }
        DerivativeOrder::Second => {
            if r == 0.0 {
                return Err(Error::domain("r", "φ'' is evaluated only for r > 0"));
            }
            if d <= 3 && r == 1.0 {
                return Err(Error::domain("r", format!("φ'' is undefined at r = 1 when d = {d}")));
            }
            let est = integrate(
                |t| {
                    let h = half_sin_sq(t);
                    let a = distance(r, h);
                    let a2 = a * a;
                    t.sin().powi(di) * ((r - 1.0) + 2.0 * h) / (a2 * a2 * a)
                },
                0.0,
                PI,
                &corner_breaks(r),
                q,
            )?;
            Ok(-3.0 * w * est.value)
        }
    }
}

/// Exact φ in three dimensions: `2r/3` on `[0, 1]`, `1 - 1/(3r²)` beyond.
pub fn phi_closed_form_d3(r: f64) -> f64 {
    if r <= 1.0 {
        2.0 * r / 3.0
    } else {
        1.0 - 1.0 / (3.0 * r * r)
    }
}

/// ψ for `d = 3`, `α = 1`, from the closed form of φ.
pub fn psi_closed_form_d3(rho: f64) -> f64 {
    if rho <= 1.0 {
        1.0 - rho * rho / 3.0
    } else {
        2.0 / (3.0 * rho)
    }
}

/// `∫₀^π sin^n θ dθ` by adaptive quadrature.
pub fn sine_power_integral(n: usize, q: &QuadratureConfig) -> Result<f64> {
    Ok(integrate(|t| t.sin().powi(n as i32), 0.0, PI, &[0.5 * PI], q)?.value)
}
