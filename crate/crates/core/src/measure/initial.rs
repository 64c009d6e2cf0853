//! The three singular initial profiles, each supported on `|x| ≤ 1/2`:
//!
//! * `log_critical_alpha1`: `u₀ ∝ |x|^{1-d} (-log|x|)^{-k}` with `α = 1`,
//!   `k ∈ ((d-1)/d, 1)`;
//! * `power_law`: `u₀ ∝ |x|^{-(d+α-2+ε)}`, `ε ∈ (0, 1)`;
//! * `log_critical_general`: `u₀ ∝ |x|^{-(d+α-2)} (-log|x|)^{-k}`,
//!   `k ∈ (1/p_s, 1)`.
//!
//! Every profile is scaled to unit total mass. Radial integrals of the
//! logarithmic profiles are taken in `s = -log ρ`, where the integrand
//! `e^{-cs} s^{-k}` is smooth.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{integrate, integrate_to_infinity, unit_sphere_area, KernelParams, QuadratureConfig};

/// Radius of the support of every initial profile.
pub const SUPPORT_RADIUS: f64 = 0.5;

/// A radial probability distribution that can be integrated over shells.
pub trait RadialProfile {
    /// Outer edge of the support.
    fn support_radius(&self) -> f64;

    /// `μ({a ≤ |x| ≤ b})`.
    fn mass_between(&self, a: f64, b: f64) -> Result<f64>;

    /// `∫_{a ≤ |x| ≤ b} |x| dμ`.
    fn moment_between(&self, a: f64, b: f64) -> Result<f64>;

    /// `μ(B_r)`.
    fn mass_in_ball(&self, r: f64) -> Result<f64> {
        self.mass_between(0.0, r.min(self.support_radius()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    LogCriticalAlpha1,
    PowerLaw,
    LogCriticalGeneral,
}

impl std::str::FromStr for InitialKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log_critical_alpha1" => Ok(Self::LogCriticalAlpha1),
            "power_law" => Ok(Self::PowerLaw),
            "log_critical_general" => Ok(Self::LogCriticalGeneral),
            other => Err(Error::domain(
                "data",
                format!("must be one of power_law, log_critical_alpha1, log_critical_general, got {other}"),
            )),
        }
    }
}

/// Which singular profile to build, with its shape parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialDataSpec {
    pub kind: InitialKind,
    pub d: usize,
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

impl InitialDataSpec {
    pub fn power_law(d: usize, alpha: f64, epsilon: f64) -> Result<Self> {
        let s = Self {
            kind: InitialKind::PowerLaw,
            d,
            alpha,
            k: None,
            epsilon: Some(epsilon),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn log_critical_alpha1(d: usize, k: f64) -> Result<Self> {
        let s = Self {
            kind: InitialKind::LogCriticalAlpha1,
            d,
            alpha: 1.0,
            k: Some(k),
            epsilon: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn log_critical_general(d: usize, alpha: f64, k: f64) -> Result<Self> {
        let s = Self {
            kind: InitialKind::LogCriticalGeneral,
            d,
            alpha,
            k: Some(k),
            epsilon: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn params(&self) -> Result<KernelParams> {
        KernelParams::attractive(self.d, self.alpha)
    }

    pub fn validate(&self) -> Result<()> {
        let params = self.params()?;
        let d = self.d as f64;
        match self.kind {
            InitialKind::PowerLaw => {
                let eps = self.epsilon.ok_or_else(|| Error::domain("epsilon", "is required for power_law data"))?;
                if !(eps > 0.0 && eps < 1.0) {
                    return Err(Error::domain("epsilon", format!("must lie in (0, 1), got {eps}")));
                }
                if !(self.alpha > 0.0) {
                    return Err(Error::domain("alpha", format!("must lie in (0, 2) for power_law data, got {}", self.alpha)));
                }
                // otherwise the mass near the origin is infinite
                if !(self.alpha + eps < 2.0) {
                    return Err(Error::domain(
                        "epsilon",
                        format!("must satisfy alpha + epsilon < 2 for a finite mass, got {}", self.alpha + eps),
                    ));
                }
            }
            InitialKind::LogCriticalAlpha1 => {
                if self.alpha != 1.0 {
                    return Err(Error::domain("alpha", format!("must equal 1 for log_critical_alpha1 data, got {}", self.alpha)));
                }
                let k = self.k.ok_or_else(|| Error::domain("k", "is required for logarithmic data"))?;
                let lo = (d - 1.0) / d;
                if !(k > lo && k < 1.0) {
                    return Err(Error::domain("k", format!("must lie in ((d−1)/d, 1) = ({lo}, 1), got {k}")));
                }
            }
            InitialKind::LogCriticalGeneral => {
                let k = self.k.ok_or_else(|| Error::domain("k", "is required for logarithmic data"))?;
                let lo = 1.0 / params.critical_exponent();
                if !(k > lo && k < 1.0) {
                    return Err(Error::domain("k", format!("must lie in (1/p_s, 1) = ({lo}, 1), got {k}")));
                }
            }
        }
        Ok(())
    }
}

/// A normalised initial density, the handle returned by [`make_initial_data`].
#[derive(Debug, Clone, PartialEq)]
pub struct InitialProfile {
    spec: InitialDataSpec,
    normalization: f64,
    critical_exponent: f64,
    // ∫₀^{1/2} of the radial profile before scaling
    radial_integral: f64,
}

fn internal_quadrature() -> QuadratureConfig {
    QuadratureConfig {
        abs_tol: 1e-300,
        rel_tol: 1e-12,
        max_subdivisions: 400,
        ..QuadratureConfig::default()
    }
}

/// Build the normalised radial density for `spec`.
pub fn make_initial_data(spec: &InitialDataSpec) -> Result<InitialProfile> {
    spec.validate()?;
    let params = spec.params()?;
    let mut profile = InitialProfile {
        spec: *spec,
        normalization: 1.0,
        critical_exponent: params.critical_exponent(),
        radial_integral: 1.0,
    };
    profile.radial_integral = profile.raw_integral(0, 0.0, SUPPORT_RADIUS)?;
    profile.normalization = 1.0 / (unit_sphere_area(spec.d)? * profile.radial_integral);
    Ok(profile)
}

impl InitialProfile {
    pub fn spec(&self) -> &InitialDataSpec {
        &self.spec
    }

    /// The constant `L` in `u₀(x) = L · profile(|x|)` giving unit mass.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// `p_s = d/(d + α - 2)`.
    pub fn critical_exponent(&self) -> f64 {
        self.critical_exponent
    }

    fn log_exponent(&self) -> f64 {
        self.spec.k.unwrap_or(0.0)
    }

    fn power(&self) -> f64 {
        // radial profile û(ρ) ∝ ρ^{power} [(-log ρ)^{-k}]
        1.0 - self.spec.alpha - self.spec.epsilon.unwrap_or(0.0)
    }

    /// The density `u₀` at `|x| = rho`.
    pub fn density(&self, rho: f64) -> f64 {
        if !(rho > 0.0) || rho > SUPPORT_RADIUS {
            return 0.0;
        }
        let d = self.spec.d as f64;
        let base = self.normalization * rho.powf(self.power() + 1.0 - d);
        match self.spec.kind {
            InitialKind::PowerLaw => base,
            _ => base * (-rho.ln()).powf(-self.log_exponent()),
        }
    }

    /// Mass per unit radius, `ω_d ρ^{d-1} u₀(ρ)`.
    pub fn radial_density(&self, rho: f64) -> f64 {
        if !(rho > 0.0) || rho > SUPPORT_RADIUS {
            return 0.0;
        }
        let base = rho.powf(self.power()) / self.radial_integral;
        match self.spec.kind {
            InitialKind::PowerLaw => base,
            _ => base * (-rho.ln()).powf(-self.log_exponent()),
        }
    }

    /// `∫_a^b ρ^j û(ρ) dρ` before normalisation, `0 ≤ a ≤ b ≤ 1/2`.
    fn raw_integral(&self, j: i32, a: f64, b: f64) -> Result<f64> {
        let a = a.clamp(0.0, SUPPORT_RADIUS);
        let b = b.clamp(0.0, SUPPORT_RADIUS);
        if b <= a {
            return Ok(0.0);
        }
        let exponent = self.power() + 1.0 + j as f64;
        match self.spec.kind {
            InitialKind::PowerLaw => Ok((b.powf(exponent) - a.powf(exponent)) / exponent),
            _ => {
                let k = self.log_exponent();
                let q = internal_quadrature();
                let f = |s: f64| (-exponent * s).exp() * s.powf(-k);
                let lo = -b.ln();
                let est = if a == 0.0 {
                    integrate_to_infinity(f, lo, &q)?
                } else {
                    integrate(f, lo, -a.ln(), &[], &q)?
                };
                Ok(est.value)
            }
        }
    }
}

impl RadialProfile for InitialProfile {
    fn support_radius(&self) -> f64 {
        SUPPORT_RADIUS
    }

    fn mass_between(&self, a: f64, b: f64) -> Result<f64> {
        if let InitialKind::PowerLaw = self.spec.kind {
            // (2r)^γ is the exact cumulative mass
            let g = self.power() + 1.0;
            let cdf = |r: f64| (2.0 * r.clamp(0.0, SUPPORT_RADIUS)).powf(g);
            return Ok(cdf(b) - cdf(a));
        }
        Ok(self.raw_integral(0, a, b)? / self.radial_integral)
    }

    fn moment_between(&self, a: f64, b: f64) -> Result<f64> {
        Ok(self.raw_integral(1, a, b)? / self.radial_integral)
    }
}

/// Uniform density on the ball of radius `radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformBall {
    pub d: usize,
    pub radius: f64,
}

impl RadialProfile for UniformBall {
    fn support_radius(&self) -> f64 {
        self.radius
    }

    fn mass_between(&self, a: f64, b: f64) -> Result<f64> {
        let di = self.d as i32;
        let c = |r: f64| (r.clamp(0.0, self.radius) / self.radius).powi(di);
        Ok(c(b) - c(a))
    }

    fn moment_between(&self, a: f64, b: f64) -> Result<f64> {
        let d = self.d as f64;
        let (a, b) = (a.clamp(0.0, self.radius), b.clamp(0.0, self.radius));
        Ok(d / (d + 1.0) * (b.powf(d + 1.0) - a.powf(d + 1.0)) / self.radius.powf(d))
    }
}
