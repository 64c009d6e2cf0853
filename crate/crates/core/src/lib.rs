//! Numerical laboratory for the radially symmetric aggregation equation
//! `u_t + div(u v) = 0`, `v = -∇K * u`, with power-law kernels `K(x) = |x|^α`.
//!
//! * [`kernels`]: the sphere-averaged kernels ψ and φ, their derivatives,
//!   and the adaptive quadrature behind them.
//! * [`measure`]: radial measures (origin atom plus rings) and the singular
//!   initial profiles.
//! * [`dynamics`]: the Lagrangian flow of rings under the induced radial
//!   velocity, with absorption into the origin.
//! * [`lab`]: diagnostics built on the above (lower-bound constants,
//!   collapse-time scaling, critical ratios, similarity profiles, and a
//!   Monte Carlo velocity oracle).

pub mod dynamics;
pub mod error;
pub mod kernels;
pub mod lab;
pub mod measure;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/kernels.md")]
    mod kernels {}
    #[doc = include_str!("../../../book/src/measures.md")]
    mod measures {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/diagnostics.md")]
    mod diagnostics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
