use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside the range where the operation is defined.
    #[error("{param} {message}")]
    Domain {
        param: &'static str,
        message: String,
    },

    /// Adaptive quadrature ran out of subdivisions before meeting its tolerance.
    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error_bound:e} after {subdivisions} subdivisions")]
    Quadrature {
        estimate: f64,
        error_bound: f64,
        subdivisions: usize,
    },

    /// The measure carries an atom, so no Lebesgue density (and no L^p norm) exists.
    #[error("density does not exist: measure has an atom of mass {origin_mass:e} at the origin")]
    NoDensity { origin_mass: f64 },

    /// The ODE step size collapsed below the representable resolution.
    #[error("step size underflow at t = {time:e} (h = {step:e})")]
    StepUnderflow { time: f64, step: f64 },

    /// A linear system in a diagnostic was singular.
    #[error("singular system: {0}")]
    Singular(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    /// A numerical witness contradicted what it is meant to certify.
    #[error("diagnostic failed: {0}")]
    Diagnostic(String),
}

impl Error {
    pub(crate) fn domain(param: &'static str, message: impl Into<String>) -> Self {
        Error::Domain {
            param,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
