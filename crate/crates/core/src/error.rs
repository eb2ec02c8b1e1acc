use thiserror::Error;

pub type Result<T> = std::result::Result<T, JpaError>;

/// Everything that can go wrong in the solvers.
///
/// Variants split into two families: input problems (`Domain`, `Validation`,
/// `Window`, `Unattainable`) and numerical failures (`NumericalAnomaly`,
/// `Consistency`, `Pole`, `Divergence`, `NonConvergence`). The CLI maps the
/// first family to exit code 2 and the second to exit code 3.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum JpaError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid {field}: {reason}")]
    Validation { field: &'static str, reason: String },

    #[error("measurement window error: {0}")]
    Window(String),

    #[error("target unattainable: {0}")]
    Unattainable(String),

    #[error("numerical anomaly: {0}")]
    NumericalAnomaly(String),

    #[error("inconsistent photon number: expected {expected}, pump amplitude gives {got}")]
    Consistency { expected: f64, got: f64 },

    #[error("gain pole reached (|denominator| = {denominator:e}): drive at or above the oscillation threshold")]
    Pole { denominator: f64 },

    #[error("envelope diverged at tau = {tau}")]
    Divergence { tau: f64 },

    #[error("{what} did not converge after {iterations} iterations (last iterate {last:?})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        last: Vec<f64>,
    },

    #[error("at omega_rel = {omega_rel}, r = {r}: {source}")]
    AtCell {
        omega_rel: f64,
        r: f64,
        #[source]
        source: Box<JpaError>,
    },
}

impl JpaError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        JpaError::Domain(msg.into())
    }

    pub(crate) fn validation(field: &'static str, reason: impl Into<String>) -> Self {
        JpaError::Validation {
            field,
            reason: reason.into(),
        }
    }

    pub fn at_cell(self, omega_rel: f64, r: f64) -> Self {
        JpaError::AtCell {
            omega_rel,
            r,
            source: Box::new(self),
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            JpaError::NumericalAnomaly(_)
            | JpaError::Consistency { .. }
            | JpaError::Pole { .. }
            | JpaError::Divergence { .. }
            | JpaError::NonConvergence { .. } => true,
            JpaError::AtCell { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
