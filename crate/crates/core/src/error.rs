use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("time must be non-negative, got t = {0}")]
    NegativeTime(f64),

    #[error("modulation depth y = {0} is outside [0, 1); the Fourier series does not exist")]
    ModulationOutOfRange(f64),

    #[error("|kappa+|^2 = {plus} < |kappa-|^2 = {minus}; mirror the configuration first")]
    WeakForwardCoupling { plus: f64, minus: f64 },

    #[error("quadrature for n = {n}, y = {y} did not converge after {evaluations} evaluations")]
    QuadratureNotConverged { n: u32, y: f64, evaluations: usize },

    #[error("degenerate propagation modes (d = 0) at wavenumber q = {q}; the confluent limit is not supported")]
    DegenerateModes { q: f64 },

    #[error("length mismatch: expected {expected} samples, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("non-finite value in {what} at step {step} (t = {time})")]
    NonFinite { what: &'static str, step: usize, time: f64 },

    #[error("stability limit exceeded: {0}")]
    Unstable(String),

    #[error("degenerate regression: {0}")]
    DegenerateRegression(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
