use thiserror::Error;

/// Errors raised by the curve, energy, and diagnostic routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MengerError {
    #[error("degenerate triple: points {0} and {1} coincide")]
    DegenerateTriple(usize, usize),

    #[error("self-intersection: vertices {0} and {1} coincide")]
    SelfIntersection(usize, usize),

    #[error("curve is not arc-length parametrized (edge ratio {0:.3e})")]
    NotArclength(f64),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("bad preset: {0}")]
    BadPreset(String),

    #[error("bad parameters: {0}")]
    BadParams(String),

    #[error("parameters outside the sub-critical range: {0}")]
    BadRegime(String),

    #[error("length constraint gradient vanishes")]
    DegenerateConstraint,

    #[error("seminorm vanishes; ratio undefined")]
    ZeroSeminorm,

    #[error("step failure after {backtracks} backtracks (tau = {tau:.3e}, energy = {energy:.6e})")]
    StepFailure {
        tau: f64,
        backtracks: usize,
        energy: f64,
    },

    #[error("quadrature did not converge: relative change {0:.3e} under mesh doubling")]
    QuadratureNotConverged(f64),

    #[error("io: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

impl MengerError {
    /// Numeric failures (as opposed to validation errors).
    pub fn is_numeric_failure(&self) -> bool {
        matches!(
            self,
            MengerError::StepFailure { .. } | MengerError::QuadratureNotConverged(_)
        )
    }
}

impl From<std::io::Error> for MengerError {
    fn from(e: std::io::Error) -> Self {
        MengerError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for MengerError {
    fn from(e: serde_json::Error) -> Self {
        MengerError::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, MengerError>;
