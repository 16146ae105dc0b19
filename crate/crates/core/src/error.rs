use thiserror::Error;

/// Errors raised by the solver, the analysis routines and the run harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid resolution {0}: must be even and at least 4")]
    InvalidGrid(usize),

    #[error("grid mismatch: n = {left} vs n = {right}")]
    GridMismatch { left: usize, right: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed field file: {0}")]
    MalformedFieldFile(String),

    /// The inner fixed-point iteration failed to contract. Almost always
    /// means the timestep is too large for the data.
    #[error(
        "fixed-point iteration did not converge after {iterations} iterations \
         (relative H1 increment {residual:e}); reduce k"
    )]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("one-step restriction violated: a*k = {ak} exceeds 2^(1/3) - 1")]
    RestrictionViolated { ak: f64 },

    #[error("infeasible: `{tag}` fails for every k > 0 (slack {slack:e})")]
    Infeasible { tag: &'static str, slack: f64 },

    #[error("t = {t} is at or beyond the blow-up time {blowup}")]
    BlowUp { t: f64, blowup: f64 },

    #[error("infeasible configuration: {0}")]
    InfeasibleConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
