use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("truncation tail {tail:.3e} exceeds tolerance {tolerance:.3e}")]
    TailTooLarge { tail: f64, tolerance: f64 },

    #[error("weighted norm with m = {m} is not finite: {reason}")]
    UnboundedWeightedNorm { m: f64, reason: String },

    #[error("field has nonzero mean {mean:.3e}")]
    NonzeroMean { mean: f64 },

    #[error("field is not divergence-free (relative divergence {relative:.3e})")]
    NotDivergenceFree { relative: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("CFL condition violated at t = {t}: admissible step {dt:.3e}")]
    Cfl { t: f64, dt: f64 },

    #[error("solver blow-up at t = {t}: norm {norm:.3e}")]
    BlowUp { t: f64, norm: f64 },

    #[error("linear solve failed for mode {mode}: residual {residual:.3e}")]
    Solve { mode: usize, residual: f64 },

    #[error("snapshot format: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
