use thiserror::Error;

/// Errors raised by the Hilbert-space kernel and the protocol layers built on it.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("Fock cutoff {dim} too small for |alpha| = {alpha:.4}: need at least {required}")]
    Truncation { alpha: f64, dim: usize, required: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("unknown mode label `{0}`")]
    UnknownLabel(String),

    #[error("duplicate mode label `{0}`")]
    DuplicateLabel(String),

    #[error("invalid mode: {0}")]
    InvalidMode(String),

    #[error("state has zero norm: {0}")]
    Degenerate(String),

    #[error("measurement model mismatch: {0}")]
    ModelMismatch(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("{what} not converged: doubling the basis shifts a level by {shift_ghz:.3e} GHz")]
    Convergence { what: &'static str, shift_ghz: f64 },

    #[error("no dressed state with overlap >= 0.5 for {photons} photon(s) (best {overlap:.3})")]
    AmbiguousBranch { photons: usize, overlap: f64 },

    #[error("no success after {rounds} round(s)")]
    MaxRoundsExceeded { rounds: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
