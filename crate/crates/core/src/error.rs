use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model specification: {0}")]
    InvalidSpec(String),

    #[error("excitation sector {0} is empty")]
    EmptySector(i64),

    #[error("ground state of sector {sector} is degenerate (gap {gap:e}); the choice of ground vector is ambiguous")]
    DegenerateGround { sector: u32, gap: f64 },

    #[error("eigensolver did not converge after {iterations} iterations (best residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("sector too large: {nonzeros} nonzeros exceeds the capacity guard of {limit}")]
    CapacityExceeded { nonzeros: usize, limit: usize },

    #[error("missing energy for sector n_pol = {0}")]
    MissingSector(u32),

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("visibility undefined for an all-zero momentum distribution")]
    UndefinedVisibility,

    #[error("extrapolation needs at least 3 distinct sizes, got {0}")]
    TooFewPoints(usize),

    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("correlation measurement was not enabled for this state")]
    MeasurementDisabled,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{key}: backends disagree ({primary} vs {other})")]
    CrossCheck { key: String, primary: f64, other: f64 },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
