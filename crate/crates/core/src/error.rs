use thiserror::Error;

use crate::game::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid game structure: {0}")]
    InvalidGame(ValidationReport),

    #[error("unknown history {0:?}")]
    UnknownHistory(Vec<u32>),

    #[error("history {0:?} is maximal and has no moves")]
    MaximalHistory(Vec<u32>),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for {len} entries")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("non-finite value {0}")]
    NonFinite(f64),

    #[error("lower bound exceeds upper bound at observable {index}: {lower} > {upper}")]
    BoundsCrossed { index: usize, lower: f64, upper: f64 },

    #[error("risk parameter {0} outside the supported range")]
    RiskOutOfRange(f64),

    #[error("need at least two arms, got {0}")]
    TooFewArms(usize),

    #[error("best arm is not unique: arms {0} and {1} tie at {2}")]
    NotUnique(usize, usize, f64),

    #[error("theta {theta} outside bracket [{lo}, {hi}]")]
    ThetaOutOfBracket { theta: f64, lo: f64, hi: f64 },

    #[error("proof-set enumeration would produce about {estimate:.3e} sets (limit {limit})")]
    TooManyProofSets { estimate: f64, limit: usize },

    #[error("linear program failed: {0}")]
    Lp(String),

    #[error("budget of {0} rounds exhausted")]
    BudgetExhausted(u64),

    #[error("run already stopped")]
    AlreadyStopped,

    #[error("empty set has no span")]
    EmptySpan,

    #[error("invalid noise model: {0}")]
    InvalidNoise(String),

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
