use std::path::PathBuf;

use thiserror::Error;

use crate::game::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} index {index} out of range (expected < {bound})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        bound: usize,
    },

    #[error("invalid game:\n{0}")]
    InvalidGame(ValidationReport),

    #[error("failed to parse {path}: {message}")]
    Parse { path: String, message: String },

    #[error("[action {action}, state {state}] is not a recurrent state equilibrium")]
    NotAnRse { action: String, state: usize },

    #[error("inertia {value} for agent {agent} must lie strictly between 0 and 1")]
    InertiaOutOfRange { agent: usize, value: f64 },

    #[error("matrix is not row-stochastic: row {row} sums to {sum}")]
    NotStochastic { row: usize, sum: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("meta-chain needs {required} states, budget is {budget}")]
    BudgetExceeded { required: usize, budget: usize },

    #[error("absorption system could not be solved (residual {residual:e})")]
    SingularSystem { residual: f64 },

    #[error("potential table is not total: expected {expected} entries, found {found}")]
    PotentialNotTotal { expected: usize, found: usize },

    #[error("trajectory does not belong to this game: {0}")]
    TrajectoryMismatch(String),

    #[error("game identity mismatch: batch ran on {batch}, analysis describes {analysis}")]
    GameMismatch { batch: String, analysis: String },

    #[error("empty batch")]
    EmptyBatch,

    #[error("unknown fixture {0:?}")]
    UnknownFixture(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
