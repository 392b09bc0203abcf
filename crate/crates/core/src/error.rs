use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },

    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("kernel is singular at x = y")]
    SingularEvaluation,

    #[error("norm extension mismatch: {0}")]
    ExtensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate clustering: {0}")]
    DegenerateClustering(String),

    #[error("cluster trees have different depths ({row} vs {col})")]
    TreeDepthMismatch { row: usize, col: usize },

    #[error("block ({row}, {col}) is not covered by the plan")]
    BlockNotInPlan { row: usize, col: usize },

    #[error("unknown cluster {0}")]
    UnknownCluster(usize),

    #[error("dense matrix of {n}x{n} needs {needed_mb} MB, budget is {budget_mb} MB")]
    BudgetExceeded {
        n: usize,
        needed_mb: u64,
        budget_mb: u64,
    },

    #[error("sample count must be positive")]
    EmptySample,

    #[error("fit is ill-conditioned: {0}")]
    IllConditioned(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialisation error: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}
