use thiserror::Error;

/// Errors produced by the shape, model, and pipeline operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate contour: {0}")]
    DegenerateContour(String),

    #[error("coincident samples at grid index {index} (|velocity| < 1e-10)")]
    CoincidentSamples { index: usize },

    #[error("grid size mismatch: expected {expected}, got {got}")]
    GridMismatch { expected: usize, got: usize },

    #[error("antipodal shapes{}", frame.map(|f| format!(" at frame {f}")).unwrap_or_default())]
    AntipodalShapes { frame: Option<usize> },

    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("degenerate regressors (rank-deficient design matrix)")]
    DegenerateRegressors,

    #[error("covariance matrix is not positive semidefinite (min eigenvalue {min_eig})")]
    NotPsd { min_eig: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("requested dimension {requested} exceeds pooled rank {rank}")]
    RankExceeded { requested: usize, rank: usize },

    #[error(
        "optimizer did not converge after {iterations} iterations (gradient norm {grad_norm:e}); last iterate {last:?}"
    )]
    NonConvergence {
        iterations: usize,
        grad_norm: f64,
        last: Vec<f64>,
    },

    #[error("singular conditional correlation matrix at step {step}")]
    SingularCorrelation { step: usize },

    #[error("training data contains a single class")]
    SingleClass,

    #[error("class {class} has {members} members, fewer than {folds} folds")]
    ClassTooSmall {
        class: usize,
        members: usize,
        folds: usize,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<V> = std::result::Result<V, Error>;
