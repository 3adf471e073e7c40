use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("operator is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("operator is not positive semidefinite (eigenvalue {eigenvalue:e}, leading {leading:e})")]
    NotPositive { eigenvalue: f64, leading: f64 },

    #[error("not stationary: spectral radius {radius} >= 1")]
    NotStationary { radius: f64 },

    #[error("cutoff {requested} exceeds the number of positive eigenvalues; largest admissible cutoff is {max_admissible}")]
    CutoffTooLarge { requested: usize, max_admissible: usize },

    #[error("not identifiable: {0}")]
    NotIdentifiable(String),

    #[error("all kernel weights vanish (bandwidth {bandwidth:e}, nearest distance {nearest:e})")]
    ZeroWeights { bandwidth: f64, nearest: f64 },

    #[error("data error at row {row}: {message}")]
    Data { row: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
