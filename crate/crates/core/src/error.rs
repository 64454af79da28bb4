use thiserror::Error;

use crate::lp::LpError;

/// Errors raised by the model layer: malformed instances and invalid
/// cluster/user references.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("cluster must contain at least one cell")]
    EmptyCluster,
    #[error("cell {cell} out of range (instance has {cells} cells)")]
    CellOutOfRange { cell: usize, cells: usize },
    #[error("cell {cell} is not a member of cluster {cluster:#b}")]
    CellNotInCluster { cell: usize, cluster: u64 },
    #[error("user {user} is not served by cell {cell}")]
    UserNotInCell { user: usize, cell: usize },
    #[error("columns belong to different clusters")]
    MixedClusters,
    #[error("total duration must be positive")]
    ZeroDuration,
    #[error("unsupported instance format {0:?}")]
    Format(String),
}

/// Top-level error type for the solver procedures.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("network has {cells} cells, exact pricing is limited to {limit}")]
    TooManyCells { cells: usize, limit: usize },
    #[error("problem too large for brute force: {0} columns")]
    TooLarge(u128),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("internal fault: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
