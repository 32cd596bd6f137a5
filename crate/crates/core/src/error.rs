use thiserror::Error;

use crate::model::ObjectId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("trajectory length mismatch: expected {expected}, got {actual} for {object}")]
    LengthMismatch { object: ObjectId, expected: usize, actual: usize },
    #[error("an ISM needs at least one neighbor besides its center")]
    EmptyNeighborhood,
    #[error("center object {0} is also listed as a neighbor")]
    CenterInNeighborhood(ObjectId),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("unknown object {0}")]
    UnknownObject(ObjectId),
    #[error("relation topology is not connected")]
    DisconnectedTopology,
    #[error("invalid topology: {0}")]
    InvalidTopology(String),
    #[error("ISM {0} shares no object with any remaining star")]
    NoAttachmentPoint(String),
    #[error("ISM {ism} has no vote entry for {object}")]
    MissingVoteEntry { ism: String, object: ObjectId },
    #[error("invalid recognition parameters: {0}")]
    InvalidParams(String),
    #[error("topology search needs an iteration budget above zero")]
    BudgetZero,
    #[error("invalid ISM tree: {0}")]
    InvalidTree(String),
    #[error("unsupported document version {0:?}, expected \"1\"")]
    UnsupportedVersion(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
