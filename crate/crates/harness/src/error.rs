use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("test set has no {0} configurations")]
    EmptyTestSet(&'static str),
    #[error("oracle limited to n <= 4 and l <= 10, got n = {n}, l = {l}")]
    TooLargeForOracle { n: usize, l: usize },
    #[error("invalid simulation world: {0}")]
    InvalidWorld(String),
    #[error("benchmark grid is empty")]
    EmptyGrid,
    #[error(transparent)]
    Model(#[from] ism_tree::Error),
}

impl From<HarnessError> for ism_tree::Error {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Model(inner) => inner,
            other => ism_tree::Error::InvalidParams(other.to_string()),
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
