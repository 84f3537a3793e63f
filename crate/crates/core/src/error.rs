use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BellError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "settings do not match the functional: expected {expected_alice}x{expected_bob}, \
         got {alice}x{bob}"
    )]
    DimensionMismatch {
        expected_alice: usize,
        expected_bob: usize,
        alice: usize,
        bob: usize,
    },

    #[error("grid of {points} points exceeds the limit of {limit}")]
    GridTooLarge { points: u128, limit: u128 },
}

pub type Result<T> = std::result::Result<T, BellError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(BellError::Domain(msg.into()))
}
