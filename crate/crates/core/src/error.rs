use thiserror::Error;

/// Errors raised by the exact and sampled computations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// The requested joint table has more coordinates than the exact bound allows.
    #[error("joint distribution over {len} coordinates exceeds the exact bound of {bound}; sample instead")]
    LengthBound { len: usize, bound: usize },

    /// Incrementing a skeleton whose digits are all 2 would carry past the truncation.
    #[error("3-adic increment overflows a skeleton of {digits} digits; extend the skeleton first")]
    CarryOverflow { digits: usize },

    /// The requested triple does not occupy the three k-block slots of one (k+1)-block.
    #[error("triple at block offset {offset} is not aligned on a {k}-level block triple: {reason}")]
    BadAlignment { k: u32, offset: i64, reason: String },

    /// A source has a support word whose probability differs from the others.
    #[error("window law of length {len} is not uniform on its support (word {word})")]
    NonUniform { len: usize, word: String },

    /// Skeleton extension reached the hard digit limit without covering the window.
    #[error("skeleton truncation limit of {limit} digits reached before covering the window")]
    TruncationLimit { limit: usize },

    /// A law does not carry enough coordinates for the requested cylinders.
    #[error("law has words of length {have}, cylinders need length {need}")]
    WordTooShort { have: usize, need: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
