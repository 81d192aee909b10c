use thiserror::Error;

use crate::bases::SchemeId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("bit count {got} does not match expected {expected}")]
    BitLength { expected: usize, got: usize },
    #[error("unsupported QAM order {0}")]
    UnsupportedOrder(usize),
    #[error("OTSM requires N to be a power of two, got N = {0}")]
    OtsmNeedsPowerOfTwo(usize),
    #[error("AFDM basis requested without chirp parameters")]
    MissingAfdmParams,
    #[error("frame configurations differ")]
    ConfigMismatch,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("window {0} exceeds the crystallization region")]
    InvalidWindow(String),
    #[error("pulse parameter alpha must be non-negative, got {0}")]
    NegativeAlpha(f64),
    #[error("noise variance must be non-negative, got {0}")]
    NegativeNoiseVariance(f64),
    #[error("pilot index {index} outside the frame of dimension {dim}")]
    PilotIndex { index: usize, dim: usize },
    #[error("linear system is singular or not positive definite")]
    Singular,
    #[error("precondition violated for {scheme}: {reason}")]
    Precondition { scheme: SchemeId, reason: String },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
