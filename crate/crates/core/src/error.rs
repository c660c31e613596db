use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid system parameters: {0}")]
    InvalidParams(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("boundary contamination: {fraction:.3e} of the mass lies within 4h of the boundary")]
    BoundaryContamination { fraction: f64 },
    #[error("non-finite field value detected at t = {t}")]
    BlowUp { t: f64 },
    #[error("irregular sample spacing at index {index}: {spacing} vs {expected}")]
    IrregularSampling {
        index: usize,
        spacing: f64,
        expected: f64,
    },
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("checkpoint format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
