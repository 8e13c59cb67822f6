use thiserror::Error;

/// Errors produced by the spatial entropy library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {field}: {left} vs {right}")]
    DimensionMismatch {
        field: &'static str,
        left: String,
        right: String,
    },
    #[error("non-finite value at data index {index}")]
    NonFiniteData { index: usize },
    #[error("invalid value range: vmin {vmin} must be below vmax {vmax}")]
    InvalidRange { vmin: f64, vmax: f64 },
    #[error("invalid bin count {0}: need at least 2 bins")]
    InvalidBinCount(usize),
    #[error("invalid image shape {height}x{width}x{channels} with {len} values")]
    InvalidShape {
        height: usize,
        width: usize,
        channels: usize,
        len: usize,
    },
    #[error("image too small: {height}x{width}, need at least {min}x{min}")]
    ImageTooSmall {
        height: usize,
        width: usize,
        min: usize,
    },
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("invalid neighbor weights: {0}")]
    InvalidWeights(String),
    #[error("invalid window configuration: {0}")]
    InvalidWindow(String),
    #[error("kernel family `{0}` is not differentiable")]
    NonDifferentiableKernel(&'static str),
    #[error("degenerate pmf: total kernel mass is zero")]
    DegeneratePmf,
    #[error("invalid noise schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid timestep {t}: schedule has {steps} steps")]
    InvalidTimestep { t: usize, steps: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
