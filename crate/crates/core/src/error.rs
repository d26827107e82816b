use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid filter: {0}")]
    InvalidFilter(String),
    #[error("filter coefficients do not sum to zero (order 0)")]
    OrderZero,
    #[error("every tested moment of the filter vanishes")]
    AllMomentsVanish,
    #[error("spectral density is singular at the zero frequency")]
    ZeroFrequency,
    #[error("quadrature did not reach tolerance: estimated relative error {0:.3e}")]
    QuadratureFailure(f64),
    #[error("circulant embedding has negative eigenvalue {0:.3e} after doubling")]
    EmbeddingNotPsd(f64),
    #[error("window support exceeds the grid footprint [0, 1]")]
    WindowOutOfSupport,
    #[error("path has {got} samples, {needed} needed")]
    PathTooShort { got: usize, needed: usize },
    #[error("quadratic variation is zero")]
    ZeroVariation,
    #[error("dilations must differ")]
    EqualDilations,
    #[error("grid of size {grid} is too coarse for subsampling level {nu}")]
    GridTooCoarse { grid: usize, nu: u32 },
    #[error("filter order {order} too low for index {hurst} (need {need})")]
    OrderTooLow { order: usize, hurst: f64, need: String },
    #[error("covariance series tail did not converge (relative tail {0:.3e})")]
    TailNotConverged(f64),
    #[error("asymptotic variance is negative ({0:.3e})")]
    NegativeVariance(f64),
    #[error("{failed} of {total} replicates failed")]
    TooManyFailures { failed: usize, total: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("malformed field file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
