use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument {0} outside the supported range |x| <= 50")]
    Domain(f64),

    #[error("broken cycle: bond {from} -> {to} has zero amplitude")]
    BrokenCycle { from: usize, to: usize },

    #[error("capacity exceeded: dimension {dim} is above the limit {limit}")]
    Capacity { dim: usize, limit: usize },

    #[error("site {site} out of range for {n_sites} sites")]
    InvalidSite { site: usize, n_sites: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("integration failure: norm drift {drift:.3e} at t = {time} with dt = {dt}; reduce the time step")]
    IntegrationFailure { dt: f64, time: f64, drift: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
