use thiserror::Error;

/// Errors raised by the physics kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("sideband truncation too small: missing probability {missing:.3e} at l_max = {l_max}")]
    Truncation { l_max: usize, missing: f64 },

    #[error("spectrum is not normalized (total probability {total:.12})")]
    Unnormalized { total: f64 },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("norm drift {drift:.3e} after slice {slice} exceeds {limit:.1e}")]
    NormDrift { slice: usize, drift: f64, limit: f64 },

    #[error("grid does not resolve the problem: {0}")]
    Grid(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
