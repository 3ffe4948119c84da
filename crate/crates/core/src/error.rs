use thiserror::Error;

use crate::driver::CorrelationError;
use crate::estimators::EstimatorError;
use crate::market::MarketError;
use crate::noise::NoiseError;
use crate::sde::SdeError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Any failure raised while simulating or estimating.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Correlation(#[from] CorrelationError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Sde(#[from] SdeError),
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("path {path} (seed {seed}): {source}")]
    Path {
        path: u64,
        seed: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Attach the replay coordinates of the failing path.
    pub fn at_path(self, seed: u64, path: u64) -> Self {
        match self {
            e @ Error::Path { .. } => e,
            e => Error::Path { path, seed, source: Box::new(e) },
        }
    }

    /// True for failures of a numerical routine (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Path { source, .. } => source.is_numerical(),
            Error::Sde(SdeError::NoConvergence { .. }) => true,
            Error::Noise(NoiseError::FactorizationFailure { .. }) => true,
            Error::Estimator(EstimatorError::QuadratureFailure { .. }) => true,
            _ => false,
        }
    }
}
