use std::path::PathBuf;

use thiserror::Error;

use crate::config::ConfigError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] vsv_core::Error),
    #[error("grid of {steps} steps does not divide the reference grid of {reference} steps")]
    GridIncompatible { steps: usize, reference: usize },
    #[error("a slope fit needs at least 3 grid levels, got {0}")]
    TooFewLevels(usize),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot start worker pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

impl HarnessError {
    /// Process exit status: 3 for numerical failures, 2 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Core(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

impl From<vsv_core::estimators::EstimatorError> for HarnessError {
    fn from(e: vsv_core::estimators::EstimatorError) -> Self {
        HarnessError::Core(e.into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use vsv_core::sde::SdeError;

    #[test]
    fn numerical_failures_exit_with_3() {
        let core = vsv_core::Error::from(SdeError::NoConvergence { t: 0.5, target: 1.0 }).at_path(7, 12);
        let e = HarnessError::from(core);
        assert_eq!(e.exit_code(), 3);
        assert!(e.to_string().contains("path 12 (seed 7)"));
        assert_eq!(HarnessError::TooFewLevels(1).exit_code(), 2);
        assert_eq!(HarnessError::from(vsv_core::Error::InvalidModel("x".into())).exit_code(), 2);
    }
}
