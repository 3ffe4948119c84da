//! Volterra kernels and the Gaussian Volterra noise `Z(t) = ∫₀ᵗ 𝒦(t,s) dBʸ(s)`.
//!
//! Two backends produce `Z` on the grid nodes:
//!
//! * [`BackendMode::Exact`] factorizes the exact fBm increment covariance
//!   once and maps fresh standard normals through the factor. Only valid for
//!   the Molchan–Golosov (fBm) kernel.
//! * [`BackendMode::Quadrature`] tabulates the kernel at subinterval
//!   midpoints and integrates it against the volatility driver `ΔBʸ`. Works
//!   for any kernel and keeps `Z` jointly distributed with the other drivers.

mod backend;
mod covariance;
mod kernel;

use thiserror::Error;

pub use backend::{BackendMode, NoiseBackend};
pub use covariance::{fbm_autocovariance, fbm_covariance, fbm_increment_covariance};
pub use kernel::{fbm_kernel, fbm_normalizer, KernelSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NoiseError {
    #[error("Hurst index must lie in (0, 1), got {0}")]
    InvalidHurst(f64),
    #[error("kernel evaluated at s = {s} ≤ 0 (t = {t}); use interior nodes")]
    DomainError { t: f64, s: f64 },
    #[error("kernel quadrature did not converge at (t, s) = ({t}, {s})")]
    KernelQuadrature { t: f64, s: f64 },
    #[error("the exact backend requires the fBm kernel")]
    UnsupportedCombination,
    #[error("increment covariance is numerically indefinite (pivot {index}) even after jitter")]
    FactorizationFailure { index: usize },
    #[error("exact noise cannot be used when volatility drivers are correlated with other drivers")]
    ModeContract,
    #[error("noise input has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}
