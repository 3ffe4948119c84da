//! Monte Carlo estimators of `E[f(Σ αᵢ Sᵢ(T))]`.
//!
//! | id           | per-path sample                                               |
//! |--------------|---------------------------------------------------------------|
//! | `naive`      | `f(Σ αᵢŜᵢ)`                                                   |
//! | `rep1`       | `G(X̂) · I₁ / (T u₁₁)` (one asset)                             |
//! | `rep2`       | `G₁(X̂) · (1 + I₁/(T u₁₁))`                                    |
//! | `mmm`        | `Ê_T · G₁(X̂) · (1 + (I₁ − corr)/(T u₁₁))`                     |
//! | `cond-gauss` | inner Gaussian integral of `G` given the volatility noise     |
//!
//! Here `I₁ = Σ ΔW̃₁/Ŷ₁` and `corr` is the drift correction integral.
//! Every estimator reads only the per-path [`PathSummary`].

mod cond_gauss;
mod stats;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use thiserror::Error;

pub use cond_gauss::{cond_gauss_sample, CondGaussSummary, TRUNCATION};
pub use stats::{pairwise_sum, summarize, SampleStats};

use crate::driver::CorrelationStructure;
use crate::noise::BackendMode;
use crate::payoff::PayoffSpec;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    #[error("need at least 2 samples, got {got}")]
    InsufficientSamples { got: usize },
    #[error("estimator requires a single asset, model has {assets}")]
    DimensionError { assets: usize },
    #[error("the measure-change estimator needs the quadrature backend when volatility noise is correlated with price noise")]
    BackendContract,
    #[error("inner quadrature did not converge (m = {mean}, V₁² = {v1_sq})")]
    QuadratureFailure { mean: f64, v1_sq: f64 },
    #[error("unknown estimator '{0}' (expected naive, rep1, rep2, mmm or cond-gauss)")]
    UnknownEstimator(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    Naive,
    Rep1,
    Rep2,
    MeasureChange,
    CondGauss,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 5] = [Self::Naive, Self::Rep1, Self::Rep2, Self::MeasureChange, Self::CondGauss];

    pub fn id(self) -> &'static str {
        match self {
            Self::Naive => "naive",
            Self::Rep1 => "rep1",
            Self::Rep2 => "rep2",
            Self::MeasureChange => "mmm",
            Self::CondGauss => "cond-gauss",
        }
    }

    pub fn single_asset_only(self) -> bool {
        matches!(self, Self::Rep1 | Self::CondGauss)
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for EstimatorKind {
    type Err = EstimatorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|k| k.id() == s).ok_or_else(|| EstimatorError::UnknownEstimator(s.to_string()))
    }
}

/// Rejects the measure-change estimator with an exact backend when the
/// volatility block of the correlation matrix is not isolated.
pub fn check_backend_contract(kind: EstimatorKind, corr: &CorrelationStructure, mode: BackendMode) -> Result<(), EstimatorError> {
    if kind == EstimatorKind::MeasureChange && mode == BackendMode::Exact && !corr.volatility_block_is_isolated() {
        return Err(EstimatorError::BackendContract);
    }
    Ok(())
}

/// Everything an estimator needs from one simulated path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSummary {
    /// `X̂ᵢ(T)` for every asset.
    pub log_price: Vec<f64>,
    /// `I₁ = Σ ΔW̃₁/Ŷ₁`.
    pub ito: f64,
    /// `Δ Σ Σ βₖ μ̃ₖ/(ŶₖŶ₁)`.
    pub correction: f64,
    /// `Ê_T`.
    pub density: f64,
    /// Present for single-asset models.
    pub cond_gauss: Option<CondGaussSummary>,
}

/// Model constants shared by all samples of one run.
#[derive(Debug, Clone, Copy)]
pub struct EstimatorSetup<'a> {
    pub payoff: &'a PayoffSpec,
    pub weights: &'a [f64],
    pub u11: f64,
    pub horizon: f64,
    /// Multiplies every sample; `1` when discounting is off.
    pub discount: f64,
}

impl EstimatorSetup<'_> {
    fn weight_factor(&self, ito: f64) -> f64 {
        ito / (self.horizon * self.u11)
    }

    pub fn naive(&self, p: &PathSummary) -> f64 {
        let basket: f64 = self.weights.iter().zip(&p.log_price).map(|(a, x)| a * x.exp()).sum();
        self.discount * self.payoff.eval_f(basket)
    }

    pub fn rep1(&self, p: &PathSummary) -> Result<f64, EstimatorError> {
        if p.log_price.len() != 1 {
            return Err(EstimatorError::DimensionError { assets: p.log_price.len() });
        }
        Ok(self.discount * self.payoff.eval_g(p.log_price[0]) * self.weight_factor(p.ito))
    }

    pub fn rep2(&self, p: &PathSummary) -> f64 {
        self.discount * self.payoff.basket_g1(self.weights, &p.log_price) * (1.0 + self.weight_factor(p.ito))
    }

    pub fn measure_change(&self, p: &PathSummary) -> f64 {
        let g1 = self.payoff.basket_g1(self.weights, &p.log_price);
        self.discount * p.density * g1 * (1.0 + self.weight_factor(p.ito - p.correction))
    }

    pub fn cond_gauss(&self, p: &PathSummary, kinks: &[f64]) -> Result<f64, EstimatorError> {
        let s = p.cond_gauss.as_ref().ok_or(EstimatorError::DimensionError { assets: p.log_price.len() })?;
        Ok(self.discount * cond_gauss_sample(self.payoff, kinks, s, self.u11)?)
    }

    /// Per-path samples of `kind`, in path order.
    pub fn samples(&self, kind: EstimatorKind, paths: &[PathSummary]) -> Result<Vec<f64>, EstimatorError> {
        match kind {
            EstimatorKind::Naive => Ok(paths.iter().map(|p| self.naive(p)).collect()),
            EstimatorKind::Rep1 => paths.iter().map(|p| self.rep1(p)).collect(),
            EstimatorKind::Rep2 => Ok(paths.iter().map(|p| self.rep2(p)).collect()),
            EstimatorKind::MeasureChange => Ok(paths.iter().map(|p| self.measure_change(p)).collect()),
            EstimatorKind::CondGauss => {
                let kinks = self.payoff.log_kinks();
                map_maybe_parallel(paths, |p| self.cond_gauss(p, &kinks))
            }
        }
    }
}

#[cfg(feature = "parallel")]
fn map_maybe_parallel<T: Sync, R: Send, E: Send>(xs: &[T], f: impl Fn(&T) -> Result<R, E> + Sync + Send) -> Result<Vec<R>, E> {
    use rayon::prelude::*;
    xs.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_maybe_parallel<T, R, E>(xs: &[T], f: impl Fn(&T) -> Result<R, E>) -> Result<Vec<R>, E> {
    xs.iter().map(f).collect()
}

/// Samples and statistics of one estimator run.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorResult {
    pub kind: EstimatorKind,
    pub samples: Vec<f64>,
    pub mean: f64,
    pub sd: f64,
    pub stderr: f64,
    pub paths: usize,
    pub steps: usize,
    pub runtime: Duration,
}

impl EstimatorResult {
    pub fn from_samples(kind: EstimatorKind, samples: Vec<f64>, steps: usize, runtime: Duration) -> Result<Self, EstimatorError> {
        let s = summarize(&samples)?;
        Ok(Self { kind, mean: s.mean, sd: s.sd, stderr: s.stderr, paths: s.count, samples, steps, runtime })
    }
}

/// Evaluates one estimator over pre-simulated paths.
pub fn estimate(
    kind: EstimatorKind,
    setup: &EstimatorSetup<'_>,
    paths: &[PathSummary],
    steps: usize,
) -> Result<EstimatorResult, EstimatorError> {
    let start = clock_start();
    let samples = setup.samples(kind, paths)?;
    EstimatorResult::from_samples(kind, samples, steps, elapsed(start))
}

pub fn estimate_naive(setup: &EstimatorSetup<'_>, paths: &[PathSummary], steps: usize) -> Result<EstimatorResult, EstimatorError> {
    estimate(EstimatorKind::Naive, setup, paths, steps)
}

pub fn estimate_rep1(setup: &EstimatorSetup<'_>, paths: &[PathSummary], steps: usize) -> Result<EstimatorResult, EstimatorError> {
    estimate(EstimatorKind::Rep1, setup, paths, steps)
}

pub fn estimate_rep2(setup: &EstimatorSetup<'_>, paths: &[PathSummary], steps: usize) -> Result<EstimatorResult, EstimatorError> {
    estimate(EstimatorKind::Rep2, setup, paths, steps)
}

pub fn estimate_measure_change(setup: &EstimatorSetup<'_>, paths: &[PathSummary], steps: usize) -> Result<EstimatorResult, EstimatorError> {
    estimate(EstimatorKind::MeasureChange, setup, paths, steps)
}

pub fn estimate_cond_gaussian(setup: &EstimatorSetup<'_>, paths: &[PathSummary], steps: usize) -> Result<EstimatorResult, EstimatorError> {
    estimate(EstimatorKind::CondGauss, setup, paths, steps)
}

// `std::time::Instant` panics on wasm32-unknown-unknown; timing is skipped
// there.
#[cfg(not(target_arch = "wasm32"))]
fn clock_start() -> Option<std::time::Instant> {
    Some(std::time::Instant::now())
}

#[cfg(target_arch = "wasm32")]
fn clock_start() -> Option<std::time::Instant> {
    None
}

fn elapsed(start: Option<std::time::Instant>) -> Duration {
    start.map_or(Duration::ZERO, |s| s.elapsed())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::payoff::Atom;

    fn path(x: f64, ito: f64) -> PathSummary {
        PathSummary { log_price: vec![x], ito, correction: 0.0, density: 1.0, cond_gauss: None }
    }

    fn setup(payoff: &PayoffSpec) -> EstimatorSetup<'_> {
        EstimatorSetup { payoff, weights: &[1.0], u11: 1.0, horizon: 1.0, discount: 1.0 }
    }

    #[test]
    fn ids_round_trip() {
        for k in EstimatorKind::ALL {
            assert_eq!(k.id().parse::<EstimatorKind>().unwrap(), k);
        }
        assert!("mc".parse::<EstimatorKind>().is_err());
    }

    #[test]
    fn naive_on_constant_paths() {
        let p = PayoffSpec::digital_ladder();
        let paths = vec![path(3f64.ln(), 0.1); 10];
        let r = estimate_naive(&setup(&p), &paths, 4).unwrap();
        assert!(r.samples.iter().all(|s| (s - 2.0).abs() < 1e-15));
        assert_eq!(r.sd, 0.0);
        let one = PayoffSpec::new(vec![Atom::indicator(0.0, 1.0)]).unwrap();
        let paths: Vec<_> = (0..10).map(|i| path(i as f64 * 0.1 - 0.5, 0.0)).collect();
        let r = estimate_naive(&setup(&one), &paths, 4).unwrap();
        assert_eq!((r.mean, r.sd), (1.0, 0.0));
    }

    #[test]
    fn representation_samples() {
        let p = PayoffSpec::digital_ladder();
        let s = setup(&p);
        let paths: Vec<_> = (0..5).map(|i| path(0.3 * i as f64, 0.0)).collect();
        assert!(s.samples(EstimatorKind::Rep1, &paths).unwrap().iter().all(|v| *v == 0.0));
        let zero = PayoffSpec::new(vec![]).unwrap();
        let paths: Vec<_> = (0..5).map(|i| path(0.3 * i as f64, 0.2 * i as f64)).collect();
        assert!(setup(&zero).samples(EstimatorKind::Rep2, &paths).unwrap().iter().all(|v| *v == 0.0));
        let q = path(0.8, 0.4);
        let want = p.eval_big_f(0.8f64.exp()) / 0.8f64.exp() * 1.4;
        assert!((s.rep2(&q) - want).abs() < 1e-15);
        assert!((s.measure_change(&q) - want).abs() < 1e-15);
        let mut r = q.clone();
        r.density = 0.5;
        r.correction = -1.0;
        assert!((s.measure_change(&r) - 0.5 * want / 1.4 * 2.4).abs() < 1e-15);
    }

    #[test]
    fn dimension_errors() {
        let p = PayoffSpec::digital_ladder();
        let two = PathSummary { log_price: vec![0.0, 0.0], ito: 0.0, correction: 0.0, density: 1.0, cond_gauss: None };
        let s = EstimatorSetup { payoff: &p, weights: &[1.0, 1.0], u11: 1.0, horizon: 1.0, discount: 1.0 };
        assert!(matches!(s.rep1(&two), Err(EstimatorError::DimensionError { assets: 2 })));
        assert!(matches!(s.cond_gauss(&two, &[]), Err(EstimatorError::DimensionError { .. })));
        assert!(s.rep2(&two).is_finite());
    }

    #[test]
    fn discount_scales_samples() {
        let p = PayoffSpec::digital_ladder();
        let mut s = setup(&p);
        s.discount = 0.5;
        assert_eq!(s.naive(&path(3f64.ln(), 0.0)), 1.0);
    }

    #[test]
    fn backend_contract() {
        let iso = CorrelationStructure::independent(1);
        assert!(check_backend_contract(EstimatorKind::MeasureChange, &iso, BackendMode::Exact).is_ok());
        let sigma = crate::driver::SquareMatrix::from_rows(&[&[1.0, 0.4], &[0.4, 1.0]]);
        let corr = CorrelationStructure::new(sigma).unwrap();
        assert!(matches!(
            check_backend_contract(EstimatorKind::MeasureChange, &corr, BackendMode::Exact),
            Err(EstimatorError::BackendContract)
        ));
        assert!(check_backend_contract(EstimatorKind::MeasureChange, &corr, BackendMode::Quadrature).is_ok());
        assert!(check_backend_contract(EstimatorKind::Rep2, &corr, BackendMode::Exact).is_ok());
    }
}
