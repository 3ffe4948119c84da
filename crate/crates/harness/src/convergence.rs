//! Empirical strong convergence rates by coupled grid refinement.
//!
//! Paths are simulated once on a fine reference grid. Each coarse grid
//! reuses the same randomness: price increments are block sums of the fine
//! ones, and the noise is either read off the fine grid at the coarse nodes
//! (exact backend, whose fine-grid values already have the exact coarse
//! law) or regenerated by coarse quadrature from block-summed volatility
//! increments (quadrature backend). The error of a path at level `N` is the
//! largest deviation from the reference path over the coarse nodes.

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};
use vsv_core::market::simulate_log_price;
use vsv_core::{BackendMode, NoiseBackend, PathBundle, PathSimulator, TimeGrid, VsvModel};

use crate::config::ExperimentConfig;
use crate::error::HarnessError;

pub const DEFAULT_LEVELS: [usize; 7] = [8, 16, 32, 64, 128, 256, 512];
pub const DEFAULT_REFERENCE: usize = 4096;
const CHUNK: usize = 512;

/// Root-mean-square sup-node errors at one coarse level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelError {
    pub steps: usize,
    pub dt: f64,
    pub volatility: f64,
    pub price: f64,
}

/// Least-squares slope of `ln error` against `ln Δ` with a 95% band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub stderr: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub hurst: f64,
    pub reference_steps: usize,
    pub paths: usize,
    pub levels: Vec<LevelError>,
    pub volatility: SlopeFit,
    pub price: SlopeFit,
}

impl ConvergenceReport {
    pub fn write_csv<W: std::io::Write>(&self, sink: W) -> std::io::Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
        w.write_record(["N", "dt", "volatility_error", "price_error"])?;
        for l in &self.levels {
            w.write_record([
                l.steps.to_string(),
                crate::report::format_sig(l.dt),
                crate::report::format_sig(l.volatility),
                crate::report::format_sig(l.price),
            ])?;
        }
        w.flush()
    }
}

struct Level {
    factor: usize,
    grid: TimeGrid,
    mu: Vec<Vec<f64>>,
    backends: Option<Vec<NoiseBackend>>,
}

/// Runs `config.run.paths` coupled paths on `reference` steps and measures
/// every level in `levels` against them.
pub fn run_convergence_study(config: &ExperimentConfig, levels: &[usize], reference: usize) -> Result<ConvergenceReport, HarnessError> {
    if levels.len() < 3 {
        return Err(HarnessError::TooFewLevels(levels.len()));
    }
    if let Some(&steps) = levels.iter().find(|&&n| n == 0 || n > reference || reference % n != 0) {
        return Err(HarnessError::GridIncompatible { steps, reference });
    }
    let mut config = config.clone();
    config.run.steps = reference;
    config.validate()?;
    let model = config.model()?;
    let mode = config.backend();
    let seed = config.run.seed;
    let sim = PathSimulator::new(model.clone(), reference, mode)?;

    let prepared = levels
        .iter()
        .map(|&n| {
            let factor = reference / n;
            let grid = sim.grid().coarsen(factor).expect("divisibility checked");
            let mu = model.market.tabulate(&grid).mu;
            let backends = match mode {
                BackendMode::Exact => None,
                BackendMode::Quadrature => Some(
                    model
                        .kernels
                        .iter()
                        .map(|k| NoiseBackend::build(k, &grid, mode))
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(vsv_core::Error::from)?,
                ),
            };
            Ok(Level { factor, grid, mu, backends })
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;

    let x0: Vec<f64> = model.market.s0.iter().map(|s| s.ln()).collect();
    let m = config.run.paths;
    let mut sq = vec![(0.0, 0.0); levels.len()];
    for start in (0..m).step_by(CHUNK) {
        let bundles = sim.bundles(seed, start..(start + CHUNK).min(m))?;
        let errors: Vec<Vec<(f64, f64)>> = bundles
            .par_iter()
            .map(|b| {
                prepared
                    .iter()
                    .map(|level| path_error(&model, level, &x0, b))
                    .collect::<Result<Vec<_>, vsv_core::Error>>()
                    .map_err(|e| e.at_path(seed, b.index))
            })
            .collect::<Result<_, _>>()?;
        for per_path in errors {
            for (acc, (ey, ex)) in sq.iter_mut().zip(per_path) {
                acc.0 += ey * ey;
                acc.1 += ex * ex;
            }
        }
    }

    let rows: Vec<LevelError> = prepared
        .iter()
        .zip(&sq)
        .map(|(l, (sy, sx))| LevelError {
            steps: l.grid.steps(),
            dt: l.grid.dt(),
            volatility: (sy / m as f64).sqrt(),
            price: (sx / m as f64).sqrt(),
        })
        .collect();
    let ln_dt: Vec<f64> = rows.iter().map(|r| r.dt.ln()).collect();
    let fit = |e: &dyn Fn(&LevelError) -> f64| fit_slope(&ln_dt, &rows.iter().map(|r| e(r).ln()).collect::<Vec<_>>());
    Ok(ConvergenceReport {
        hurst: config.hurst(0),
        reference_steps: reference,
        paths: m,
        volatility: fit(&|r| r.volatility),
        price: fit(&|r| r.price),
        levels: rows,
    })
}

fn block_sums(x: &[f64], factor: usize) -> Vec<f64> {
    x.chunks_exact(factor).map(|c| c.iter().sum()).collect()
}

/// Largest node deviation of volatility and log-price, maximised over assets.
fn path_error(model: &VsvModel, level: &Level, x0: &[f64], b: &PathBundle) -> Result<(f64, f64), vsv_core::Error> {
    let r = level.factor;
    let n = level.grid.steps();
    let (mut ey, mut ex) = (0.0f64, 0.0f64);
    for a in 0..x0.len() {
        let z = match &level.backends {
            None => (0..=n).map(|k| b.noise[a][k * r]).collect(),
            Some(backends) => backends[a].generate(&block_sums(b.mixed.volatility.row(a), r))?,
        };
        let y = model.volatility[a].simulate(&z, &level.grid)?.into_values();
        let x = simulate_log_price(&y, &block_sums(b.mixed.price.row(a), r), &level.mu[a], &level.grid, x0[a])?;
        for k in 0..=n {
            ey = ey.max((y[k] - b.volatility[a][k * r]).abs());
            ex = ex.max((x[k] - b.log_price[a][k * r]).abs());
        }
    }
    Ok((ey, ex))
}

/// Ordinary least squares `y = a + b x` with a two-sided 95% t-interval for `b`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> SlopeFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let stderr = (rss / (n - 2.0) / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, n - 2.0).expect("at least one degree of freedom").inverse_cdf(0.975);
    SlopeFit { slope, stderr, lower: slope - t * stderr, upper: slope + t * stderr }
}
