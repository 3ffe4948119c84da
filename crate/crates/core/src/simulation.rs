//! Assembles driver, noise, volatility and price into simulated paths.
//!
//! Paths are processed in fixed batches of consecutive indices: batch `b`
//! always holds paths `b·B .. (b+1)·B`, whatever range was requested. Every
//! path draws from its own stream (the `2d×N` block `ΔW̃` first, then `N`
//! standard normals per asset in exact mode), and the noise of a whole batch
//! is produced by one triangular matrix product. Results therefore depend
//! only on the seed, the batch size and the path index, never on how many
//! threads ran or which other paths were requested.

use std::ops::Range;

use faer::Mat;

use crate::driver::{mix_increments, sample_driver, CorrelationStructure, DriverIncrements, MixedIncrements, StreamFactory, TimeGrid};
use crate::error::{Error, Result};
use crate::estimators::{CondGaussSummary, PathSummary};
use crate::market::{self, MarketNodes, MarketParams};
use crate::noise::{BackendMode, KernelSpec, NoiseBackend, NoiseError};
use crate::sde::{DriftSpec, SandwichBounds, VolatilityModel};
use crate::timefn::TimeFn;

pub const DEFAULT_BATCH: usize = 128;

/// Full model specification for `d` assets.
#[derive(Debug, Clone)]
pub struct VsvModel {
    pub horizon: f64,
    pub correlation: CorrelationStructure,
    pub kernels: Vec<KernelSpec>,
    pub volatility: Vec<VolatilityModel>,
    pub market: MarketParams,
}

impl VsvModel {
    /// One asset with `S(0) = 1`, `μ = 3/2`, `ν = 1/2`, `Y(0) = 1`,
    /// `b(y) = (y − 0.01)⁻⁴ − (5 − y)⁻⁴`, fBm noise and independent drivers.
    pub fn reference(hurst: f64) -> Result<Self> {
        let drift = DriftSpec::two_sided_power(1.0, 1.0, 4.0)?;
        Ok(Self {
            horizon: 1.0,
            correlation: CorrelationStructure::independent(1),
            kernels: vec![KernelSpec::fbm(hurst)?],
            volatility: vec![VolatilityModel::new(SandwichBounds::constant(0.01, 5.0)?, drift, 1.0)],
            market: MarketParams { mu: vec![TimeFn::Constant(1.5)], nu: TimeFn::Constant(0.5), s0: vec![1.0], weights: vec![1.0] },
        })
    }

    pub fn assets(&self) -> usize {
        self.correlation.assets()
    }

    /// Cross-checks dimensions and every per-module precondition on `grid`.
    pub fn validate(&self, grid: &TimeGrid, mode: BackendMode) -> Result<()> {
        let d = self.assets();
        if self.kernels.len() != d || self.volatility.len() != d || self.market.assets() != d {
            return Err(Error::InvalidModel(format!(
                "{d} assets in the correlation matrix but {} kernels, {} volatility models and {} spot prices",
                self.kernels.len(),
                self.volatility.len(),
                self.market.assets()
            )));
        }
        if (grid.horizon() - self.horizon).abs() > 0.0 {
            return Err(Error::InvalidModel(format!("grid horizon {} differs from model horizon {}", grid.horizon(), self.horizon)));
        }
        for (vol, kernel) in self.volatility.iter().zip(&self.kernels) {
            vol.validate(grid, kernel.hurst())?;
        }
        self.market.validate(grid)?;
        if mode == BackendMode::Exact && !self.correlation.volatility_block_is_isolated() {
            return Err(NoiseError::ModeContract.into());
        }
        Ok(())
    }
}

/// Everything simulated for one path.
#[derive(Debug, Clone)]
pub struct PathBundle {
    pub index: u64,
    pub increments: DriverIncrements,
    pub mixed: MixedIncrements,
    /// `Zᵢ` on the `N+1` nodes.
    pub noise: Vec<Vec<f64>>,
    /// `Ŷᵢ` on the `N+1` nodes.
    pub volatility: Vec<Vec<f64>>,
    /// `X̂ᵢ` on the `N+1` nodes.
    pub log_price: Vec<Vec<f64>>,
    pub summary: PathSummary,
}

impl PathBundle {
    /// `Ŝᵢ(T) = e^{X̂ᵢ(T)}`.
    pub fn terminal_prices(&self) -> Vec<f64> {
        self.summary.log_price.iter().map(|x| x.exp()).collect()
    }
}

/// A model bound to a grid and a noise backend, ready to generate paths.
#[derive(Debug, Clone)]
pub struct PathSimulator {
    model: VsvModel,
    grid: TimeGrid,
    mode: BackendMode,
    backends: Vec<NoiseBackend>,
    nodes: MarketNodes,
    x0: Vec<f64>,
    batch: usize,
}

impl PathSimulator {
    pub fn new(model: VsvModel, steps: usize, mode: BackendMode) -> Result<Self> {
        let grid = TimeGrid::new(model.horizon, steps)?;
        model.validate(&grid, mode)?;
        let backends = model.kernels.iter().map(|k| NoiseBackend::build(k, &grid, mode)).collect::<Result<Vec<_>, _>>()?;
        let nodes = model.market.tabulate(&grid);
        let x0 = model.market.s0.iter().map(|s| s.ln()).collect();
        Ok(Self { model, grid, mode, backends, nodes, x0, batch: DEFAULT_BATCH })
    }

    /// Changes the batch size. Paths are reproducible only for a fixed
    /// batch size.
    pub fn with_batch_size(mut self, batch: usize) -> Self {
        self.batch = batch.max(1);
        self
    }

    pub fn model(&self) -> &VsvModel {
        &self.model
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn mode(&self) -> BackendMode {
        self.mode
    }

    pub fn batch_size(&self) -> usize {
        self.batch
    }

    pub fn market_nodes(&self) -> &MarketNodes {
        &self.nodes
    }

    /// `exp(−Δ Σ ν(t_n))`.
    pub fn discount_factor(&self) -> f64 {
        market::discount_factor(&self.nodes.nu, &self.grid)
    }

    /// Summaries of paths `0..count`.
    pub fn summaries(&self, seed: u64, count: usize) -> Result<Vec<PathSummary>> {
        self.summaries_range(seed, 0..count)
    }

    pub fn summaries_range(&self, seed: u64, range: Range<usize>) -> Result<Vec<PathSummary>> {
        Ok(self.run(seed, range, false)?.into_iter().map(|o| o.summary).collect())
    }

    /// Full bundles for a (small) range of paths.
    pub fn bundles(&self, seed: u64, range: Range<usize>) -> Result<Vec<PathBundle>> {
        Ok(self.run(seed, range, true)?.into_iter().map(|o| o.bundle.expect("requested")).collect())
    }

    /// Replays a single path exactly as it appears in any larger run.
    pub fn bundle(&self, seed: u64, index: usize) -> Result<PathBundle> {
        Ok(self.bundles(seed, index..index + 1)?.pop().expect("one path"))
    }

    fn run(&self, seed: u64, range: Range<usize>, keep: bool) -> Result<Vec<PathOutput>> {
        if range.is_empty() {
            return Ok(Vec::new());
        }
        let first = range.start / self.batch;
        let last = (range.end - 1) / self.batch;
        let work = |b: usize| -> Result<Vec<PathOutput>> {
            let lo = (b * self.batch).max(range.start);
            let hi = ((b + 1) * self.batch).min(range.end);
            self.run_batch(seed, b, lo..hi, keep)
        };
        let parts: Vec<Vec<PathOutput>> = map_batches(first..last + 1, work)?;
        Ok(parts.into_iter().flatten().collect())
    }

    fn run_batch(&self, seed: u64, batch: usize, wanted: Range<usize>, keep: bool) -> Result<Vec<PathOutput>> {
        let streams = StreamFactory::new(seed);
        let n = self.grid.steps();
        let d = self.model.assets();
        let base = batch * self.batch;
        let mut inputs: Vec<Mat<f64>> = (0..d).map(|_| Mat::zeros(n, self.batch)).collect();
        let mut drivers = Vec::with_capacity(wanted.len());
        let mut column = vec![0.0; n];

        for j in 0..self.batch {
            let index = (base + j) as u64;
            let mut rng = streams.path(index);
            let dw = sample_driver(&self.grid, 2 * d, &mut rng);
            let needed = wanted.contains(&(base + j));
            match self.mode {
                BackendMode::Exact => {
                    for input in inputs.iter_mut() {
                        rng.fill_normal(&mut column, 1.0);
                        for (i, v) in column.iter().enumerate() {
                            input[(i, j)] = *v;
                        }
                    }
                    if needed {
                        let mixed = mix_increments(&self.model.correlation, &dw)?;
                        drivers.push((index, dw, mixed, j));
                    }
                }
                BackendMode::Quadrature => {
                    if needed {
                        let mixed = mix_increments(&self.model.correlation, &dw)?;
                        for (a, input) in inputs.iter_mut().enumerate() {
                            for (i, v) in mixed.volatility.row(a).iter().enumerate() {
                                input[(i, j)] = *v;
                            }
                        }
                        drivers.push((index, dw, mixed, j));
                    }
                }
            }
        }

        let noise: Vec<Mat<f64>> =
            self.backends.iter().zip(&inputs).map(|(b, input)| b.generate_batch(input.as_ref())).collect::<Result<_, _>>()?;

        drivers
            .into_iter()
            .map(|(index, dw, mixed, j)| {
                let z: Vec<Vec<f64>> = noise.iter().map(|m| (0..=n).map(|i| m[(i, j)]).collect()).collect();
                self.finish_path(index, dw, mixed, z, keep).map_err(|e| e.at_path(seed, index))
            })
            .collect()
    }

    fn finish_path(&self, index: u64, dw: DriverIncrements, mixed: MixedIncrements, z: Vec<Vec<f64>>, keep: bool) -> Result<PathOutput> {
        let n = self.grid.steps();
        let d = self.model.assets();
        let mut ys = Vec::with_capacity(d);
        let mut xs = Vec::with_capacity(d);
        for a in 0..d {
            let mut y = vec![0.0; n + 1];
            self.model.volatility[a].simulate_into(&z[a], &self.grid, &mut y)?;
            let mut x = vec![0.0; n + 1];
            market::log_price_into(&y, mixed.price.row(a), &self.nodes.mu[a], &self.grid, self.x0[a], &mut x)?;
            ys.push(y);
            xs.push(x);
        }
        let views: Vec<&[f64]> = ys.iter().map(Vec::as_slice).collect();
        let corr = &self.model.correlation;
        let cond_gauss =
            (d == 1).then(|| CondGaussSummary::from_path(&ys[0], dw.row(1), &self.nodes.mu[0], corr.u12(), &self.grid, self.x0[0]));
        let summary = PathSummary {
            log_price: xs.iter().map(|x| x[n]).collect(),
            ito: market::ito_integral_inverse_vol(&ys[0], dw.row(0))?,
            correction: market::correction_integral(&views, &self.nodes.excess, corr.beta(), &self.grid)?,
            density: market::martingale_density(&views, &self.nodes.excess, &mixed.lower, corr.lower_block_inverse(), &self.grid)?,
            cond_gauss,
        };
        let bundle =
            keep.then(|| PathBundle { index, increments: dw, mixed, noise: z, volatility: ys, log_price: xs, summary: summary.clone() });
        Ok(PathOutput { summary, bundle })
    }
}

struct PathOutput {
    summary: PathSummary,
    bundle: Option<PathBundle>,
}

#[cfg(feature = "parallel")]
fn map_batches<T: Send>(batches: Range<usize>, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    use rayon::prelude::*;
    batches.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_batches<T>(batches: Range<usize>, f: impl Fn(usize) -> Result<T>) -> Result<Vec<T>> {
    batches.map(f).collect()
}
