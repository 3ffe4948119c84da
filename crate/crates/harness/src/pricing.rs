use std::time::{Duration, Instant};

use vsv_core::estimators::{estimate, EstimatorSetup};
use vsv_core::{EstimatorKind, PathSimulator, PathSummary};

use crate::config::ExperimentConfig;
use crate::error::HarnessError;
use crate::report::ReportRow;

/// Paths simulated once for a configuration, ready for any estimator.
pub struct PricingRun {
    pub simulator: PathSimulator,
    pub paths: Vec<PathSummary>,
    pub simulation_time: Duration,
}

impl PricingRun {
    pub fn simulate(config: &ExperimentConfig) -> Result<Self, HarnessError> {
        config.validate()?;
        let start = Instant::now();
        let simulator = PathSimulator::new(config.model()?, config.run.steps, config.backend())?;
        let paths = simulator.summaries(config.run.seed, config.run.paths)?;
        Ok(Self { simulator, paths, simulation_time: start.elapsed() })
    }

    /// Discount factor applied to every sample, `1` unless discounting is on.
    pub fn discount(&self, config: &ExperimentConfig) -> f64 {
        if config.run.discount {
            self.simulator.discount_factor()
        } else {
            1.0
        }
    }

    pub fn evaluate(&self, config: &ExperimentConfig, kind: EstimatorKind) -> Result<ReportRow, HarnessError> {
        let payoff = config.payoff()?;
        let model = self.simulator.model();
        let setup = EstimatorSetup {
            payoff: &payoff,
            weights: &model.market.weights,
            u11: model.correlation.u11(),
            horizon: model.horizon,
            discount: self.discount(config),
        };
        let seed = config.run.seed;
        let result = estimate(kind, &setup, &self.paths, config.run.steps).map_err(|e| {
            let failing = self.paths.iter().position(|p| setup.samples(kind, std::slice::from_ref(p)).is_err());
            let e = vsv_core::Error::from(e);
            match failing {
                Some(i) => e.at_path(seed, i as u64),
                None => e,
            }
        })?;
        let runtime = config.run.timing.then(|| self.simulation_time + result.runtime);
        Ok(ReportRow::from_result(&result, config.hurst(0), seed, runtime))
    }
}

/// Simulates `run.paths` path bundles once and evaluates every requested
/// estimator on the same paths. Zero paths give an empty report.
pub fn run_pricing(config: &ExperimentConfig) -> Result<Vec<ReportRow>, HarnessError> {
    config.validate()?;
    if config.run.paths == 0 {
        return Ok(Vec::new());
    }
    let run = PricingRun::simulate(config)?;
    config.estimators().into_iter().map(|kind| run.evaluate(config, kind)).collect()
}
