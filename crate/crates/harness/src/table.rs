use vsv_core::EstimatorKind;

use crate::config::ExperimentConfig;
use crate::error::HarnessError;
use crate::pricing::PricingRun;
use crate::report::ReportRow;

pub const TABLE_STEPS: [usize; 4] = [10, 100, 1000, 10000];
pub const TABLE_HURST: [f64; 2] = [0.7, 0.3];
pub const TABLE_PATHS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Table {
    /// Double discretization against conditional Gaussianity, physical measure.
    One,
    /// Measure-change estimator under the minimal martingale measure.
    Two,
}

impl Table {
    pub fn estimators(self) -> &'static [EstimatorKind] {
        match self {
            Table::One => &[EstimatorKind::Rep2, EstimatorKind::CondGauss],
            Table::Two => &[EstimatorKind::MeasureChange],
        }
    }
}

/// Sweeps `steps × hurst` on top of `base`, which supplies the model, the
/// payoff, the path count and the seed. Rows come out with `N` outermost,
/// then `H`, then estimator.
pub fn reproduce_table(which: Table, base: &ExperimentConfig, steps: &[usize], hurst: &[f64]) -> Result<Vec<ReportRow>, HarnessError> {
    let mut rows = Vec::new();
    for &n in steps {
        for &h in hurst {
            let mut config = base.clone().with_hurst(h);
            config.run.steps = n;
            config.run.estimators = which.estimators().iter().map(|k| k.id().to_string()).collect();
            config.validate()?;
            if config.run.paths == 0 {
                continue;
            }
            let run = PricingRun::simulate(&config)?;
            for &kind in which.estimators() {
                rows.push(run.evaluate(&config, kind)?);
            }
        }
    }
    Ok(rows)
}
