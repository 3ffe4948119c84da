//! Experiment configuration files.
//!
//! A configuration is a TOML document with four tables: `[model]`,
//! `[noise]`, `[payoff]` and `[run]`. Per-asset quantities are arrays with
//! one entry per asset. See `configs/reference.toml` for a complete file.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;
use vsv_core::driver::{CorrelationStructure, SquareMatrix};
use vsv_core::sde::{check_mesh_condition, VolatilityModel};
use vsv_core::{
    Atom, BackendMode, DriftSpec, EstimatorKind, KernelSpec, MarketParams, PayoffSpec, SandwichBounds, TimeFn, TimeGrid, VsvModel,
};

/// The shipped reference configuration.
pub const REFERENCE_TOML: &str = include_str!("../configs/reference.toml");

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelBlock,
    pub noise: NoiseBlock,
    pub payoff: PayoffBlock,
    pub run: RunBlock,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub assets: usize,
    pub horizon: f64,
    /// Row-major `2d × 2d` correlation of the price and volatility drivers.
    /// Identity when absent.
    #[serde(default)]
    pub sigma: Option<Vec<f64>>,
    pub mu: Vec<f64>,
    pub nu: f64,
    pub s0: Vec<f64>,
    /// Basket weights; all ones when absent.
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
    pub gamma: Vec<f64>,
    pub y0: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    /// Fractional Brownian motion.
    Fbm,
    /// Standard Brownian motion (kernel identically one, `H = 1/2`).
    Brownian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    Exact,
    Quadrature,
}

impl From<BackendKind> for BackendMode {
    fn from(b: BackendKind) -> Self {
        match b {
            BackendKind::Exact => BackendMode::Exact,
            BackendKind::Quadrature => BackendMode::Quadrature,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseBlock {
    pub kernel: KernelKind,
    #[serde(default)]
    pub hurst: Vec<f64>,
    pub backend: BackendKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AtomName {
    Indicator,
    Call,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomEntry {
    pub kind: AtomName,
    pub strike: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayoffBlock {
    pub atoms: Vec<AtomEntry>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunBlock {
    pub steps: usize,
    pub paths: usize,
    pub seed: u64,
    pub estimators: Vec<String>,
    #[serde(default)]
    pub discount: bool,
    /// Record wall-clock time in the report; `false` writes zeros so that
    /// reports are byte-reproducible.
    #[serde(default = "enabled")]
    pub timing: bool,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn enabled() -> bool {
    true
}

/// One rejected field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed configuration: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid configuration:{}", list(.0))]
    Validation(Vec<FieldError>),
}

impl ConfigError {
    /// The rejected fields, empty unless this is a validation error.
    pub fn fields(&self) -> &[FieldError] {
        match self {
            ConfigError::Validation(v) => v,
            _ => &[],
        }
    }
}

fn list(errors: &[FieldError]) -> String {
    errors.iter().map(|e| format!("\n  {e}")).collect()
}

/// Reads, parses and validates a configuration file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig, ConfigError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    ExperimentConfig::from_toml(&text)
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// The shipped reference configuration.
    pub fn reference() -> Self {
        Self::from_toml(REFERENCE_TOML).expect("shipped configuration is valid")
    }

    /// Sets the same Hurst index for every asset.
    pub fn with_hurst(mut self, hurst: f64) -> Self {
        self.noise.hurst = vec![hurst; self.model.assets];
        self
    }

    pub fn backend(&self) -> BackendMode {
        self.noise.backend.into()
    }

    /// Hurst index of asset `i`.
    pub fn hurst(&self, i: usize) -> f64 {
        match self.noise.kernel {
            KernelKind::Fbm => self.noise.hurst[i],
            KernelKind::Brownian => 0.5,
        }
    }

    /// Requested estimators. Call after [`validate`](Self::validate).
    pub fn estimators(&self) -> Vec<EstimatorKind> {
        self.run.estimators.iter().filter_map(|s| s.parse().ok()).collect()
    }

    pub fn payoff(&self) -> Result<PayoffSpec, ConfigError> {
        let atoms = self
            .payoff
            .atoms
            .iter()
            .map(|a| match a.kind {
                AtomName::Indicator => Atom::indicator(a.strike, a.weight),
                AtomName::Call => Atom::call(a.strike, a.weight),
            })
            .collect();
        PayoffSpec::new(atoms).map_err(|message| invalid("payoff.atoms", message))
    }

    fn kernel(&self, i: usize) -> Result<KernelSpec, ConfigError> {
        match (self.noise.kernel, self.backend()) {
            (KernelKind::Fbm, _) => KernelSpec::fbm(self.noise.hurst[i]).map_err(|e| invalid(format!("noise.hurst[{i}]"), e)),
            (KernelKind::Brownian, BackendMode::Exact) => Ok(KernelSpec::fbm(0.5).expect("H = 1/2 is valid")),
            (KernelKind::Brownian, BackendMode::Quadrature) => Ok(KernelSpec::constant(1.0)),
        }
    }

    fn correlation(&self) -> Result<CorrelationStructure, ConfigError> {
        let d = self.model.assets;
        match &self.model.sigma {
            None => Ok(CorrelationStructure::independent(d)),
            Some(v) => CorrelationStructure::new(SquareMatrix::from_row_major(2 * d, v.clone())).map_err(|e| invalid("model.sigma", e)),
        }
    }

    /// Builds the model. Call after [`validate`](Self::validate).
    pub fn model(&self) -> Result<VsvModel, ConfigError> {
        let m = &self.model;
        let d = m.assets;
        let mut kernels = Vec::with_capacity(d);
        let mut volatility = Vec::with_capacity(d);
        for i in 0..d {
            kernels.push(self.kernel(i)?);
            let drift = DriftSpec::two_sided_power(m.c1[i], m.c2[i], m.gamma[i]).map_err(|e| invalid(format!("model.gamma[{i}]"), e))?;
            let bounds = SandwichBounds::constant(m.lower[i], m.upper[i]).map_err(|e| invalid(format!("model.lower[{i}]"), e))?;
            volatility.push(VolatilityModel::new(bounds, drift, m.y0[i]));
        }
        let market = MarketParams {
            mu: m.mu.iter().map(|&v| TimeFn::Constant(v)).collect(),
            nu: TimeFn::Constant(m.nu),
            s0: m.s0.clone(),
            weights: m.weights.clone().unwrap_or_else(|| vec![1.0; d]),
        };
        Ok(VsvModel { horizon: m.horizon, correlation: self.correlation()?, kernels, volatility, market })
    }

    /// Checks every field and reports all problems at once.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut errors = Vec::new();
        let mut bad = |field: String, message: String| errors.push(FieldError { field, message });
        let m = &self.model;
        let d = m.assets;
        if d == 0 {
            bad("model.assets".into(), "must be at least 1".into());
            return Err(ConfigError::Validation(errors));
        }
        if !(m.horizon.is_finite() && m.horizon > 0.0) {
            bad("model.horizon".into(), format!("must be positive, got {}", m.horizon));
        }
        if !(m.nu.is_finite() && m.nu >= 0.0) {
            bad("model.nu".into(), format!("must be nonnegative, got {}", m.nu));
        }

        let per_asset: [(&str, Option<&Vec<f64>>); 10] = [
            ("model.mu", Some(&m.mu)),
            ("model.s0", Some(&m.s0)),
            ("model.weights", m.weights.as_ref()),
            ("model.lower", Some(&m.lower)),
            ("model.upper", Some(&m.upper)),
            ("model.c1", Some(&m.c1)),
            ("model.c2", Some(&m.c2)),
            ("model.gamma", Some(&m.gamma)),
            ("model.y0", Some(&m.y0)),
            ("noise.hurst", (self.noise.kernel == KernelKind::Fbm).then_some(&self.noise.hurst)),
        ];
        let mut lengths_ok = true;
        for (field, values) in per_asset {
            if let Some(v) = values {
                if v.len() != d {
                    bad(field.into(), format!("expected {d} entries, got {}", v.len()));
                    lengths_ok = false;
                } else if let Some((i, x)) = v.iter().enumerate().find(|(_, x)| !x.is_finite()) {
                    bad(format!("{field}[{i}]"), format!("must be finite, got {x}"));
                    lengths_ok = false;
                }
            }
        }
        if self.noise.kernel == KernelKind::Brownian && self.noise.hurst.iter().any(|h| *h != 0.5) {
            bad("noise.hurst".into(), "the Brownian kernel has H = 0.5".into());
        }
        if let Some(sigma) = &m.sigma {
            if sigma.len() != 4 * d * d {
                bad("model.sigma".into(), format!("expected {} entries ({0}x{0} row-major), got {}", 2 * d, sigma.len()));
            } else if let Err(e) = self.correlation() {
                errors.extend(e.fields().iter().cloned());
            }
        }
        let mut bad = |field: String, message: String| errors.push(FieldError { field, message });

        if lengths_ok {
            for i in 0..d {
                if !(m.s0[i] > 0.0) {
                    bad(format!("model.s0[{i}]"), format!("initial price must be positive, got {}", m.s0[i]));
                }
                if let Some(w) = &m.weights {
                    if !(w[i] > 0.0) {
                        bad(format!("model.weights[{i}]"), format!("basket weight must be positive, got {}", w[i]));
                    }
                }
                let (lo, hi) = (m.lower[i], m.upper[i]);
                if !(lo > 0.0) {
                    bad(format!("model.lower[{i}]"), format!("lower bound must be positive, got {lo}"));
                }
                if !(lo < hi) {
                    bad(format!("model.upper[{i}]"), format!("upper bound {hi} must exceed lower bound {lo}"));
                }
                if !(m.y0[i] > lo && m.y0[i] < hi) {
                    bad(format!("model.y0[{i}]"), format!("initial volatility {} must lie strictly inside ({lo}, {hi})", m.y0[i]));
                }
                for (name, v) in [("c1", m.c1[i]), ("c2", m.c2[i]), ("gamma", m.gamma[i])] {
                    if !(v > 0.0) {
                        bad(format!("model.{name}[{i}]"), format!("must be positive, got {v}"));
                    }
                }
                let h = self.hurst(i);
                if !(h > 0.0 && h < 1.0) {
                    bad(format!("noise.hurst[{i}]"), format!("must lie in (0, 1), got {h}"));
                } else if let Ok(drift) = DriftSpec::two_sided_power(m.c1[i], m.c2[i], m.gamma[i]) {
                    if drift.check_exponent(h).is_err() {
                        bad(
                            format!("model.gamma[{i}]"),
                            format!("gamma = {} must exceed 1/H - 1 = {:.4} for H = {h}", m.gamma[i], 1.0 / h - 1.0),
                        );
                    }
                    if m.horizon > 0.0 && self.run.steps > 0 {
                        let dt = m.horizon / self.run.steps as f64;
                        if !check_mesh_condition(dt, &drift) {
                            bad("run.steps".into(), format!("step {dt} violates the mesh condition of asset {i}"));
                        }
                    }
                }
            }
        }

        if self.payoff.atoms.is_empty() {
            bad("payoff.atoms".into(), "at least one atom is required".into());
        }
        for (i, a) in self.payoff.atoms.iter().enumerate() {
            if !(a.strike.is_finite() && a.strike >= 0.0) {
                bad(format!("payoff.atoms[{i}].strike"), format!("must be a nonnegative number, got {}", a.strike));
            }
            if !a.weight.is_finite() {
                bad(format!("payoff.atoms[{i}].weight"), format!("must be finite, got {}", a.weight));
            }
        }

        let r = &self.run;
        if r.steps == 0 {
            bad("run.steps".into(), "must be at least 1".into());
        }
        if r.paths == 1 {
            bad("run.paths".into(), "statistics need 0 or at least 2 paths".into());
        }
        if r.estimators.is_empty() {
            bad("run.estimators".into(), "at least one estimator is required".into());
        }
        let isolated = self.correlation().map(|c| c.volatility_block_is_isolated()).unwrap_or(true);
        if self.backend() == BackendMode::Exact && !isolated {
            bad("noise.backend".into(), "the exact backend needs volatility drivers uncorrelated with price drivers".into());
        }
        for (i, name) in r.estimators.iter().enumerate() {
            match name.parse::<EstimatorKind>() {
                Err(e) => bad(format!("run.estimators[{i}]"), e.to_string()),
                Ok(kind) if kind.single_asset_only() && d > 1 => {
                    bad(format!("run.estimators[{i}]"), format!("{kind} needs a single asset, the model has {d}"))
                }
                Ok(_) => {}
            }
        }

        if errors.is_empty() {
            let grid = TimeGrid::new(m.horizon, r.steps).map_err(|e| invalid("run.steps", e))?;
            let model = self.model()?;
            model.validate(&grid, self.backend()).map_err(|e| invalid("model", e))?;
            self.payoff()?;
            Ok(())
        } else {
            Err(ConfigError::Validation(errors))
        }
    }
}

fn invalid(field: impl Into<String>, message: impl ToString) -> ConfigError {
    ConfigError::Validation(vec![FieldError { field: field.into(), message: message.to_string() }])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edit(from: &str, to: &str) -> Result<ExperimentConfig, ConfigError> {
        assert!(REFERENCE_TOML.contains(from), "{from}");
        ExperimentConfig::from_toml(&REFERENCE_TOML.replacen(from, to, 1))
    }

    fn fields(r: Result<ExperimentConfig, ConfigError>) -> Vec<String> {
        r.unwrap_err().fields().iter().map(|f| f.field.clone()).collect()
    }

    #[test]
    fn reference_loads() {
        let c = ExperimentConfig::reference();
        assert_eq!(c.model.assets, 1);
        assert_eq!(c.hurst(0), 0.7);
        assert_eq!(c.backend(), BackendMode::Exact);
        let p = c.payoff().unwrap();
        assert_eq!(p.eval_f(3.0), 2.0);
        let m = c.model().unwrap();
        assert_eq!(m.market.s0, vec![1.0]);
        assert_eq!(m.correlation.u11(), 1.0);
    }

    #[test]
    fn y0_outside_band_names_field() {
        assert_eq!(fields(edit("y0 = [1.0]", "y0 = [6.0]")), vec!["model.y0[0]"]);
    }

    #[test]
    fn gamma_below_threshold_names_field() {
        let c = edit("gamma = [4.0]", "gamma = [2.0]").unwrap();
        let err = c.with_hurst(0.3).validate().unwrap_err();
        assert_eq!(err.fields()[0].field, "model.gamma[0]");
        assert!(err.to_string().contains("2.3333"));
        assert!(edit("gamma = [4.0]", "gamma = [2.0]").unwrap().validate().is_ok());
    }

    #[test]
    fn several_problems_reported_together() {
        let text = REFERENCE_TOML.replacen("s0 = [1.0]", "s0 = [-1.0]", 1).replacen("steps = 1000", "steps = 0", 1);
        let f = fields(ExperimentConfig::from_toml(&text));
        assert!(f.contains(&"model.s0[0]".to_string()) && f.contains(&"run.steps".to_string()), "{f:?}");
    }

    #[test]
    fn structural_errors() {
        assert!(matches!(edit("[run]", "[runs]"), Err(ConfigError::Parse(_))));
        assert_eq!(fields(edit("mu = [1.5]", "mu = [1.5, 1.0]")), vec!["model.mu"]);
        assert_eq!(fields(edit("\"rep2\"", "\"rep3\"")), vec!["run.estimators[0]"]);
        assert_eq!(fields(edit("paths = 10000", "paths = 1")), vec!["run.paths"]);
        assert_eq!(fields(edit("sigma = [1.0, 0.0, 0.0, 1.0]", "sigma = [1.0, 0.5, 0.4, 1.0]")), vec!["model.sigma"]);
        assert_eq!(fields(edit("sigma = [1.0, 0.0, 0.0, 1.0]", "sigma = [1.0, 0.5, 0.5, 1.0]")), vec!["noise.backend"]);
        assert!(edit("sigma = [1.0, 0.0, 0.0, 1.0]", "sigma = [1.0, 0.5, 0.5, 1.0]").unwrap_err().to_string().contains("noise.backend"));
        assert!(matches!(load_config("/nonexistent/vsv.toml"), Err(ConfigError::Io { .. })));
    }

    #[test]
    fn brownian_kernel() {
        let c = edit("kernel = \"fbm\"\nhurst = [0.7]", "kernel = \"brownian\"").unwrap();
        assert_eq!(c.hurst(0), 0.5);
        assert_eq!(c.model().unwrap().kernels[0].hurst(), 0.5);
        assert_eq!(fields(edit("kernel = \"fbm\"", "kernel = \"brownian\"")), vec!["noise.hurst"]);
    }
}
