//! WebAssembly bindings for the static demo page in `web/`.
//!
//! Every export works on the one-asset reference model and takes the Hurst
//! index from the page. The plain Rust functions underneath are public too so
//! the demo logic can be tested natively.

use vsv_core::estimators::{estimate, EstimatorSetup};
use vsv_core::{BackendMode, EstimatorKind, KernelSpec, PathSimulator, PayoffSpec, VsvModel};
use wasm_bindgen::prelude::*;

/// Estimators in the order `price` reports them.
pub const ESTIMATORS: [EstimatorKind; 5] =
    [EstimatorKind::Naive, EstimatorKind::Rep1, EstimatorKind::Rep2, EstimatorKind::MeasureChange, EstimatorKind::CondGauss];

const MAX_STEPS: usize = 2000;
const MAX_PATHS: usize = 50_000;

fn simulator(hurst: f64, steps: usize) -> vsv_core::Result<PathSimulator> {
    if steps == 0 || steps > MAX_STEPS {
        return Err(vsv_core::Error::InvalidModel(format!("steps must be between 1 and {MAX_STEPS}, got {steps}")));
    }
    PathSimulator::new(VsvModel::reference(hurst)?, steps, BackendMode::Exact)
}

/// `count` volatility paths on `steps + 1` nodes, concatenated path after path.
pub fn simulate_volatility(hurst: f64, steps: usize, count: usize, seed: u64) -> vsv_core::Result<Vec<f64>> {
    let sim = simulator(hurst, steps)?;
    let bundles = sim.bundles(seed, 0..count.min(MAX_PATHS))?;
    Ok(bundles.into_iter().flat_map(|b| b.volatility.into_iter().next().expect("one asset")).collect())
}

/// Prices the digital ladder with every estimator on shared paths and
/// returns `[mean, stderr]` pairs in [`ESTIMATORS`] order.
pub fn price_ladder(hurst: f64, steps: usize, paths: usize, seed: u64) -> vsv_core::Result<Vec<f64>> {
    if !(2..=MAX_PATHS).contains(&paths) {
        return Err(vsv_core::Error::InvalidModel(format!("paths must be between 2 and {MAX_PATHS}, got {paths}")));
    }
    let sim = simulator(hurst, steps)?;
    let summaries = sim.summaries(seed, paths)?;
    let payoff = PayoffSpec::digital_ladder();
    let model = sim.model();
    let setup = EstimatorSetup {
        payoff: &payoff,
        weights: &model.market.weights,
        u11: model.correlation.u11(),
        horizon: model.horizon,
        discount: 1.0,
    };
    let mut out = Vec::with_capacity(2 * ESTIMATORS.len());
    for kind in ESTIMATORS {
        let r = estimate(kind, &setup, &summaries, steps)?;
        out.extend([r.mean, r.stderr]);
    }
    Ok(out)
}

/// The fBm kernel `s ↦ K(t, s)` at `points` midpoints of `(0, t)`.
pub fn kernel_curve(hurst: f64, t: f64, points: usize) -> vsv_core::Result<Vec<f64>> {
    let kernel = KernelSpec::fbm(hurst)?;
    let h = t / points as f64;
    (0..points).map(|j| Ok(kernel.eval(t, (j as f64 + 0.5) * h)?)).collect()
}

#[wasm_bindgen(js_name = estimatorIds)]
pub fn estimator_ids() -> Vec<String> {
    ESTIMATORS.iter().map(|k| k.id().to_string()).collect()
}

#[wasm_bindgen(js_name = volatilityPaths)]
pub fn volatility_paths(hurst: f64, steps: usize, count: usize, seed: u32) -> Result<Vec<f64>, JsError> {
    simulate_volatility(hurst, steps, count, seed.into()).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn price(hurst: f64, steps: usize, paths: usize, seed: u32) -> Result<Vec<f64>, JsError> {
    price_ladder(hurst, steps, paths, seed.into()).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = kernelCurve)]
pub fn kernel_curve_js(hurst: f64, t: f64, points: usize) -> Result<Vec<f64>, JsError> {
    kernel_curve(hurst, t, points).map_err(|e| JsError::new(&e.to_string()))
}
