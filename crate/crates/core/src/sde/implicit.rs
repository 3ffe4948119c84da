use super::{check_mesh_condition, DriftSpec, SdeError};
use crate::driver::TimeGrid;
use crate::timefn::TimeFn;

const MAX_ITERATIONS: usize = 200;
/// Largest finite-difference Hölder ratio accepted for tabulated bounds.
const HOLDER_CEILING: f64 = 1e8;

/// The curves `φ < ψ` that confine the volatility.
#[derive(Debug, Clone)]
pub struct SandwichBounds {
    lower: TimeFn,
    upper: TimeFn,
}

impl SandwichBounds {
    pub fn new(lower: impl Into<TimeFn>, upper: impl Into<TimeFn>) -> Self {
        Self { lower: lower.into(), upper: upper.into() }
    }

    pub fn constant(lower: f64, upper: f64) -> Result<Self, SdeError> {
        if !(lower > 0.0 && lower < upper && upper.is_finite()) {
            return Err(SdeError::InvalidBounds { t: 0.0, lower, upper });
        }
        Ok(Self::new(lower, upper))
    }

    #[inline]
    pub fn lower(&self, t: f64) -> f64 {
        self.lower.eval(t)
    }

    #[inline]
    pub fn upper(&self, t: f64) -> f64 {
        self.upper.eval(t)
    }

    pub fn lower_fn(&self) -> &TimeFn {
        &self.lower
    }

    pub fn upper_fn(&self) -> &TimeFn {
        &self.upper
    }

    /// Smallest `φ(t_k)` over the grid nodes.
    pub fn min_lower(&self, grid: &TimeGrid) -> f64 {
        grid.nodes().map(|t| self.lower(t)).fold(f64::INFINITY, f64::min)
    }

    /// Checks `0 < φ < ψ` at every node and, for tabulated curves, that the
    /// knot-to-knot Hölder ratio of order `hurst` stays bounded.
    pub fn validate(&self, grid: &TimeGrid, hurst: f64) -> Result<(), SdeError> {
        for t in grid.nodes() {
            let (lower, upper) = (self.lower(t), self.upper(t));
            if !(lower > 0.0 && lower < upper && upper.is_finite()) {
                return Err(SdeError::InvalidBounds { t, lower, upper });
            }
        }
        for f in [&self.lower, &self.upper] {
            if let TimeFn::Tabulated { times, values } = f {
                if times.len() != values.len() || times.is_empty() || times.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(SdeError::BadTable);
                }
                let worst = times
                    .windows(2)
                    .zip(values.windows(2))
                    .map(|(t, v)| (v[1] - v[0]).abs() / (t[1] - t[0]).powf(hurst))
                    .fold(0.0, f64::max);
                if !(worst <= HOLDER_CEILING) {
                    return Err(SdeError::BadTable);
                }
            }
        }
        Ok(())
    }
}

/// Grid values `Ŷ(t_0), …, Ŷ(t_N)`, held constant on `[t_k, t_{k+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct VolatilityPath {
    values: Vec<f64>,
    dt: f64,
}

impl VolatilityPath {
    pub fn from_values(values: Vec<f64>, grid: &TimeGrid) -> Result<Self, SdeError> {
        if values.len() != grid.steps() + 1 {
            return Err(SdeError::DimensionMismatch { expected: grid.steps() + 1, got: values.len() });
        }
        Ok(Self { values, dt: grid.dt() })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Left-continuous piecewise-constant extension.
    pub fn at(&self, t: f64) -> f64 {
        if self.dt == 0.0 || t <= 0.0 {
            return self.values[0];
        }
        let k = ((t / self.dt).floor() as usize).min(self.values.len() - 1);
        self.values[k]
    }
}

/// Entrywise `1/Ŷ`.
pub fn inverse_path(path: &VolatilityPath) -> Vec<f64> {
    path.values.iter().map(|y| 1.0 / y).collect()
}

/// Solves `y − Δ·b(t, y) = y_prev + ΔZ` for `y ∈ (φ(t), ψ(t))`.
///
/// The left side is strictly increasing and maps the open band onto ℝ, so
/// the root is unique. It is located by Newton iteration safeguarded by a
/// shrinking bisection bracket.
pub fn implicit_step(
    y_prev: f64,
    t_next: f64,
    dz: f64,
    drift: &DriftSpec,
    bounds: &SandwichBounds,
    dt: f64,
    tol: f64,
) -> Result<f64, SdeError> {
    let (phi, psi) = (bounds.lower(t_next), bounds.upper(t_next));
    solve_band(y_prev, y_prev + dz, t_next, phi, psi, drift, dt, tol)
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn solve_band(start: f64, target: f64, t: f64, phi: f64, psi: f64, drift: &DriftSpec, dt: f64, tol: f64) -> Result<f64, SdeError> {
    let eps = f64::EPSILON * psi.abs().max(1.0);
    let mut lo = phi + eps;
    let mut hi = psi - eps;
    let h = |y: f64| y - dt * drift.value(t, y, phi, psi) - target;
    if h(lo) >= 0.0 {
        return Ok(lo);
    }
    if h(hi) <= 0.0 {
        return Ok(hi);
    }

    let mut y = if start > lo && start < hi { start } else { 0.5 * (lo + hi) };
    for _ in 0..MAX_ITERATIONS {
        let (b, db) = drift.value_and_derivative(t, y, phi, psi);
        let r = y - dt * b - target;
        if r.abs() <= tol {
            return Ok(y);
        }
        if r < 0.0 {
            lo = y;
        } else {
            hi = y;
        }
        if hi - lo <= 4.0 * f64::EPSILON * y.abs() {
            return Ok(y);
        }
        let newton = y - r / (1.0 - dt * db);
        y = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    Err(SdeError::NoConvergence { t, target })
}

/// Runs the drift-implicit Euler scheme over a noise path `Z(t_0..t_N)`.
pub fn simulate_volatility_path(
    z: &[f64],
    drift: &DriftSpec,
    bounds: &SandwichBounds,
    grid: &TimeGrid,
    y0: f64,
    tol: f64,
) -> Result<VolatilityPath, SdeError> {
    let mut values = vec![0.0; grid.steps() + 1];
    step_path(z, drift, bounds, grid, y0, tol, &mut values)?;
    Ok(VolatilityPath { values, dt: grid.dt() })
}

fn step_path(
    z: &[f64],
    drift: &DriftSpec,
    bounds: &SandwichBounds,
    grid: &TimeGrid,
    y0: f64,
    tol: f64,
    out: &mut [f64],
) -> Result<(), SdeError> {
    let n = grid.steps();
    if z.len() != n + 1 || out.len() != n + 1 {
        return Err(SdeError::DimensionMismatch { expected: n + 1, got: z.len().min(out.len()) });
    }
    let (lower, upper) = (bounds.lower(0.0), bounds.upper(0.0));
    if !(y0 > lower && y0 < upper) {
        return Err(SdeError::BadInitialValue { y0, lower, upper });
    }
    let dt = grid.dt();
    if !check_mesh_condition(dt, drift) {
        return Err(SdeError::MeshCondition { dt, bound: drift.derivative_bound() });
    }
    let constant = (bounds.lower.as_constant(), bounds.upper.as_constant());
    out[0] = y0;
    for k in 0..n {
        let t = grid.node(k + 1);
        let (phi, psi) = match constant {
            (Some(a), Some(b)) => (a, b),
            _ => (bounds.lower(t), bounds.upper(t)),
        };
        let prev = out[k];
        out[k + 1] = solve_band(prev, prev + z[k + 1] - z[k], t, phi, psi, drift, dt, tol)?;
    }
    Ok(())
}

/// Bounds, drift, initial value and root tolerance of one volatility
/// component.
#[derive(Debug, Clone)]
pub struct VolatilityModel {
    pub bounds: SandwichBounds,
    pub drift: DriftSpec,
    pub y0: f64,
    pub tol: f64,
}

impl VolatilityModel {
    pub const DEFAULT_TOL: f64 = 1e-12;

    pub fn new(bounds: SandwichBounds, drift: DriftSpec, y0: f64) -> Self {
        Self { bounds, drift, y0, tol: Self::DEFAULT_TOL }
    }

    /// Every precondition of the scheme that can be checked before
    /// simulation.
    pub fn validate(&self, grid: &TimeGrid, hurst: f64) -> Result<(), SdeError> {
        self.bounds.validate(grid, hurst)?;
        let (lower, upper) = (self.bounds.lower(0.0), self.bounds.upper(0.0));
        if !(self.y0 > lower && self.y0 < upper) {
            return Err(SdeError::BadInitialValue { y0: self.y0, lower, upper });
        }
        self.drift.check_exponent(hurst)?;
        if !check_mesh_condition(grid.dt(), &self.drift) {
            return Err(SdeError::MeshCondition { dt: grid.dt(), bound: self.drift.derivative_bound() });
        }
        Ok(())
    }

    pub fn simulate(&self, z: &[f64], grid: &TimeGrid) -> Result<VolatilityPath, SdeError> {
        simulate_volatility_path(z, &self.drift, &self.bounds, grid, self.y0, self.tol)
    }

    /// Same as [`simulate`](Self::simulate) but writes into `out`
    /// (length `N+1`).
    pub fn simulate_into(&self, z: &[f64], grid: &TimeGrid, out: &mut [f64]) -> Result<(), SdeError> {
        step_path(z, &self.drift, &self.bounds, grid, self.y0, self.tol, out)
    }
}
