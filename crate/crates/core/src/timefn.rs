use std::fmt;
use std::sync::Arc;

use crate::driver::TimeGrid;

/// A deterministic real function of time.
///
/// Used for sandwich bounds, asset drifts and the interest rate.
#[derive(Clone)]
pub enum TimeFn {
    Constant(f64),
    Affine {
        intercept: f64,
        slope: f64,
    },
    /// Piecewise-linear interpolation through `(times[k], values[k])`,
    /// held flat outside the table.
    Tabulated {
        times: Vec<f64>,
        values: Vec<f64>,
    },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl TimeFn {
    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        TimeFn::Custom(Arc::new(f))
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TimeFn::Constant(c) => *c,
            TimeFn::Affine { intercept, slope } => intercept + slope * t,
            TimeFn::Tabulated { times, values } => interpolate(times, values, t),
            TimeFn::Custom(f) => f(t),
        }
    }

    /// Values at the left nodes `t_0, …, t_{N−1}` of `grid`.
    pub fn on_grid(&self, grid: &TimeGrid) -> Vec<f64> {
        (0..grid.steps()).map(|k| self.eval(grid.node(k))).collect()
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            TimeFn::Constant(c) => Some(*c),
            _ => None,
        }
    }
}

impl From<f64> for TimeFn {
    fn from(c: f64) -> Self {
        TimeFn::Constant(c)
    }
}

impl fmt::Debug for TimeFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeFn::Constant(c) => write!(f, "Constant({c})"),
            TimeFn::Affine { intercept, slope } => write!(f, "Affine({intercept} + {slope}t)"),
            TimeFn::Tabulated { times, .. } => write!(f, "Tabulated({} knots)", times.len()),
            TimeFn::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

fn interpolate(times: &[f64], values: &[f64], t: f64) -> f64 {
    debug_assert_eq!(times.len(), values.len());
    match times.len() {
        0 => f64::NAN,
        1 => values[0],
        _ => {
            if t <= times[0] {
                return values[0];
            }
            let last = times.len() - 1;
            if t >= times[last] {
                return values[last];
            }
            // first knot strictly greater than t
            let hi = times.partition_point(|&x| x <= t);
            let lo = hi - 1;
            let w = (t - times[lo]) / (times[hi] - times[lo]);
            values[lo] + w * (values[hi] - values[lo])
        }
    }
}
