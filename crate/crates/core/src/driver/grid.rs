use crate::error::{Error, Result};

/// Uniform partition `0 = t₀ < t₁ < … < t_N = T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
}

impl TimeGrid {
    /// `steps == 0` is accepted and yields the degenerate single-node grid.
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidModel(format!("horizon must be positive, got {horizon}")));
        }
        Ok(Self { horizon, steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Mesh `Δ_N = T/N` (zero for the degenerate grid).
    pub fn dt(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.horizon / self.steps as f64
        }
    }

    /// Node `t_n = Tn/N`, exact at both ends.
    pub fn node(&self, n: usize) -> f64 {
        debug_assert!(n <= self.steps);
        if n == 0 {
            0.0
        } else if n == self.steps {
            self.horizon
        } else {
            self.horizon * n as f64 / self.steps as f64
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(move |n| self.node(n))
    }

    /// Coarsen by an integer factor; `None` unless `factor` divides `N`.
    pub fn coarsen(&self, factor: usize) -> Option<TimeGrid> {
        if factor == 0 || self.steps % factor != 0 {
            return None;
        }
        Some(TimeGrid { horizon: self.horizon, steps: self.steps / factor })
    }
}
