//! Prices, discounting and the approximate minimal martingale density.
//!
//! Every sum here is a left-point sum over the grid, so node-value slices
//! have length `N` (the values at `t_0 … t_{N−1}`). Use
//! [`TimeFn::on_grid`] to tabulate drifts and rates once per run.

use thiserror::Error;

use crate::driver::{RowMatrix, SquareMatrix, TimeGrid};
use crate::timefn::TimeFn;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MarketError {
    #[error("{what}: expected length {expected}, got {got}")]
    DimensionMismatch { what: &'static str, expected: usize, got: usize },
    #[error("{field} = {value} is invalid")]
    InvalidParameter { field: String, value: f64 },
}

fn check_len(what: &'static str, expected: usize, got: usize) -> Result<(), MarketError> {
    if expected == got {
        Ok(())
    } else {
        Err(MarketError::DimensionMismatch { what, expected, got })
    }
}

/// Asset drifts `μ_i`, short rate `ν`, spot prices and basket weights.
#[derive(Debug, Clone)]
pub struct MarketParams {
    pub mu: Vec<TimeFn>,
    pub nu: TimeFn,
    pub s0: Vec<f64>,
    pub weights: Vec<f64>,
}

impl MarketParams {
    pub fn assets(&self) -> usize {
        self.s0.len()
    }

    /// Excess drift `μ̃_i(t) = μ_i(t) − ν(t)`.
    pub fn excess_drift(&self, i: usize, t: f64) -> f64 {
        self.mu[i].eval(t) - self.nu.eval(t)
    }

    pub fn validate(&self, grid: &TimeGrid) -> Result<(), MarketError> {
        let d = self.s0.len();
        check_len("mu", d, self.mu.len())?;
        check_len("weights", d, self.weights.len())?;
        for (i, &s) in self.s0.iter().enumerate() {
            if !(s > 0.0 && s.is_finite()) {
                return Err(MarketError::InvalidParameter { field: format!("s0[{i}]"), value: s });
            }
        }
        for (i, &a) in self.weights.iter().enumerate() {
            if !(a > 0.0 && a.is_finite()) {
                return Err(MarketError::InvalidParameter { field: format!("weights[{i}]"), value: a });
            }
        }
        for t in grid.nodes() {
            let r = self.nu.eval(t);
            if !(r >= 0.0 && r.is_finite()) {
                return Err(MarketError::InvalidParameter { field: "nu".into(), value: r });
            }
            for (i, m) in self.mu.iter().enumerate() {
                let v = m.eval(t);
                if !v.is_finite() {
                    return Err(MarketError::InvalidParameter { field: format!("mu[{i}]"), value: v });
                }
            }
        }
        Ok(())
    }

    /// Node tables of `μ_i`, `μ̃_i` and `ν` on the left grid nodes.
    pub fn tabulate(&self, grid: &TimeGrid) -> MarketNodes {
        let nu = self.nu.on_grid(grid);
        let mu: Vec<Vec<f64>> = self.mu.iter().map(|m| m.on_grid(grid)).collect();
        let excess = mu.iter().map(|m| m.iter().zip(&nu).map(|(a, b)| a - b).collect()).collect();
        MarketNodes { mu, excess, nu }
    }
}

/// Left-node tables derived from [`MarketParams`].
#[derive(Debug, Clone)]
pub struct MarketNodes {
    pub mu: Vec<Vec<f64>>,
    pub excess: Vec<Vec<f64>>,
    pub nu: Vec<f64>,
}

/// `X̂(t_n) = X0 + Δ Σ_{k<n} (μ(t_k) − Ŷ²(t_k)/2) + Σ_{k<n} Ŷ(t_k) ΔBˢ(t_k)`.
///
/// `y` may hold `N` or `N+1` values; only the first `N` are used.
pub fn simulate_log_price(y: &[f64], dbs: &[f64], mu: &[f64], grid: &TimeGrid, x0: f64) -> Result<Vec<f64>, MarketError> {
    let n = grid.steps();
    let mut out = vec![0.0; n + 1];
    log_price_into(y, dbs, mu, grid, x0, &mut out)?;
    Ok(out)
}

/// [`simulate_log_price`] writing into `out` (length `N+1`).
pub fn log_price_into(y: &[f64], dbs: &[f64], mu: &[f64], grid: &TimeGrid, x0: f64, out: &mut [f64]) -> Result<(), MarketError> {
    let n = grid.steps();
    if y.len() < n {
        return Err(MarketError::DimensionMismatch { what: "volatility path", expected: n, got: y.len() });
    }
    check_len("price increments", n, dbs.len())?;
    check_len("drift nodes", n, mu.len())?;
    check_len("log-price output", n + 1, out.len())?;
    let dt = grid.dt();
    let mut x = x0;
    out[0] = x;
    for k in 0..n {
        let yk = y[k];
        x += dt * (mu[k] - 0.5 * yk * yk) + yk * dbs[k];
        out[k + 1] = x;
    }
    Ok(())
}

/// Girsanov kernel rows `θ_j(t_n) = Σ_k ℓ⁻¹_{j,k} μ̃_k(t_n)/Ŷ_k(t_n)` paired
/// with `ΔW_j`, accumulated into `(Σ θΔW, Δ Σ θ²)`.
fn girsanov_sums(ys: &[&[f64]], excess: &[Vec<f64>], dw: &RowMatrix, l11_inv: &SquareMatrix, dt: f64) -> (f64, f64) {
    let d = ys.len();
    let n = dw.cols();
    let mut ratio = vec![0.0; d];
    let (mut stoch, mut quad) = (0.0, 0.0);
    for t in 0..n {
        for k in 0..d {
            ratio[k] = excess[k][t] / ys[k][t];
        }
        for j in 0..d {
            let row = l11_inv.row(j);
            let theta: f64 = row.iter().zip(&ratio).map(|(l, r)| l * r).sum();
            stoch += theta * dw.get(j, t);
            quad += theta * theta;
        }
    }
    (stoch, dt * quad)
}

/// `Ê_T = exp{−Σ θ·ΔW − ½ Δ Σ θ²}`, computed in log space.
///
/// `dw` holds `ΔW = ρΔW̃` (at least the first `d` rows are read).
pub fn martingale_density(
    ys: &[&[f64]],
    excess: &[Vec<f64>],
    dw: &RowMatrix,
    l11_inv: &SquareMatrix,
    grid: &TimeGrid,
) -> Result<f64, MarketError> {
    let d = ys.len();
    let n = grid.steps();
    check_len("excess drift assets", d, excess.len())?;
    check_len("block inverse", d, l11_inv.dim())?;
    if dw.rows() < d {
        return Err(MarketError::DimensionMismatch { what: "ΔW rows", expected: d, got: dw.rows() });
    }
    check_len("ΔW columns", n, dw.cols())?;
    for k in 0..d {
        if ys[k].len() < n {
            return Err(MarketError::DimensionMismatch { what: "volatility path", expected: n, got: ys[k].len() });
        }
        check_len("excess drift nodes", n, excess[k].len())?;
    }
    if excess.iter().all(|e| e.iter().all(|v| *v == 0.0)) {
        return Ok(1.0);
    }
    let (stoch, quad) = girsanov_sums(ys, excess, dw, l11_inv, grid.dt());
    Ok((-stoch - 0.5 * quad).exp())
}

/// `I₁ = Σ_k ΔW̃₁(t_k) / Ŷ₁(t_k)`.
pub fn ito_integral_inverse_vol(y1: &[f64], dw1: &[f64]) -> Result<f64, MarketError> {
    if y1.len() < dw1.len() {
        return Err(MarketError::DimensionMismatch { what: "volatility path", expected: dw1.len(), got: y1.len() });
    }
    Ok(dw1.iter().zip(y1).map(|(w, y)| w / y).sum())
}

/// `Δ Σ_n Σ_k β_k μ̃_k(t_n) / (Ŷ_k(t_n) Ŷ₁(t_n))`.
pub fn correction_integral(ys: &[&[f64]], excess: &[Vec<f64>], beta: &[f64], grid: &TimeGrid) -> Result<f64, MarketError> {
    let d = ys.len();
    let n = grid.steps();
    check_len("beta", d, beta.len())?;
    check_len("excess drift assets", d, excess.len())?;
    let mut acc = 0.0;
    for t in 0..n {
        let y1 = ys[0][t];
        let mut inner = 0.0;
        for k in 0..d {
            inner += beta[k] * excess[k][t] / ys[k][t];
        }
        acc += inner / y1;
    }
    Ok(grid.dt() * acc)
}

/// `exp(−Δ Σ_n ν(t_n))`.
pub fn discount_factor(nu: &[f64], grid: &TimeGrid) -> f64 {
    (-grid.dt() * nu.iter().sum::<f64>()).exp()
}
