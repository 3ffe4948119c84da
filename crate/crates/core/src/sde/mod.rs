//! Sandwiched volatility: bounds, singular drifts and the drift-implicit
//! Euler scheme
//!
//! ```text
//! Ŷ(t_{k+1}) = Ŷ(t_k) + b(t_{k+1}, Ŷ(t_{k+1}))·Δ + Z(t_{k+1}) − Z(t_k)
//! ```
//!
//! solved for `Ŷ(t_{k+1})` inside `(φ(t_{k+1}), ψ(t_{k+1}))`.

mod drift;
mod implicit;

use thiserror::Error;

pub use drift::{check_mesh_condition, DriftSpec};
pub use implicit::{implicit_step, inverse_path, simulate_volatility_path, SandwichBounds, VolatilityModel, VolatilityPath};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SdeError {
    #[error("bounds violate 0 < φ < ψ at t = {t} (φ = {lower}, ψ = {upper})")]
    InvalidBounds { t: f64, lower: f64, upper: f64 },
    #[error("tabulated bound has non-increasing knot times")]
    BadTable,
    #[error("initial value {y0} is outside ({lower}, {upper})")]
    BadInitialValue { y0: f64, lower: f64, upper: f64 },
    #[error("drift parameter {name} = {value} is invalid")]
    BadDrift { name: &'static str, value: f64 },
    #[error("drift exponent γ = {gamma} must exceed 1/H − 1 = {threshold}")]
    GammaTooSmall { gamma: f64, threshold: f64 },
    #[error("mesh {dt} violates Δ·sup ∂b/∂y < 1 (bound {bound})")]
    MeshCondition { dt: f64, bound: f64 },
    #[error("implicit step did not converge at t = {t} (target {target})")]
    NoConvergence { t: f64, target: f64 },
    #[error("noise path has {got} nodes, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}
