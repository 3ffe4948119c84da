use std::f64::consts::TAU;

use super::EstimatorError;
use crate::driver::TimeGrid;
use crate::payoff::PayoffSpec;
use crate::quad;

/// Truncation of the inner integral, in conditional standard deviations.
pub const TRUNCATION: f64 = 10.0;
const REL_TOL: f64 = 1e-8;
const ABS_TOL: f64 = 1e-12;
const MAX_PANELS: usize = 1 << 20;

/// Path functionals that make the log-price conditionally Gaussian given
/// the volatility noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CondGaussSummary {
    /// Conditional mean `m(Ŷ)`.
    pub mean: f64,
    /// `V₁² = Δ Σ Ŷ²`.
    pub v1_sq: f64,
    /// `V₂² = Δ Σ Ŷ⁻²`.
    pub v2_sq: f64,
}

impl CondGaussSummary {
    /// `m = X0 + Δ Σ (μ − Ŷ²/2) + u₁₂ Σ Ŷ ΔW̃₂`, plus `V₁²` and `V₂²`.
    pub fn from_path(y: &[f64], dw2: &[f64], mu: &[f64], u12: f64, grid: &TimeGrid, x0: f64) -> Self {
        let dt = grid.dt();
        let n = grid.steps();
        let (mut drift, mut noise, mut sq, mut inv_sq) = (0.0, 0.0, 0.0, 0.0);
        for k in 0..n {
            let yk = y[k];
            drift += mu[k] - 0.5 * yk * yk;
            noise += yk * dw2[k];
            sq += yk * yk;
            inv_sq += 1.0 / (yk * yk);
        }
        Self { mean: x0 + dt * drift + u12 * noise, v1_sq: dt * sq, v2_sq: dt * inv_sq }
    }

    /// `det Ĉ = u₁₁²(V₁²V₂² − T²)`.
    pub fn covariance_det(&self, u11: f64, horizon: f64) -> f64 {
        u11 * u11 * (self.v1_sq * self.v2_sq - horizon * horizon)
    }
}

/// One conditional-Gaussian sample
///
/// ```text
/// 1/(√(2π) u₁₁³) ∫ G(x) (x − m)/V₁³ · exp(−(x − m)²/(2u₁₁²V₁²)) dx
/// ```
///
/// over `m ± 10·u₁₁V₁`, split at the kinks of `G`.
pub fn cond_gauss_sample(payoff: &PayoffSpec, kinks: &[f64], s: &CondGaussSummary, u11: f64) -> Result<f64, EstimatorError> {
    let v1 = s.v1_sq.sqrt();
    let sd = u11 * v1;
    let (a, b) = (s.mean - TRUNCATION * sd, s.mean + TRUNCATION * sd);
    let prefactor = 1.0 / (TAU.sqrt() * u11.powi(3) * v1.powi(3));
    let scale = 1.0 / (2.0 * sd * sd);
    let integrand = |x: f64| {
        let r = x - s.mean;
        payoff.eval_g(x) * r * (-r * r * scale).exp()
    };
    // the weight alone integrates to ≈ sd² per side; use it as a magnitude
    let magnitude = payoff.eval_g(s.mean).abs().max(1.0) * sd * sd;
    let inner = kinks.iter().copied().filter(|k| *k > a && *k < b);
    let mut total = 0.0;
    let mut left = a;
    for right in inner.chain(std::iter::once(b)) {
        match quad::simpson_doubling(integrand, left, right, REL_TOL, ABS_TOL * magnitude, MAX_PANELS) {
            Ok(e) => total += e.value,
            Err(_) => return Err(EstimatorError::QuadratureFailure { mean: s.mean, v1_sq: s.v1_sq }),
        }
        left = right;
    }
    Ok(prefactor * total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::payoff::Atom;
    use vsv_oracles::{gaussian_call, gaussian_digital};

    fn flat(y: f64, n: usize) -> (Vec<f64>, TimeGrid) {
        (vec![y; n + 1], TimeGrid::new(1.0, n).unwrap())
    }

    #[test]
    fn summary_closed_forms() {
        let (y, g) = flat(1.0, 10);
        let s = CondGaussSummary::from_path(&y, &[0.0; 10], &[1.5; 10], 0.0, &g, 0.0);
        assert!((s.mean - 1.0).abs() < 1e-14);
        assert!((s.v1_sq - 1.0).abs() < 1e-14);
        assert!((s.v2_sq - 1.0).abs() < 1e-14);
        assert!(s.covariance_det(1.0, 1.0).abs() < 1e-13);
        let y: Vec<f64> = (0..=10).map(|k| 1.0 + 0.1 * k as f64).collect();
        let s = CondGaussSummary::from_path(&y, &[0.0; 10], &[0.0; 10], 0.0, &g, 0.0);
        assert!(s.v1_sq * s.v2_sq > 1.0);
    }

    #[test]
    fn constant_g_integrates_to_zero() {
        let unit = PayoffSpec::new(vec![]).unwrap();
        for (m, v) in [(0.0, 1.0), (1.3, 0.2), (-4.0, 3.0)] {
            let s = CondGaussSummary { mean: m, v1_sq: v, v2_sq: 1.0 };
            assert!(cond_gauss_sample(&unit, &[], &s, 1.0).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn stein_identity_on_constant_volatility() {
        let p = PayoffSpec::digital_ladder();
        let kinks = p.log_kinks();
        let (y, g) = flat(1.0, 100);
        let s = CondGaussSummary::from_path(&y, &[0.0; 100], &[1.5; 100], 0.0, &g, 0.0);
        let v = cond_gauss_sample(&p, &kinks, &s, 1.0).unwrap();
        let want: f64 = [1.0, 2.0, 4.0].iter().map(|k| gaussian_digital(1.0, 1.0, *k)).sum();
        assert!((v - want).abs() < 1e-6, "{v} vs {want}");
    }

    #[test]
    fn stein_identity_with_correlation() {
        let p = PayoffSpec::new(vec![Atom::indicator(1.5, 2.0), Atom::call(0.8, 0.5)]).unwrap();
        let kinks = p.log_kinks();
        let u11: f64 = 0.6;
        for (m, v1_sq) in [(0.2, 0.5), (0.9, 2.0), (-0.3, 0.05)] {
            let s = CondGaussSummary { mean: m, v1_sq, v2_sq: 1.0 };
            let v = cond_gauss_sample(&p, &kinks, &s, u11).unwrap();
            let sd = u11 * v1_sq.sqrt();
            let want = 2.0 * gaussian_digital(m, sd, 1.5) + 0.5 * gaussian_call(m, sd, 0.8);
            assert!((v - want).abs() < 1e-6, "{v} vs {want}");
        }
    }
}
