use std::fmt;
use std::sync::Arc;

use super::SdeError;

type Surface = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Sandwiched drift `b(t, y)`.
#[derive(Clone)]
pub enum DriftSpec {
    /// `b(t,y) = c₁/(y−φ(t))^γ − c₂/(ψ(t)−y)^γ`.
    TwoSidedPower { c1: f64, c2: f64, gamma: f64 },
    /// User drift with its `y`-derivative and an upper bound `c` on it.
    General { drift: Surface, derivative: Surface, derivative_bound: f64 },
}

impl DriftSpec {
    pub fn two_sided_power(c1: f64, c2: f64, gamma: f64) -> Result<Self, SdeError> {
        for (name, value) in [("c1", c1), ("c2", c2), ("gamma", gamma)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(SdeError::BadDrift { name, value });
            }
        }
        Ok(DriftSpec::TwoSidedPower { c1, c2, gamma })
    }

    pub fn general(
        drift: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        derivative_bound: f64,
    ) -> Self {
        DriftSpec::General { drift: Arc::new(drift), derivative: Arc::new(derivative), derivative_bound }
    }

    /// `b(t, y)` given the bound values `φ(t)`, `ψ(t)`.
    #[inline]
    pub fn value(&self, t: f64, y: f64, lower: f64, upper: f64) -> f64 {
        match self {
            DriftSpec::TwoSidedPower { c1, c2, gamma } => c1 * inv_pow(y - lower, *gamma) - c2 * inv_pow(upper - y, *gamma),
            DriftSpec::General { drift, .. } => drift(t, y),
        }
    }

    /// `∂b/∂y (t, y)`.
    #[inline]
    pub fn derivative(&self, t: f64, y: f64, lower: f64, upper: f64) -> f64 {
        match self {
            DriftSpec::TwoSidedPower { c1, c2, gamma } => {
                -gamma * (c1 * inv_pow(y - lower, gamma + 1.0) + c2 * inv_pow(upper - y, gamma + 1.0))
            }
            DriftSpec::General { derivative, .. } => derivative(t, y),
        }
    }

    /// `(b, ∂b/∂y)` in one pass.
    #[inline]
    pub fn value_and_derivative(&self, t: f64, y: f64, lower: f64, upper: f64) -> (f64, f64) {
        match self {
            DriftSpec::TwoSidedPower { c1, c2, gamma } => {
                let (u, v) = (1.0 / (y - lower), 1.0 / (upper - y));
                let (pu, pv) = (c1 * pow(u, *gamma), c2 * pow(v, *gamma));
                (pu - pv, -gamma * (pu * u + pv * v))
            }
            DriftSpec::General { drift, derivative, .. } => (drift(t, y), derivative(t, y)),
        }
    }

    /// Upper bound `c` on `∂b/∂y`. The two-sided power drift is strictly
    /// decreasing in `y`, so `0` works.
    pub fn derivative_bound(&self) -> f64 {
        match self {
            DriftSpec::TwoSidedPower { .. } => 0.0,
            DriftSpec::General { derivative_bound, .. } => *derivative_bound,
        }
    }

    /// The power drift needs `γ > 1/H − 1` for the noise's Hölder order `H`.
    pub fn check_exponent(&self, hurst: f64) -> Result<(), SdeError> {
        if let DriftSpec::TwoSidedPower { gamma, .. } = self {
            let threshold = 1.0 / hurst - 1.0;
            if !(*gamma > threshold) {
                return Err(SdeError::GammaTooSmall { gamma: *gamma, threshold });
            }
        }
        Ok(())
    }
}

impl fmt::Debug for DriftSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DriftSpec::TwoSidedPower { c1, c2, gamma } => {
                write!(f, "TwoSidedPower {{ c1: {c1}, c2: {c2}, gamma: {gamma} }}")
            }
            DriftSpec::General { derivative_bound, .. } => {
                write!(f, "General {{ derivative_bound: {derivative_bound}, .. }}")
            }
        }
    }
}

#[inline]
fn pow(x: f64, e: f64) -> f64 {
    if e.fract() == 0.0 && e.abs() <= 32.0 {
        x.powi(e as i32)
    } else {
        x.powf(e)
    }
}

#[inline]
fn inv_pow(x: f64, e: f64) -> f64 {
    pow(x, -e)
}

/// `Δ · sup ∂b/∂y < 1`.
pub fn check_mesh_condition(dt: f64, drift: &DriftSpec) -> bool {
    dt * drift.derivative_bound() < 1.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mesh_condition() {
        let power = DriftSpec::two_sided_power(1.0, 1.0, 4.0).unwrap();
        for dt in [1e-6, 0.1, 1.0, 100.0] {
            assert!(check_mesh_condition(dt, &power));
        }
        let general = DriftSpec::general(|_, y| 10.0 * y, |_, _| 10.0, 10.0);
        assert!(check_mesh_condition(0.05, &general));
        assert!(!check_mesh_condition(0.2, &general));
    }

    #[test]
    fn power_drift_shape() {
        let b = DriftSpec::two_sided_power(1.0, 1.0, 4.0).unwrap();
        assert_eq!(b.value(0.0, 2.505, 0.01, 5.0).abs() < 1e-15, true);
        assert!(b.value(0.0, 0.010001, 0.01, 5.0) > 1e19);
        assert!(b.value(0.0, 4.999999, 0.01, 5.0) < -1e23);
        for y in [0.02, 1.0, 2.505, 4.9] {
            assert!(b.derivative(0.0, y, 0.01, 5.0) < 0.0);
            let h = 1e-6;
            let fd = (b.value(0.0, y + h, 0.01, 5.0) - b.value(0.0, y - h, 0.01, 5.0)) / (2.0 * h);
            let an = b.derivative(0.0, y, 0.01, 5.0);
            assert!((fd - an).abs() <= 1e-5 * an.abs().max(1.0), "{fd} vs {an}");
            let (v, dv) = b.value_and_derivative(0.0, y, 0.01, 5.0);
            assert!((v - b.value(0.0, y, 0.01, 5.0)).abs() <= 1e-12 * v.abs().max(1.0));
            assert!((dv - an).abs() <= 1e-12 * an.abs());
        }
    }

    #[test]
    fn non_integer_exponent() {
        let b = DriftSpec::two_sided_power(1.0, 2.0, 2.5).unwrap();
        let want = 1.0 / 0.5f64.powf(2.5) - 2.0 / 1.5f64.powf(2.5);
        assert!((b.value(0.0, 1.0, 0.5, 2.5) - want).abs() < 1e-14);
    }

    #[test]
    fn exponent_threshold() {
        let b = DriftSpec::two_sided_power(1.0, 1.0, 4.0).unwrap();
        assert!(b.check_exponent(0.7).is_ok());
        assert!(b.check_exponent(0.3).is_ok());
        let weak = DriftSpec::two_sided_power(1.0, 1.0, 2.0).unwrap();
        assert!(matches!(weak.check_exponent(0.3), Err(SdeError::GammaTooSmall { .. })));
        assert!(DriftSpec::two_sided_power(0.0, 1.0, 4.0).is_err());
    }
}
