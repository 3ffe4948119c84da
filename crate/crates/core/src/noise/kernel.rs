use std::fmt;
use std::sync::Arc;

use statrs::function::gamma::gamma;

use super::NoiseError;
use crate::quad;

const INNER_REL_TOL: f64 = 1e-10;
const INNER_MAX_INTERVALS: usize = 4000;

/// Volterra kernel driving one volatility component.
#[derive(Clone)]
pub enum KernelSpec {
    /// Molchan–Golosov kernel: `Z` is a fractional Brownian motion.
    FbmMolchanGolosov { hurst: f64 },
    /// Arbitrary square-integrable kernel with the stated Hölder order.
    Generic { kernel: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>, hurst: f64 },
}

impl KernelSpec {
    pub fn fbm(hurst: f64) -> Result<Self, NoiseError> {
        check_hurst(hurst)?;
        Ok(KernelSpec::FbmMolchanGolosov { hurst })
    }

    pub fn generic(hurst: f64, kernel: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Result<Self, NoiseError> {
        check_hurst(hurst)?;
        Ok(KernelSpec::Generic { kernel: Arc::new(kernel), hurst })
    }

    /// `𝒦 ≡ c` on `{s < t}`: `Z = c·Bʸ`.
    pub fn constant(c: f64) -> Self {
        KernelSpec::Generic { kernel: Arc::new(move |_, _| c), hurst: 0.5 }
    }

    pub fn hurst(&self) -> f64 {
        match self {
            KernelSpec::FbmMolchanGolosov { hurst } | KernelSpec::Generic { hurst, .. } => *hurst,
        }
    }

    /// `𝒦(t, s)`, zero whenever `t ≤ s`.
    pub fn eval(&self, t: f64, s: f64) -> Result<f64, NoiseError> {
        if t <= s {
            return Ok(0.0);
        }
        match self {
            KernelSpec::FbmMolchanGolosov { hurst } => fbm_kernel(*hurst, t, s),
            KernelSpec::Generic { kernel, .. } => Ok(kernel(t, s)),
        }
    }
}

impl fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::FbmMolchanGolosov { hurst } => write!(f, "FbmMolchanGolosov {{ hurst: {hurst} }}"),
            KernelSpec::Generic { hurst, .. } => write!(f, "Generic {{ hurst: {hurst}, .. }}"),
        }
    }
}

fn check_hurst(h: f64) -> Result<(), NoiseError> {
    if h > 0.0 && h < 1.0 {
        Ok(())
    } else {
        Err(NoiseError::InvalidHurst(h))
    }
}

/// `C_H = (2HΓ(3/2−H) / (Γ(H+1/2)Γ(2−2H)))^{1/2}`.
pub fn fbm_normalizer(hurst: f64) -> f64 {
    (2.0 * hurst * gamma(1.5 - hurst) / (gamma(hurst + 0.5) * gamma(2.0 - 2.0 * hurst))).sqrt()
}

/// Molchan–Golosov kernel
/// `C_H((t/s)^{H−½}(t−s)^{H−½} − (H−½)s^{½−H}∫ₛᵗ u^{H−3/2}(u−s)^{H−½}du)`.
///
/// The inner integral is computed after the substitution `w = (u−s)^{H+½}`,
/// which removes the `(u−s)^{H−½}` endpoint singularity.
pub fn fbm_kernel(hurst: f64, t: f64, s: f64) -> Result<f64, NoiseError> {
    check_hurst(hurst)?;
    if t <= s {
        return Ok(0.0);
    }
    if hurst == 0.5 {
        return Ok(1.0);
    }
    if s <= 0.0 {
        return Err(NoiseError::DomainError { t, s });
    }
    let a = hurst - 0.5;
    let leading = (t / s).powf(a) * (t - s).powf(a);
    let p = 1.0 / (a + 1.0);
    let upper = (t - s).powf(a + 1.0);
    let inner = quad::integrate(|w| (s + w.powf(p)).powf(a - 1.0), 0.0, upper, INNER_REL_TOL * 0.1, 0.0, INNER_MAX_INTERVALS)
        .map_err(|_| NoiseError::KernelQuadrature { t, s })?
        .value
        * p;
    Ok(fbm_normalizer(hurst) * (leading - a * s.powf(-a) * inner))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizer_is_one_at_half() {
        assert!((fbm_normalizer(0.5) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn brownian_kernel_is_one() {
        for &(t, s) in &[(1.0, 0.5), (0.3, 1e-9), (2.0, 1.999)] {
            assert_eq!(fbm_kernel(0.5, t, s).unwrap(), 1.0);
        }
    }

    #[test]
    fn volterra_property() {
        for h in [0.3, 0.5, 0.7] {
            assert_eq!(fbm_kernel(h, 0.5, 0.5).unwrap(), 0.0);
            assert_eq!(fbm_kernel(h, 0.4, 0.5).unwrap(), 0.0);
        }
        let k = KernelSpec::generic(0.5, |_, _| 3.0).unwrap();
        assert_eq!(k.eval(0.2, 0.7).unwrap(), 0.0);
        assert_eq!(k.eval(0.7, 0.2).unwrap(), 3.0);
    }

    #[test]
    fn rejects_singular_and_invalid_inputs() {
        assert!(matches!(fbm_kernel(0.7, 1.0, 0.0), Err(NoiseError::DomainError { .. })));
        assert!(matches!(fbm_kernel(1.0, 1.0, 0.5), Err(NoiseError::InvalidHurst(_))));
        assert!(KernelSpec::fbm(0.0).is_err());
    }

    #[test]
    fn matches_independent_quadrature() {
        for &(h, t, s) in &[(0.7, 1.0, 0.5), (0.3, 1.0, 0.5), (0.7, 1.0, 1e-4), (0.3, 0.8, 0.7999), (0.9, 2.0, 0.1)] {
            let expected = vsv_oracles::fbm_kernel(h, t, s);
            let got = fbm_kernel(h, t, s).unwrap();
            assert!((got - expected).abs() <= 1e-8 * expected.abs().max(1.0), "H={h} t={t} s={s}: {got} vs {expected}");
        }
    }
}
