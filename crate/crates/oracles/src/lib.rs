//! Brute-force reference computations for the test suites.
//!
//! Everything here is deliberately written along a different numerical route
//! than the library code it checks: tanh-sinh quadrature instead of
//! Gauss–Kronrod, plain bisection instead of safeguarded Newton, closed-form
//! Gaussian expectations instead of per-path quadrature.

use statrs::function::erf::erfc;
use statrs::function::gamma::gamma;

/// Tanh-sinh (double exponential) quadrature of `f` over `[a, b]`.
///
/// Copes with integrable endpoint singularities; never evaluates `f` at the
/// endpoints. Halves the step until two successive levels agree to `tol`
/// relative.
pub fn tanh_sinh(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let half = 0.5 * (b - a);
    let pi2 = std::f64::consts::FRAC_PI_2;
    // node at distance `dist` from the nearest endpoint, computed without
    // cancellation
    let term = |t: f64| -> f64 {
        let u = pi2 * t.sinh();
        let cosh_u = u.cosh();
        let w = pi2 * t.cosh() / (cosh_u * cosh_u);
        let dist = half / (u.exp() * cosh_u); // = half·(1 − tanh u)
        let mut s = 0.0;
        if dist > 0.0 {
            let right = b - dist;
            let left = a + dist;
            if right > a && right < b {
                s += f(right);
            }
            if t != 0.0 && left > a && left < b {
                s += f(left);
            }
        }
        w * s
    };
    let t_max = 4.5;
    let mut h = 0.5;
    let mut sum = term(0.0);
    let mut k = 1;
    while (k as f64) * h <= t_max {
        sum += term(k as f64 * h);
        k += 1;
    }
    let mut prev = sum * h * half;
    for _ in 0..12 {
        h *= 0.5;
        let mut k = 1;
        while (k as f64) * h <= t_max {
            sum += term(k as f64 * h);
            k += 2;
        }
        let cur = sum * h * half;
        if (cur - prev).abs() <= tol * cur.abs().max(1e-300) {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// Molchan–Golosov kernel with the inner integral taken directly in `u`.
pub fn fbm_kernel(h: f64, t: f64, s: f64) -> f64 {
    if t <= s {
        return 0.0;
    }
    let a = h - 0.5;
    let ch = (2.0 * h * gamma(1.5 - h) / (gamma(h + 0.5) * gamma(2.0 - 2.0 * h))).sqrt();
    let inner = tanh_sinh(|u| u.powf(a - 1.0) * (u - s).powf(a), s, t, 1e-13);
    ch * ((t / s).powf(a) * (t - s).powf(a) - a * s.powf(-a) * inner)
}

/// `Cov(Z(a), Z(b)) = ∫₀^{min(a,b)} 𝒦(a,u)𝒦(b,u) du`.
pub fn covariance_via_kernel(kernel: &impl Fn(f64, f64) -> f64, a: f64, b: f64) -> f64 {
    let top = a.min(b);
    if top <= 0.0 {
        return 0.0;
    }
    tanh_sinh(|u| kernel(a, u) * kernel(b, u), 0.0, top, 1e-10)
}

/// Covariance of the increments over `[nodes[m], nodes[m+1]]` and
/// `[nodes[n], nodes[n+1]]`, expanded into four kernel double integrals.
pub fn increment_covariance_via_kernel(kernel: impl Fn(f64, f64) -> f64, _hurst: f64, nodes: &[f64], m: usize, n: usize) -> f64 {
    let c = |x: f64, y: f64| covariance_via_kernel(&kernel, x, y);
    c(nodes[m + 1], nodes[n + 1]) - c(nodes[m + 1], nodes[n]) - c(nodes[m], nodes[n + 1]) + c(nodes[m], nodes[n])
}

/// Plain bisection for an increasing function on `(lo, hi)`.
pub fn bisect_increasing(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// `E[1{e^X > K}]` for `X ~ N(mean, sd²)`.
pub fn gaussian_digital(mean: f64, sd: f64, strike: f64) -> f64 {
    if strike <= 0.0 {
        return 1.0;
    }
    normal_cdf((mean - strike.ln()) / sd)
}

/// `E[(e^X − K)⁺]` for `X ~ N(mean, sd²)`.
pub fn gaussian_call(mean: f64, sd: f64, strike: f64) -> f64 {
    let fwd = (mean + 0.5 * sd * sd).exp();
    if strike <= 0.0 {
        return fwd - strike;
    }
    let d2 = (mean - strike.ln()) / sd;
    fwd * normal_cdf(d2 + sd) - strike * normal_cdf(d2)
}

/// Simple least-squares fit `y = a + b x`; returns `b`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
