use faer::Mat;

use crate::driver::TimeGrid;

/// fBm covariance `R(t, s) = ½(t^{2H} + s^{2H} − |t−s|^{2H})`.
pub fn fbm_covariance(hurst: f64, t: f64, s: f64) -> f64 {
    let e = 2.0 * hurst;
    0.5 * (t.abs().powf(e) + s.abs().powf(e) - (t - s).abs().powf(e))
}

/// Autocovariance of unit-mesh fBm increments at lag `k`:
/// `½(|k+1|^{2H} − 2|k|^{2H} + |k−1|^{2H})`.
///
/// For `k ≥ 2` the second difference is evaluated through `expm1/ln_1p`,
/// which avoids the cancellation of the naive form at long lags.
pub fn fbm_autocovariance(hurst: f64, lag: usize) -> f64 {
    let e = 2.0 * hurst;
    match lag {
        0 => 1.0,
        1 => 0.5 * (2f64.powf(e) - 2.0),
        _ => {
            let k = lag as f64;
            let x = 1.0 / k;
            0.5 * k.powf(e) * ((e * x.ln_1p()).exp_m1() + (e * (-x).ln_1p()).exp_m1())
        }
    }
}

/// Covariance of the grid increments `Z(t_{m+1})−Z(t_m)` of fBm.
///
/// On a uniform grid the matrix is Toeplitz with entries
/// `Δ^{2H}·fbm_autocovariance(|m−n|)`, which is the four-term combination of
/// `R` written in lag form.
pub fn fbm_increment_covariance(grid: &TimeGrid, hurst: f64) -> Mat<f64> {
    let n = grid.steps();
    let scale = grid.dt().powf(2.0 * hurst);
    let lags: Vec<f64> = (0..n).map(|k| scale * fbm_autocovariance(hurst, k)).collect();
    Mat::from_fn(n, n, |i, j| lags[i.abs_diff(j)])
}
