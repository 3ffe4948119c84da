//! One-dimensional numerical integration.

// 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// The adaptive rule ran out of subdivisions before meeting its tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NotConverged {
    pub estimate: Estimate,
    pub intervals: usize,
}

fn kronrod15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> Estimate {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut gauss = fc * WG[3];
    let mut kronrod = fc * WGK[7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Estimate { value: kronrod * h, error: ((kronrod - gauss) * h).abs() }
}

/// Globally adaptive Gauss–Kronrod (7/15) quadrature of `f` over `[a, b]`.
///
/// Bisects the interval with the largest local error until the summed error
/// estimate is below `max(abs_tol, rel_tol·|I|)`.
pub fn integrate(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_intervals: usize,
) -> Result<Estimate, NotConverged> {
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let mut parts: Vec<(f64, f64, Estimate)> = vec![(a, b, kronrod15(&mut f, a, b))];
    loop {
        let value: f64 = parts.iter().map(|p| p.2.value).sum();
        let error: f64 = parts.iter().map(|p| p.2.error).sum();
        let total = Estimate { value, error };
        if error <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(total);
        }
        if parts.len() >= max_intervals {
            return Err(NotConverged { estimate: total, intervals: parts.len() });
        }
        let worst = parts.iter().enumerate().max_by(|x, y| x.1 .2.error.total_cmp(&y.1 .2.error)).map(|(i, _)| i).expect("non-empty");
        let (lo, hi, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // interval cannot be split further in floating point
            return Err(NotConverged { estimate: total, intervals: parts.len() + 1 });
        }
        parts.push((lo, mid, kronrod15(&mut f, lo, mid)));
        parts.push((mid, hi, kronrod15(&mut f, mid, hi)));
    }
}

/// Composite Simpson rule with `panels` (even) subintervals.
pub fn simpson(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    debug_assert!(panels >= 2 && panels % 2 == 0);
    let h = (b - a) / panels as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for k in 1..panels {
        let x = a + h * k as f64;
        if k % 2 == 1 {
            odd += f(x);
        } else {
            even += f(x);
        }
    }
    h / 3.0 * (f(a) + 4.0 * odd + 2.0 * even + f(b))
}

/// Composite Simpson rule with the panel count doubled (reusing previous
/// nodes) until successive values agree to `max(abs_tol, rel_tol·|S|)`.
pub fn simpson_doubling(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_panels: usize,
) -> Result<Estimate, NotConverged> {
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let mut panels = 2usize;
    let mut h = (b - a) / panels as f64;
    let ends = f(a) + f(b);
    let mut inner_even = 0.0;
    let mut inner_odd = f(a + h);
    let mut prev = h / 3.0 * (ends + 4.0 * inner_odd);
    loop {
        panels *= 2;
        h *= 0.5;
        inner_even += inner_odd;
        inner_odd = 0.0;
        for k in (1..panels).step_by(2) {
            inner_odd += f(a + h * k as f64);
        }
        let cur = h / 3.0 * (ends + 4.0 * inner_odd + 2.0 * inner_even);
        let error = (cur - prev).abs();
        if error <= abs_tol.max(rel_tol * cur.abs()) && panels >= 8 {
            return Ok(Estimate { value: cur, error });
        }
        if panels >= max_panels {
            return Err(NotConverged { estimate: Estimate { value: cur, error }, intervals: panels });
        }
        prev = cur;
    }
}
