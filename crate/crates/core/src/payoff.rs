//! Payoffs built from weighted atoms.
//!
//! For a payoff `f` on `(0, ∞)` the pricing representations need
//!
//! ```text
//! F(s) = ∫₀ˢ f(u) du,        G(x) = F(1) + ∫₀ˣ f(eᵛ) dv,
//! G₁(x) = F(Σ αᵢ e^{xᵢ}) / (α₁ e^{x₁}).
//! ```
//!
//! Indicator and call atoms have closed forms for all three. A tabulated
//! piecewise-linear `f` can be added on top and is integrated numerically.

use crate::quad;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AtomKind {
    /// `1{s > K}`
    Indicator,
    /// `(s − K)⁺`
    Call,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub kind: AtomKind,
    pub strike: f64,
    pub weight: f64,
}

impl Atom {
    pub fn indicator(strike: f64, weight: f64) -> Self {
        Self { kind: AtomKind::Indicator, strike, weight }
    }

    pub fn call(strike: f64, weight: f64) -> Self {
        Self { kind: AtomKind::Call, strike, weight }
    }

    fn f(&self, s: f64) -> f64 {
        let k = self.strike;
        self.weight
            * match self.kind {
                AtomKind::Indicator => f64::from(u8::from(s > k)),
                AtomKind::Call => (s - k).max(0.0),
            }
    }

    fn big_f(&self, s: f64) -> f64 {
        let excess = (s - self.strike).max(0.0);
        self.weight
            * match self.kind {
                AtomKind::Indicator => excess,
                AtomKind::Call => 0.5 * excess * excess,
            }
    }

    /// `∫₀ˣ atom(eᵛ) dv`, given `a = ln K`.
    fn log_integral(&self, x: f64, a: f64) -> f64 {
        let k = self.strike;
        let raw = match (self.kind, k > 0.0) {
            (AtomKind::Indicator, false) => x,
            (AtomKind::Indicator, true) => (x - a).max(0.0) - (-a).max(0.0),
            (AtomKind::Call, false) => x.exp_m1(),
            (AtomKind::Call, true) => {
                // ∫_{-∞}^{x} (eᵛ − K)⁺ dv
                let tail = |x: f64| if x > a { k * (x - a).exp_m1() - k * (x - a) } else { 0.0 };
                tail(x) - tail(0.0)
            }
        };
        self.weight * raw
    }
}

/// Piecewise-linear payoff through `(knots[i], values[i])`, zero left of
/// the first knot and flat right of the last.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedPayoff {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl TabulatedPayoff {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self, String> {
        if knots.is_empty() || knots.len() != values.len() {
            return Err("tabulated payoff needs equally many knots and values".into());
        }
        if knots[0] < 0.0 || knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err("tabulated payoff knots must be nonnegative and strictly increasing".into());
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err("tabulated payoff values must be finite".into());
        }
        Ok(Self { knots, values })
    }

    fn f(&self, s: f64) -> f64 {
        let (t, v) = (&self.knots, &self.values);
        if s < t[0] {
            return 0.0;
        }
        let last = t.len() - 1;
        if s >= t[last] {
            return v[last];
        }
        let hi = t.partition_point(|&x| x <= s);
        let lo = hi - 1;
        v[lo] + (s - t[lo]) / (t[hi] - t[lo]) * (v[hi] - v[lo])
    }

    /// Breakpoints of `f` inside `(a, b)`, plus both ends.
    fn pieces(&self, a: f64, b: f64) -> Vec<f64> {
        let mut cuts = vec![a];
        cuts.extend(self.knots.iter().copied().filter(|&k| k > a && k < b));
        cuts.push(b);
        cuts
    }

    fn integral(&self, g: impl Fn(f64) -> f64, cuts: &[f64]) -> f64 {
        cuts.windows(2)
            .map(|w| match quad::integrate(&g, w[0], w[1], 1e-10, 1e-14, 200) {
                Ok(e) => e.value,
                Err(e) => e.estimate.value,
            })
            .sum()
    }

    fn big_f(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        self.integral(|u| self.f(u), &self.pieces(0.0, s))
    }

    fn log_integral(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        let (a, b) = if x > 0.0 { (0.0, x) } else { (x, 0.0) };
        let cuts: Vec<f64> = self.pieces(a.exp(), b.exp()).iter().map(|s| s.ln()).collect();
        let v = self.integral(|v| self.f(v.exp()), &cuts);
        if x > 0.0 {
            v
        } else {
            -v
        }
    }
}

/// A payoff `f = Σ wⱼ·atomⱼ (+ tabulated part)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PayoffSpec {
    atoms: Vec<Atom>,
    log_strikes: Vec<f64>,
    tabulated: Option<TabulatedPayoff>,
    f_at_one: f64,
}

impl PayoffSpec {
    pub fn new(atoms: Vec<Atom>) -> Result<Self, String> {
        for (i, a) in atoms.iter().enumerate() {
            if !(a.strike >= 0.0 && a.strike.is_finite()) {
                return Err(format!("atom {i}: strike must be finite and nonnegative, got {}", a.strike));
            }
            if !a.weight.is_finite() {
                return Err(format!("atom {i}: weight must be finite, got {}", a.weight));
            }
        }
        let log_strikes = atoms.iter().map(|a| a.strike.ln()).collect();
        let mut spec = Self { atoms, log_strikes, tabulated: None, f_at_one: 0.0 };
        spec.f_at_one = spec.eval_big_f(1.0);
        Ok(spec)
    }

    /// `1{s>1} + 1{s>2} + 1{s>4}`.
    pub fn digital_ladder() -> Self {
        Self::new(vec![Atom::indicator(1.0, 1.0), Atom::indicator(2.0, 1.0), Atom::indicator(4.0, 1.0)]).expect("valid strikes")
    }

    pub fn with_tabulated(mut self, table: TabulatedPayoff) -> Self {
        self.tabulated = Some(table);
        self.f_at_one = self.eval_big_f(1.0);
        self
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn tabulated(&self) -> Option<&TabulatedPayoff> {
        self.tabulated.as_ref()
    }

    /// `f(s)`.
    pub fn eval_f(&self, s: f64) -> f64 {
        let tab = self.tabulated.as_ref().map_or(0.0, |t| t.f(s));
        self.atoms.iter().map(|a| a.f(s)).sum::<f64>() + tab
    }

    /// `F(s) = ∫₀ˢ f`.
    pub fn eval_big_f(&self, s: f64) -> f64 {
        let tab = self.tabulated.as_ref().map_or(0.0, |t| t.big_f(s));
        self.atoms.iter().map(|a| a.big_f(s)).sum::<f64>() + tab
    }

    /// `G(x) = F(1) + ∫₀ˣ f(eᵛ) dv`.
    pub fn eval_g(&self, x: f64) -> f64 {
        let tab = self.tabulated.as_ref().map_or(0.0, |t| t.log_integral(x));
        self.f_at_one + self.atoms.iter().zip(&self.log_strikes).map(|(a, l)| a.log_integral(x, *l)).sum::<f64>() + tab
    }

    /// `G₁(x) = F(Σ αᵢ e^{xᵢ}) / (α₁ e^{x₁})`.
    pub fn basket_g1(&self, weights: &[f64], x: &[f64]) -> f64 {
        let basket: f64 = weights.iter().zip(x).map(|(a, xi)| a * xi.exp()).sum();
        self.eval_big_f(basket) / (weights[0] * x[0].exp())
    }

    /// Points where `G` is not smooth (`ln K` for positive strikes and
    /// tabulated knots), sorted.
    pub fn log_kinks(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.atoms.iter().filter(|a| a.strike > 0.0).map(|a| a.strike.ln()).collect();
        if let Some(t) = &self.tabulated {
            out.extend(t.knots.iter().filter(|k| **k > 0.0).map(|k| k.ln()));
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Checks `|f(s)| ≤ c(1 + s^q)` on a geometric sample grid over
    /// `[1e-6, 1e6]`.
    pub fn check_growth(&self, q: f64, c: f64) -> bool {
        (0..=240).map(|i| 10f64.powf(-6.0 + 0.05 * i as f64)).all(|s| self.eval_f(s).abs() <= c * (1.0 + s.powf(q)))
    }
}
