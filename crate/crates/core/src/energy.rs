//! Pointwise kernels of the energy
//!
//! ```text
//! f(u) = ∫ Ψ_{p,κ}(u′) dx − ∫ G(u) dx,   Ψ_{p,κ}(ξ) = [(κ² + ξ²)^{p/2} − κ^p] / p
//! ```
//!
//! together with the nonlinearity families and the asymptotic hypothesis
//! classifiers on `g`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// The principal part `Ψ_{p,κ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrincipalPart {
    p: f64,
    kappa: f64,
}

impl PrincipalPart {
    pub fn new(p: f64, kappa: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::BadConfig(format!("exponent p must be > 1, got {p}")));
        }
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(Error::BadConfig(format!("kappa must be >= 0, got {kappa}")));
        }
        Ok(Self { p, kappa })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `κ = 0` with `1 < p < 2`: Ψ is not twice differentiable at the origin.
    pub fn is_singular_at_zero(&self) -> bool {
        self.kappa == 0.0 && self.p < 2.0
    }

    pub fn value(&self, xi: f64) -> f64 {
        let (p, k) = (self.p, self.kappa);
        if xi == 0.0 {
            return 0.0;
        }
        if k == 0.0 {
            return xi.abs().powf(p) / p;
        }
        // κ^p [(1 + ξ²/κ²)^{p/2} − 1] without cancellation for small ξ.
        let t = (xi / k) * (xi / k);
        k.powf(p) * ((0.5 * p) * t.ln_1p()).exp_m1() / p
    }

    /// `Φ(ξ) = Ψ′(ξ) = (κ² + ξ²)^{(p−2)/2} ξ`.
    pub fn grad(&self, xi: f64) -> f64 {
        let (p, k) = (self.p, self.kappa);
        if xi == 0.0 {
            return 0.0;
        }
        if k == 0.0 {
            return xi.signum() * xi.abs().powf(p - 1.0);
        }
        (k * k + xi * xi).powf(0.5 * (p - 2.0)) * xi
    }

    /// `Ψ″(ξ) = (κ² + ξ²)^{(p−4)/2} (κ² + (p−1) ξ²)`.
    pub fn hess(&self, xi: f64) -> Result<f64> {
        let (p, k) = (self.p, self.kappa);
        if k == 0.0 {
            if xi == 0.0 {
                return if p > 2.0 {
                    Ok(0.0)
                } else if p == 2.0 {
                    Ok(1.0)
                } else {
                    Err(Error::DegeneratePoint)
                };
            }
            return Ok((p - 1.0) * xi.abs().powf(p - 2.0));
        }
        let s = k * k + xi * xi;
        Ok(s.powf(0.5 * (p - 4.0)) * (k * k + (p - 1.0) * xi * xi))
    }

    /// Inverse of [`Self::grad`]: the slope whose flux is `w`.
    pub fn grad_inverse(&self, w: f64) -> f64 {
        let (p, k) = (self.p, self.kappa);
        if w == 0.0 {
            return 0.0;
        }
        if p == 2.0 {
            return w;
        }
        if k == 0.0 {
            return w.signum() * w.abs().powf(1.0 / (p - 1.0));
        }
        let target = w.abs();
        let mut lo = 0.0;
        let mut hi = 1.0;
        while self.grad(hi) < target {
            lo = hi;
            hi *= 2.0;
        }
        // Safeguarded Newton on the monotone map ξ ↦ Φ(ξ).
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let r = self.grad(x) - target;
            if r.abs() <= 1e-14 * target.max(1.0) {
                break;
            }
            if r > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let slope = self.hess(x).unwrap_or(0.0);
            let newton = if slope > 0.0 { x - r / slope } else { f64::NAN };
            x = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= 1e-16 * hi {
                break;
            }
        }
        w.signum() * x
    }
}

/// Which derivative of the nonlinearity to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GOrder {
    /// `g(s)`
    Value,
    /// `g′(s)`
    Derivative,
    /// `G(s) = ∫₀ˢ g`
    Antiderivative,
}

/// User-supplied nonlinearity evaluating `g`, `g′` and `G`.
#[derive(Clone)]
pub struct CustomHook {
    name: String,
    eval: Arc<dyn Fn(f64, GOrder) -> f64 + Send + Sync>,
}

impl CustomHook {
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn(f64, GOrder) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(eval),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Debug for CustomHook {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomHook").field("name", &self.name).finish()
    }
}

#[derive(Debug, Clone)]
pub enum Family {
    /// `λ(1+s²)^{(p−2)/2} s + μ(1+s²)^{(q−2)/2} s`, `0 < q < p ≤ 2`.
    SmoothPower,
    /// `λ|s|^{p−2} s + μ|s|^{q−2} s`, `2 ≤ q < p`.
    PurePower,
    /// `λ|s|^{p−2}s + μ s/(1+s²)`, `p ≥ 2`.
    Rational,
    Custom(CustomHook),
}

/// The lower-order term `g` with its closed-form antiderivative.
#[derive(Debug, Clone)]
pub struct Nonlinearity {
    family: Family,
    lambda: f64,
    mu: f64,
    q: f64,
    p: f64,
}

impl Nonlinearity {
    pub fn smooth_power(p: f64, lambda: f64, mu: f64, q: f64) -> Result<Self> {
        if !(0.0 < q && q < p && p <= 2.0) {
            return Err(Error::BadConfig(format!(
                "smoothPower requires 0 < q < p <= 2, got p={p}, q={q}"
            )));
        }
        Ok(Self {
            family: Family::SmoothPower,
            lambda,
            mu,
            q,
            p,
        })
    }

    pub fn pure_power(p: f64, lambda: f64, mu: f64, q: f64) -> Result<Self> {
        if !(2.0 <= q && q < p) {
            return Err(Error::BadConfig(format!(
                "purePower requires 2 <= q < p, got p={p}, q={q}"
            )));
        }
        Ok(Self {
            family: Family::PurePower,
            lambda,
            mu,
            q,
            p,
        })
    }

    /// Arbitrary `g` through a hook. `lambda`/`mu` are informational only;
    /// the asymptotic slope of a custom `g` is always estimated by probing.
    pub fn custom(p: f64, hook: CustomHook) -> Self {
        Self {
            family: Family::Custom(hook),
            lambda: f64::NAN,
            mu: f64::NAN,
            q: f64::NAN,
            p,
        }
    }

    /// `g(s) = λ|s|^{p−2}s + μ s/(1+s²)`. For `p = 2` this is the
    /// linear-plus-saturating family `λs + μs/(1+s²)`.
    pub fn rational(p: f64, lambda: f64, mu: f64) -> Result<Self> {
        if !(p >= 2.0) {
            return Err(Error::BadConfig(format!(
                "rational family needs p >= 2 for a finite g'(0), got p={p}"
            )));
        }
        Ok(Self {
            family: Family::Rational,
            lambda,
            mu,
            q: f64::NAN,
            p,
        })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn is_closed_family(&self) -> bool {
        !matches!(self.family, Family::Custom(_))
    }

    pub fn label(&self) -> String {
        match &self.family {
            Family::SmoothPower => format!(
                "smoothPower(lambda={}, mu={}, q={})",
                self.lambda, self.mu, self.q
            ),
            Family::PurePower => format!(
                "purePower(lambda={}, mu={}, q={})",
                self.lambda, self.mu, self.q
            ),
            Family::Rational => format!("rational(lambda={}, mu={})", self.lambda, self.mu),
            Family::Custom(h) => h.name.clone(),
        }
    }

    pub fn eval(&self, s: f64, order: GOrder) -> f64 {
        let (p, q, lambda, mu) = (self.p, self.q, self.lambda, self.mu);
        match &self.family {
            Family::Custom(h) => (h.eval)(s, order),
            Family::Rational => {
                let a = s.abs();
                let d = 1.0 + s * s;
                match order {
                    GOrder::Value => lambda * a.powf(p - 2.0) * s + mu * s / d,
                    GOrder::Derivative => {
                        let lead = if p == 2.0 {
                            lambda
                        } else {
                            lambda * (p - 1.0) * a.powf(p - 2.0)
                        };
                        lead + mu * (1.0 - s * s) / (d * d)
                    }
                    GOrder::Antiderivative => lambda * a.powf(p) / p + 0.5 * mu * (s * s).ln_1p(),
                }
            }
            Family::SmoothPower => {
                let t = 1.0 + s * s;
                match order {
                    GOrder::Value => {
                        lambda * t.powf(0.5 * (p - 2.0)) * s + mu * t.powf(0.5 * (q - 2.0)) * s
                    }
                    GOrder::Derivative => {
                        lambda * t.powf(0.5 * (p - 4.0)) * (1.0 + (p - 1.0) * s * s)
                            + mu * t.powf(0.5 * (q - 4.0)) * (1.0 + (q - 1.0) * s * s)
                    }
                    GOrder::Antiderivative => {
                        let l = (s * s).ln_1p();
                        lambda / p * (0.5 * p * l).exp_m1() + mu / q * (0.5 * q * l).exp_m1()
                    }
                }
            }
            Family::PurePower => {
                let a = s.abs();
                match order {
                    GOrder::Value => lambda * a.powf(p - 2.0) * s + mu * a.powf(q - 2.0) * s,
                    GOrder::Derivative => {
                        let lead = lambda * (p - 1.0) * a.powf(p - 2.0);
                        let low = if q == 2.0 {
                            mu
                        } else {
                            mu * (q - 1.0) * a.powf(q - 2.0)
                        };
                        lead + low
                    }
                    GOrder::Antiderivative => lambda * a.powf(p) / p + mu * a.powf(q) / q,
                }
            }
        }
    }

    pub fn g(&self, s: f64) -> f64 {
        self.eval(s, GOrder::Value)
    }

    pub fn dg(&self, s: f64) -> f64 {
        self.eval(s, GOrder::Derivative)
    }

    pub fn antiderivative(&self, s: f64) -> f64 {
        self.eval(s, GOrder::Antiderivative)
    }

    /// `p·G(s) − g(s)·s`, in closed form for the built-in families.
    pub fn resonance_gap(&self, s: f64, p: f64) -> f64 {
        let (q, lambda, mu) = (self.q, self.lambda, self.mu);
        match &self.family {
            Family::PurePower if p == self.p => mu * (p - q) / q * s.abs().powf(q),
            Family::SmoothPower if p == self.p => {
                let t = 1.0 + s * s;
                let l = t.ln();
                lambda * (0.5 * (p - 2.0) * l).exp_m1()
                    + mu * ((p / q) * (0.5 * q * l).exp_m1() - t.powf(0.5 * (q - 2.0)) * s * s)
            }
            Family::Rational if p == self.p => {
                let s2 = s * s;
                mu * (0.5 * p * s2.ln_1p() - s2 / (1.0 + s2))
            }
            _ => p * self.antiderivative(s) - self.g(s) * s,
        }
    }
}

/// Outcome of the `p·G − g·s` asymptotic test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BClass {
    /// `pG(s) − g(s)s → −∞`
    BMinus,
    /// `pG(s) − g(s)s → +∞`
    BPlus,
    /// Bounded at infinity on both sides.
    Neither,
    Inconclusive,
}

impl fmt::Display for BClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BClass::BMinus => "bMinus",
            BClass::BPlus => "bPlus",
            BClass::Neither => "neither",
            BClass::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisVerdict {
    /// Asymptotic slope `λ = lim g(s)/(|s|^{p−2}s)`; `None` if the probe
    /// ladder did not settle.
    pub slope_at_infinity: Option<f64>,
    pub slope_at_zero: f64,
    pub b_class: Option<BClass>,
    /// `1 < p ≤ 2` (any κ) or `p > 2` with `κ = 0`.
    pub admissible: Option<bool>,
}

const GROWTH_RTOL: f64 = 1e-3;

/// Asymptotic-slope hypothesis on `g`: `g(0) = 0` and `g(s)/(|s|^{p−2}s) → λ`.
pub fn check_growth_a(nl: &Nonlinearity, p: f64) -> HypothesisVerdict {
    let slope_at_zero = nl.dg(0.0);
    let slope_at_infinity = if nl.is_closed_family() && p == nl.p {
        Some(nl.lambda)
    } else {
        probe_asymptotic_slope(nl, p)
    };
    HypothesisVerdict {
        slope_at_infinity,
        slope_at_zero,
        b_class: None,
        admissible: None,
    }
}

fn probe_asymptotic_slope(nl: &Nonlinearity, p: f64) -> Option<f64> {
    if nl.g(0.0) != 0.0 {
        return None;
    }
    let ratio = |s: f64| nl.g(s) / (s.abs().powf(p - 2.0) * s);
    let agree = |a: f64, b: f64| (a - b).abs() <= GROWTH_RTOL * a.abs().max(b.abs()).max(1e-300);
    let mut last = Vec::new();
    for sign in [1.0, -1.0] {
        let probes: Vec<f64> = (2..=6).map(|k| ratio(sign * 10f64.powi(k))).collect();
        if probes.iter().any(|r| !r.is_finite()) {
            return None;
        }
        if !probes.windows(2).all(|w| agree(w[0], w[1])) {
            return None;
        }
        last.push(*probes.last().unwrap());
    }
    if !agree(last[0], last[1]) {
        return None;
    }
    Some(0.5 * (last[0] + last[1]))
}

/// Tail behaviour of `p·G(s) − g(s)·s` along one ray.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tail {
    Up,
    Down,
    Bounded,
    Unclear,
}

fn tail_trend(values: &[f64]) -> Tail {
    let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let floor = 1e-9 * (1.0 + scale);
    let inc: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    if inc.iter().all(|d| d.abs() <= floor) {
        return Tail::Bounded;
    }
    let rising = inc.iter().all(|&d| d > floor);
    let falling = inc.iter().all(|&d| d < -floor);
    if rising || falling {
        // Per-decade increments that decay geometrically mean convergence to
        // a finite limit; divergence (at least logarithmic) keeps them level.
        let ratios: Vec<f64> = inc.windows(2).map(|w| (w[1] / w[0]).abs()).collect();
        if ratios.iter().all(|&r| r <= 0.5) {
            return Tail::Bounded;
        }
        if ratios.iter().all(|&r| r >= 0.6) {
            return if rising { Tail::Up } else { Tail::Down };
        }
    }
    Tail::Unclear
}

/// Classify `g` against the two resonant-case hypotheses by probing
/// `p·G(s) − g(s)·s` at `s = ±10^k`, `k = 1..6`; the trend is read on the
/// tail `|s| ≥ 10³`.
pub fn classify_b(nl: &Nonlinearity, p: f64, kappa: f64) -> HypothesisVerdict {
    let mut verdict = check_growth_a(nl, p);
    let mut trends = Vec::new();
    for sign in [1.0, -1.0] {
        let probes: Vec<f64> = (1..=6)
            .map(|k| nl.resonance_gap(sign * 10f64.powi(k), p))
            .collect();
        if probes.iter().any(|v| !v.is_finite()) {
            trends.push(Tail::Unclear);
            continue;
        }
        trends.push(tail_trend(&probes[2..]));
    }
    let class = match (trends[0], trends[1]) {
        (Tail::Up, Tail::Up) => BClass::BPlus,
        (Tail::Down, Tail::Down) => BClass::BMinus,
        (Tail::Bounded, Tail::Bounded) => BClass::Neither,
        _ => BClass::Inconclusive,
    };
    verdict.b_class = Some(class);
    verdict.admissible = Some(p <= 2.0 || kappa == 0.0);
    verdict
}

/// `(p, κ, g)`: everything that defines the energy on a given domain.
#[derive(Debug, Clone)]
pub struct EnergySpec {
    pub principal: PrincipalPart,
    pub nonlinearity: Nonlinearity,
}

impl EnergySpec {
    pub fn new(principal: PrincipalPart, nonlinearity: Nonlinearity) -> Self {
        Self {
            principal,
            nonlinearity,
        }
    }

    pub fn p(&self) -> f64 {
        self.principal.p()
    }

    pub fn kappa(&self) -> f64 {
        self.principal.kappa()
    }

    /// `g′(0)`, the zero-order coefficient of the form at the origin.
    pub fn slope_at_zero(&self) -> f64 {
        self.nonlinearity.dg(0.0)
    }

    /// Whether `g` is odd, probed on a symmetric grid.
    pub fn g_is_odd(&self) -> bool {
        (1..=40).all(|k| {
            let s = 0.25 * k as f64;
            let (a, b) = (self.nonlinearity.g(s), self.nonlinearity.g(-s));
            (a + b).abs() <= 1e-12 * (1.0 + a.abs())
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn pp(p: f64, k: f64) -> PrincipalPart {
        PrincipalPart::new(p, k).unwrap()
    }

    #[test]
    fn psi_value_examples() {
        assert_relative_eq!(pp(2.0, 5.0).value(3.0), 4.5, epsilon = 1e-14);
        assert_eq!(pp(3.7, 0.4).value(0.0), 0.0);
        assert_relative_eq!(pp(3.0, 0.0).value(2.0), 8.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn psi_grad_examples() {
        assert_relative_eq!(pp(2.0, 7.0).grad(3.0), 3.0, epsilon = 1e-14);
        assert_relative_eq!(pp(4.0, 0.0).grad(2.0), 8.0, epsilon = 1e-14);
        assert_relative_eq!(pp(1.5, 0.0).grad(4.0), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn psi_hess_examples() {
        for xi in [-3.0, 0.0, 0.5, 11.0] {
            assert_relative_eq!(pp(2.0, 0.0).hess(xi).unwrap(), 1.0);
            assert_relative_eq!(pp(2.0, 3.0).hess(xi).unwrap(), 1.0, epsilon = 1e-14);
        }
        assert_relative_eq!(pp(4.0, 0.0).hess(2.0).unwrap(), 12.0, epsilon = 1e-14);
        assert!(matches!(pp(1.5, 0.0).hess(0.0), Err(Error::DegeneratePoint)));
        assert_eq!(pp(3.0, 0.0).hess(0.0).unwrap(), 0.0);
    }

    #[test]
    fn principal_part_rejects_bad_parameters() {
        assert!(PrincipalPart::new(1.0, 0.0).is_err());
        assert!(PrincipalPart::new(2.0, -0.1).is_err());
        assert!(PrincipalPart::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn g_eval_examples() {
        // λs + μs/(1+s²) with λ = 50, μ = −45: g′(0) = λ + μ.
        let nl = Nonlinearity::rational(2.0, 50.0, -45.0).unwrap();
        assert_relative_eq!(nl.dg(0.0), 5.0, epsilon = 1e-14);
        let pure = Nonlinearity::pure_power(4.0, 3.0, 2.0, 2.0).unwrap();
        assert_relative_eq!(pure.g(1.0), 5.0, epsilon = 1e-14);
        let smooth = Nonlinearity::smooth_power(1.7, 2.5, -0.75, 0.4).unwrap();
        assert_relative_eq!(smooth.dg(0.0), 2.5 - 0.75, epsilon = 1e-14);
        for nl in [&nl, &pure, &smooth] {
            assert_eq!(nl.g(0.0), 0.0);
            assert_eq!(nl.antiderivative(0.0), 0.0);
        }
    }

    #[test]
    fn family_ranges_are_enforced() {
        assert!(Nonlinearity::smooth_power(2.5, 1.0, 1.0, 1.0).is_err());
        assert!(Nonlinearity::smooth_power(1.5, 1.0, 1.0, 1.5).is_err());
        assert!(Nonlinearity::pure_power(3.0, 1.0, 1.0, 1.5).is_err());
        assert!(Nonlinearity::pure_power(3.0, 1.0, 1.0, 3.0).is_err());
        assert!(Nonlinearity::rational(1.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn growth_examples() {
        let pure = Nonlinearity::pure_power(3.0, 7.0, 1.0, 2.0).unwrap();
        assert_eq!(check_growth_a(&pure, 3.0).slope_at_infinity, Some(7.0));

        let hook = CustomHook::new("50s-45s/(1+s^2)", |s, o| match o {
            GOrder::Value => 50.0 * s - 45.0 * s / (1.0 + s * s),
            GOrder::Derivative => 50.0 - 45.0 * (1.0 - s * s) / ((1.0 + s * s) * (1.0 + s * s)),
            GOrder::Antiderivative => 25.0 * s * s - 22.5 * (s * s).ln_1p(),
        });
        let v = check_growth_a(&Nonlinearity::custom(2.0, hook), 2.0);
        let slope = v.slope_at_infinity.unwrap();
        assert!((slope - 50.0).abs() <= 1e-3 * 50.0, "{slope}");
        assert_relative_eq!(v.slope_at_zero, 5.0, epsilon = 1e-12);

        let wobble = CustomHook::new("s sin(log(1+|s|))", |s, o| match o {
            GOrder::Value => s * (s.abs().ln_1p()).sin(),
            _ => f64::NAN,
        });
        let v = check_growth_a(&Nonlinearity::custom(2.0, wobble), 2.0);
        assert_eq!(v.slope_at_infinity, None);
    }

    #[test]
    fn b_classification_examples() {
        let plus = Nonlinearity::pure_power(3.0, 4.0, 2.0, 2.0).unwrap();
        assert_eq!(classify_b(&plus, 3.0, 0.0).b_class, Some(BClass::BPlus));
        let minus = Nonlinearity::pure_power(3.0, 4.0, -2.0, 2.0).unwrap();
        assert_eq!(classify_b(&minus, 3.0, 0.0).b_class, Some(BClass::BMinus));
        let flat = Nonlinearity::pure_power(3.0, 4.0, 0.0, 2.0).unwrap();
        assert_eq!(classify_b(&flat, 3.0, 0.0).b_class, Some(BClass::Neither));

        // π²s + 35s/(1+s²): pG − gs = 35 ln(1+s²) − 35s²/(1+s²) grows like a log.
        let pi2 = std::f64::consts::PI.powi(2);
        let res = Nonlinearity::rational(2.0, pi2, 35.0).unwrap();
        let v = classify_b(&res, 2.0, 0.0);
        assert_eq!(v.b_class, Some(BClass::BPlus));
        assert_eq!(v.admissible, Some(true));

        let smooth = Nonlinearity::smooth_power(1.5, 3.0, -1.0, 1.0).unwrap();
        assert_eq!(classify_b(&smooth, 1.5, 1.0).b_class, Some(BClass::BMinus));
        // Smooth-power with μ = 0 tends to the finite limit −λ.
        let smooth0 = Nonlinearity::smooth_power(1.5, 3.0, 0.0, 1.0).unwrap();
        assert_eq!(classify_b(&smooth0, 1.5, 1.0).b_class, Some(BClass::Neither));
    }

    #[test]
    fn admissibility_gate() {
        let nl = Nonlinearity::pure_power(3.0, 4.0, 2.0, 2.0).unwrap();
        assert_eq!(classify_b(&nl, 3.0, 1.0).admissible, Some(false));
        assert_eq!(classify_b(&nl, 3.0, 0.0).admissible, Some(true));
    }

    #[test]
    fn custom_gap_matches_closed_form() {
        let nl = Nonlinearity::pure_power(3.0, 4.0, 2.0, 2.0).unwrap();
        for s in [-7.0, -0.3, 0.2, 5.0] {
            let generic = 3.0 * nl.antiderivative(s) - nl.g(s) * s;
            assert_relative_eq!(nl.resonance_gap(s, 3.0), generic, epsilon = 1e-10);
        }
        let nl = Nonlinearity::smooth_power(1.8, 2.0, -1.5, 0.7).unwrap();
        for s in [-7.0, -0.3, 0.2, 5.0] {
            let generic = 1.8 * nl.antiderivative(s) - nl.g(s) * s;
            assert_relative_eq!(nl.resonance_gap(s, 1.8), generic, epsilon = 1e-10);
        }
    }

    #[test]
    fn flux_inversion_round_trips() {
        for (p, k) in [(1.5, 0.0), (1.5, 1.0), (3.0, 0.0), (3.0, 0.7), (2.0, 4.0)] {
            let pp = pp(p, k);
            for xi in [-40.0, -1.0, -1e-3, 0.0, 2e-4, 0.8, 17.0] {
                let w = pp.grad(xi);
                let back = pp.grad_inverse(w);
                assert!((pp.grad(back) - w).abs() <= 1e-12 * w.abs().max(1.0));
            }
        }
    }

    fn any_pp() -> impl Strategy<Value = PrincipalPart> {
        (prop_oneof![Just(1.5), Just(2.0), Just(3.0), 1.1f64..5.0], prop_oneof![Just(0.0), 0.0f64..3.0])
            .prop_map(|(p, k)| PrincipalPart::new(p, k).unwrap())
    }

    proptest! {
        #[test]
        fn flux_is_strictly_monotone(pp in any_pp(), a in -20.0f64..20.0, b in -20.0f64..20.0) {
            prop_assume!((a - b).abs() > 1e-6);
            prop_assert!((pp.grad(a) - pp.grad(b)) * (a - b) > 0.0);
        }

        #[test]
        fn curvature_sandwich(pp in any_pp(), eta in -20.0f64..20.0) {
            prop_assume!(!(pp.is_singular_at_zero() && eta == 0.0));
            prop_assume!(pp.kappa() > 0.0 || eta.abs() > 1e-8);
            let p = pp.p();
            let base = (pp.kappa().powi(2) + eta * eta).powf(0.5 * (p - 2.0));
            let h = pp.hess(eta).unwrap();
            let lo = (p - 1.0).min(1.0) * base;
            let hi = (p - 1.0).max(1.0) * base;
            prop_assert!(h >= lo * (1.0 - 1e-12) && h <= hi * (1.0 + 1e-12));
        }

        #[test]
        fn hess_is_derivative_of_grad(pp in any_pp(), xi in prop_oneof![-10.0f64..-0.1, 0.1f64..10.0]) {
            let h = 1e-5;
            let fd = (pp.grad(xi + h) - pp.grad(xi - h)) / (2.0 * h);
            let exact = pp.hess(xi).unwrap();
            prop_assert!((fd - exact).abs() <= 1e-6 * (1.0 + exact.abs()));
        }

        #[test]
        fn antiderivative_is_consistent(s in -5.0f64..5.0) {
            let pi2 = std::f64::consts::PI.powi(2);
            let families = [
                Nonlinearity::smooth_power(1.5, 3.0, -1.0, 0.7).unwrap(),
                Nonlinearity::pure_power(3.0, 4.0, -2.0, 2.0).unwrap(),
                Nonlinearity::pure_power(4.0, 1.0, 3.0, 2.5).unwrap(),
                Nonlinearity::rational(2.0, pi2, 35.0).unwrap(),
            ];
            let h = 1e-5;
            for nl in &families {
                let fd = (nl.antiderivative(s + h) - nl.antiderivative(s - h)) / (2.0 * h);
                prop_assert!((fd - nl.g(s)).abs() <= 1e-6 * (1.0 + nl.g(s).abs()));
                let fdd = (nl.g(s + h) - nl.g(s - h)) / (2.0 * h);
                prop_assert!((fdd - nl.dg(s)).abs() <= 1e-5 * (1.0 + nl.dg(s).abs()));
                // odd g ⇒ even G
                prop_assert!((nl.antiderivative(s) - nl.antiderivative(-s)).abs() <= 1e-12 * (1.0 + nl.antiderivative(s).abs()));
            }
        }
    }
}
