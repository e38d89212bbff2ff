//! Monotone rate functions on `[0, inf)`: the regularity profile `gamma` and
//! the Stolz-region height `lambda`.
//!
//! A [`RateFunction`] is a small symbolic tree. Besides point values and
//! derivatives it answers asymptotic comparisons as `t -> 0+` exactly, by
//! reducing every node to a leading term `c * e^{-a/t} * t^p * ln(1/t)^q`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

/// Symbolic monotone rate function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "lowercase")]
pub enum RateFunction {
    /// `c * t^p`
    Power { c: f64, p: f64 },
    /// `e^{-k/t}`
    #[serde(rename = "expinv")]
    ExpInv { k: f64 },
    /// `c * t^p * ln(1/t)^q`, held constant past its peak.
    #[serde(rename = "powerlog")]
    PowerLog { c: f64, p: f64, q: f64 },
    /// `inner(s * t)`
    Scale { s: f64, inner: Box<RateFunction> },
    /// pointwise minimum
    Min {
        left: Box<RateFunction>,
        right: Box<RateFunction>,
    },
    /// Piecewise-linear tabulation; never parsed from JSON.
    #[serde(skip)]
    Tabulated(TabulatedRate),
}

/// Nondecreasing piecewise-linear table, extrapolated by a power law below
/// its first knot and held constant above its last.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedRate {
    ts: Vec<f64>,
    values: Vec<f64>,
}

impl TabulatedRate {
    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.ts.iter().copied().zip(self.values.iter().copied())
    }

    fn value(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let n = self.ts.len();
        if t >= self.ts[n - 1] {
            return self.values[n - 1];
        }
        if t <= self.ts[0] {
            return self.values[0] * (t / self.ts[0]).powf(self.lower_slope());
        }
        let i = self.ts.partition_point(|&x| x <= t) - 1;
        let (t0, t1) = (self.ts[i], self.ts[i + 1]);
        let (v0, v1) = (self.values[i], self.values[i + 1]);
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    fn derivative(&self, t: f64) -> f64 {
        let n = self.ts.len();
        if t <= 0.0 || t >= self.ts[n - 1] {
            return 0.0;
        }
        if t <= self.ts[0] {
            let k = self.lower_slope();
            return k * self.value(t) / t;
        }
        let i = self.ts.partition_point(|&x| x <= t) - 1;
        (self.values[i + 1] - self.values[i]) / (self.ts[i + 1] - self.ts[i])
    }

    // log-log slope between the two smallest knots
    fn lower_slope(&self) -> f64 {
        if self.ts.len() < 2 || self.values[0] <= 0.0 || self.values[1] <= 0.0 {
            return 1.0;
        }
        let k = (self.values[1] / self.values[0]).ln() / (self.ts[1] / self.ts[0]).ln();
        if k.is_finite() && k > 0.0 {
            k
        } else {
            1.0
        }
    }
}

/// Leading behaviour `coeff * e^{-exp_rate/t} * t^power * ln(1/t)^log_power`
/// as `t -> 0+`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticClass {
    pub exp_rate: f64,
    pub power: f64,
    pub log_power: f64,
    pub coeff: f64,
}

/// Outcome of comparing `f` against `g` as `t -> 0+`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Comparison {
    /// `f = o(g)`
    Smaller,
    /// `f / g -> ratio`, finite and positive
    Comparable { ratio: f64 },
    /// `g = o(f)`
    Larger,
}

const CLASS_EPS: f64 = 1e-12;

fn cmp_exponent(a: f64, b: f64) -> Ordering {
    if (a - b).abs() <= CLASS_EPS * (1.0 + a.abs().max(b.abs())) {
        Ordering::Equal
    } else if a < b {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

impl AsymptoticClass {
    pub fn power(p: f64) -> Self {
        AsymptoticClass {
            exp_rate: 0.0,
            power: p,
            log_power: 0.0,
            coeff: 1.0,
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, o: Self) -> Self {
        AsymptoticClass {
            exp_rate: self.exp_rate + o.exp_rate,
            power: self.power + o.power,
            log_power: self.log_power + o.log_power,
            coeff: self.coeff * o.coeff,
        }
    }

    pub fn powf(self, r: f64) -> Self {
        AsymptoticClass {
            exp_rate: self.exp_rate * r,
            power: self.power * r,
            log_power: self.log_power * r,
            coeff: self.coeff.powf(r),
        }
    }

    pub fn recip(self) -> Self {
        self.powf(-1.0)
    }

    /// Class of `t -> f(s t)`.
    pub fn rescale(self, s: f64) -> Self {
        AsymptoticClass {
            exp_rate: self.exp_rate / s,
            power: self.power,
            log_power: self.log_power,
            coeff: self.coeff * s.powf(self.power),
        }
    }

    /// Leading term of the derivative.
    pub fn derivative(self) -> Self {
        if self.exp_rate != 0.0 {
            AsymptoticClass {
                exp_rate: self.exp_rate,
                power: self.power - 2.0,
                log_power: self.log_power,
                coeff: self.coeff * self.exp_rate,
            }
        } else {
            AsymptoticClass {
                exp_rate: 0.0,
                power: self.power - 1.0,
                log_power: self.log_power,
                coeff: self.coeff * self.power,
            }
        }
    }

    pub fn compare(self, other: Self) -> Result<Comparison> {
        if !(self.coeff > 0.0 && other.coeff > 0.0) {
            return Err(Error::Incomparable(format!(
                "non-positive leading coefficient ({} vs {})",
                self.coeff, other.coeff
            )));
        }
        // a larger exponential rate means a faster decay
        let ord = match cmp_exponent(self.exp_rate, other.exp_rate) {
            Ordering::Greater => return Ok(Comparison::Smaller),
            Ordering::Less => return Ok(Comparison::Larger),
            Ordering::Equal => cmp_exponent(self.power, other.power),
        };
        match ord {
            Ordering::Greater => Ok(Comparison::Smaller),
            Ordering::Less => Ok(Comparison::Larger),
            Ordering::Equal => match cmp_exponent(self.log_power, other.log_power) {
                Ordering::Less => Ok(Comparison::Smaller),
                Ordering::Greater => Ok(Comparison::Larger),
                Ordering::Equal => Ok(Comparison::Comparable {
                    ratio: self.coeff / other.coeff,
                }),
            },
        }
    }

    /// Whether `int_0 f(t) dt` converges at the origin.
    pub fn integrable_at_zero(self) -> bool {
        match cmp_exponent(self.exp_rate, 0.0) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => match cmp_exponent(self.power, -1.0) {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => self.log_power < -1.0 - CLASS_EPS,
            },
        }
    }
}

const VALIDATION_POINTS: usize = 64;
const VALIDATION_LO: f64 = 1e-6;

impl RateFunction {
    pub fn power(c: f64, p: f64) -> Result<Self> {
        Self::checked(RateFunction::Power { c, p })
    }

    pub fn exp_inv(k: f64) -> Result<Self> {
        Self::checked(RateFunction::ExpInv { k })
    }

    pub fn power_log(c: f64, p: f64, q: f64) -> Result<Self> {
        Self::checked(RateFunction::PowerLog { c, p, q })
    }

    pub fn scaled(s: f64, inner: RateFunction) -> Result<Self> {
        Self::checked(RateFunction::Scale {
            s,
            inner: Box::new(inner),
        })
    }

    pub fn min(left: RateFunction, right: RateFunction) -> Result<Self> {
        Self::checked(RateFunction::Min {
            left: Box::new(left),
            right: Box::new(right),
        })
    }

    /// Classical Stolz aperture `0 < M < 1` as the linear rate `sqrt(M^2/(1-M^2)) t`.
    pub fn classical_aperture(m: f64) -> Result<Self> {
        if !(m > 0.0 && m < 1.0) {
            return Err(Error::InvalidRate(format!("aperture {m} outside (0, 1)")));
        }
        Self::power((m * m / (1.0 - m * m)).sqrt(), 1.0)
    }

    /// Least nondecreasing envelope of `(t, value)` samples, as a tabulated rate.
    pub fn tabulated(points: &[(f64, f64)]) -> Result<Self> {
        let mut pts: Vec<(f64, f64)> = points.to_vec();
        if pts.is_empty() {
            return Err(Error::InvalidRate("empty tabulation".into()));
        }
        if pts
            .iter()
            .any(|(t, v)| !(t.is_finite() && *t > 0.0 && v.is_finite() && *v >= 0.0))
        {
            return Err(Error::InvalidRate("tabulation needs t > 0 and finite values >= 0".into()));
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.dedup_by(|a, b| a.0 == b.0);
        let mut running = 0.0f64;
        let mut ts = Vec::with_capacity(pts.len());
        let mut values = Vec::with_capacity(pts.len());
        for (t, v) in pts {
            running = running.max(v);
            ts.push(t);
            values.push(running);
        }
        Ok(RateFunction::Tabulated(TabulatedRate { ts, values }))
    }

    fn checked(f: RateFunction) -> Result<Self> {
        f.validate()?;
        Ok(f)
    }

    /// Structural parameter checks, `value(0) = 0`, monotonicity on a log grid
    /// and derivative consistency with finite differences.
    pub fn validate(&self) -> Result<()> {
        self.validate_params()?;
        if self.value(0.0) != 0.0 {
            return Err(Error::InvalidRate("value(0) must be 0".into()));
        }
        let hi = self.monotone_limit().min(1.0);
        let grid = log_grid(VALIDATION_LO, hi, VALIDATION_POINTS);
        let mut prev = 0.0;
        for &t in &grid {
            let v = self.value(t);
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidRate(format!("value({t}) = {v}")));
            }
            if v < prev * (1.0 - 1e-12) {
                return Err(Error::InvalidRate(format!("not monotone near t = {t}")));
            }
            prev = v;
        }
        if !matches!(self, RateFunction::Tabulated(_)) {
            for &t in &grid {
                if let Some(msg) = self.derivative_mismatch(t) {
                    return Err(Error::InvalidRate(msg));
                }
            }
        }
        Ok(())
    }

    fn validate_params(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidRate(m));
        match self {
            RateFunction::Power { c, p } => {
                if !(c.is_finite() && *c > 0.0 && p.is_finite() && *p > 0.0) {
                    return bad(format!("power needs c > 0, p > 0 (got c={c}, p={p})"));
                }
            }
            RateFunction::ExpInv { k } => {
                if !(k.is_finite() && *k > 0.0) {
                    return bad(format!("expinv needs k > 0 (got {k})"));
                }
            }
            RateFunction::PowerLog { c, p, q } => {
                if !(c.is_finite() && *c > 0.0 && p.is_finite() && *p > 0.0 && q.is_finite()) {
                    return bad(format!("powerlog needs c > 0, p > 0 (got c={c}, p={p}, q={q})"));
                }
            }
            RateFunction::Scale { s, inner } => {
                if !(s.is_finite() && *s > 0.0) {
                    return bad(format!("scale needs s > 0 (got {s})"));
                }
                inner.validate_params()?;
            }
            RateFunction::Min { left, right } => {
                left.validate_params()?;
                right.validate_params()?;
            }
            RateFunction::Tabulated(_) => {}
        }
        Ok(())
    }

    fn derivative_mismatch(&self, t: f64) -> Option<String> {
        let d = self.derivative(t);
        let h = 1e-6 * t;
        let f = |x: f64| self.value(x);
        let central = (f(t + h) - f(t - h)) / (2.0 * h);
        let forward = (-3.0 * f(t) + 4.0 * f(t + h) - f(t + 2.0 * h)) / (2.0 * h);
        let backward = (3.0 * f(t) - 4.0 * f(t - h) + f(t - 2.0 * h)) / (2.0 * h);
        let tol = 1e-6 * (1.0 + d.abs());
        // one-sided stencils cover points next to a Min crossing
        if [central, forward, backward].iter().any(|fd| (d - fd).abs() <= tol) {
            None
        } else {
            Some(format!("derivative({t}) = {d} disagrees with finite difference {central}"))
        }
    }

    /// Upper end of the interval on which the closed form is monotone; the
    /// function is held constant beyond it.
    pub fn monotone_limit(&self) -> f64 {
        match self {
            RateFunction::Power { .. } | RateFunction::ExpInv { .. } => f64::INFINITY,
            RateFunction::PowerLog { p, q, .. } => powerlog_peak(*p, *q),
            RateFunction::Scale { s, inner } => inner.monotone_limit() / s,
            RateFunction::Min { left, right } => left.monotone_limit().min(right.monotone_limit()),
            RateFunction::Tabulated(_) => f64::INFINITY,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self {
            RateFunction::Power { c, p } => c * t.powf(*p),
            RateFunction::ExpInv { k } => (-k / t).exp(),
            RateFunction::PowerLog { c, p, q } => {
                let t = t.min(powerlog_peak(*p, *q));
                c * t.powf(*p) * (-t.ln()).powf(*q)
            }
            RateFunction::Scale { s, inner } => inner.value(s * t),
            RateFunction::Min { left, right } => left.value(t).min(right.value(t)),
            RateFunction::Tabulated(tab) => tab.value(t),
        }
    }

    /// Natural logarithm of the value, computed without underflow.
    pub fn ln_value(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return f64::NEG_INFINITY;
        }
        match self {
            RateFunction::Power { c, p } => c.ln() + p * t.ln(),
            RateFunction::ExpInv { k } => -k / t,
            RateFunction::PowerLog { c, p, q } => {
                let t = t.min(powerlog_peak(*p, *q));
                c.ln() + p * t.ln() + q * (-t.ln()).ln()
            }
            RateFunction::Scale { s, inner } => inner.ln_value(s * t),
            RateFunction::Min { left, right } => left.ln_value(t).min(right.ln_value(t)),
            RateFunction::Tabulated(tab) => tab.value(t).ln(),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self {
            RateFunction::Power { c, p } => c * p * t.powf(p - 1.0),
            RateFunction::ExpInv { k } => {
                let e = (-k / t).exp();
                if e == 0.0 {
                    0.0
                } else {
                    k / (t * t) * e
                }
            }
            RateFunction::PowerLog { c, p, q } => {
                if t >= powerlog_peak(*p, *q) {
                    return 0.0;
                }
                let l = -t.ln();
                c * t.powf(p - 1.0) * l.powf(q - 1.0) * (p * l - q)
            }
            RateFunction::Scale { s, inner } => s * inner.derivative(s * t),
            RateFunction::Min { left, right } => {
                if left.value(t) <= right.value(t) {
                    left.derivative(t)
                } else {
                    right.derivative(t)
                }
            }
            RateFunction::Tabulated(tab) => tab.derivative(t),
        }
    }

    /// Natural logarithm of the derivative, computed without underflow.
    pub fn ln_derivative(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return f64::NEG_INFINITY;
        }
        match self {
            RateFunction::Power { c, p } => (c * p).ln() + (p - 1.0) * t.ln(),
            RateFunction::ExpInv { k } => k.ln() - 2.0 * t.ln() - k / t,
            RateFunction::Scale { s, inner } => s.ln() + inner.ln_derivative(s * t),
            RateFunction::Min { left, right } => {
                if left.ln_value(t) <= right.ln_value(t) {
                    left.ln_derivative(t)
                } else {
                    right.ln_derivative(t)
                }
            }
            RateFunction::PowerLog { c, p, q } => {
                if t >= powerlog_peak(*p, *q) {
                    return f64::NEG_INFINITY;
                }
                let l = -t.ln();
                c.ln() + (p - 1.0) * t.ln() + (q - 1.0) * l.ln() + (p * l - q).ln()
            }
            RateFunction::Tabulated(tab) => tab.derivative(t).ln(),
        }
    }

    /// Leading asymptotic term as `t -> 0+`; tabulations are refused.
    pub fn class(&self) -> Result<AsymptoticClass> {
        match self {
            RateFunction::Power { c, p } => Ok(AsymptoticClass {
                exp_rate: 0.0,
                power: *p,
                log_power: 0.0,
                coeff: *c,
            }),
            RateFunction::ExpInv { k } => Ok(AsymptoticClass {
                exp_rate: *k,
                power: 0.0,
                log_power: 0.0,
                coeff: 1.0,
            }),
            RateFunction::PowerLog { c, p, q } => Ok(AsymptoticClass {
                exp_rate: 0.0,
                power: *p,
                log_power: *q,
                coeff: *c,
            }),
            RateFunction::Scale { s, inner } => Ok(inner.class()?.rescale(*s)),
            RateFunction::Min { left, right } => {
                let (l, r) = (left.class()?, right.class()?);
                Ok(match l.compare(r)? {
                    Comparison::Smaller => l,
                    Comparison::Larger => r,
                    Comparison::Comparable { .. } => AsymptoticClass {
                        coeff: l.coeff.min(r.coeff),
                        ..l
                    },
                })
            }
            RateFunction::Tabulated(_) => Err(Error::Incomparable("tabulated rate has no symbolic leading term".into())),
        }
    }

    pub fn compare(&self, other: &RateFunction) -> Result<Comparison> {
        self.class()?.compare(other.class()?)
    }

    /// `self = o(other)` as `t -> 0+`.
    pub fn is_o_of(&self, other: &RateFunction) -> Result<bool> {
        Ok(matches!(self.compare(other)?, Comparison::Smaller))
    }

    /// `self = O(other)` as `t -> 0+`.
    pub fn is_big_o_of(&self, other: &RateFunction) -> Result<bool> {
        Ok(!matches!(self.compare(other)?, Comparison::Larger))
    }

    /// `self = o(t)`.
    pub fn is_little_o_of_t(&self) -> Result<bool> {
        Ok(matches!(
            self.class()?.compare(AsymptoticClass::power(1.0))?,
            Comparison::Smaller
        ))
    }

    /// `self = O(t^2)`.
    pub fn is_big_o_of_t2(&self) -> Result<bool> {
        Ok(!matches!(
            self.class()?.compare(AsymptoticClass::power(2.0))?,
            Comparison::Larger
        ))
    }

    /// Whether the tree only contains `Power` and `ExpInv` leaves under `Scale`,
    /// i.e. a single closed-form term.
    pub fn is_elementary(&self) -> bool {
        match self {
            RateFunction::Power { .. } | RateFunction::ExpInv { .. } => true,
            RateFunction::Scale { inner, .. } => inner.is_elementary(),
            _ => false,
        }
    }
}

fn powerlog_peak(p: f64, q: f64) -> f64 {
    if q > 0.0 {
        (-q / p).exp()
    } else {
        (-1.0f64).exp()
    }
}

/// `n` log-spaced points on `[lo, hi]`, ascending.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![hi];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn json_round_trip_of_nested_tree() {
        let json = r#"{"form":"min","left":{"form":"power","c":1.0,"p":2.0},
                        "right":{"form":"scale","s":2.0,"inner":{"form":"expinv","k":1.0}}}"#;
        let f: RateFunction = serde_json::from_str(json).unwrap();
        f.validate().unwrap();
        let back: RateFunction = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(f, back);
        assert!((f.value(0.1) - (0.01f64).min((-5.0f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(RateFunction::power(-1.0, 2.0).is_err());
        assert!(RateFunction::power(1.0, 0.0).is_err());
        assert!(RateFunction::exp_inv(0.0).is_err());
        assert!(RateFunction::scaled(0.0, RateFunction::exp_inv(1.0).unwrap()).is_err());
    }

    #[test]
    fn asymptotic_queries() {
        let t2 = RateFunction::power(1.0, 2.0).unwrap();
        let t15 = RateFunction::power(3.0, 1.5).unwrap();
        let e1 = RateFunction::exp_inv(1.0).unwrap();
        let e_half = RateFunction::exp_inv(0.5).unwrap();
        assert!(t2.is_o_of(&t15).unwrap());
        assert!(!t15.is_o_of(&t2).unwrap());
        assert!(e1.is_o_of(&t2).unwrap());
        assert!(e1.is_o_of(&e_half).unwrap());
        assert!(t2.is_big_o_of_t2().unwrap());
        assert!(!t15.is_big_o_of_t2().unwrap());
        assert!(t15.is_little_o_of_t().unwrap());
        let lin = RateFunction::power(0.5, 1.0).unwrap();
        assert!(!lin.is_little_o_of_t().unwrap());
        assert!(lin.is_big_o_of(&RateFunction::power(7.0, 1.0).unwrap()).unwrap());
        // sqrt(e^{-1/t}) is e^{-1/(2t)}
        let sqrt_class = e1.class().unwrap().powf(0.5);
        assert_eq!(
            e_half.class().unwrap().compare(sqrt_class).unwrap(),
            Comparison::Comparable { ratio: 1.0 }
        );
        // scaling changes the exponential rate
        let scaled = RateFunction::scaled(2.0, e1.clone()).unwrap();
        assert_eq!(scaled.class().unwrap().exp_rate, 0.5);
        let tab = RateFunction::tabulated(&[(0.1, 1.0), (0.2, 2.0)]).unwrap();
        assert!(matches!(tab.is_o_of(&t2), Err(Error::Incomparable(_))));
    }

    #[test]
    fn tabulation_takes_monotone_envelope() {
        let tab = RateFunction::tabulated(&[(0.1, 1.0), (0.2, 0.5), (0.4, 3.0)]).unwrap();
        assert_eq!(tab.value(0.2), 1.0);
        assert!((tab.value(0.3) - 2.0).abs() < 1e-15);
        assert_eq!(tab.value(10.0), 3.0);
        assert_eq!(tab.value(0.0), 0.0);
    }

    #[test]
    fn classical_aperture_is_linear() {
        let f = RateFunction::classical_aperture(0.6).unwrap();
        assert!((f.value(1.0) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn powerlog_is_held_at_peak() {
        let f = RateFunction::power_log(1.0, 2.0, 1.0).unwrap();
        let peak = (-0.5f64).exp();
        assert_eq!(f.value(0.9), f.value(peak));
        assert_eq!(f.derivative(0.9), 0.0);
    }

    fn arb_rate() -> impl Strategy<Value = RateFunction> {
        let leaf = prop_oneof![
            (0.1f64..5.0, 0.2f64..4.0).prop_map(|(c, p)| RateFunction::Power { c, p }),
            (0.1f64..3.0).prop_map(|k| RateFunction::ExpInv { k }),
            (0.1f64..5.0, 0.5f64..4.0, 0.0f64..2.0).prop_map(|(c, p, q)| RateFunction::PowerLog { c, p, q }),
        ];
        leaf.prop_recursive(2, 6, 2, |inner| {
            prop_oneof![
                (0.2f64..5.0, inner.clone()).prop_map(|(s, f)| RateFunction::Scale { s, inner: Box::new(f) }),
                (inner.clone(), inner).prop_map(|(l, r)| RateFunction::Min {
                    left: Box::new(l),
                    right: Box::new(r)
                }),
            ]
        })
    }

    proptest! {
        #[test]
        fn derivative_matches_finite_differences(f in arb_rate()) {
            // The 64-point grid of validate() plus an explicit central-difference check.
            prop_assert!(f.validate().is_ok(), "{:?}", f.validate());
            let hi = f.monotone_limit().min(1.0);
            for t in log_grid(1e-6, hi, 64) {
                prop_assert!(f.derivative_mismatch(t).is_none());
            }
        }

        #[test]
        fn ln_value_agrees_with_value(f in arb_rate(), t in 1e-3f64..1.0) {
            let v = f.value(t);
            if v > 1e-300 {
                prop_assert!((f.ln_value(t) - v.ln()).abs() < 1e-9 * (1.0 + v.ln().abs()));
            }
            let d = f.derivative(t);
            if d > 1e-300 {
                prop_assert!((f.ln_derivative(t) - d.ln()).abs() < 1e-9 * (1.0 + d.ln().abs()));
            }
        }
    }
}
