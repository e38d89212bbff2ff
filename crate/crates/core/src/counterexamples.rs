//! Atomic measures whose Julia quotient or boundary value blows up along a
//! prescribed approach curve, with log-domain verification of the blow-up.

use crate::error::{Error, Result};
use crate::julia::julia_quotient;
use crate::measure::Measure;
use crate::nevanlinna::{evaluate, nontangential_value, NevanlinnaRep};
use crate::rate::{Comparison, RateFunction};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::LN_2;

pub const DEFAULT_N: usize = 10;
pub const MAX_N: usize = 40;
pub const DEFAULT_BASE: f64 = 2.0;

/// Which quantity a construction forces to blow up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Separation {
    /// `J(t_n + i lambda(t_n)) >= w_n / lambda(t_n)^2`
    Julia,
    /// `|f(t_n + i lambda(t_n)) - f(0)| >= w_n / lambda(t_n)`
    Value,
}

impl Separation {
    fn lambda_power(self) -> f64 {
        match self {
            Separation::Julia => 2.0,
            Separation::Value => 1.0,
        }
    }

    /// `log2` of the guaranteed lower bound at an atom of log-weight `ln_w`.
    pub fn log2_bound(self, ln_w: f64, ln_lambda: f64) -> f64 {
        (ln_w - self.lambda_power() * ln_lambda) / LN_2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub n: usize,
    pub t: f64,
    /// `ln(gamma(t) / n^2)`
    pub ln_w: f64,
    pub ln_lambda: f64,
}

impl Witness {
    pub fn point(&self, lambda: &RateFunction) -> Complex64 {
        Complex64::new(self.t, lambda.value(self.t))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Construction {
    pub measure: Measure,
    pub witnesses: Vec<Witness>,
    /// The construction stopped before `N` because atoms no longer fit in `f64`.
    pub precision_exhausted: bool,
}

fn require_smaller(small: &RateFunction, power: f64, big: &RateFunction, what: &str) -> Result<()> {
    let ok = match (small.class(), big.class()) {
        (Ok(s), Ok(b)) => matches!(s.powf(power).compare(b)?, Comparison::Smaller),
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::HypothesisFailure(format!("lambda is not symbolically {what}")))
    }
}

/// `sum gamma(t_n)/n^2 delta_{t_n}` with `gamma(t_n)/lambda(t_n)^2 >= 2^n n^2`,
/// making the Julia quotient unbounded along `t + i lambda(t)`.
pub fn pitting_measure(gamma: &RateFunction, lambda: &RateFunction, n: usize, base: f64) -> Result<Construction> {
    require_smaller(lambda, 2.0, gamma, "o(sqrt(gamma))")?;
    construct(gamma, lambda, n, base, Separation::Julia)
}

/// Same atoms under `gamma(t_n)/lambda(t_n) >= 2^n n^2`, making
/// `|f - f(0)|` unbounded along `t + i lambda(t)`.
pub fn horocyclic_failure_measure(gamma: &RateFunction, lambda: &RateFunction, n: usize, base: f64) -> Result<Construction> {
    require_smaller(lambda, 1.0, gamma, "o(gamma)")?;
    construct(gamma, lambda, n, base, Separation::Value)
}

/// Atoms at the largest points `base^{-j}` meeting the separation condition,
/// each at most half the previous one.
fn construct(gamma: &RateFunction, lambda: &RateFunction, n_max: usize, base: f64, mode: Separation) -> Result<Construction> {
    gamma.validate().map_err(|e| Error::GammaNotAdmissible(e.to_string()))?;
    lambda.validate()?;
    if n_max > MAX_N {
        return Err(Error::InvalidArgument(format!("N = {n_max} exceeds {MAX_N}")));
    }
    if !(base.is_finite() && base > 1.0) {
        return Err(Error::InvalidArgument(format!("grid base must exceed 1 (got {base})")));
    }
    let j_max = (1074.0 * LN_2 / base.ln()).floor() as i32;
    let mut witnesses = Vec::with_capacity(n_max);
    let mut atoms = Vec::with_capacity(n_max);
    let mut prev_t = f64::INFINITY;
    let mut j = 1;
    let mut exhausted = false;
    for n in 1..=n_max {
        let ln_n2 = 2.0 * (n as f64).ln();
        let mut found = None;
        while j <= j_max {
            let t = base.powi(-j);
            j += 1;
            if t > 0.5 * prev_t {
                continue;
            }
            let (ln_w, ln_lambda) = (gamma.ln_value(t) - ln_n2, lambda.ln_value(t));
            if mode.log2_bound(ln_w, ln_lambda) >= n as f64 {
                found = Some(Witness { n, t, ln_w, ln_lambda });
                break;
            }
        }
        match found {
            Some(w) if w.ln_w.exp() > 0.0 => {
                let direct = gamma.value(w.t) / (w.n * w.n) as f64;
                atoms.push((w.t, if direct > 0.0 { direct } else { w.ln_w.exp() }));
                prev_t = w.t;
                witnesses.push(w);
            }
            _ => {
                exhausted = true;
                break;
            }
        }
    }
    Ok(Construction {
        measure: Measure::from_atoms(&atoms)?,
        witnesses,
        precision_exhausted: exhausted,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeparationRow {
    pub n: usize,
    pub t: f64,
    pub w: f64,
    pub log2_bound: f64,
    /// Direct evaluation, while it and the bound stay below `1e300`.
    pub direct: Option<f64>,
}

/// Below this the direct evaluation is cross-checked against the bound.
pub const DIRECT_LIMIT: f64 = 1e300;

/// Check `log2` of the guaranteed lower bound is at least `n` at every witness.
pub fn verify_separation(
    mu: &Measure,
    lambda: &RateFunction,
    witnesses: &[Witness],
    mode: Separation,
) -> Result<Vec<SeparationRow>> {
    if witnesses.is_empty() {
        return Ok(vec![]);
    }
    let rep = NevanlinnaRep::from_measure(mu.clone());
    let f0 = match mode {
        Separation::Value => Some(nontangential_value(&rep, 0.0)?),
        Separation::Julia => None,
    };
    let mut rows = Vec::with_capacity(witnesses.len());
    for w in witnesses {
        let ln_lambda = lambda.ln_value(w.t);
        let log2_bound = mode.log2_bound(w.ln_w, ln_lambda);
        if !(log2_bound >= w.n as f64) {
            return Err(Error::AssertionFailure { n: w.n, log2_bound });
        }
        let bound = log2_bound.exp2();
        let z = Complex64::new(w.t, ln_lambda.exp());
        let direct = if bound < DIRECT_LIMIT && z.im > 0.0 {
            let v = match f0 {
                None => julia_quotient(&rep, z)?,
                Some(f0) => (evaluate(&rep, z)? - f0).norm(),
            };
            (v.is_finite() && v < DIRECT_LIMIT).then_some(v)
        } else {
            None
        };
        if let Some(v) = direct {
            if v < bound * (1.0 - 1e-9) {
                return Err(Error::AssertionFailure {
                    n: w.n,
                    log2_bound: v.log2(),
                });
            }
        }
        rows.push(SeparationRow {
            n: w.n,
            t: w.t,
            w: w.ln_w.exp(),
            log2_bound,
            direct,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrability::VerdictTag;
    use crate::regularity::gamma_regular;

    fn power(c: f64, p: f64) -> RateFunction {
        RateFunction::power(c, p).unwrap()
    }

    #[test]
    fn pitting_reproduces_base_four_example() {
        let g = power(1.0, 2.0);
        let c = pitting_measure(&g, &g, 10, 4.0).unwrap();
        assert!(!c.precision_exhausted);
        for (k, w) in c.witnesses.iter().enumerate() {
            let n = k + 1;
            assert_eq!(w.t, 4f64.powi(-(n as i32)));
            let weight = c.measure.atoms()[c.measure.atoms().len() - n].w;
            assert!((weight - 16f64.powi(-(n as i32)) / (n * n) as f64).abs() <= 1e-15 * weight);
        }
        let rows = verify_separation(&c.measure, &g, &c.witnesses, Separation::Julia).unwrap();
        for r in &rows {
            let expect = 4.0 * r.n as f64 - 2.0 * (r.n as f64).log2();
            assert!((r.log2_bound - expect).abs() < 1e-9);
        }
        assert!(rows[2].direct.unwrap() >= 8.0);
    }

    #[test]
    fn pitting_is_regular_with_partial_zeta_sum() {
        let g = power(1.0, 2.0);
        let c = pitting_measure(&g, &g, 10, DEFAULT_BASE).unwrap();
        let r = gamma_regular(&c.measure, 0.0, &g).unwrap();
        assert_eq!(r.verdict.tag, VerdictTag::Integrable);
        let partial: f64 = (1..=10).map(|n| 1.0 / (n * n) as f64).sum();
        assert!((r.verdict.estimate.unwrap() - partial).abs() < 1e-12);
        assert!(c.witnesses.windows(2).all(|w| w[1].t <= 0.5 * w[0].t));
    }

    #[test]
    fn hypotheses_and_trivial_cases() {
        let g = power(1.0, 2.0);
        assert!(matches!(
            pitting_measure(&g, &power(1.0, 1.0), 5, 2.0),
            Err(Error::HypothesisFailure(_))
        ));
        assert!(matches!(
            horocyclic_failure_measure(&g, &g, 5, 2.0),
            Err(Error::HypothesisFailure(_))
        ));
        let c = pitting_measure(&g, &g, 0, 2.0).unwrap();
        assert!(c.measure.is_zero() && c.witnesses.is_empty());
        assert!(verify_separation(&c.measure, &g, &[], Separation::Julia).unwrap().is_empty());
    }

    #[test]
    fn horocyclic_failure_values_separate() {
        let (g, l) = (power(1.0, 2.0), power(1.0, 3.0));
        let c = horocyclic_failure_measure(&g, &l, 8, DEFAULT_BASE).unwrap();
        assert_eq!(c.witnesses.len(), 8);
        for w in &c.witnesses {
            // gamma / lambda = 1/t
            assert!(1.0 / w.t >= 2f64.powi(w.n as i32) * (w.n * w.n) as f64);
        }
        let rows = verify_separation(&c.measure, &l, &c.witnesses, Separation::Value).unwrap();
        assert!(rows.iter().all(|r| r.direct.unwrap() >= 2f64.powi(r.n as i32)));
    }

    #[test]
    fn exponential_pitting_exhausts_precision() {
        let c = pitting_measure(
            &RateFunction::exp_inv(1.0).unwrap(),
            &RateFunction::exp_inv(0.75).unwrap(),
            10,
            DEFAULT_BASE,
        )
        .unwrap();
        assert!(c.precision_exhausted);
        assert!(!c.witnesses.is_empty() && c.witnesses.len() < 10);
        let l = RateFunction::exp_inv(0.75).unwrap();
        let rows = verify_separation(&c.measure, &l, &c.witnesses, Separation::Julia).unwrap();
        assert!(rows.iter().all(|r| r.log2_bound >= r.n as f64));
    }

    #[test]
    fn tampered_witness_fails() {
        let g = power(1.0, 2.0);
        let c = pitting_measure(&g, &g, 4, 2.0).unwrap();
        let mut w = c.witnesses.clone();
        w[2].ln_w -= 40.0;
        assert!(matches!(
            verify_separation(&c.measure, &g, &w, Separation::Julia),
            Err(Error::AssertionFailure { n: 3, .. })
        ));
    }
}
