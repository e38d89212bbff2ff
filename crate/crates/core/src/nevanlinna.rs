//! Pick functions given by their Nevanlinna data
//! `f(z) = a + b z + int (1/(t - z) - t/(1 + t^2)) dmu(t)`.

use crate::error::{check_upper_half_plane, Error, Result};
use crate::integrability::{integrate_against, IntegrandSpec, VerdictTag, Window};
use crate::measure::{validate_measure, Atom, DensityForm, Measure, DENSITY_TOL};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NevanlinnaRep {
    pub a: f64,
    pub b: f64,
    pub mu: Measure,
}

/// `f = f_trivial + int dmu_red/(t - z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    /// Carries `a`, `b`, the mass outside `[-1, 1]` and the constant shift.
    pub trivial: NevanlinnaRep,
    /// Restriction of the measure to `[-1, 1]`.
    pub reduced: Measure,
}

impl NevanlinnaRep {
    pub fn new(a: f64, b: f64, mu: Measure) -> Result<Self> {
        NevanlinnaRep { a, b, mu }.validated()
    }

    pub fn from_measure(mu: Measure) -> Self {
        NevanlinnaRep { a: 0.0, b: 0.0, mu }
    }

    /// Check `a`, `b >= 0` and normalize the measure.
    pub fn validated(self) -> Result<Self> {
        if !self.a.is_finite() {
            return Err(Error::InvalidArgument(format!("a = {} is not finite", self.a)));
        }
        if !(self.b.is_finite() && self.b >= 0.0) {
            return Err(Error::InvalidArgument(format!("b = {} must be finite and >= 0", self.b)));
        }
        Ok(NevanlinnaRep {
            a: self.a,
            b: self.b,
            mu: validate_measure(self.mu)?,
        })
    }
}

/// `f(z)` for `Im z > 0`.
pub fn evaluate(rep: &NevanlinnaRep, z: Complex64) -> Result<Complex64> {
    check_upper_half_plane(z)?;
    let affine = Complex64::new(rep.a, 0.0) + rep.b * z;
    Ok(affine + rep.mu.cauchy(z) - rep.mu.nevanlinna_shift())
}

/// Cauchy transform `int dmu/(t - z)` of a measure supported in `[-1, 1]`.
pub fn evaluate_reduced(mu: &Measure, z: Complex64) -> Result<Complex64> {
    check_upper_half_plane(z)?;
    check_reduced_support(mu)?;
    Ok(mu.cauchy(z))
}

pub(crate) fn check_reduced_support(mu: &Measure) -> Result<()> {
    if let Some((lo, hi)) = mu.support_hull() {
        if lo < -1.0 {
            return Err(Error::SupportViolation { location: lo });
        }
        if hi > 1.0 {
            return Err(Error::SupportViolation { location: hi });
        }
    }
    Ok(())
}

pub fn decompose(rep: &NevanlinnaRep) -> Decomposition {
    let reduced = rep.mu.restrict_closed(-1.0, 1.0);
    let outside = rep.mu.restrict_outside(-1.0, 1.0);
    Decomposition {
        trivial: NevanlinnaRep {
            a: rep.a - reduced.nevanlinna_shift(),
            b: rep.b,
            mu: outside,
        },
        reduced,
    }
}

/// `int (t - tau)^{-k} dmu`, assuming `|t - tau|^{-k}` is integrable.
pub fn signed_inverse_moment(mu: &Measure, tau: f64, k: i32) -> f64 {
    let atoms: f64 = mu.atoms().iter().map(|a| a.w * (a.t - tau).powi(-k)).sum();
    let dens: f64 = mu
        .densities()
        .iter()
        .map(|d| {
            let local = match d.form {
                DensityForm::Power { c, p } if d.center == tau => Some((c, p)),
                DensityForm::Constant { c } => Some((c, 0.0)),
                _ => None,
            };
            if let Some((c, p)) = local {
                let q = p - k as f64;
                if q > -1.0 {
                    let form = DensityForm::Power { c, p: q };
                    let right = form.signed_mass((d.lo - tau).max(0.0), d.hi - tau);
                    let left = form.signed_mass(d.lo - tau, (d.hi - tau).min(0.0));
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    return right + sign * left;
                }
            }
            d.quad_local(tau, f64::NEG_INFINITY, f64::INFINITY, &[], DENSITY_TOL, |n| {
                if n.rho == 0.0 {
                    return 0.0;
                }
                let mag = (n.ln_rho - k as f64 * n.u.abs().ln()).exp();
                if n.u < 0.0 && k % 2 != 0 {
                    -mag
                } else {
                    mag
                }
            })
        })
        .sum();
    atoms + dens
}

fn require_inverse_moment(mu: &Measure, tau: f64, k: usize) -> Result<bool> {
    let v = integrate_against(mu, &IntegrandSpec::InvPower { n: k as f64, tau }, Window::all())?;
    match v.tag {
        VerdictTag::Integrable => Ok(true),
        VerdictTag::Divergent => Ok(false),
        VerdictTag::Inconclusive => Err(Error::Inconclusive { exponent: k as f64 }),
    }
}

/// Nontangential boundary value `f(tau)`, defined when `1/|t - tau|` is
/// integrable.
pub fn nontangential_value(rep: &NevanlinnaRep, tau: f64) -> Result<f64> {
    if !require_inverse_moment(&rep.mu, tau, 1)? {
        return Err(Error::NoFiniteLimit { tau });
    }
    Ok(rep.a + rep.b * tau + signed_inverse_moment(&rep.mu, tau, 1) - rep.mu.nevanlinna_shift())
}

/// Coefficients `p_0..p_{2n-1}` of the boundary polynomial in `z - tau`:
/// `f(tau + w) = sum p_k w^k + w^{2n} int dmu/((t - tau)^{2n} (t - tau - w))`.
pub fn nontangential_polynomial(rep: &NevanlinnaRep, tau: f64, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("order n must be positive".into()));
    }
    if !require_inverse_moment(&rep.mu, tau, 2 * n)? {
        let moment = (1..=2 * n)
            .find(|&k| !matches!(require_inverse_moment(&rep.mu, tau, k), Ok(true)))
            .unwrap_or(2 * n);
        return Err(Error::NotRegularToOrder {
            order: 2 * n - 1,
            moment,
        });
    }
    let mut p = Vec::with_capacity(2 * n);
    p.push(rep.a + rep.b * tau + signed_inverse_moment(&rep.mu, tau, 1) - rep.mu.nevanlinna_shift());
    p.push(rep.b + signed_inverse_moment(&rep.mu, tau, 2));
    for k in 2..2 * n {
        p.push(signed_inverse_moment(&rep.mu, tau, k as i32 + 1));
    }
    Ok(p)
}

/// Evaluate `sum p_k w^k`.
pub fn eval_polynomial(p: &[f64], w: Complex64) -> Complex64 {
    p.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * w + c)
}

/// Nevanlinna data of `F_alpha = F/(1 + alpha F)`, where `F` is the Cauchy
/// transform of a finite atomic measure.
///
/// The poles of `F_alpha` are the roots of `1 + alpha F(x) = 0`; `F` increases
/// from `-inf` to `+inf` between consecutive atoms, so each gap holds exactly
/// one root, and one more lies right of the atoms (`alpha > 0`) or left of them
/// (`alpha < 0`). The returned `a` cancels the `t/(1+t^2)` shift, so that
/// [`evaluate`] reproduces `F_alpha` exactly.
pub fn aronszajn_krein(rep: &NevanlinnaRep, alpha: f64) -> Result<NevanlinnaRep> {
    if !rep.mu.is_atomic() || rep.mu.atoms().is_empty() {
        return Err(Error::UnsupportedRep(
            "need a finite atomic measure with at least one atom".into(),
        ));
    }
    if rep.b != 0.0 || rep.a != 0.0 {
        return Err(Error::UnsupportedRep("need a = b = 0".into()));
    }
    if !(alpha.is_finite() && alpha != 0.0) {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} must be finite and nonzero")));
    }
    let atoms = merged_atoms(rep.mu.atoms());
    let mass: f64 = atoms.iter().map(|a| a.w).sum();
    let f = |x: f64| atoms.iter().map(|a| a.w / (a.t - x)).sum::<f64>();
    let df = |x: f64| atoms.iter().map(|a| a.w / ((a.t - x) * (a.t - x))).sum::<f64>();
    let target = -1.0 / alpha;

    let mut brackets: Vec<(f64, f64)> = atoms.windows(2).map(|w| (w[0].t, w[1].t)).collect();
    let (first, last) = (atoms[0].t, atoms[atoms.len() - 1].t);
    if alpha > 0.0 {
        brackets.push((last, last + 2.0 * alpha * mass));
    } else {
        brackets.insert(0, (first - 2.0 * alpha.abs() * mass, first));
    }

    let mut out = Vec::with_capacity(brackets.len());
    for (lo, hi) in brackets {
        let x = bisect_increasing(&f, target, lo, hi);
        out.push((x, 1.0 / (alpha * alpha * df(x))));
    }
    let mu = Measure::from_atoms(&out)?;
    Ok(NevanlinnaRep {
        a: mu.nevanlinna_shift(),
        b: 0.0,
        mu,
    })
}

fn merged_atoms(atoms: &[Atom]) -> Vec<Atom> {
    let mut out: Vec<Atom> = Vec::with_capacity(atoms.len());
    for a in atoms {
        match out.last_mut() {
            Some(prev) if prev.t == a.t => prev.w += a.w,
            _ => out.push(*a),
        }
    }
    out
}

/// Root of `f(x) = target` for `f` increasing on the open interval `(lo, hi)`,
/// bisected down to adjacent floating-point numbers.
fn bisect_increasing<F: Fn(f64) -> f64>(f: &F, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return mid;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}
