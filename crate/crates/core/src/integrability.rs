//! Integrability of singular integrands against a measure.
//!
//! Two paths decide whether `int |g| dmu` is finite near the singular point
//! of `g`: an exact one comparing leading asymptotic terms, and a dyadic
//! shell classifier that sums the contributions of `2^{-k-1} <= |t - tau| < 2^{-k}`.

use crate::error::{Error, Result};
use crate::measure::{DensityForm, DensityPiece, Measure, DENSITY_TOL};
use crate::rate::{AsymptoticClass, RateFunction};
use num_complex::Complex64;
use serde::Serialize;

/// Integrands understood by [`integrate_against`].
#[derive(Debug, Clone, PartialEq)]
pub enum IntegrandSpec {
    /// `1 / gamma(c |t - tau|)`
    InvRate { gamma: RateFunction, c: f64, tau: f64 },
    /// `|t - tau|^{-n}`
    InvPower { n: f64, tau: f64 },
    /// `e^{c / |t - tau|}`
    ExpWeight { c: f64, tau: f64 },
    /// `t / (1 + t^2)`
    NevanlinnaTail,
    /// `1 / (t - z)`, `z` off the real axis
    Cauchy { z: Complex64 },
}

impl IntegrandSpec {
    /// The singular point, if any.
    pub fn singularity(&self) -> Option<f64> {
        match self {
            IntegrandSpec::InvRate { tau, .. } | IntegrandSpec::InvPower { tau, .. } | IntegrandSpec::ExpWeight { tau, .. } => {
                Some(*tau)
            }
            _ => None,
        }
    }

    fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::UnsupportedIntegrand(m.into()));
        match self {
            IntegrandSpec::InvRate { c, gamma, .. } => {
                if !(c.is_finite() && *c > 0.0) {
                    return bad("scale C must be positive");
                }
                gamma.validate().map_err(|e| Error::UnsupportedIntegrand(e.to_string()))?;
            }
            IntegrandSpec::InvPower { n, .. } => {
                if !n.is_finite() {
                    return bad("exponent must be finite");
                }
            }
            IntegrandSpec::ExpWeight { c, .. } => {
                if !(c.is_finite() && *c > 0.0) {
                    return bad("exponential weight needs C > 0");
                }
            }
            IntegrandSpec::NevanlinnaTail => {}
            IntegrandSpec::Cauchy { z } => {
                if z.im == 0.0 || !z.re.is_finite() || !z.im.is_finite() {
                    return bad("Cauchy kernel needs z off the real axis");
                }
            }
        }
        Ok(())
    }

    /// `ln |g|` at signed offset `u = t - tau` from the singular point (or at
    /// `t = u` for the nonsingular integrands).
    fn ln_abs_local(&self, u: f64) -> f64 {
        match self {
            IntegrandSpec::InvRate { gamma, c, .. } => -gamma.ln_value(c * u.abs()),
            IntegrandSpec::InvPower { n, .. } => -n * u.abs().ln(),
            IntegrandSpec::ExpWeight { c, .. } => c / u.abs(),
            IntegrandSpec::NevanlinnaTail => (u.abs() / (1.0 + u * u)).ln(),
            IntegrandSpec::Cauchy { z } => -(Complex64::new(u, 0.0) - z).norm().ln(),
        }
    }

    fn abs_local(&self, u: f64) -> f64 {
        self.ln_abs_local(u).exp()
    }

    /// Leading asymptotic class of `|g|` in the distance to the singularity.
    fn class(&self) -> Option<AsymptoticClass> {
        match self {
            IntegrandSpec::InvRate { gamma, c, .. } => gamma.class().ok().map(|k| k.rescale(*c).recip()),
            IntegrandSpec::InvPower { n, .. } => Some(AsymptoticClass::power(-n)),
            IntegrandSpec::ExpWeight { c, .. } => Some(AsymptoticClass {
                exp_rate: -c,
                power: 0.0,
                log_power: 0.0,
                coeff: 1.0,
            }),
            _ => None,
        }
    }
}

/// An open interval `(lo, hi)`; infinite ends allowed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn all() -> Self {
        Window {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub fn around(tau: f64, radius: f64) -> Self {
        Window {
            lo: tau - radius,
            hi: tau + radius,
        }
    }

    pub fn new(lo: f64, hi: f64) -> Self {
        Window { lo, hi }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VerdictTag {
    Integrable,
    Divergent,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DecisionPath {
    /// no singularity inside the window
    Direct,
    Symbolic,
    Shells,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegrabilityVerdict {
    pub tag: VerdictTag,
    /// `int |g| dmu` when integrable.
    pub estimate: Option<f64>,
    /// Bound on the part of the estimate that was extrapolated.
    pub remainder_bound: f64,
    /// Shell contributions `I_0, I_1, ...` (numeric path only).
    pub shells: Vec<f64>,
    pub path: DecisionPath,
}

impl IntegrabilityVerdict {
    pub fn is_integrable(&self) -> bool {
        self.tag == VerdictTag::Integrable
    }

    fn integrable(estimate: f64, remainder_bound: f64, shells: Vec<f64>, path: DecisionPath) -> Self {
        IntegrabilityVerdict {
            tag: VerdictTag::Integrable,
            estimate: Some(estimate),
            remainder_bound,
            shells,
            path,
        }
    }

    fn other(tag: VerdictTag, shells: Vec<f64>, path: DecisionPath) -> Self {
        IntegrabilityVerdict {
            tag,
            estimate: None,
            remainder_bound: 0.0,
            shells,
            path,
        }
    }
}

/// Parameters of the dyadic shell classifier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellRule {
    pub k_max: usize,
    pub r0: f64,
    pub window: usize,
    pub max_ratio: f64,
    pub blowup: f64,
}

impl Default for ShellRule {
    fn default() -> Self {
        ShellRule {
            k_max: 48,
            r0: 1.0,
            window: 8,
            max_ratio: 0.95,
            blowup: 1e12,
        }
    }
}

/// Default search grid for the existential scale constant: `4^k`, `k = -8..=8`,
/// ordered by distance from `C = 1` (larger first on ties).
pub fn default_c_grid() -> Vec<f64> {
    let mut ks: Vec<i32> = (-8..=8).collect();
    ks.sort_by_key(|&k| (k.abs(), -k));
    ks.into_iter().map(|k| 4f64.powi(k)).collect()
}

/// `int |g| dmu` over `window`, decided exactly when the leading terms of the
/// integrand and the density pieces at the singular point are known, and by
/// the shell classifier otherwise.
pub fn integrate_against(m: &Measure, g: &IntegrandSpec, window: Window) -> Result<IntegrabilityVerdict> {
    g.check()?;
    let local = m.restrict_open(window.lo, window.hi);
    let Some(tau) = g.singularity().filter(|&t| t >= window.lo && t <= window.hi) else {
        return Ok(IntegrabilityVerdict::integrable(
            direct_integral(&local, g),
            0.0,
            vec![],
            DecisionPath::Direct,
        ));
    };
    if local.atoms().iter().any(|a| a.t == tau) {
        return Ok(IntegrabilityVerdict::other(
            VerdictTag::Divergent,
            vec![],
            DecisionPath::Symbolic,
        ));
    }
    match symbolic_integrable(&local, g, tau) {
        Some(true) => {
            let est = singular_integral(&local, g, tau);
            Ok(IntegrabilityVerdict::integrable(est, 0.0, vec![], DecisionPath::Symbolic))
        }
        Some(false) => Ok(IntegrabilityVerdict::other(
            VerdictTag::Divergent,
            vec![],
            DecisionPath::Symbolic,
        )),
        None => {
            let radius = (tau - window.lo).max(window.hi - tau);
            let rule = ShellRule {
                r0: if radius.is_finite() { radius } else { 1.0 },
                ..ShellRule::default()
            };
            shell_integrability_with(&local, g, tau, rule)
        }
    }
}

/// Leading class of a density piece at `tau`, or `None` when `tau` is outside
/// its closed support.
fn local_density_class(d: &DensityPiece, tau: f64) -> Option<AsymptoticClass> {
    if tau < d.lo || tau > d.hi {
        return None;
    }
    let at_center = d.center == tau;
    Some(match d.form {
        DensityForm::Power { c, p } if at_center => AsymptoticClass {
            coeff: c,
            ..AsymptoticClass::power(p)
        },
        DensityForm::ExpInv { c, k } if at_center => AsymptoticClass {
            exp_rate: k,
            power: 0.0,
            log_power: 0.0,
            coeff: c,
        },
        _ => AsymptoticClass {
            coeff: d.density(tau),
            ..AsymptoticClass::power(0.0)
        },
    })
}

fn symbolic_integrable(m: &Measure, g: &IntegrandSpec, tau: f64) -> Option<bool> {
    let gc = g.class()?;
    let mut ok = true;
    for d in m.densities() {
        if let Some(dc) = local_density_class(d, tau) {
            if dc.coeff <= 0.0 {
                // density vanishes at tau without a known order
                return None;
            }
            ok &= gc.mul(dc).integrable_at_zero();
        }
    }
    Some(ok)
}

fn direct_integral(m: &Measure, g: &IntegrandSpec) -> f64 {
    let atoms: f64 = m.atoms().iter().map(|a| a.w * g.abs_local(a.t)).sum();
    let dens: f64 = m
        .densities()
        .iter()
        .map(|d| {
            d.quad_local(0.0, f64::NEG_INFINITY, f64::INFINITY, &[], DENSITY_TOL, |n| {
                if n.rho == 0.0 {
                    0.0
                } else {
                    n.rho * g.abs_local(n.u)
                }
            })
        })
        .sum();
    atoms + dens
}

fn singular_integral(m: &Measure, g: &IntegrandSpec, tau: f64) -> f64 {
    let atoms: f64 = m.atoms().iter().map(|a| a.w * g.abs_local(a.t - tau)).sum();
    let dens: f64 = m
        .densities()
        .iter()
        .map(|d| piece_singular_integral(d, g, tau, f64::NEG_INFINITY, f64::INFINITY))
        .sum();
    atoms + dens
}

/// `int |g| rho` over `tau + [u_lo, u_hi]`, closed form for a power integrand
/// against a power or constant density centered at the singularity.
fn piece_singular_integral(d: &DensityPiece, g: &IntegrandSpec, tau: f64, u_lo: f64, u_hi: f64) -> f64 {
    if let IntegrandSpec::InvPower { n, .. } = g {
        let local = match d.form {
            DensityForm::Power { c, p } if d.center == tau => Some((c, p)),
            DensityForm::Constant { c } => Some((c, 0.0)),
            _ => None,
        };
        if let Some((c, p)) = local {
            let q = p - n;
            if q > -1.0 {
                let lo = (d.lo - tau).max(u_lo);
                let hi = (d.hi - tau).min(u_hi);
                return DensityForm::Power { c, p: q }.signed_mass(lo, hi);
            }
        }
    }
    d.quad_local(tau, u_lo, u_hi, &[], DENSITY_TOL, |n| {
        if n.rho == 0.0 || n.u == 0.0 {
            0.0
        } else {
            (g.ln_abs_local(n.u) + n.ln_rho).exp()
        }
    })
}

/// Shell classifier with the default rule (`K = k_max`, `r0 = 1`).
pub fn shell_integrability(m: &Measure, g: &IntegrandSpec, tau: f64, k_max: usize) -> Result<IntegrabilityVerdict> {
    g.check()?;
    shell_integrability_with(
        m,
        g,
        tau,
        ShellRule {
            k_max,
            ..ShellRule::default()
        },
    )
}

/// Dyadic shell classifier. Shell `k` collects `r0 2^{-k-1} <= |t - tau| < r0 2^{-k}`.
pub fn shell_integrability_with(m: &Measure, g: &IntegrandSpec, tau: f64, rule: ShellRule) -> Result<IntegrabilityVerdict> {
    if m.atoms().iter().any(|a| a.t == tau) {
        return Ok(IntegrabilityVerdict::other(
            VerdictTag::Divergent,
            vec![],
            DecisionPath::Shells,
        ));
    }
    let radius = |k: usize| rule.r0 * 0.5f64.powi(k as i32);
    let region = |lo: f64, hi: f64| -> f64 {
        let mut s = 0.0;
        for a in m.atoms() {
            let u = (a.t - tau).abs();
            if u >= lo && u < hi {
                s += a.w * g.abs_local(a.t - tau);
            }
        }
        for d in m.densities() {
            s += piece_singular_integral(d, g, tau, lo, hi);
            s += piece_singular_integral(d, g, tau, -hi, -lo);
        }
        s
    };
    let outer = region(rule.r0, f64::INFINITY);
    let shells: Vec<f64> = (0..=rule.k_max).map(|k| region(radius(k + 1), radius(k))).collect();
    let core = radius(rule.k_max + 1);
    Ok(classify_shells(outer, shells, m.mass(tau - core, tau + core) == 0.0, &rule))
}

/// Apply the shell rule to contributions `shells` (innermost last) plus an
/// `outer` part. With `core_empty` nothing lies inside the last shell and the
/// sum is exact.
pub fn classify_shells(outer: f64, shells: Vec<f64>, core_empty: bool, rule: &ShellRule) -> IntegrabilityVerdict {
    let total = outer + shells.iter().sum::<f64>();
    if core_empty && total.is_finite() {
        return IntegrabilityVerdict::integrable(total, 0.0, shells, DecisionPath::Shells);
    }
    if !(total <= rule.blowup) {
        return IntegrabilityVerdict::other(VerdictTag::Divergent, shells, DecisionPath::Shells);
    }
    let nonzero: Vec<f64> = shells.iter().copied().filter(|&v| v > 0.0).collect();
    if nonzero.len() >= rule.window {
        let last = &nonzero[nonzero.len() - rule.window..];
        if last.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-9)) {
            return IntegrabilityVerdict::other(VerdictTag::Divergent, shells, DecisionPath::Shells);
        }
    }
    if shells.len() <= rule.window {
        return IntegrabilityVerdict::other(VerdictTag::Inconclusive, shells, DecisionPath::Shells);
    }
    let tail = &shells[shells.len() - rule.window - 1..];
    let r = tail
        .windows(2)
        .map(|w| {
            if w[1] == 0.0 {
                0.0
            } else if w[0] == 0.0 {
                f64::INFINITY
            } else {
                w[1] / w[0]
            }
        })
        .fold(0.0, f64::max);
    if r <= rule.max_ratio {
        let rem = shells[shells.len() - 1] * r / (1.0 - r);
        return IntegrabilityVerdict::integrable(total + rem, rem, shells, DecisionPath::Shells);
    }
    IntegrabilityVerdict::other(VerdictTag::Inconclusive, shells, DecisionPath::Shells)
}

/// Result of an existential search over scale constants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleSearch {
    pub verdict: IntegrabilityVerdict,
    pub witness_c: Option<f64>,
}

/// Try each `c` in order; the first integrable one is the witness. With no
/// witness the verdict is Divergent only when every candidate diverged.
pub fn search_scale<F>(grid: &[f64], mut attempt: F) -> Result<ScaleSearch>
where
    F: FnMut(f64) -> Result<IntegrabilityVerdict>,
{
    let mut last = None;
    let mut all_divergent = true;
    for &c in grid {
        let v = attempt(c)?;
        if v.is_integrable() {
            return Ok(ScaleSearch {
                verdict: v,
                witness_c: Some(c),
            });
        }
        all_divergent &= v.tag == VerdictTag::Divergent;
        last = Some(v);
    }
    let mut verdict = last.unwrap_or(IntegrabilityVerdict::other(
        VerdictTag::Inconclusive,
        vec![],
        DecisionPath::Symbolic,
    ));
    if !all_divergent {
        verdict.tag = VerdictTag::Inconclusive;
    }
    Ok(ScaleSearch {
        verdict,
        witness_c: None,
    })
}
