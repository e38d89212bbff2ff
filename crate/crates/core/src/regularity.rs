//! Regularity of a measure at a boundary point and the boundary scans that
//! detect it.

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::integrability::{
    classify_shells, default_c_grid, integrate_against, search_scale, IntegrabilityVerdict, IntegrandSpec, ScaleSearch,
    ShellRule, VerdictTag, Window,
};
use crate::julia::{check_descending, julia_quotient};
use crate::measure::Measure;
use crate::nevanlinna::{evaluate, nontangential_value, NevanlinnaRep};
use crate::quad::{tanh_sinh, Node};
use crate::rate::{AsymptoticClass, RateFunction};
use crate::scan::{classify, running_max, ScanVerdict, BLOWUP};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;

/// Radius of the neighbourhood of `tau` on which integrability is tested.
pub const DEFAULT_RADIUS: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    pub verdict: IntegrabilityVerdict,
    pub witness_c: Option<f64>,
    pub gamma: RateFunction,
    pub tau: f64,
    /// Whether `gamma = O(t^2)`; `None` when not decidable symbolically.
    pub big_o_t2: Option<bool>,
}

fn admissible_gamma(gamma: &RateFunction) -> Result<()> {
    gamma.validate().map_err(|e| Error::GammaNotAdmissible(e.to_string()))
}

/// Whether `1/gamma(C|t - tau|)` is `mu`-integrable near `tau` for some `C` of
/// the default grid.
pub fn gamma_regular(mu: &Measure, tau: f64, gamma: &RateFunction) -> Result<RegularityReport> {
    gamma_regular_with(mu, tau, gamma, DEFAULT_RADIUS, &default_c_grid())
}

pub fn gamma_regular_with(mu: &Measure, tau: f64, gamma: &RateFunction, radius: f64, grid: &[f64]) -> Result<RegularityReport> {
    admissible_gamma(gamma)?;
    let search = search_scale(grid, |c| {
        integrate_against(
            mu,
            &IntegrandSpec::InvRate {
                gamma: gamma.clone(),
                c,
                tau,
            },
            Window::around(tau, radius),
        )
    })?;
    Ok(RegularityReport {
        verdict: search.verdict,
        witness_c: search.witness_c,
        gamma: gamma.clone(),
        tau,
        big_o_t2: gamma.is_big_o_of_t2().ok(),
    })
}

/// `ln` of the augury integrand `t lambda(C t) gamma'(t) / gamma(t)^2`.
fn ln_augury_integrand(lambda: &RateFunction, gamma: &RateFunction, c: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let v = t.ln() + lambda.ln_value(c * t) + gamma.ln_derivative(t) - 2.0 * gamma.ln_value(t);
    // inf - inf once the exponents overflow at subnormal t
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

/// `lambda(t)/t` falls to zero along `2^{-k}`.
fn empirical_little_o(lambda: &RateFunction) -> bool {
    let ratios: Vec<f64> = (0..=40)
        .map(|k| {
            let t = 0.5f64.powi(k);
            lambda.value(t) / t
        })
        .collect();
    let peak = ratios.iter().copied().fold(0.0, f64::max);
    let tail = &ratios[30..];
    tail.windows(2).all(|w| w[1] <= w[0]) && ratios[40] <= 1e-3 * peak
}

/// Whether `lambda` is a `gamma`-augury: `lambda = o(t)` and
/// `int_0^1 t lambda(C t) gamma'(t)/gamma(t)^2 dt < inf` for some grid `C`.
pub fn is_augury(lambda: &RateFunction, gamma: &RateFunction) -> Result<ScaleSearch> {
    is_augury_with(lambda, gamma, &default_c_grid())
}

pub fn is_augury_with(lambda: &RateFunction, gamma: &RateFunction, grid: &[f64]) -> Result<ScaleSearch> {
    admissible_gamma(gamma)?;
    let little_o = match lambda.is_little_o_of_t() {
        Ok(v) => v,
        Err(Error::Incomparable(_)) => empirical_little_o(lambda),
        Err(e) => return Err(e),
    };
    if !little_o {
        return Err(Error::LambdaNotLittleO);
    }
    let gc = gamma.class().ok();
    search_scale(grid, |c| {
        let h = |t: f64| ln_augury_integrand(lambda, gamma, c, t).exp();
        let class = match (lambda.class(), gc) {
            (Ok(l), Some(g)) => Some(
                AsymptoticClass::power(1.0)
                    .mul(l.rescale(c))
                    .mul(g.derivative())
                    .mul(g.powf(-2.0)),
            ),
            _ => None,
        };
        Ok(match class {
            Some(k) if k.integrable_at_zero() => {
                let est = tanh_sinh(0.0, 1.0, 1e-10, |n: Node| h(n.t)).value;
                IntegrabilityVerdict {
                    tag: VerdictTag::Integrable,
                    estimate: Some(est),
                    remainder_bound: 0.0,
                    shells: vec![],
                    path: crate::integrability::DecisionPath::Symbolic,
                }
            }
            Some(_) => IntegrabilityVerdict {
                tag: VerdictTag::Divergent,
                estimate: None,
                remainder_bound: 0.0,
                shells: vec![],
                path: crate::integrability::DecisionPath::Symbolic,
            },
            None => {
                let rule = ShellRule::default();
                let shells: Vec<f64> = (0..=rule.k_max)
                    .map(|k| {
                        let hi = 0.5f64.powi(k as i32);
                        tanh_sinh(0.5 * hi, hi, 1e-10, |n: Node| h(n.t)).value
                    })
                    .collect();
                classify_shells(0.0, shells, false, &rule)
            }
        })
    })
}

/// `lambda(t) = mu(tau - 2t, tau + 2t)/t`, tabulated on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstructedAugury {
    /// Least nondecreasing envelope of the samples.
    pub lambda: RateFunction,
    /// `(t, mu(tau - 2t, tau + 2t)/t)` in grid order.
    pub samples: Vec<(f64, f64)>,
    /// `lambda(t)/t` decreases towards zero along the grid tail.
    pub little_o: bool,
}

/// Build the augury `mu(tau - 2t, tau + 2t)/t`; requires `1/(t - tau)^2` to be
/// integrable.
pub fn constructed_augury(mu: &Measure, tau: f64, t_grid: &[f64]) -> Result<ConstructedAugury> {
    check_descending(t_grid)?;
    let moment = integrate_against(
        mu,
        &IntegrandSpec::InvPower { n: 2.0, tau },
        Window::around(tau, DEFAULT_RADIUS),
    )?;
    if !moment.is_integrable() {
        return Err(Error::HypothesisFailure(format!(
            "1/(t - tau)^2 is not integrable near tau = {tau} ({:?})",
            moment.tag
        )));
    }
    let samples: Vec<(f64, f64)> = t_grid
        .iter()
        .map(|&t| (t, mu.mass(tau - 2.0 * t, tau + 2.0 * t) / t))
        .collect();
    let lambda = RateFunction::tabulated(&samples)?;
    let ratios: Vec<f64> = samples.iter().map(|(t, v)| v / t).collect();
    let q = (ratios.len() / 4).max(2).min(ratios.len());
    let tail = &ratios[ratios.len() - q..];
    let little_o = tail.windows(2).all(|w| w[1] <= w[0]) && ratios[ratios.len() - 1] <= 0.5 * ratios[0].max(f64::MIN_POSITIVE);
    Ok(ConstructedAugury {
        lambda,
        samples,
        little_o,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OrderReport {
    /// Largest `n <= n_max` with `1/(t - tau)^{2n}` integrable.
    pub n_star: usize,
    /// `2 n_star - 1`, when `n_star > 0`.
    pub regular_to_order: Option<usize>,
}

pub fn order_of_regularity(mu: &Measure, tau: f64, n_max: usize) -> Result<OrderReport> {
    let mut n_star = 0;
    for n in 1..=n_max {
        let exponent = 2.0 * n as f64;
        let v = integrate_against(
            mu,
            &IntegrandSpec::InvPower { n: exponent, tau },
            Window::around(tau, DEFAULT_RADIUS),
        )?;
        match v.tag {
            VerdictTag::Integrable => n_star = n,
            VerdictTag::Divergent => break,
            VerdictTag::Inconclusive => return Err(Error::Inconclusive { exponent }),
        }
    }
    Ok(OrderReport {
        n_star,
        regular_to_order: (n_star > 0).then(|| 2 * n_star - 1),
    })
}

/// Approach curve `tau + t + i h(|t|)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Curve {
    /// `h = D gamma(C t)`
    Scaled,
    /// `h = sqrt(D gamma(C t))`
    Sqrt,
}

impl Curve {
    pub fn height(self, gamma: &RateFunction, c: f64, d: f64, t: f64) -> f64 {
        let ln = d.ln() + gamma.ln_value(c * t.abs());
        match self {
            Curve::Scaled => ln.exp(),
            Curve::Sqrt => (0.5 * ln).exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimsupRow {
    pub t: f64,
    pub height: f64,
    pub j: f64,
    pub running_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimsupScan {
    pub rows: Vec<LimsupRow>,
    pub verdict: ScanVerdict,
}

/// Julia quotient along an approach curve, with a boundedness verdict.
#[allow(clippy::too_many_arguments)]
pub fn julia_limsup_scan(
    rep: &NevanlinnaRep,
    tau: f64,
    gamma: &RateFunction,
    c: f64,
    d: f64,
    curve: Curve,
    t_grid: &[f64],
    exec: Exec,
) -> Result<LimsupScan> {
    if t_grid.is_empty() {
        return Err(Error::InvalidGrid("empty grid".into()));
    }
    let mut heights = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let h = curve.height(gamma, c, d, t);
        if !(t != 0.0 && t.is_finite() && h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidGrid(format!("curve height {h} at t = {t} is not positive")));
        }
        heights.push(h);
    }
    let idx: Vec<usize> = (0..t_grid.len()).collect();
    let js: Result<Vec<f64>> = exec
        .map(&idx, |&i| julia_quotient(rep, Complex64::new(tau + t_grid[i], heights[i])))
        .into_iter()
        .collect();
    let js = js?;
    let maxes = running_max(&js);
    let rows = (0..t_grid.len())
        .map(|i| LimsupRow {
            t: t_grid[i],
            height: heights[i],
            j: js[i],
            running_max: maxes[i],
        })
        .collect();
    Ok(LimsupScan {
        rows,
        verdict: classify(&js),
    })
}

/// Sampling of `S^{D gamma(Ct)} ∩ B(tau, 1/D)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HoroOptions {
    /// Points per side and spacing (log and linear) on the boundary curve.
    pub boundary_points: usize,
    pub radial_points: usize,
    pub angular_points: usize,
    /// Jitter for the interior grid; `None` keeps it regular.
    pub seed: Option<u64>,
    /// Additional candidate points, used when inside the region.
    pub extra_points: Vec<Complex64>,
}

impl Default for HoroOptions {
    fn default() -> Self {
        HoroOptions {
            boundary_points: 2500,
            radial_points: 100,
            angular_points: 60,
            seed: None,
            extra_points: vec![],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HoroVerdict {
    DecreasingToZero,
    Unbounded,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HoroRow {
    pub d: f64,
    pub sup_abs_dev: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HoroScan {
    pub rows: Vec<HoroRow>,
    pub verdict: HoroVerdict,
    pub c: f64,
}

/// Sup tolerance relative to the first sup for [`HoroVerdict::DecreasingToZero`].
pub const HORO_TOL: f64 = 1e-3;

/// Grid points of `{Im z >= D gamma(C |Re z - tau|)} ∩ {|z - tau| < 1/D}`,
/// offsets from `tau`.
pub fn horocyclic_region_samples(gamma: &RateFunction, c: f64, d: f64, opts: &HoroOptions, tau: f64) -> Vec<Complex64> {
    let r = 1.0 / d;
    let inside_ball = |z: Complex64| z.norm() < r;
    let floor = |x: f64| (d.ln() + gamma.ln_value(c * x.abs())).exp();
    let mut pts = Vec::new();
    let n = opts.boundary_points.max(2);
    for side in [-1.0, 1.0] {
        for i in 0..n {
            let frac = (i as f64 + 0.5) / n as f64;
            let log_x = r * 1e-8f64.powf(1.0 - frac);
            for x in [log_x, r * frac] {
                let y = floor(x);
                let z = Complex64::new(side * x, y);
                if y > 0.0 && y.is_finite() && inside_ball(z) {
                    pts.push(z);
                }
            }
        }
    }
    let mut rng = opts.seed.map(ChaCha8Rng::seed_from_u64);
    let (nr, na) = (opts.radial_points.max(1), opts.angular_points.max(1));
    for i in 0..nr {
        for j in 0..na {
            let (mut fi, mut fj) = (i as f64 + 0.5, j as f64 + 0.5);
            if let Some(g) = rng.as_mut() {
                fi += g.random_range(-0.5..0.5);
                fj += g.random_range(-0.5..0.5);
            }
            let rho = r * 1e-6f64.powf(1.0 - fi / nr as f64);
            let theta = PI * fj / na as f64;
            let z = Complex64::from_polar(rho, theta);
            if z.im > 0.0 && z.im >= floor(z.re) && inside_ball(z) {
                pts.push(z);
            }
        }
    }
    for &z in &opts.extra_points {
        let w = z - tau;
        if w.im > 0.0 && w.im >= floor(w.re) && inside_ball(w) {
            pts.push(w);
        }
    }
    pts
}

/// Grid sup of `|f(z) - f(tau)|` over `S^{D gamma(C t)} ∩ B(tau, 1/D)` for each `D`.
pub fn horocyclic_scan(
    rep: &NevanlinnaRep,
    tau: f64,
    gamma: &RateFunction,
    c: f64,
    d_list: &[f64],
    opts: &HoroOptions,
    exec: Exec,
) -> Result<HoroScan> {
    if d_list.is_empty() || d_list.iter().any(|d| !(d.is_finite() && *d > 0.0)) || d_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("D values must be positive and strictly increasing".into()));
    }
    admissible_gamma(gamma)?;
    let f_tau = nontangential_value(rep, tau)?;
    let mut rows = Vec::with_capacity(d_list.len());
    for &d in d_list {
        let pts = horocyclic_region_samples(gamma, c, d, opts, tau);
        let devs = exec.map(&pts, |&w| match evaluate(rep, Complex64::new(tau, 0.0) + w) {
            Ok(v) => (v - f_tau).norm(),
            Err(_) => f64::NAN,
        });
        let sup = devs
            .iter()
            .copied()
            .fold(0.0, |m: f64, v| if v.is_nan() { f64::INFINITY } else { m.max(v) });
        rows.push(HoroRow {
            d,
            sup_abs_dev: sup,
            samples: pts.len(),
        });
    }
    let sups: Vec<f64> = rows.iter().map(|r| r.sup_abs_dev).collect();
    let verdict = if sups.iter().any(|s| !s.is_finite() || *s > BLOWUP) {
        HoroVerdict::Unbounded
    } else if sups[sups.len() - 1] <= HORO_TOL * sups[0] {
        HoroVerdict::DecreasingToZero
    } else {
        HoroVerdict::Inconclusive
    };
    Ok(HoroScan { rows, verdict, c })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HoroSearch {
    pub scan: HoroScan,
    pub witness_c: Option<f64>,
}

/// Search the scale grid for a `C` under which the horocyclic sups vanish.
/// Without a witness the scan for the first grid value is returned.
pub fn horocyclic_continuity(
    rep: &NevanlinnaRep,
    tau: f64,
    gamma: &RateFunction,
    d_list: &[f64],
    grid: &[f64],
    opts: &HoroOptions,
    exec: Exec,
) -> Result<HoroSearch> {
    let mut first = None;
    for &c in grid {
        let scan = horocyclic_scan(rep, tau, gamma, c, d_list, opts, exec)?;
        if scan.verdict == HoroVerdict::DecreasingToZero {
            return Ok(HoroSearch {
                scan,
                witness_c: Some(c),
            });
        }
        first.get_or_insert(scan);
    }
    let scan = first.ok_or_else(|| Error::InvalidGrid("empty scale grid".into()))?;
    Ok(HoroSearch { scan, witness_c: None })
}

/// Whether `e^{C/|t - tau|}` is `mu`-integrable near `tau` for some grid `C`,
/// which makes the inverse moment problem at `tau` determinate.
pub fn analytic_determinacy(mu: &Measure, tau: f64) -> Result<ScaleSearch> {
    search_scale(&default_c_grid(), |c| {
        integrate_against(mu, &IntegrandSpec::ExpWeight { c, tau }, Window::around(tau, DEFAULT_RADIUS))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::julia::{aj_scan, geometric_grid, FractionalPrefactor, StolzSpec};

    fn power(c: f64, p: f64) -> RateFunction {
        RateFunction::power(c, p).unwrap()
    }

    fn density(p: f64) -> Measure {
        Measure::power_density(1.0, p, 0.0, -1.0, 1.0).unwrap()
    }

    #[test]
    fn gamma_regular_examples() {
        let r = gamma_regular(&density(1.5), 0.0, &power(1.0, 2.0)).unwrap();
        assert_eq!(r.verdict.tag, VerdictTag::Integrable);
        assert_eq!(r.witness_c, Some(1.0));
        assert!((r.verdict.estimate.unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(r.big_o_t2, Some(true));
        let r = gamma_regular(&density(1.0), 0.0, &power(1.0, 2.0)).unwrap();
        assert_eq!(r.verdict.tag, VerdictTag::Divergent);
        assert_eq!(r.witness_c, None);
        let r = gamma_regular(&Measure::atom(0.5, 1.0).unwrap(), 0.0, &power(1.0, 2.0)).unwrap();
        assert!(r.verdict.estimate.unwrap().is_finite());
    }

    #[test]
    fn augury_examples() {
        let s = is_augury(&power(1.0, 1.5), &power(1.0, 2.0)).unwrap();
        assert_eq!(s.verdict.tag, VerdictTag::Integrable);
        assert!(matches!(
            is_augury(&power(0.5, 1.0), &power(1.0, 2.0)),
            Err(Error::LambdaNotLittleO)
        ));
        let e = |k| RateFunction::exp_inv(k).unwrap();
        let s = is_augury(&e(0.5), &e(1.0)).unwrap();
        assert_eq!(s.witness_c, Some(0.25));
        // at C = 1/4 the integrand is e^{-1/t}/t, integrating to E1(1)
        assert!((s.verdict.estimate.unwrap() - crate::special::expint(1, 1.0)).abs() < 1e-9);
    }

    #[test]
    fn tabulated_augury_uses_shells() {
        let grid = geometric_grid(0.1, 0.5, 30);
        let aug = constructed_augury(&density(4.0), 0.0, &grid).unwrap();
        let s = is_augury(&aug.lambda, &power(1.0, 2.0)).unwrap();
        assert_eq!(s.verdict.path, crate::integrability::DecisionPath::Shells);
        assert_eq!(s.verdict.tag, VerdictTag::Integrable);
    }

    #[test]
    fn constructed_augury_examples() {
        let grid = geometric_grid(0.1, 0.5, 20);
        let aug = constructed_augury(&density(4.0), 0.0, &grid).unwrap();
        for &(t, v) in &aug.samples {
            assert!((v - 12.8 * t.powi(4)).abs() < 1e-12 * v);
        }
        assert!(aug.little_o);
        assert!(matches!(
            constructed_augury(&density(1.0), 0.0, &grid),
            Err(Error::HypothesisFailure(_))
        ));
        let zero = constructed_augury(&Measure::zero(), 0.0, &grid).unwrap();
        assert!(zero.samples.iter().all(|&(_, v)| v == 0.0));
    }

    #[test]
    fn order_examples() {
        assert_eq!(order_of_regularity(&density(4.0), 0.0, 5).unwrap().n_star, 2);
        assert_eq!(
            order_of_regularity(&Measure::atom(0.5, 1.0).unwrap(), 0.0, 5).unwrap().n_star,
            5
        );
        let r = order_of_regularity(&Measure::atom(0.0, 1.0).unwrap(), 0.0, 5).unwrap();
        assert_eq!((r.n_star, r.regular_to_order), (0, None));
    }

    #[test]
    fn limsup_examples() {
        let grid = geometric_grid(0.1, 0.5, 20);
        let rep = NevanlinnaRep::from_measure(density(1.5));
        let s = julia_limsup_scan(&rep, 0.0, &power(1.0, 2.0), 1.0, 1.0, Curve::Sqrt, &grid, Exec::default()).unwrap();
        assert_eq!(s.verdict, ScanVerdict::Bounded);
        let zero = NevanlinnaRep::from_measure(Measure::zero());
        let s = julia_limsup_scan(&zero, 0.0, &power(1.0, 2.0), 1.0, 1.0, Curve::Scaled, &grid, Exec::default()).unwrap();
        assert!(s.rows.iter().all(|r| r.j == 0.0));
        assert_eq!(s.verdict, ScanVerdict::Bounded);
    }

    #[test]
    fn horocyclic_examples() {
        let rep = NevanlinnaRep::from_measure(Measure::atom(0.5, 1.0).unwrap());
        let ds: Vec<f64> = (0..7).map(|k| 2f64.powi(k)).collect();
        let g = power(1.0, 2.0);
        let opts = HoroOptions::default();
        let s = horocyclic_scan(&rep, 0.0, &g, 1.0, &ds, &opts, Exec::default()).unwrap();
        assert!(s.rows.iter().all(|r| r.sup_abs_dev.is_finite() && r.samples >= 10_000));
        assert!(s.rows.windows(2).all(|w| w[1].sup_abs_dev < w[0].sup_abs_dev));
        let found = horocyclic_continuity(&rep, 0.0, &g, &ds, &default_c_grid(), &opts, Exec::default()).unwrap();
        assert_eq!(found.scan.verdict, HoroVerdict::DecreasingToZero);
        assert!(found.witness_c.is_some());
        let constant = NevanlinnaRep::new(2.0, 0.0, Measure::zero()).unwrap();
        let s = horocyclic_scan(&constant, 0.0, &g, 1.0, &ds, &opts, Exec::default()).unwrap();
        assert!(s.rows.iter().all(|r| r.sup_abs_dev == 0.0));
        let seeded = HoroOptions {
            seed: Some(7),
            ..HoroOptions::default()
        };
        let a = horocyclic_scan(&rep, 0.0, &g, 1.0, &ds, &seeded, Exec::Sequential).unwrap();
        let b = horocyclic_scan(&rep, 0.0, &g, 1.0, &ds, &seeded, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn determinacy_examples() {
        let m = Measure::exp_inv_density(1.0, 2.0, 0.0, -1.0, 1.0).unwrap();
        let s = analytic_determinacy(&m, 0.0).unwrap();
        assert!(s.witness_c.unwrap() <= 1.0);
        let s = analytic_determinacy(&density(4.0), 0.0).unwrap();
        assert_eq!(s.verdict.tag, VerdictTag::Divergent);
        let s = analytic_determinacy(&Measure::atom(0.5, 1.0).unwrap(), 0.0).unwrap();
        assert!(s.verdict.is_integrable());
    }

    #[test]
    fn main_equivalence_on_admissible_family() {
        let gamma = power(1.0, 2.0);
        let grid = geometric_grid(0.1, 0.5, 20);
        for p in [1.0, 1.5, 2.0, 3.0, 4.0] {
            let mu = density(p);
            let regular = gamma_regular(&mu, 0.0, &gamma).unwrap().verdict.is_integrable();
            let bounded = match constructed_augury(&mu, 0.0, &grid) {
                Ok(aug) => {
                    let spec = StolzSpec::new(0.0, aug.lambda);
                    aj_scan(&mu, &spec, &grid, 0.0, FractionalPrefactor::Definition, Exec::default())
                        .unwrap()
                        .verdict
                        == ScanVerdict::Bounded
                }
                Err(Error::HypothesisFailure(_)) => false,
                Err(e) => panic!("{e}"),
            };
            assert_eq!(regular, bounded, "p = {p}");
            assert_eq!(regular, p - 2.0 > -1.0);
        }
    }

    #[test]
    fn regularity_is_monotone_in_exponent() {
        for p in [0.5, 1.0, 1.5, 2.5, 3.0] {
            let mu = density(p);
            let mut seen_regular = false;
            for q in [4.0, 3.0, 2.0, 1.5, 1.0] {
                let r = gamma_regular(&mu, 0.0, &power(1.0, q)).unwrap().verdict.is_integrable();
                assert!(!seen_regular || r, "p={p} q={q}");
                seen_regular |= r;
            }
        }
    }
    #[test]
    fn scans_agree_across_strategies() {
        let mixed = Measure::from_atoms(&[(-0.4, 0.5), (0.03, 0.2), (0.6, 1.0)])
            .unwrap()
            .sum(&Measure::power_density(1.0, 1.5, 0.0, -0.2, 0.2).unwrap());
        let g = power(1.0, 2.0);
        let grid = geometric_grid(0.1, 0.5, 12);
        let spec = StolzSpec::new(0.0, g.clone());
        for s in [0.0, 1.0] {
            let run = |e| aj_scan(&mixed, &spec, &grid, s, FractionalPrefactor::Definition, e).unwrap();
            assert_eq!(run(Exec::Sequential), run(Exec::Parallel));
        }
        let rep = NevanlinnaRep::from_measure(mixed);
        let run = |e| julia_limsup_scan(&rep, 0.0, &g, 1.0, 1.0, Curve::Sqrt, &grid, e).unwrap();
        assert_eq!(run(Exec::Sequential), run(Exec::Parallel));
    }
}
