//! Julia quotients, rate-governed Stolz regions and their arcs, amortized
//! Julia quotients and the two-sided augur bounds.

use crate::error::{check_upper_half_plane, Error, Result};
use crate::exec::Exec;
use crate::integrability::{integrate_against, IntegrandSpec, Window};
use crate::measure::Measure;
use crate::nevanlinna::{check_reduced_support, evaluate, NevanlinnaRep};
use crate::rate::RateFunction;
use crate::scan::{classify, ScanVerdict};
use crate::special::{full_angle_integral, gamma_fn, quarter_angle_integral};
use num_complex::Complex64;
use serde::Serialize;

/// `J_f(z) = Im f(z) / Im z = b + int dmu(t)/((t - x)^2 + y^2)`.
pub fn julia_quotient(rep: &NevanlinnaRep, z: Complex64) -> Result<f64> {
    check_upper_half_plane(z)?;
    Ok(rep.b + rep.mu.poisson(z.re, z.im))
}

/// `Im f(z) / Im z` computed from the value of `f`.
pub fn julia_quotient_via_value(rep: &NevanlinnaRep, z: Complex64) -> Result<f64> {
    Ok(evaluate(rep, z)?.im / z.im)
}

/// Normalization of the fractional Julia quotient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum FractionalPrefactor {
    /// `Gamma(1 + s)^2`; the identity at `s = 0`.
    #[default]
    Definition,
    /// `Gamma(s)^2`, as stated for iterated Laplacians; undefined at `s = 0`.
    Iterated,
}

impl FractionalPrefactor {
    pub fn value(self, s: f64) -> f64 {
        match self {
            FractionalPrefactor::Definition => {
                let g = gamma_fn(1.0 + s);
                g * g
            }
            FractionalPrefactor::Iterated => {
                let g = gamma_fn(s);
                g * g
            }
        }
    }
}

fn check_order(s: f64) -> Result<()> {
    if s.is_finite() && s >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("fractional order s = {s} must be >= 0")))
    }
}

/// `prefactor(s) * int dmu(t)/((x - t)^2 + y^2)^{s+1}` for `mu` in `[-1, 1]`.
pub fn fractional_laplacian_jq(mu: &Measure, z: Complex64, s: f64, prefactor: FractionalPrefactor) -> Result<f64> {
    check_upper_half_plane(z)?;
    check_order(s)?;
    check_reduced_support(mu)?;
    Ok(prefactor.value(s) * mu.fractional_kernel(z.re, z.im, s))
}

/// How `lambda` compares with `t` near zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StolzRegime {
    /// `lambda = o(t)`: a genuinely tangential region
    Tangential,
    /// `lambda ~ c t`: a classical Stolz angle
    Linear,
    /// `t = o(lambda)`, or not decidable symbolically
    Other,
}

/// The region `{z : Im z >= lambda(|Re z - tau|)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct StolzSpec {
    pub tau: f64,
    pub lambda: RateFunction,
    pub regime: StolzRegime,
}

impl StolzSpec {
    pub fn new(tau: f64, lambda: RateFunction) -> Self {
        use crate::rate::{AsymptoticClass, Comparison};
        let regime = match lambda.class().and_then(|c| c.compare(AsymptoticClass::power(1.0))) {
            Ok(Comparison::Smaller) => StolzRegime::Tangential,
            Ok(Comparison::Comparable { .. }) => StolzRegime::Linear,
            _ => StolzRegime::Other,
        };
        StolzSpec { tau, lambda, regime }
    }

    /// Classical Stolz angle with aperture `0 < m < 1`.
    pub fn classical(tau: f64, m: f64) -> Result<Self> {
        Ok(Self::new(tau, RateFunction::classical_aperture(m)?))
    }
}

/// The arc `C_d`: the segment `[tau - d, tau + d]` at height `lambda(d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArcDescriptor {
    pub d: f64,
    pub height: f64,
    pub lo: f64,
    pub hi: f64,
    pub arclength: f64,
}

impl ArcDescriptor {
    pub fn contains(&self, z: Complex64) -> bool {
        z.im == self.height && z.re >= self.lo && z.re <= self.hi
    }
}

/// `Im z >= lambda(|Re z - tau|)`; monotone `lambda` makes this the infimum
/// over admissible constants.
pub fn stolz_membership(spec: &StolzSpec, z: Complex64) -> bool {
    z.im > 0.0 && z.im >= spec.lambda.value((z.re - spec.tau).abs())
}

pub fn arc(spec: &StolzSpec, d: f64) -> Result<ArcDescriptor> {
    let height = spec.lambda.value(d);
    if !(d > 0.0 && d.is_finite() && height > 0.0 && height.is_finite()) {
        return Err(Error::DegenerateArc { d, height });
    }
    Ok(ArcDescriptor {
        d,
        height,
        lo: spec.tau - d,
        hi: spec.tau + d,
        arclength: 2.0 * d,
    })
}

/// Whether `lambda(d) < d`, the regime in which arcs amortize.
pub fn is_amortizing(spec: &StolzSpec, d: f64) -> bool {
    spec.lambda.value(d) < d
}

/// Arclength average of the (fractional) Julia quotient over `C_d`:
/// `(1/2d) int_{tau-d}^{tau+d} prefactor(s) int dmu(t)/((x-t)^2 + y^2)^{s+1} dx`
/// with `y = lambda(d)`. Each atom contributes a closed-form arctangent
/// difference (for `s = 0`) or angular integral.
pub fn amortized_jq(mu: &Measure, spec: &StolzSpec, d: f64, s: f64, prefactor: FractionalPrefactor) -> Result<f64> {
    check_order(s)?;
    let c = arc(spec, d)?;
    Ok(prefactor.value(s) * mu.arc_kernel_mass(c.lo, c.hi, c.height, s) / c.arclength)
}

/// Two-sided bounds on the amortized Julia quotient at scale `eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AugurBounds {
    pub lower: f64,
    pub upper: f64,
    /// The inverse moment in the upper bound diverges; `upper` is `+inf`.
    pub moment_divergent: bool,
}

/// Constants of the augur bounds at fractional order `s`, before the
/// prefactor:
/// `L1 = (1/2) int_0^{pi/4} cos^{2s}`, from the quarter of the kernel's angle
/// range that every interior mass point sees;
/// `L2 = int_{-pi/2}^{pi/2} cos^{2s}`, the kernel's whole angular integral;
/// and `4^{s+1}`, bounding the kernel for mass at distance `>= 2 eps`.
pub fn augur_constants(s: f64) -> (f64, f64, f64) {
    (0.5 * quarter_angle_integral(s), full_angle_integral(s), 4f64.powf(s + 1.0))
}

/// `lower = P L1 mu(tau-eps, tau+eps) / (eps lambda(eps)^{2s+1})` and
/// `upper = P L2 mu(tau-2eps, tau+2eps) / (eps lambda(eps)^{2s+1}) + P 4^{s+1} int |t-tau|^{-(2s+2)} dmu`,
/// with `P` the fractional prefactor (`P = 1`, `L1 = pi/8`, `L2 = pi` at `s = 0`).
pub fn augur_bounds(mu: &Measure, spec: &StolzSpec, eps: f64, s: f64, prefactor: FractionalPrefactor) -> Result<AugurBounds> {
    check_order(s)?;
    check_reduced_support(&mu.shifted(spec.tau))?;
    let y = spec.lambda.value(eps);
    if !(eps > 0.0 && y > 0.0 && y < eps) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < lambda(eps) < eps (eps = {eps}, lambda = {y})"
        )));
    }
    bounds_unchecked(mu, spec, eps, s, prefactor)
}

fn bounds_unchecked(mu: &Measure, spec: &StolzSpec, eps: f64, s: f64, prefactor: FractionalPrefactor) -> Result<AugurBounds> {
    let tau = spec.tau;
    let y = spec.lambda.value(eps);
    let p = prefactor.value(s);
    let (l1, l2, tail) = augur_constants(s);
    let scale = eps * y.powf(2.0 * s + 1.0);
    let lower = p * l1 * mu.mass(tau - eps, tau + eps) / scale;
    let near = p * l2 * mu.mass(tau - 2.0 * eps, tau + 2.0 * eps) / scale;
    let moment = integrate_against(mu, &IntegrandSpec::InvPower { n: 2.0 * s + 2.0, tau }, Window::all())?;
    Ok(match moment.estimate {
        Some(m) if moment.is_integrable() => AugurBounds {
            lower,
            upper: near + p * tail * m,
            moment_divergent: false,
        },
        _ => AugurBounds {
            lower,
            upper: f64::INFINITY,
            moment_divergent: true,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AjRow {
    pub d: f64,
    pub lambda_d: f64,
    pub aj: f64,
    pub lower: f64,
    pub upper: f64,
    pub amortizing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AjScan {
    pub rows: Vec<AjRow>,
    pub verdict: ScanVerdict,
}

/// Strictly descending, positive, finite.
pub(crate) fn check_descending(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("empty grid".into()));
    }
    if grid.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
        return Err(Error::InvalidGrid("grid values must be positive and finite".into()));
    }
    if grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidGrid("grid must be strictly descending".into()));
    }
    Ok(())
}

/// Geometric grid `start * ratio^k`, `k = 0..steps`.
pub fn geometric_grid(start: f64, ratio: f64, steps: usize) -> Vec<f64> {
    (0..steps).map(|k| start * ratio.powi(k as i32)).collect()
}

/// Amortized Julia quotients and augur bounds along a descending grid, with a
/// boundedness verdict for `d -> 0`.
pub fn aj_scan(
    mu: &Measure,
    spec: &StolzSpec,
    d_grid: &[f64],
    s: f64,
    prefactor: FractionalPrefactor,
    exec: Exec,
) -> Result<AjScan> {
    check_descending(d_grid)?;
    check_order(s)?;
    for &d in d_grid {
        arc(spec, d)?;
    }
    let rows: Result<Vec<AjRow>> = exec
        .map(d_grid, |&d| {
            let aj = amortized_jq(mu, spec, d, s, prefactor)?;
            let b = bounds_unchecked(mu, spec, d, s, prefactor)?;
            Ok(AjRow {
                d,
                lambda_d: spec.lambda.value(d),
                aj,
                lower: b.lower,
                upper: b.upper,
                amortizing: is_amortizing(spec, d),
            })
        })
        .into_iter()
        .collect();
    let rows = rows?;
    let values: Vec<f64> = rows.iter().map(|r| r.aj).collect();
    Ok(AjScan {
        verdict: classify(&values),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn rep(mu: Measure) -> NevanlinnaRep {
        NevanlinnaRep::from_measure(mu)
    }

    fn t2() -> StolzSpec {
        StolzSpec::new(0.0, RateFunction::power(1.0, 2.0).unwrap())
    }

    #[test]
    fn quotient_examples() {
        let i = Complex64::new(0.0, 1.0);
        assert_eq!(julia_quotient(&rep(Measure::atom(0.0, 1.0).unwrap()), i).unwrap(), 1.0);
        assert!((julia_quotient(&rep(Measure::atom(0.5, 1.0).unwrap()), i).unwrap() - 0.8).abs() < 1e-15);
        let both = Measure::from_atoms(&[(0.0, 1.0), (0.5, 1.0)]).unwrap();
        assert!((julia_quotient(&rep(both), i).unwrap() - 1.8).abs() < 1e-15);
    }

    #[test]
    fn fractional_examples() {
        let d0 = Measure::atom(0.0, 1.0).unwrap();
        let def = FractionalPrefactor::Definition;
        assert_eq!(fractional_laplacian_jq(&d0, Complex64::new(0.0, 1.0), 1.0, def).unwrap(), 1.0);
        assert_eq!(
            fractional_laplacian_jq(&d0, Complex64::new(0.0, 2.0), 1.0, def).unwrap(),
            0.0625
        );
        let m = Measure::power_density(1.0, 1.5, 0.0, -1.0, 1.0).unwrap().sum(&d0);
        let z = Complex64::new(0.3, 0.01);
        let j0 = fractional_laplacian_jq(&m, z, 0.0, def).unwrap();
        assert!((j0 - julia_quotient(&rep(m.clone()), z).unwrap()).abs() < 1e-12 * j0);
        // Gamma(s)^2 at s = 2 is 1, Gamma(3)^2 = 4
        let it = fractional_laplacian_jq(&d0, Complex64::new(0.0, 1.0), 2.0, FractionalPrefactor::Iterated).unwrap();
        assert!((it - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stolz_geometry() {
        let spec = t2();
        assert!(stolz_membership(&spec, Complex64::new(0.1, 0.02)));
        assert!(!stolz_membership(&spec, Complex64::new(0.1, 0.005)));
        assert!(stolz_membership(&spec, Complex64::new(0.0, 1.0)));
        assert_eq!(spec.regime, StolzRegime::Tangential);
        let c = arc(&spec, 0.1).unwrap();
        assert!((c.height - 0.01).abs() < 1e-17);
        assert_eq!((c.lo, c.hi, c.arclength), (-0.1, 0.1, 0.2));
        assert!(c.contains(Complex64::new(0.05, c.height)));
        let e = StolzSpec::new(0.0, RateFunction::exp_inv(1.0).unwrap());
        assert!((arc(&e, 0.5).unwrap().height - 0.1353352832366127).abs() < 1e-15);
        assert!(matches!(arc(&e, 1e-3), Err(Error::DegenerateArc { .. })));
        assert_eq!(StolzSpec::classical(0.0, 0.5).unwrap().regime, StolzRegime::Linear);
    }

    #[test]
    fn amortized_examples() {
        let def = FractionalPrefactor::Definition;
        let aj = amortized_jq(&Measure::atom(0.0, 1.0).unwrap(), &t2(), 0.1, 0.0, def).unwrap();
        assert!((aj - 1000.0 * 10f64.atan()).abs() < 1e-9);
        let aj = amortized_jq(&Measure::atom(0.05, 1.0).unwrap(), &t2(), 0.1, 0.0, def).unwrap();
        assert!((aj - 500.0 * (5f64.atan() + 15f64.atan())).abs() < 1e-9);
        assert_eq!(amortized_jq(&Measure::zero(), &t2(), 0.1, 0.0, def).unwrap(), 0.0);
    }

    #[test]
    fn augur_examples() {
        let def = FractionalPrefactor::Definition;
        let b = augur_bounds(&Measure::atom(0.05, 1.0).unwrap(), &t2(), 0.1, 0.0, def).unwrap();
        assert!((b.lower - PI / 8.0 / 0.001).abs() < 1e-9);
        assert!((b.upper - (PI / 0.001 + 4.0 * 400.0)).abs() < 1e-8);
        assert!((b.lower - 392.699).abs() < 1e-3 && (b.upper - 4741.59).abs() < 1e-2);
        let b = augur_bounds(&Measure::atom(0.0, 1.0).unwrap(), &t2(), 0.1, 0.0, def).unwrap();
        assert!(b.moment_divergent && b.upper.is_infinite());
        let b = augur_bounds(&Measure::zero(), &t2(), 0.1, 0.0, def).unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 0.0));
        let (l1, l2, _) = augur_constants(0.0);
        assert!((l1 - PI / 8.0).abs() < 1e-15 && (l2 - PI).abs() < 1e-15);
    }

    #[test]
    fn scan_examples() {
        let grid = geometric_grid(0.1, 0.5, 21);
        let s = aj_scan(
            &Measure::atom(0.5, 1.0).unwrap(),
            &t2(),
            &grid,
            0.0,
            FractionalPrefactor::Definition,
            Exec::default(),
        )
        .unwrap();
        assert_eq!(s.verdict, ScanVerdict::Bounded);
        let s = aj_scan(
            &Measure::atom(0.0, 1.0).unwrap(),
            &t2(),
            &grid,
            0.0,
            FractionalPrefactor::Definition,
            Exec::default(),
        )
        .unwrap();
        assert_eq!(s.verdict, ScanVerdict::Unbounded);
        let last = s.rows.last().unwrap();
        assert!((last.aj * last.d.powi(3) / (PI / 2.0) - 1.0).abs() < 1e-3);
        let s = aj_scan(
            &Measure::zero(),
            &t2(),
            &grid,
            0.0,
            FractionalPrefactor::Definition,
            Exec::Sequential,
        )
        .unwrap();
        assert_eq!(s.verdict, ScanVerdict::Bounded);
        assert!(aj_scan(
            &Measure::zero(),
            &t2(),
            &[0.1, 0.2],
            0.0,
            FractionalPrefactor::Definition,
            Exec::Sequential
        )
        .is_err());
    }

    #[test]
    fn density_aj_matches_direct_average() {
        let m = Measure::power_density(1.0, 1.5, 0.0, -1.0, 1.0).unwrap();
        let spec = t2();
        let d = 0.05;
        let y = 0.0025;
        let n = 20000;
        let h = 2.0 * d / n as f64;
        let mid: f64 = (0..n).map(|i| m.poisson(-d + (i as f64 + 0.5) * h, y)).sum::<f64>() * h / (2.0 * d);
        let aj = amortized_jq(&m, &spec, d, 0.0, FractionalPrefactor::Definition).unwrap();
        assert!((aj - mid).abs() < 1e-6 * aj, "{aj} vs {mid}");
    }

    fn arb_atoms() -> impl Strategy<Value = Measure> {
        prop::collection::vec((-1.0f64..1.0, 0.0f64..2.0), 1..6).prop_map(|a| Measure::from_atoms(&a).unwrap())
    }

    proptest! {
        #[test]
        fn vertical_monotonicity(m in arb_atoms(), x in -1.5f64..1.5, y1 in 1e-4f64..1.0, dy in 0.0f64..1.0) {
            let r = rep(m);
            let lo = julia_quotient(&r, Complex64::new(x, y1)).unwrap();
            let hi = julia_quotient(&r, Complex64::new(x, y1 + dy)).unwrap();
            prop_assert!(lo >= hi);
        }

        #[test]
        fn path_agreement(m in arb_atoms(), x in -1.5f64..1.5, ly in -3.0f64..1.0) {
            let r = rep(m);
            let z = Complex64::new(x, 10f64.powf(ly));
            let a = julia_quotient(&r, z).unwrap();
            let b = julia_quotient_via_value(&r, z).unwrap();
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a), "{} vs {}", a, b);
        }

        #[test]
        fn fractional_sandwich(m in arb_atoms(), c in 0.2f64..3.0, p in 1.2f64..3.0, k in 0usize..8, s_idx in 0usize..4) {
            let s = [0.0, 0.5, 1.0, 2.0][s_idx];
            let spec = StolzSpec::new(0.0, RateFunction::power(c, p).unwrap());
            let eps = 0.2 * 0.5f64.powi(k as i32);
            prop_assume!(spec.lambda.value(eps) < eps / 4.0);
            let def = FractionalPrefactor::Definition;
            let aj = amortized_jq(&m, &spec, eps, s, def).unwrap();
            let b = augur_bounds(&m, &spec, eps, s, def).unwrap();
            prop_assert!(b.lower <= aj * (1.0 + 1e-9), "{} > {}", b.lower, aj);
            prop_assert!(aj <= b.upper * (1.0 + 1e-9), "{} > {}", aj, b.upper);
        }
    }
}
