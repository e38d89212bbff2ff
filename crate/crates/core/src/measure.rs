//! Finite positive Borel measures on the real line: point masses plus
//! symbolic density pieces.

use crate::error::{Error, Result};
use crate::quad::{tanh_sinh_split, Node, QuadValue};
use crate::special::{arc_angle, arc_kernel_integral, exp_inv_mass_from_zero, weighted_fractional_kernel, weighted_lorentz};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Relative tolerance used for density-piece quadrature.
pub const DENSITY_TOL: f64 = 1e-12;

/// A point mass `w * delta_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub t: f64,
    pub w: f64,
}

/// Shape of a density piece, expressed in the distance `u = |t - center|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityForm {
    /// `c * u^p`, `p > -1`
    Power { c: f64, p: f64 },
    /// `c`
    Constant { c: f64 },
    /// `c * e^{-k/u}`
    ExpInv { c: f64, k: f64 },
}

impl DensityForm {
    pub fn coefficient(&self) -> f64 {
        match *self {
            DensityForm::Power { c, .. } | DensityForm::Constant { c } | DensityForm::ExpInv { c, .. } => c,
        }
    }

    /// Density at distance `u >= 0` from the center.
    pub fn value(&self, u: f64) -> f64 {
        match *self {
            DensityForm::Power { c, p } => {
                if p == 0.0 {
                    c
                } else {
                    c * u.powf(p)
                }
            }
            DensityForm::Constant { c } => c,
            DensityForm::ExpInv { c, k } => {
                if u == 0.0 {
                    0.0
                } else {
                    c * (-k / u).exp()
                }
            }
        }
    }

    pub fn ln_value(&self, u: f64) -> f64 {
        match *self {
            DensityForm::Power { c, p } => {
                if p == 0.0 {
                    c.ln()
                } else {
                    c.ln() + p * u.ln()
                }
            }
            DensityForm::Constant { c } => c.ln(),
            DensityForm::ExpInv { c, k } => c.ln() - k / u,
        }
    }

    /// `int_0^r` of the density in the distance variable.
    pub fn radial_mass(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        match *self {
            DensityForm::Power { c, p } => c * r.powf(p + 1.0) / (p + 1.0),
            DensityForm::Constant { c } => c * r,
            DensityForm::ExpInv { c, k } => c * exp_inv_mass_from_zero(k, r),
        }
    }

    /// Mass over `[u1, u2]` in signed coordinates relative to the center.
    pub fn signed_mass(&self, u1: f64, u2: f64) -> f64 {
        if !(u2 > u1) {
            return 0.0;
        }
        if let DensityForm::Constant { c } = *self {
            return c * (u2 - u1);
        }
        let g = |r: f64| self.radial_mass(r);
        if u1 >= 0.0 {
            (g(u2) - g(u1)).max(0.0)
        } else if u2 <= 0.0 {
            (g(-u1) - g(-u2)).max(0.0)
        } else {
            g(-u1) + g(u2)
        }
    }
}

/// An absolutely continuous piece supported on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityPiece {
    pub lo: f64,
    pub hi: f64,
    pub center: f64,
    pub form: DensityForm,
}

/// A quadrature node in coordinates `u = t - anchor`.
#[derive(Debug, Clone, Copy)]
pub struct LocalNode {
    pub u: f64,
    pub rho: f64,
    pub ln_rho: f64,
    node: Node,
    a: f64,
    b: f64,
}

impl LocalNode {
    /// `u - point`, exact when `point` is one of the breakpoints.
    #[inline]
    pub fn offset(&self, point: f64) -> f64 {
        self.node.offset(point, self.a, self.b)
    }
}

impl DensityPiece {
    pub fn density(&self, t: f64) -> f64 {
        if t < self.lo || t > self.hi {
            return 0.0;
        }
        self.form.value((t - self.center).abs())
    }

    pub fn mass(&self, a: f64, b: f64) -> f64 {
        let lo = self.lo.max(a);
        let hi = self.hi.min(b);
        if !(hi > lo) {
            return 0.0;
        }
        self.form.signed_mass(lo - self.center, hi - self.center)
    }

    fn clipped(&self, a: f64, b: f64) -> Option<DensityPiece> {
        let lo = self.lo.max(a);
        let hi = self.hi.min(b);
        (hi > lo).then_some(DensityPiece { lo, hi, ..*self })
    }

    /// Quadrature of `f` over `t in [anchor + u_lo, anchor + u_hi]` intersected
    /// with the support. The integrand sees `u = t - anchor` and the density;
    /// the interval is split at `u = 0`, the center and the extra `breaks`.
    pub fn quad_local<T, F>(&self, anchor: f64, u_lo: f64, u_hi: f64, breaks: &[f64], tol: f64, f: F) -> T
    where
        T: QuadValue,
        F: Fn(LocalNode) -> T,
    {
        let lo = (self.lo - anchor).max(u_lo);
        let hi = (self.hi - anchor).min(u_hi);
        if !(hi > lo) {
            return T::zero();
        }
        let uc = self.center - anchor;
        let mut all = vec![0.0, uc];
        all.extend_from_slice(breaks);
        tanh_sinh_split(lo, hi, &all, tol, |a, b, node: Node| {
            let dc = node.offset(uc, a, b).abs();
            let local = LocalNode {
                u: node.t,
                rho: self.form.value(dc),
                ln_rho: self.form.ln_value(dc),
                node,
                a,
                b,
            };
            f(local)
        })
    }

    /// `int rho(t) K(t - x) dt` for a kernel peaked at `t = x`, given the
    /// kernel's exact integral over any interval. The density is frozen at
    /// the closest support point and only the remainder is integrated
    /// numerically.
    fn peaked_integral<T, E, K>(&self, x: f64, exact: E, kernel: K) -> T
    where
        T: QuadValue,
        E: Fn(f64, f64) -> T,
        K: Fn(f64) -> T,
    {
        if let DensityForm::Constant { c } = self.form {
            return exact(self.lo, self.hi) * c;
        }
        let u_hat = (x.clamp(self.lo, self.hi)) - x;
        let rho_hat = self.form.value((x + u_hat - self.center).abs());
        let breaks = [u_hat];
        if rho_hat.is_finite() {
            let rest = self.quad_local(x, f64::NEG_INFINITY, f64::INFINITY, &breaks, DENSITY_TOL, |n| {
                let diff = n.rho - rho_hat;
                // the kernel may overflow where the difference vanishes
                if diff == 0.0 {
                    T::zero()
                } else {
                    kernel(n.offset(u_hat) + u_hat) * diff
                }
            });
            exact(self.lo, self.hi) * rho_hat + rest
        } else {
            self.quad_local(x, f64::NEG_INFINITY, f64::INFINITY, &breaks, DENSITY_TOL, |n| {
                kernel(n.offset(u_hat) + u_hat) * n.rho
            })
        }
    }
}

/// Cauchy kernel integral `int_a^b dt/(t - z)` as a complex logarithm.
pub fn cauchy_interval(a: f64, b: f64, z: Complex64) -> Complex64 {
    let re = ((b - z.re).hypot(z.im) / (a - z.re).hypot(z.im)).ln();
    Complex64::new(re, arc_angle(a, b, z.re, z.im))
}

/// A finite positive Borel measure: atoms plus density pieces.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "MeasureJson", into = "MeasureJson")]
pub struct Measure {
    atoms: Vec<Atom>,
    densities: Vec<DensityPiece>,
}

impl Measure {
    pub fn zero() -> Self {
        Measure::default()
    }

    /// Raw constructor; call [`validate_measure`] on user input.
    pub fn from_parts(atoms: Vec<Atom>, densities: Vec<DensityPiece>) -> Self {
        Measure { atoms, densities }
    }

    pub fn atom(t: f64, w: f64) -> Result<Self> {
        Self::from_atoms(&[(t, w)])
    }

    pub fn from_atoms(atoms: &[(f64, f64)]) -> Result<Self> {
        validate_measure(Measure {
            atoms: atoms.iter().map(|&(t, w)| Atom { t, w }).collect(),
            densities: vec![],
        })
    }

    pub fn density(lo: f64, hi: f64, center: f64, form: DensityForm) -> Result<Self> {
        validate_measure(Measure {
            atoms: vec![],
            densities: vec![DensityPiece { lo, hi, center, form }],
        })
    }

    /// `c * |t - center|^p` on `[lo, hi]`.
    pub fn power_density(c: f64, p: f64, center: f64, lo: f64, hi: f64) -> Result<Self> {
        Self::density(lo, hi, center, DensityForm::Power { c, p })
    }

    pub fn constant_density(c: f64, lo: f64, hi: f64) -> Result<Self> {
        Self::density(lo, hi, 0.5 * (lo + hi), DensityForm::Constant { c })
    }

    /// `c * e^{-k/|t - center|}` on `[lo, hi]`.
    pub fn exp_inv_density(c: f64, k: f64, center: f64, lo: f64, hi: f64) -> Result<Self> {
        Self::density(lo, hi, center, DensityForm::ExpInv { c, k })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn densities(&self) -> &[DensityPiece] {
        &self.densities
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.densities.is_empty()
    }

    pub fn is_atomic(&self) -> bool {
        self.densities.is_empty()
    }

    /// Sum of two measures. Pieces are kept side by side, so the result may
    /// contain overlapping density supports; every integral stays additive.
    pub fn sum(&self, other: &Measure) -> Measure {
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        atoms.sort_by(|a, b| a.t.total_cmp(&b.t));
        let mut densities = self.densities.clone();
        densities.extend_from_slice(&other.densities);
        Measure { atoms, densities }
    }

    pub fn scaled(&self, s: f64) -> Measure {
        Measure {
            atoms: self.atoms.iter().map(|a| Atom { t: a.t, w: a.w * s }).collect(),
            densities: self
                .densities
                .iter()
                .map(|d| {
                    let form = match d.form {
                        DensityForm::Power { c, p } => DensityForm::Power { c: c * s, p },
                        DensityForm::Constant { c } => DensityForm::Constant { c: c * s },
                        DensityForm::ExpInv { c, k } => DensityForm::ExpInv { c: c * s, k },
                    };
                    DensityPiece { form, ..*d }
                })
                .collect(),
        }
    }

    /// The pushforward under `t -> t - tau`.
    pub fn shifted(&self, tau: f64) -> Measure {
        Measure {
            atoms: self.atoms.iter().map(|a| Atom { t: a.t - tau, w: a.w }).collect(),
            densities: self
                .densities
                .iter()
                .map(|d| DensityPiece {
                    lo: d.lo - tau,
                    hi: d.hi - tau,
                    center: d.center - tau,
                    form: d.form,
                })
                .collect(),
        }
    }

    /// `mu((a, b))`, atoms on the endpoints excluded.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        if !(b > a) {
            return 0.0;
        }
        let atoms: f64 = self.atoms.iter().filter(|x| x.t > a && x.t < b).map(|x| x.w).sum();
        atoms + self.densities.iter().map(|d| d.mass(a, b)).sum::<f64>()
    }

    pub fn total_mass(&self) -> f64 {
        self.mass(f64::NEG_INFINITY, f64::INFINITY)
    }

    /// Restriction to the open interval `(a, b)`.
    pub fn restrict_open(&self, a: f64, b: f64) -> Measure {
        Measure {
            atoms: self.atoms.iter().copied().filter(|x| x.t > a && x.t < b).collect(),
            densities: self.densities.iter().filter_map(|d| d.clipped(a, b)).collect(),
        }
    }

    /// Restriction to the closed interval `[a, b]`.
    pub fn restrict_closed(&self, a: f64, b: f64) -> Measure {
        Measure {
            atoms: self.atoms.iter().copied().filter(|x| x.t >= a && x.t <= b).collect(),
            densities: self.densities.iter().filter_map(|d| d.clipped(a, b)).collect(),
        }
    }

    /// Restriction to the complement of `[a, b]`.
    pub fn restrict_outside(&self, a: f64, b: f64) -> Measure {
        let mut densities = Vec::new();
        for d in &self.densities {
            densities.extend(d.clipped(f64::NEG_INFINITY, a));
            densities.extend(d.clipped(b, f64::INFINITY));
        }
        Measure {
            atoms: self.atoms.iter().copied().filter(|x| x.t < a || x.t > b).collect(),
            densities,
        }
    }

    /// Smallest closed interval containing the support.
    pub fn support_hull(&self) -> Option<(f64, f64)> {
        let lo = self
            .atoms
            .iter()
            .map(|a| a.t)
            .chain(self.densities.iter().map(|d| d.lo))
            .fold(f64::INFINITY, f64::min);
        let hi = self
            .atoms
            .iter()
            .map(|a| a.t)
            .chain(self.densities.iter().map(|d| d.hi))
            .fold(f64::NEG_INFINITY, f64::max);
        (lo <= hi).then_some((lo, hi))
    }

    /// `int h dmu` for a function that is bounded on the support, by exact
    /// atom sums and piecewise quadrature.
    pub fn integrate_smooth<F: Fn(f64) -> f64>(&self, h: F) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|a| a.w * h(a.t)).sum();
        let dens: f64 = self
            .densities
            .iter()
            .map(|d| d.quad_local(0.0, f64::NEG_INFINITY, f64::INFINITY, &[], DENSITY_TOL, |n| n.rho * h(n.u)))
            .sum();
        atoms + dens
    }

    /// `int t/(1+t^2) dmu`.
    pub fn nevanlinna_shift(&self) -> f64 {
        self.integrate_smooth(|t| t / (1.0 + t * t))
    }

    /// Cauchy transform `int dmu(t)/(t - z)`, `Im z > 0`.
    pub fn cauchy(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for a in &self.atoms {
            acc += a.w / (Complex64::new(a.t, 0.0) - z);
        }
        for d in &self.densities {
            acc += d.peaked_integral(
                z.re,
                |a, b| cauchy_interval(a, b, z),
                |dx| Complex64::new(1.0, 0.0) / Complex64::new(dx, -z.im),
            );
        }
        acc
    }

    /// Poisson-type integral `int dmu(t)/((t - x)^2 + y^2)`, `y > 0`.
    pub fn poisson(&self, x: f64, y: f64) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|a| weighted_lorentz(a.w, a.t - x, y)).sum();
        let dens: f64 = self
            .densities
            .iter()
            .map(|d| d.peaked_integral(x, |a, b| arc_angle(a, b, x, y) / y, |dx| weighted_lorentz(1.0, dx, y)))
            .sum();
        atoms + dens
    }

    /// `int dmu(t)/((t - x)^2 + y^2)^{s+1}`, `y > 0`, `s >= 0`.
    pub fn fractional_kernel(&self, x: f64, y: f64, s: f64) -> f64 {
        if s == 0.0 {
            return self.poisson(x, y);
        }
        let atoms: f64 = self
            .atoms
            .iter()
            .map(|a| weighted_fractional_kernel(a.w, a.t - x, y, s))
            .sum();
        let dens: f64 = self
            .densities
            .iter()
            .map(|d| {
                d.peaked_integral(
                    x,
                    |a, b| arc_kernel_integral(s, a, b, x, y),
                    |dx| weighted_fractional_kernel(1.0, dx, y, s),
                )
            })
            .sum();
        atoms + dens
    }

    /// `int_{x1}^{x2} int dmu(t)/((t - x)^2 + y^2)^{s+1} dx`, with the order
    /// of integration swapped so each atom or piece meets an exact arc kernel.
    pub fn arc_kernel_mass(&self, x1: f64, x2: f64, y: f64, s: f64) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|a| a.w * arc_kernel_integral(s, x1, x2, a.t, y)).sum();
        let mid = 0.5 * (x1 + x2);
        let (d1, d2) = (x1 - mid, x2 - mid);
        let dens: f64 = self
            .densities
            .iter()
            .map(|p| {
                p.quad_local(mid, f64::NEG_INFINITY, f64::INFINITY, &[d1, d2], DENSITY_TOL, |n| {
                    if n.rho == 0.0 {
                        return 0.0;
                    }
                    // t relative to the arc ends, exact next to them
                    let from_x1 = n.offset(d1);
                    let from_x2 = n.offset(d2);
                    let inner = if s == 0.0 {
                        (y * (x2 - x1)).atan2(y * y + from_x2 * from_x1) / y
                    } else {
                        arc_kernel_integral(s, -from_x1, -from_x2, 0.0, y)
                    };
                    n.rho * inner
                })
            })
            .sum();
        atoms + dens
    }
}

/// Normalize and check a measure: atoms sorted with zero weights dropped,
/// density pieces sorted, checked for sign, integrability and overlap.
pub fn validate_measure(m: Measure) -> Result<Measure> {
    let mut atoms = Vec::with_capacity(m.atoms.len());
    for a in m.atoms {
        if !a.t.is_finite() || !a.w.is_finite() {
            return Err(Error::InvalidMeasure(format!("non-finite atom ({}, {})", a.t, a.w)));
        }
        if a.w < 0.0 {
            return Err(Error::NegativeWeight {
                location: a.t,
                weight: a.w,
            });
        }
        if a.w > 0.0 {
            atoms.push(a);
        }
    }
    atoms.sort_by(|a, b| a.t.total_cmp(&b.t));

    let mut densities = Vec::with_capacity(m.densities.len());
    for d in m.densities {
        if !(d.lo.is_finite() && d.hi.is_finite() && d.center.is_finite() && d.lo < d.hi) {
            return Err(Error::InvalidMeasure(format!("bad support [{}, {}]", d.lo, d.hi)));
        }
        let c = d.form.coefficient();
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::NegativeDensity { lo: d.lo, hi: d.hi });
        }
        match d.form {
            DensityForm::Power { p, .. } if !(p > -1.0 && p.is_finite()) => {
                return Err(Error::NonIntegrableDensityExponent { p });
            }
            DensityForm::ExpInv { k, .. } if !(k > 0.0 && k.is_finite()) => {
                return Err(Error::InvalidMeasure(format!("expinv density needs k > 0 (got {k})")));
            }
            _ => {}
        }
        if c > 0.0 {
            densities.push(d);
        }
    }
    densities.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    for w in densities.windows(2) {
        if w[0].hi > w[1].lo {
            return Err(Error::OverlappingDensitySupports {
                first_lo: w[0].lo,
                first_hi: w[0].hi,
                second_lo: w[1].lo,
                second_hi: w[1].hi,
            });
        }
    }
    Ok(Measure { atoms, densities })
}

#[derive(Serialize, Deserialize)]
struct MeasureJson {
    #[serde(default)]
    atoms: Vec<Atom>,
    #[serde(default)]
    densities: Vec<DensityJson>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "lowercase")]
enum DensityJson {
    Power {
        center: f64,
        c: f64,
        p: f64,
        support: [f64; 2],
    },
    Constant {
        c: f64,
        support: [f64; 2],
    },
    #[serde(rename = "expinv")]
    ExpInv {
        center: f64,
        c: f64,
        k: f64,
        support: [f64; 2],
    },
}

impl From<MeasureJson> for Measure {
    fn from(j: MeasureJson) -> Self {
        let densities = j
            .densities
            .into_iter()
            .map(|d| match d {
                DensityJson::Power { center, c, p, support } => DensityPiece {
                    lo: support[0],
                    hi: support[1],
                    center,
                    form: DensityForm::Power { c, p },
                },
                DensityJson::Constant { c, support } => DensityPiece {
                    lo: support[0],
                    hi: support[1],
                    center: 0.5 * (support[0] + support[1]),
                    form: DensityForm::Constant { c },
                },
                DensityJson::ExpInv { center, c, k, support } => DensityPiece {
                    lo: support[0],
                    hi: support[1],
                    center,
                    form: DensityForm::ExpInv { c, k },
                },
            })
            .collect();
        Measure {
            atoms: j.atoms,
            densities,
        }
    }
}

impl From<Measure> for MeasureJson {
    fn from(m: Measure) -> Self {
        let densities = m
            .densities
            .into_iter()
            .map(|d| {
                let support = [d.lo, d.hi];
                match d.form {
                    DensityForm::Power { c, p } => DensityJson::Power {
                        center: d.center,
                        c,
                        p,
                        support,
                    },
                    DensityForm::Constant { c } => DensityJson::Constant { c, support },
                    DensityForm::ExpInv { c, k } => DensityJson::ExpInv {
                        center: d.center,
                        c,
                        k,
                        support,
                    },
                }
            })
            .collect();
        MeasureJson {
            atoms: m.atoms,
            densities,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::tanh_sinh;
    use proptest::prelude::*;

    #[test]
    fn validation_examples() {
        let m = Measure::atom(0.5, 1.0).unwrap();
        assert_eq!(m.atoms(), &[Atom { t: 0.5, w: 1.0 }]);
        assert!(matches!(Measure::atom(0.5, -1.0), Err(Error::NegativeWeight { .. })));
        assert!(matches!(
            Measure::power_density(1.0, -1.5, 0.0, -1.0, 1.0),
            Err(Error::NonIntegrableDensityExponent { .. })
        ));
        let two = Measure::from_parts(
            vec![],
            vec![
                DensityPiece {
                    lo: -1.0,
                    hi: 0.5,
                    center: 0.0,
                    form: DensityForm::Constant { c: 1.0 },
                },
                DensityPiece {
                    lo: 0.0,
                    hi: 1.0,
                    center: 0.0,
                    form: DensityForm::Constant { c: 1.0 },
                },
            ],
        );
        assert!(matches!(validate_measure(two), Err(Error::OverlappingDensitySupports { .. })));
        let sorted = Measure::from_atoms(&[(0.3, 1.0), (-0.2, 0.0), (-0.5, 2.0)]).unwrap();
        assert_eq!(sorted.atoms().len(), 2);
        assert_eq!(sorted.atoms()[0].t, -0.5);
    }

    #[test]
    fn mass_examples() {
        let m = Measure::atom(0.5, 1.0).unwrap();
        assert_eq!(m.mass(0.0, 1.0), 1.0);
        assert_eq!(m.mass(0.5, 1.0), 0.0);
        let d = Measure::power_density(1.0, 2.0, 0.0, 0.0, 1.0).unwrap();
        assert!((d.mass(0.0, 0.5) - 1.0 / 24.0).abs() < 1e-15);
        let e = Measure::exp_inv_density(1.0, 2.0, 0.0, -1.0, 1.0).unwrap();
        let q = tanh_sinh(0.0, 0.3, 1e-14, |n: Node| (-2.0 / n.t).exp()).value;
        assert!((e.mass(-0.3, 0.3) - 2.0 * q).abs() < 1e-14);
    }

    #[test]
    fn json_round_trip() {
        let json = r#"{"atoms":[{"t":0.5,"w":1.0}],
            "densities":[{"form":"power","center":0.0,"c":1.0,"p":2.0,"support":[-1.0,1.0]}]}"#;
        let m: Measure = serde_json::from_str(json).unwrap();
        let m = validate_measure(m).unwrap();
        let back: Measure = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(m, back);
        assert!((m.total_mass() - (1.0 + 2.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn density_cauchy_matches_brute_force() {
        let m = Measure::power_density(1.3, 0.5, 0.1, -0.6, 0.9).unwrap();
        for z in [Complex64::new(0.2, 0.7), Complex64::new(0.1, 1e-3), Complex64::new(-2.0, 0.1)] {
            let brute = tanh_sinh(-0.6, 0.1, 1e-14, |n: Node| {
                1.3 * n.from_hi.powf(0.5) / (Complex64::new(n.t, 0.0) - z)
            })
            .value
                + tanh_sinh(0.1, 0.9, 1e-14, |n: Node| {
                    1.3 * n.from_lo.powf(0.5) / (Complex64::new(n.t, 0.0) - z)
                })
                .value;
            let got = m.cauchy(z);
            assert!((got - brute).norm() < 1e-9 * brute.norm(), "{z}: {got} vs {brute}");
        }
    }

    #[test]
    fn poisson_survives_underflowing_heights() {
        // y^2 underflows and the density vanishes near x
        let m = Measure::exp_inv_density(1.0, 2.0, 0.0, -1.0, 1.0).unwrap();
        // int e^{-2/|t|}/t^2 = e^{-2}, perturbed by O(x)
        let v = m.poisson(1.3e-3, 3e-163);
        assert!((v - (-2.0f64).exp()).abs() < 1e-4);
    }

    #[test]
    fn poisson_is_accurate_for_tiny_heights() {
        // constant density: int_{-1}^{1} dt/(t^2+y^2) = 2 atan(1/y)/y
        let m = Measure::constant_density(1.0, -1.0, 1.0).unwrap();
        for &y in &[1e-2f64, 1e-6, 1e-12] {
            let exact = 2.0 * (1.0 / y).atan() / y;
            assert!((m.poisson(0.0, y) - exact).abs() < 1e-12 * exact);
        }
        // t^2 density centered at 0, x = 0: int t^2/(t^2+y^2) = 2(1 - y atan(1/y))
        let m = Measure::power_density(1.0, 2.0, 0.0, -1.0, 1.0).unwrap();
        for &y in &[1e-1f64, 1e-4, 1e-9] {
            let exact = 2.0 * (1.0 - y * (1.0 / y).atan());
            let got = m.poisson(0.0, y);
            assert!((got - exact).abs() < 1e-10 * exact, "y={y}: {got} vs {exact}");
        }
    }

    #[test]
    fn arc_kernel_mass_matches_fubini() {
        let m = Measure::power_density(1.0, 1.5, 0.0, -1.0, 1.0).unwrap();
        let (x1, x2, y) = (-0.1, 0.1, 0.01);
        for s in [0.0, 1.0] {
            let direct = tanh_sinh(x1, 0.0, 1e-12, |n: Node| m.fractional_kernel(n.t, y, s)).value
                + tanh_sinh(0.0, x2, 1e-12, |n: Node| m.fractional_kernel(n.t, y, s)).value;
            let swapped = m.arc_kernel_mass(x1, x2, y, s);
            assert!((direct - swapped).abs() < 1e-8 * direct, "s={s}: {direct} vs {swapped}");
        }
    }

    fn arb_measure() -> impl Strategy<Value = Measure> {
        (
            prop::collection::vec((-2.0f64..2.0, 0.0f64..3.0), 0..5),
            prop::option::of((0.0f64..2.0, -0.5f64..3.0, -1.0f64..0.0, 0.1f64..1.5)),
        )
            .prop_map(|(atoms, dens)| {
                let atoms = atoms.into_iter().map(|(t, w)| Atom { t, w }).collect();
                let densities = dens
                    .map(|(c, p, lo, len)| DensityPiece {
                        lo,
                        hi: lo + len,
                        center: lo + 0.3 * len,
                        form: DensityForm::Power { c, p },
                    })
                    .into_iter()
                    .collect();
                validate_measure(Measure::from_parts(atoms, densities)).unwrap()
            })
    }

    proptest! {
        #[test]
        fn mass_is_additive(m1 in arb_measure(), m2 in arb_measure(), a in -2.5f64..0.0, len in 0.0f64..3.0) {
            let b = a + len;
            let lhs = m1.sum(&m2).mass(a, b);
            let rhs = m1.mass(a, b) + m2.mass(a, b);
            prop_assert!((lhs - rhs).abs() <= 1e-15 * (1.0 + rhs));
        }

        #[test]
        fn mass_is_monotone_in_window(m in arb_measure(), a in -2.5f64..0.0, len in 0.0f64..3.0, da in 0.0f64..0.5, db in 0.0f64..0.5) {
            let b = a + len;
            prop_assert!(m.mass(a, b) <= m.mass(a - da, b + db) * (1.0 + 1e-15) + 1e-300);
        }
    }
}
