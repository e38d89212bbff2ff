//! Double-exponential (tanh-sinh) quadrature.
//!
//! Nodes are handed to the integrand together with their exact offsets from
//! both interval endpoints, so integrands that are singular (or vary on a
//! tiny scale) at an endpoint can be evaluated without cancellation.

use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;
use std::ops::{Add, Mul, Sub};

/// Values that can be accumulated by the quadrature rule.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// A quadrature node: its position and its exact distances to the two ends.
#[derive(Debug, Clone, Copy)]
pub struct Node {
    pub t: f64,
    pub from_lo: f64,
    pub from_hi: f64,
}

impl Node {
    /// Signed offset `t - point`, exact when `point` is one of the endpoints.
    #[inline]
    pub fn offset(&self, point: f64, lo: f64, hi: f64) -> f64 {
        if point == lo {
            self.from_lo
        } else if point == hi {
            -self.from_hi
        } else {
            self.t - point
        }
    }
}

const T_MAX: f64 = 6.5;
const MAX_LEVEL: u32 = 11;
const MIN_LEVEL: u32 = 4;

#[derive(Debug, Clone, Copy)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
}

/// Integrate `f` over `[lo, hi]` to relative tolerance `rel_tol`.
pub fn tanh_sinh<T, F>(lo: f64, hi: f64, rel_tol: f64, f: F) -> Estimate<T>
where
    T: QuadValue,
    F: Fn(Node) -> T,
{
    if !(hi > lo) {
        return Estimate {
            value: T::zero(),
            error: 0.0,
        };
    }
    let half = 0.5 * (hi - lo);
    let eval = |s: f64| -> T {
        let v = FRAC_PI_2 * s.sinh();
        let e = (-2.0 * v.abs()).exp();
        // cosh(v)^-2 = 4 e^{-2|v|} / (1 + e^{-2|v|})^2
        let w = half * FRAC_PI_2 * s.cosh() * 4.0 * e / ((1.0 + e) * (1.0 + e));
        if w == 0.0 || !w.is_finite() {
            return T::zero();
        }
        let near = 2.0 * half * e / (1.0 + e);
        let node = if v <= 0.0 {
            Node {
                t: lo + near,
                from_lo: near,
                from_hi: 2.0 * half - near,
            }
        } else {
            Node {
                t: hi - near,
                from_lo: 2.0 * half - near,
                from_hi: near,
            }
        };
        if node.from_lo <= 0.0 || node.from_hi <= 0.0 {
            return T::zero();
        }
        f(node) * w
    };

    let mut h = 1.0;
    let mut sum = eval(0.0);
    let mut k = 1.0;
    while k * h <= T_MAX {
        sum = sum + eval(k * h) + eval(-k * h);
        k += 1.0;
    }
    let mut estimate = sum * h;
    let mut error = f64::INFINITY;
    for level in 1..=MAX_LEVEL {
        h *= 0.5;
        let mut fresh = T::zero();
        let mut j = 1.0;
        while j * h <= T_MAX {
            fresh = fresh + eval(j * h) + eval(-j * h);
            j += 2.0;
        }
        sum = sum + fresh;
        let next = sum * h;
        error = (next - estimate).magnitude();
        estimate = next;
        if level >= MIN_LEVEL && error <= rel_tol * estimate.magnitude() {
            break;
        }
        if level >= MIN_LEVEL && estimate.magnitude() == 0.0 && error == 0.0 {
            break;
        }
    }
    Estimate { value: estimate, error }
}

/// Integrate over `[lo, hi]` split at the sorted, deduplicated `breaks`
/// that fall strictly inside the interval.
pub fn tanh_sinh_split<T, F>(lo: f64, hi: f64, breaks: &[f64], rel_tol: f64, f: F) -> T
where
    T: QuadValue,
    F: Fn(f64, f64, Node) -> T,
{
    let mut pts = vec![lo];
    let mut inner: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|b| b.is_finite() && *b > lo && *b < hi)
        .collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    pts.extend(inner);
    pts.push(hi);
    let mut total = T::zero();
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        total = total + tanh_sinh(a, b, rel_tol, |n| f(a, b, n)).value;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_endpoint_singularity() {
        let r = tanh_sinh(0.0, 1.0, 1e-14, |n: Node| n.t * n.t);
        assert!((r.value - 1.0 / 3.0).abs() < 1e-14);
        let r = tanh_sinh(0.0, 1.0, 1e-13, |n: Node| n.from_lo.powf(-0.9));
        assert!((r.value - 10.0).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn narrow_lorentzian_at_endpoint() {
        // int_0^1 y/(u^2+y^2) du = atan(1/y)
        for &y in &[1e-3, 1e-8, 1e-20] {
            let r = tanh_sinh(0.0, 1.0, 1e-12, |n: Node| y / (n.from_lo * n.from_lo + y * y));
            let exact = (1.0 / y).atan();
            assert!((r.value - exact).abs() < 1e-9, "y={y}: {} vs {exact}", r.value);
        }
    }

    #[test]
    fn complex_integrand() {
        // int_0^1 1/(t - i) dt = log((1 - i)/(-i))
        let z = Complex64::new(0.0, 1.0);
        let r = tanh_sinh(0.0, 1.0, 1e-14, |n: Node| 1.0 / (Complex64::new(n.t, 0.0) - z));
        let exact = (Complex64::new(1.0, 0.0) - z).ln() - (-z).ln();
        assert!((r.value - exact).norm() < 1e-13);
    }
}
