//! Special functions and the closed-form kernel integrals used by the
//! Julia-quotient machinery.

use crate::quad::{tanh_sinh, Node};
use statrs::function::gamma::gamma;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Generalized exponential integral `E_n(x)` for `n >= 0`, `x > 0`.
pub fn expint(n: u32, x: f64) -> f64 {
    if x.is_infinite() {
        return 0.0;
    }
    if n == 0 {
        return (-x).exp() / x;
    }
    let nm1 = (n - 1) as f64;
    if x > 1.0 {
        // Lentz continued fraction.
        let mut b = x + n as f64;
        let mut c = 1.0 / f64::MIN_POSITIVE;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -(i as f64) * (nm1 + i as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    } else {
        let mut ans = if nm1 != 0.0 { 1.0 / nm1 } else { -x.ln() - EULER_GAMMA };
        let mut fact = 1.0;
        for i in 1..500 {
            fact *= -x / i as f64;
            let del = if (i as f64) != nm1 {
                -fact / (i as f64 - nm1)
            } else {
                let mut psi = -EULER_GAMMA;
                for ii in 1..=(n - 1) {
                    psi += 1.0 / ii as f64;
                }
                fact * (-x.ln() + psi)
            };
            ans += del;
            if del.abs() < ans.abs() * 1e-17 {
                break;
            }
        }
        ans
    }
}

/// `int_0^r e^{-k/s} ds` for `r >= 0`, `k > 0`.
pub fn exp_inv_mass_from_zero(k: f64, r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    r * expint(2, k / r)
}

/// `w / (dx^2 + y^2)` evaluated without intermediate overflow or underflow.
#[inline]
pub fn weighted_lorentz(w: f64, dx: f64, y: f64) -> f64 {
    let m = dx.abs().max(y);
    if m == 0.0 {
        return f64::INFINITY;
    }
    let a = dx / m;
    let b = y / m;
    (w / m) / m / (a * a + b * b)
}

/// `w / (dx^2 + y^2)^{s+1}` evaluated without intermediate overflow.
#[inline]
pub fn weighted_fractional_kernel(w: f64, dx: f64, y: f64, s: f64) -> f64 {
    if s == 0.0 {
        return weighted_lorentz(w, dx, y);
    }
    if w == 0.0 {
        return 0.0;
    }
    let m = dx.abs().max(y);
    if m == 0.0 {
        return f64::INFINITY;
    }
    let a = dx / m;
    let b = y / m;
    let q = a * a + b * b;
    let direct = w / m.powf(2.0 * s + 2.0) / q.powf(s + 1.0);
    if direct.is_finite() && direct > 0.0 {
        direct
    } else {
        (w.ln() - (2.0 * s + 2.0) * m.ln() - (s + 1.0) * q.ln()).exp()
    }
}

/// `atan((x2 - t)/y) - atan((x1 - t)/y)` for `x1 <= x2`, `y > 0`, computed as a
/// single `atan2` so that far-away `t` does not cancel.
#[inline]
pub fn arc_angle(x1: f64, x2: f64, t: f64, y: f64) -> f64 {
    (y * (x2 - x1)).atan2(y * y + (x2 - t) * (x1 - t))
}

/// `int_a^{a+w} sin(psi)^{2s} dpsi` for `0 <= a`, `a + w <= pi`.
fn sin_power_integral(s: f64, a: f64, w: f64) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    if s == 0.0 {
        return w;
    }
    tanh_sinh(0.0, w, 1e-13, |n: Node| (a + n.t).sin().powf(2.0 * s)).value
}

/// `int_{x1}^{x2} dx / ((x - t)^2 + y^2)^{s+1}`.
///
/// Substituting `x - t = y tan(theta)` turns this into
/// `y^{-2s-1} int cos(theta)^{2s} dtheta`; the angle interval is assembled from
/// `atan2` pieces so that both tiny `y` and distant `t` stay accurate.
pub fn arc_kernel_integral(s: f64, x1: f64, x2: f64, t: f64, y: f64) -> f64 {
    let angle = angular_kernel_integral(s, x1, x2, t, y);
    if s == 0.0 {
        angle / y
    } else {
        let scale = y.powf(-2.0 * s - 1.0);
        if scale.is_finite() {
            angle * scale
        } else {
            (angle.ln() - (2.0 * s + 1.0) * y.ln()).exp()
        }
    }
}

/// The dimensionless factor `int_{theta1}^{theta2} cos(theta)^{2s} dtheta` of
/// [`arc_kernel_integral`].
pub fn angular_kernel_integral(s: f64, x1: f64, x2: f64, t: f64, y: f64) -> f64 {
    if !(x2 > x1) {
        return 0.0;
    }
    let width = arc_angle(x1, x2, t, y);
    if s == 0.0 {
        return width;
    }
    if t <= x1 {
        // psi = atan2(y, x - t) decreases from psi(x1) to psi(x2)
        let start = y.atan2(x2 - t);
        sin_power_integral(s, start, width)
    } else if t >= x2 {
        let start = y.atan2(t - x1);
        sin_power_integral(s, start, width)
    } else {
        let right = y.atan2(x2 - t);
        let left = y.atan2(t - x1);
        sin_power_integral(s, right, FRAC_PI_2 - right) + sin_power_integral(s, left, FRAC_PI_2 - left)
    }
}

/// `int_{-pi/2}^{pi/2} cos(theta)^{2s} dtheta = sqrt(pi) Gamma(s + 1/2) / Gamma(s + 1)`.
pub fn full_angle_integral(s: f64) -> f64 {
    if s == 0.0 {
        PI
    } else {
        PI.sqrt() * gamma(s + 0.5) / gamma(s + 1.0)
    }
}

/// `int_0^{pi/4} cos(theta)^{2s} dtheta`.
pub fn quarter_angle_integral(s: f64) -> f64 {
    if s == 0.0 {
        FRAC_PI_4
    } else {
        // cos(theta) = sin(pi/2 - theta)
        sin_power_integral(s, FRAC_PI_4, FRAC_PI_4)
    }
}

pub fn gamma_fn(x: f64) -> f64 {
    gamma(x)
}
