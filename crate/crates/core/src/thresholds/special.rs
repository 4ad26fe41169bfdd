use std::f64::consts::PI;

use crate::error::{Error, Result};

const WBAR_TOL: f64 = 1e-12;
const ZETA_TERMS: usize = 1000;
const CGG_LO: f64 = 0.5 + 1e-6;
const CGG_HI: f64 = 1.0 - 1e-9;
const CGG_TOL: f64 = 1e-9;
const CGG_GRID: usize = 200;

/// The root `u >= 1` of `u - ln u = x`, i.e. `-W_{-1}(-e^{-x})`.
pub fn lambert_wbar(x: f64) -> Result<f64> {
    if !(x >= 1.0) {
        return Err(Error::Domain {
            function: "lambert_wbar",
            value: x,
        });
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let residual = |u: f64| u - u.ln() - x;
    let tol = WBAR_TOL.max(4.0 * f64::EPSILON * x);
    let (mut lo, mut hi) = (1.0, 2.0 * x + 2.0);
    let mut u = (x + x.ln() + 0.5).clamp(lo, hi);
    for _ in 0..200 {
        let r = residual(u);
        if r.abs() <= tol {
            return Ok(u);
        }
        // residual is increasing on [1, inf)
        if r > 0.0 {
            hi = u;
        } else {
            lo = u;
        }
        let step = r / (1.0 - 1.0 / u);
        let next = u - step;
        u = if step.is_finite() && next > lo && next < hi {
            next
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(u)
}

/// Riemann zeta for `s > 1`: partial sum plus Euler–Maclaurin tail.
pub fn zeta(s: f64) -> Result<f64> {
    if !(s > 1.0) {
        return Err(Error::Domain {
            function: "zeta",
            value: s,
        });
    }
    let n = ZETA_TERMS as f64;
    // Summed from the small terms up for accuracy.
    let head: f64 = (1..ZETA_TERMS).rev().map(|k| (k as f64).powf(-s)).sum();
    let mut tail = n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    // B_2k / (2k)! for k = 1..4
    const COEFFS: [f64; 4] = [1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0, -1.0 / 1209600.0];
    let mut rising = s;
    let mut npow = n.powf(-s - 1.0);
    for (k, c) in COEFFS.iter().enumerate() {
        tail += c * rising * npow;
        let j = 2 * k as u32 + 1;
        rising *= (s + j as f64) * (s + j as f64 + 1.0);
        npow /= n * n;
    }
    Ok(head + tail)
}

/// `g_G(y) = 2y - 2y ln(4y) + ln zeta(2y) - ln(1-y)/2` on `(1/2, 1]`.
pub fn g_gaussian(y: f64) -> Result<f64> {
    if !(y > 0.5 && y <= 1.0) {
        return Err(Error::Domain {
            function: "g_gaussian",
            value: y,
        });
    }
    if y == 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(2.0 * y - 2.0 * y * (4.0 * y).ln() + zeta(2.0 * y)?.ln() - 0.5 * (1.0 - y).ln())
}

/// `min_y (g_G(y) + x) / y` over `y` in `(1/2, 1]`.
pub fn cgg(x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            function: "cgg",
            value: x,
        });
    }
    let f = |y: f64| -> f64 { (g_gaussian(y).unwrap_or(f64::INFINITY) + x) / y };
    let step = (CGG_HI - CGG_LO) / CGG_GRID as f64;
    let best = (0..=CGG_GRID)
        .map(|i| CGG_LO + step * i as f64)
        .min_by(|a, b| f(*a).total_cmp(&f(*b)))
        .expect("nonempty grid");
    let (mut a, mut b) = ((best - step).max(CGG_LO), (best + step).min(CGG_HI));
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > CGG_TOL {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    Ok(f(0.5 * (a + b)).min(f(best)))
}

/// Switches branch at `x = h(1/ln z)`, where both branches equal `z / ln z`.
fn h_tilde(z: f64, x: f64) -> Result<f64> {
    let lnz = z.ln();
    let switch = 1.0 / lnz + lnz.ln();
    if x >= switch {
        let w = lambert_wbar(x)?;
        Ok((1.0 / w).exp() * w)
    } else {
        Ok(z * (x - lnz.ln()))
    }
}

/// Sub-Gaussian deviation function
/// `T(x) = 2 h~_{3/2}((W(1+x) + ln(pi^2/3)) / 2)`.
pub fn tee(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain {
            function: "tee",
            value: x,
        });
    }
    let inner = (lambert_wbar(1.0 + x)? + (PI * PI / 3.0).ln()) / 2.0;
    Ok(2.0 * h_tilde(1.5, inner)?)
}
