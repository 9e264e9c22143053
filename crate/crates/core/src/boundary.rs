//! The free-boundary constant `alpha`.
//!
//! Fitting `B·h2(a/√b)/√b` to the stopping payoff `a/b` along `a = c√b` with
//! matching value and slope forces `B = 1 - c²` and `c = alpha`, the unique
//! root in `(0, 1)` of
//!
//! ```text
//! f(c) = c - (1 - c²)·h2(c).
//! ```
//!
//! `f(0) = -sqrt(π/2) < 0` and `f(1) = 1 > 0`, so the root is bracketed; it is
//! refined with Brent's method (inverse quadratic interpolation safeguarded by
//! bisection), which needs no derivative of `f`.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::specfun;

/// Default tolerance on `|f(alpha)|`.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Offset keeping the initial bracket strictly inside `(0, 1)`.
const BRACKET_INSET: f64 = 1e-9;

const MAX_ITERATIONS: usize = 200;

/// Loosest accepted tolerance.
pub const MAX_TOL: f64 = 1e-2;

/// The solved boundary constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FreeBoundary {
    /// Boundary slope: stop when `a >= alpha·√b`.
    pub alpha: f64,
    /// Multiplier `1 - alpha²` of `h2` in the value function.
    pub big_b: f64,
    /// `|alpha - (1 - alpha²)·h2(alpha)|` at the returned `alpha`.
    pub residual: f64,
    pub iterations: usize,
}

impl FreeBoundary {
    /// Builds boundary constants around an arbitrary slope.
    ///
    /// Only meant for sensitivity experiments: the residual is recomputed, so
    /// a perturbed `alpha` is visible to anything that checks it.
    pub fn with_alpha(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(domain(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        Ok(Self {
            alpha,
            big_b: 1.0 - alpha * alpha,
            residual: defining_equation(alpha)?.abs(),
            iterations: 0,
        })
    }

    /// Boundary level `alpha·√b` for time-to-redemption `b`.
    pub fn level(&self, b: f64) -> f64 {
        self.alpha * b.sqrt()
    }
}

/// `f(c) = c - (1 - c²)·h2(c)`.
pub fn defining_equation(c: f64) -> Result<f64> {
    Ok(c - (1.0 - c * c) * specfun::pcf(c)?.value)
}

/// Solves `f(alpha) = 0` on `(0, 1)` until `|f(alpha)| <= tol`.
///
/// `tol` must lie in `(0, 1e-2]`.
pub fn solve_alpha(tol: f64) -> Result<FreeBoundary> {
    if !(tol > 0.0 && tol <= MAX_TOL) {
        return Err(domain(format!("tol must lie in (0, {MAX_TOL}], got {tol}")));
    }
    let (alpha, iterations) = brent(BRACKET_INSET, 1.0 - BRACKET_INSET, tol)?;
    let residual = defining_equation(alpha)?.abs();
    Ok(FreeBoundary { alpha, big_b: 1.0 - alpha * alpha, residual, iterations })
}

fn brent(mut a: f64, mut b: f64, tol: f64) -> Result<(f64, usize)> {
    let mut fa = defining_equation(a)?;
    let mut fb = defining_equation(b)?;
    if !(fa * fb < 0.0) {
        return Err(Error::Inconsistent(format!(
            "no sign change on [{a}, {b}]: f = {fa}, {fb}; the h2 evaluation is broken"
        )));
    }
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut bisected = true;

    for iter in 1..=MAX_ITERATIONS {
        if fb.abs() <= tol {
            return Ok((b, iter - 1));
        }
        let mut s = if fa != fc && fb != fc {
            a * fb * fc / ((fa - fb) * (fa - fc))
                + b * fa * fc / ((fb - fa) * (fb - fc))
                + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };

        let lo = (3.0 * a + b) / 4.0;
        let outside = !((s > lo.min(b)) && (s < lo.max(b)));
        let x_tol = 2.0 * f64::EPSILON * b.abs();
        let slow = if bisected {
            (s - b).abs() >= 0.5 * (b - c).abs() || (b - c).abs() < x_tol
        } else {
            (s - b).abs() >= 0.5 * (c - d).abs() || (c - d).abs() < x_tol
        };
        if outside || slow {
            s = 0.5 * (a + b);
            bisected = true;
        } else {
            bisected = false;
        }

        let fs = defining_equation(s)?;
        d = c;
        c = b;
        fc = fb;
        if fa * fs < 0.0 {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
        if (b - a).abs() <= f64::EPSILON * b.abs() {
            // Bracket collapsed to adjacent doubles; return the better end.
            return if fb.abs() <= tol {
                Ok((b, iter))
            } else {
                Err(Error::Inconsistent(format!(
                    "bracket collapsed at {b} with |f| = {} > tol = {tol}",
                    fb.abs()
                )))
            };
        }
    }
    Err(Error::Inconsistent(format!("no convergence in {MAX_ITERATIONS} iterations")))
}

/// `n` points `(b, alpha·√b)` on a uniform grid over `[b_min, b_max]`.
pub fn boundary_curve(fb: &FreeBoundary, b_min: f64, b_max: f64, n: usize) -> Result<Vec<(f64, f64)>> {
    if !(b_min > 0.0 && b_min <= b_max && b_max.is_finite()) {
        return Err(domain(format!("need 0 < b_min <= b_max, got [{b_min}, {b_max}]")));
    }
    if n == 0 {
        return Err(domain("n must be at least 1"));
    }
    if n > 1 && b_min == b_max {
        return Err(domain("a single b value admits only n = 1"));
    }
    let step = if n == 1 { 0.0 } else { (b_max - b_min) / (n - 1) as f64 };
    Ok((0..n)
        .map(|i| {
            let b = if i + 1 == n { b_max } else { b_min + step * i as f64 };
            (b, fb.level(b))
        })
        .collect())
}
