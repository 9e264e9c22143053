//! The parabolic cylinder integral
//!
//! ```text
//! h2(u) = ∫_0^∞ exp(λu - λ²/2) dλ
//! ```
//!
//! and its companions. `h2` is the solution of `h'' = u h' + h` that stays
//! bounded as `u → -∞`; the other solution, `h1(u) = exp(u²/2)`, is only
//! exposed so the differential equation can be checked for both.
//!
//! Completing the square gives `h2(u) = sqrt(π/2) · erfcx(-u/√2)` with
//! `erfcx(x) = exp(x²) erfc(x)`. Evaluating through the scaled function keeps
//! the `exp(u²/2)` factor out of any intermediate product, so the result is
//! accurate for very negative `u` (where `h2 ~ -1/u`) and only overflows
//! when the true value exceeds `f64::MAX` (around `u ≈ 37.6`).

mod quadrature;

use errorfunctions::RealErrorFunctions;

use crate::error::{domain, ensure_finite, Error, Result};

pub use quadrature::{integrate, Integral};

/// `sqrt(π/2)`, the value of `h2(0)`.
pub const SQRT_HALF_PI: f64 = 1.253_314_137_315_500_3;

/// A function value with a bound on its absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecialValue {
    pub value: f64,
    pub abs_error_bound: f64,
}

impl SpecialValue {
    fn checked(value: f64, abs_error_bound: f64, what: &str, u: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::Overflow(format!("{what}({u}) exceeds the f64 range")));
        }
        Ok(Self { value, abs_error_bound: abs_error_bound.abs() })
    }
}

/// Relative error of `pcf` at `u`: a few ulps from `erfcx` plus the
/// amplification of the rounding in `-u/√2` by `d ln erfcx / dx ≈ -2x`.
fn pcf_rel_error(u: f64) -> f64 {
    (16.0 + 2.0 * u * u) * f64::EPSILON
}

/// `h2(u) = ∫_0^∞ exp(λu - λ²/2) dλ`.
pub fn pcf(u: f64) -> Result<SpecialValue> {
    ensure_finite("u", u)?;
    let value = SQRT_HALF_PI * (-u * std::f64::consts::FRAC_1_SQRT_2).erfcx();
    SpecialValue::checked(value, value * pcf_rel_error(u), "pcf", u)
}

/// `h2'(u) = ∫_0^∞ λ exp(λu - λ²/2) dλ = 1 + u·h2(u)` (integration by parts).
pub fn pcf_d1(u: f64) -> Result<SpecialValue> {
    let h = pcf(u)?;
    let value = 1.0 + u * h.value;
    let bound = u.abs() * h.abs_error_bound + 4.0 * f64::EPSILON * (1.0 + (u * h.value).abs());
    SpecialValue::checked(value, bound, "pcf_d1", u)
}

/// `h2''(u) = ∫_0^∞ λ² exp(λu - λ²/2) dλ = u + (1 + u²)·h2(u)`, from the
/// second truncated Gaussian moment.
pub fn pcf_d2(u: f64) -> Result<SpecialValue> {
    let h = pcf(u)?;
    let k = 1.0 + u * u;
    let value = u + k * h.value;
    let bound = k * h.abs_error_bound + 4.0 * f64::EPSILON * (u.abs() + k * h.value);
    SpecialValue::checked(value, bound, "pcf_d2", u)
}

/// Direct adaptive quadrature of `∫_0^∞ exp(λu - λ²/2) dλ`.
///
/// The range is truncated at `λ_max = max(u, 0) + 12`. Writing the integrand
/// as `exp(u²/2) · exp(-(λ-u)²/2)` and using the Mills-ratio bound
/// `∫_x^∞ exp(-μ²/2) dμ ≤ exp(-x²/2)/x` with `x = λ_max - u ≥ 12`, the
/// discarded tail is at most `exp(u²/2 - x²/2)/x`, i.e. below `e^{-72}/12`
/// (about 1e-33) relative to the peak of the integrand. That bound is added
/// to the reported `abs_error_bound`.
pub fn pcf_oracle(u: f64, tol: f64) -> Result<SpecialValue> {
    ensure_finite("u", u)?;
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(domain(format!("tol must be positive and finite, got {tol}")));
    }
    let lambda_max = u.max(0.0) + 12.0;
    let x = lambda_max - u;
    let log_tail = 0.5 * u * u - 0.5 * x * x - x.ln();

    let panels = (lambda_max.ceil() as usize).max(8);
    let r = quadrature::integrate(|l| (l * u - 0.5 * l * l).exp(), 0.0, lambda_max, tol, panels, 1 << 16);
    SpecialValue::checked(r.value, r.abs_error + log_tail.exp(), "pcf_oracle", u)
}

/// The two independent solutions of `h'' = u h' + h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solution {
    /// `h1(u) = exp(u²/2)`, discarded by the value function for growing too fast.
    Growing,
    /// `h2(u)`, the parabolic cylinder integral.
    Decaying,
}

impl Solution {
    /// Returns `(h, h', h'')` at `u` from the closed forms.
    pub fn derivatives(self, u: f64) -> Result<[f64; 3]> {
        ensure_finite("u", u)?;
        match self {
            Solution::Growing => {
                let h = (0.5 * u * u).exp();
                if !h.is_finite() {
                    return Err(Error::Overflow(format!("exp(u²/2) at u = {u}")));
                }
                Ok([h, u * h, (1.0 + u * u) * h])
            }
            Solution::Decaying => Ok([pcf(u)?.value, pcf_d1(u)?.value, pcf_d2(u)?.value]),
        }
    }
}

/// `h''(u) - u·h'(u) - h(u)` for the selected solution.
pub fn ode_residual(u: f64, which: Solution) -> Result<f64> {
    let [h, d1, d2] = which.derivatives(u)?;
    Ok(d2 - u * d1 - h)
}
