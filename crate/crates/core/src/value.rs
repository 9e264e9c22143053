//! The value function and the two coordinate systems it lives in.
//!
//! *Bridge coordinates*: the premium `x = W*(t)` of a Brownian bridge that
//! starts at `0` and is pinned to `-a` at time `b`, with `t ∈ [0, b)`.
//!
//! *Horizon coordinates*: a state `(a, b)` of the infinite-horizon problem
//! `sup_τ E[(a + W(τ)) / (b + τ)]` for an unconditioned Wiener process.
//! The time change `τ = t / (1 - t/b)` maps one onto the other:
//!
//! ```text
//! W*(t) = -a + b·(a + W(τ)) / (b + τ)
//! ```
//!
//! so the optimal bridge value is `V*(a, b) = -a + b·V(a, b)`.
//!
//! In the continuation region `a < alpha·√b` the value is
//! `V(a, b) = (1 - alpha²)·h2(a/√b)/√b`; in the stopping region it is `a/b`.

use serde::Serialize;

use crate::boundary::FreeBoundary;
use crate::error::{domain, ensure_finite, Result};
use crate::specfun;

/// A state `(a, b)` of the infinite-horizon problem: the gap `a` between the
/// current premium and its terminal value, and the time scale `b > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HorizonState {
    pub a: f64,
    pub b: f64,
}

impl HorizonState {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        ensure_finite("a", a)?;
        if !(b > 0.0) || !b.is_finite() {
            return Err(domain(format!("b must be positive and finite, got {b}")));
        }
        Ok(Self { a, b })
    }

    /// The state reached after running the Wiener process for `t` with
    /// increment `w`: `(a + w, b + t)`.
    pub fn advance(self, w: f64, t: f64) -> Result<Self> {
        Self::new(self.a + w, self.b + t)
    }

    /// `a / √b`, the scale-free coordinate the value function depends on.
    pub fn normalized(self) -> f64 {
        self.a / self.b.sqrt()
    }

    /// Payoff of stopping now, `a / b`.
    pub fn payoff(self) -> f64 {
        self.a / self.b
    }
}

/// A point on a bridge pinned to `-spec.a` at time `spec.b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BridgeState {
    /// Elapsed time, `0 <= t < spec.b`.
    pub t: f64,
    /// Current bridge value `W*(t)`.
    pub x: f64,
    pub spec: HorizonState,
}

impl BridgeState {
    pub fn new(t: f64, x: f64, spec: HorizonState) -> Result<Self> {
        ensure_finite("x", x)?;
        if !(t >= 0.0 && t < spec.b) {
            return Err(domain(format!("t must lie in [0, {}), got {t}", spec.b)));
        }
        Ok(Self { t, x, spec })
    }

    /// The problem seen afresh from this point: a bridge from `x` to `-a`
    /// over the remaining time, i.e. the horizon state `(x + a, b - t)`.
    pub fn restart(self) -> Result<HorizonState> {
        HorizonState::new(self.x + self.spec.a, self.spec.b - self.t)
    }

    /// The time-changed state `(a + W(τ), b + τ)` with `τ = t/(1 - t/b)`.
    ///
    /// It equals `restart()` scaled by `s = b/(b - t)` as `(s·a', s²·b')`.
    pub fn horizon(self) -> Result<HorizonState> {
        let HorizonState { a, b } = self.spec;
        let tau = time_change(self.t, b)?;
        // From W*(t) = -a + b (a + W(τ)) / (b + τ).
        let gap = (self.x + a) * (b + tau) / b;
        HorizonState::new(gap, b + tau)
    }
}

/// Which side of the free boundary a state lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Continuation,
    /// `a >= alpha·√b`; the boundary itself belongs here.
    Stopping,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::Continuation => "continuation",
            Region::Stopping => "stopping",
        }
    }
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn classify(s: HorizonState, fb: &FreeBoundary) -> Region {
    if s.a >= fb.level(s.b) {
        Region::Stopping
    } else {
        Region::Continuation
    }
}

/// `(1 - alpha²)·h2(a/√b)/√b`, the continuation-side formula, evaluated
/// regardless of which region `s` is in.
pub fn continuation_formula(s: HorizonState, fb: &FreeBoundary) -> Result<f64> {
    Ok(fb.big_b * specfun::pcf(s.normalized())?.value / s.b.sqrt())
}

/// The optimal value `sup_τ E[(a + W(τ)) / (b + τ)]`.
pub fn value_hat(s: HorizonState, fb: &FreeBoundary) -> Result<f64> {
    match classify(s, fb) {
        Region::Stopping => Ok(s.payoff()),
        Region::Continuation => continuation_formula(s, fb),
    }
}

/// Optimal expected selling premium `E[W*(τ)]` of the bridge from `0` to
/// `-a` over `[0, b]`: `-a + b·value_hat(a, b)`.
pub fn bridge_value(s: HorizonState, fb: &FreeBoundary) -> Result<f64> {
    Ok(-s.a + s.b * value_hat(s, fb)?)
}

/// Value of the (generally suboptimal) rule "stop the first time
/// `a + W(t) >= c·√(b + t)`" in horizon coordinates.
///
/// `c·h2(a/√b) / (√b·h2(c))` below the line, `a/b` on or above it. With
/// `c = alpha` this is [`value_hat`].
pub fn threshold_value(s: HorizonState, c: f64) -> Result<f64> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(domain(format!("threshold must be positive, got {c}")));
    }
    if s.a >= c * s.b.sqrt() {
        return Ok(s.payoff());
    }
    let num = specfun::pcf(s.normalized())?.value;
    let den = specfun::pcf(c)?.value;
    Ok(c * num / (den * s.b.sqrt()))
}

/// `τ = t / (1 - t/b)`, mapping bridge time `t ∈ [0, b)` to `[0, ∞)`.
pub fn time_change(t: f64, b: f64) -> Result<f64> {
    check_b(b)?;
    if !(t >= 0.0 && t < b) {
        return Err(domain(format!("t must lie in [0, b) = [0, {b}), got {t}")));
    }
    // t·b/(b - t) is the same map with one rounding fewer.
    Ok(t * b / (b - t))
}

/// `t = τ / (1 + τ/b)`, the inverse of [`time_change`].
pub fn time_change_inv(tau: f64, b: f64) -> Result<f64> {
    check_b(b)?;
    if !(tau >= 0.0) {
        return Err(domain(format!("tau must be non-negative, got {tau}")));
    }
    if tau.is_infinite() {
        return Ok(b);
    }
    Ok(tau * b / (b + tau))
}

fn check_b(b: f64) -> Result<()> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(domain(format!("b must be positive and finite, got {b}")));
    }
    Ok(())
}

/// Default relative finite-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// Central-difference estimate of `½·∂²V/∂a² + ∂V/∂b` at `s`.
///
/// `h_step` is relative: the stencil uses `Δa = h_step·√b` and
/// `Δb = h_step·b`. The result is ≈ 0 inside the continuation region and
/// `-a/b²` inside the stopping region. A stencil that touches both regions
/// is rejected because the second derivative jumps across the boundary.
pub fn generator_residual(s: HorizonState, fb: &FreeBoundary, h_step: f64) -> Result<f64> {
    if !(h_step > 0.0) || !h_step.is_finite() {
        return Err(domain(format!("h_step must be positive, got {h_step}")));
    }
    let da = h_step * s.b.sqrt();
    let db = h_step * s.b;
    if db >= s.b {
        return Err(domain("h_step too large for the b stencil"));
    }
    if (s.a - fb.level(s.b)).abs() <= 2.0 * da {
        return Err(domain(format!(
            "stencil at ({}, {}) lies within 2·Δa of the boundary",
            s.a, s.b
        )));
    }
    let region = classify(s, fb);
    let points = [
        HorizonState::new(s.a + da, s.b)?,
        HorizonState::new(s.a - da, s.b)?,
        HorizonState::new(s.a, s.b + db)?,
        HorizonState::new(s.a, s.b - db)?,
    ];
    if points.iter().any(|&p| classify(p, fb) != region) {
        return Err(domain("finite-difference stencil straddles the free boundary"));
    }
    let v = |p: HorizonState| value_hat(p, fb);
    let center = v(s)?;
    let v_aa = (v(points[0])? - 2.0 * center + v(points[1])?) / (da * da);
    let v_b = (v(points[2])? - v(points[3])?) / (2.0 * db);
    Ok(0.5 * v_aa + v_b)
}

/// Value and slope mismatch between the continuation formula and the
/// stopping payoff `a/b` at the boundary point `a = alpha·√b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmoothFit {
    pub b: f64,
    /// `|V(alpha√b-, b) - alpha/√b|`.
    pub value_gap: f64,
    /// `|∂V/∂a(alpha√b-, b) - 1/b|` using `h2' = 1 + u·h2`.
    pub slope_gap: f64,
    /// Same slope gap from a one-sided difference with step `h_step·√b`
    /// taken inside the continuation region. Accurate to `O(h_step)`.
    pub fd_slope_gap: f64,
}

impl SmoothFit {
    /// Tolerance applied to the analytic gaps: `1e-10·max(1, 1/√b)`.
    pub fn tolerance(&self) -> f64 {
        1e-10 * (1.0 / self.b.sqrt()).max(1.0)
    }

    pub fn passes(&self) -> bool {
        self.value_gap <= self.tolerance() && self.slope_gap <= self.tolerance()
    }
}

pub fn smooth_fit_report(b: f64, fb: &FreeBoundary, h_step: f64) -> Result<SmoothFit> {
    check_b(b)?;
    if !(h_step > 0.0) || !h_step.is_finite() {
        return Err(domain(format!("h_step must be positive, got {h_step}")));
    }
    let a0 = fb.level(b);
    let at = HorizonState::new(a0, b)?;
    let inside = continuation_formula(at, fb)?;
    let value_gap = (inside - a0 / b).abs();

    let slope = fb.big_b * specfun::pcf_d1(fb.alpha)?.value / b;
    let slope_gap = (slope - 1.0 / b).abs();

    let da = h_step * b.sqrt();
    let left = continuation_formula(HorizonState::new(a0 - da, b)?, fb)?;
    let fd_slope_gap = ((inside - left) / da - 1.0 / b).abs();

    Ok(SmoothFit { b, value_gap, slope_gap, fd_slope_gap })
}
