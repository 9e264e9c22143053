//! Numerical certificate for the value function.
//!
//! Each check compares a residual against a fixed tolerance. Together they
//! cover what the optimality argument relies on: `h2` is evaluated correctly,
//! `alpha` solves its equation, the value and slope fit the payoff at the
//! boundary, the value dominates the payoff, the generator vanishes in the
//! continuation region and is negative in the stopping region, and the
//! simulation layer samples the right bridge.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::boundary::{self, FreeBoundary};
use crate::error::Result;
use crate::mc::{self, McConfig};
use crate::specfun::{self, Solution};
use crate::value::{self, HorizonState, Region};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: &str, residual: f64, tolerance: f64) -> Self {
        Self { name: name.to_owned(), residual, tolerance, pass: residual.is_finite() && residual <= tolerance }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub overall: bool,
}

impl VerifyReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Seed for the random grids and the bridge sampler.
    pub seed: u64,
    /// Paths used for the bridge-marginal checks.
    pub marginal_paths: usize,
    /// Added to the solved `alpha` before any check runs. Zero in normal
    /// use; a nonzero value demonstrates that the suite detects a wrong
    /// boundary.
    pub alpha_perturbation: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: mc::DEFAULT_SEED, marginal_paths: 20_000, alpha_perturbation: 0.0 }
    }
}

/// Boundary time scales used by the smooth-fit and root-identity checks.
pub const FIT_TIMES: [f64; 4] = [0.25, 1.0, 4.0, 9.0];

/// `n × n` continuation-region grid: `a/√b` uniform on `[-3, 0.8·alpha]`,
/// `b` uniform on `[0.5, 4]`.
pub fn continuation_grid(fb: &FreeBoundary, n: usize) -> Vec<HorizonState> {
    let lin = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (n - 1) as f64;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let u = lin(-3.0, 0.8 * fb.alpha, i);
        for j in 0..n {
            let b = lin(0.5, 4.0, j);
            out.push(HorizonState { a: u * b.sqrt(), b });
        }
    }
    out
}

/// Ten stopping-region states with `a/√b` between `1.2·alpha` and `4`.
pub fn stopping_points(fb: &FreeBoundary) -> Vec<HorizonState> {
    (0..10)
        .map(|i| {
            let u = 1.2 * fb.alpha + (4.0 - 1.2 * fb.alpha) * i as f64 / 9.0;
            let b = 0.5 + 0.35 * i as f64;
            HorizonState { a: u * b.sqrt(), b }
        })
        .collect()
}

fn max_of(xs: impl Iterator<Item = f64>) -> f64 {
    // NaN propagates so a broken evaluation cannot pass.
    xs.fold(0.0, |m: f64, x| if x.is_nan() || m.is_nan() { f64::NAN } else { m.max(x) })
}

/// Runs every check. Only evaluation failures (e.g. an overflow inside a
/// check) are errors; failed checks are reported in the result.
pub fn run(opts: &VerifyOptions) -> Result<VerifyReport> {
    let solved = boundary::solve_alpha(boundary::DEFAULT_TOL)?;
    let fb = if opts.alpha_perturbation == 0.0 {
        solved
    } else {
        FreeBoundary::with_alpha(solved.alpha + opts.alpha_perturbation)?
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut checks = Vec::new();

    // h2 against quadrature, and both ODE solutions.
    let grid: Vec<f64> = (0..=120).map(|i| -30.0 + 0.5 * i as f64).collect();
    let mut cross = 0.0f64;
    let mut ode = 0.0f64;
    for &u in &grid {
        let closed = specfun::pcf(u)?.value;
        let oracle = specfun::pcf_oracle(u, 1e-12)?.value;
        cross = max_of([cross, (closed - oracle).abs() / closed.max(1.0)].into_iter());
        for which in [Solution::Decaying, Solution::Growing] {
            let h = which.derivatives(u)?[0];
            let r = specfun::ode_residual(u, which)?.abs() / h.abs().max(1.0);
            ode = max_of([ode, r].into_iter());
        }
    }
    checks.push(Check::new("pcf_vs_quadrature", cross, 1e-10));
    checks.push(Check::new("ode_residual", ode, 1e-9));

    // alpha.
    checks.push(Check::new("alpha_equation", boundary::defining_equation(fb.alpha)?.abs(), 1e-12));
    checks.push(Check::new("alpha_printed_digits", (fb.alpha - 0.83992).abs(), 5e-6));

    // Smooth fit and the zero of the bridge value on the boundary.
    let mut fit = 0.0f64;
    let mut root = 0.0f64;
    for b in FIT_TIMES {
        let r = value::smooth_fit_report(b, &fb, value::DEFAULT_FD_STEP)?;
        let scale = (1.0 / b.sqrt()).max(1.0);
        fit = max_of([fit, r.value_gap / scale, r.slope_gap / scale].into_iter());
        let on = HorizonState::new(fb.level(b), b)?;
        // Continuation-side limit, so a wrong alpha shows up here too.
        let v = -on.a + on.b * value::continuation_formula(on, &fb)?;
        root = max_of([root, v.abs()].into_iter());
    }
    checks.push(Check::new("smooth_fit", fit, 1e-10));
    checks.push(Check::new("bridge_value_root", root, 1e-10));

    // Scaling law V(s·a, s²·b) = V(a, b)/s.
    let mut scaling = 0.0f64;
    for _ in 0..1000 {
        let a = rng.gen_range(-3.0..3.0);
        let b = rng.gen_range(0.1..10.0);
        let s = rng.gen_range(0.1..10.0);
        let base = value::value_hat(HorizonState::new(a, b)?, &fb)?;
        let scaled = value::value_hat(HorizonState::new(s * a, s * s * b)?, &fb)?;
        scaling = max_of([scaling, rel_diff(scaled * s, base)].into_iter());
    }
    checks.push(Check::new("scaling_law", scaling, 1e-10));

    // Majorisation V >= a/b, with equality exactly on the stopping region.
    let mut major = 0.0f64;
    for i in 0..100 {
        let a = -5.0 + 10.0 * i as f64 / 99.0;
        for j in 0..100 {
            let b = 0.1 + 9.9 * j as f64 / 99.0;
            let s = HorizonState::new(a, b)?;
            let gap = value::value_hat(s, &fb)? - s.payoff();
            let violation = match value::classify(s, &fb) {
                Region::Stopping => gap.abs(),
                Region::Continuation => (-gap).max(0.0),
            };
            major = max_of([major, violation].into_iter());
        }
    }
    checks.push(Check::new("majorization", major, 0.0));

    // Generator: zero inside continuation, -a/b² inside stopping.
    let mut gen_cont = 0.0f64;
    for s in continuation_grid(&fb, 20) {
        let r = value::generator_residual(s, &fb, value::DEFAULT_FD_STEP)?;
        gen_cont = max_of([gen_cont, r.abs()].into_iter());
    }
    checks.push(Check::new("generator_continuation", gen_cont, 1e-6));
    let mut gen_stop = 0.0f64;
    for s in stopping_points(&fb) {
        let r = value::generator_residual(s, &fb, value::DEFAULT_FD_STEP)?;
        gen_stop = max_of([gen_stop, (r + s.a / (s.b * s.b)).abs()].into_iter());
    }
    checks.push(Check::new("generator_stopping", gen_stop, 1e-6));

    // Time change round trip.
    let mut trip = 0.0f64;
    for _ in 0..1000 {
        let b = rng.gen_range(0.01..100.0);
        let t = b * rng.gen_range(0.0..0.999);
        let back = value::time_change_inv(value::time_change(t, b)?, b)?;
        trip = max_of([(back - t).abs() / t.max(f64::MIN_POSITIVE), trip].into_iter());
    }
    checks.push(Check::new("time_change_round_trip", trip, 1e-12));

    // Bridge marginals at t = b/2.
    let spec = HorizonState::new(1.0, 2.0)?;
    let cfg = McConfig { paths: opts.marginal_paths, steps: 16, seed: opts.seed, antithetic: false };
    let m = mc::marginal_at(spec, &cfg, 8)?;
    checks.push(Check::new("bridge_pinning", if m.all_pinned { 0.0 } else { 1.0 }, 0.0));
    checks.push(Check::new("bridge_mean_in_stderr", (m.mean - m.expected_mean).abs() / m.mean_stderr, 4.0));
    checks.push(Check::new("bridge_variance_rel", (m.variance / m.expected_variance - 1.0).abs(), 0.05));

    let overall = checks.iter().all(|c| c.pass);
    Ok(VerifyReport { checks, overall })
}

fn rel_diff(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs().max(f64::MIN_POSITIVE)
}
