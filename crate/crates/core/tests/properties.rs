use bridgestop::boundary::{self, FreeBoundary};
use bridgestop::specfun::{self, Solution};
use bridgestop::value::{self, HorizonState, Region};
use proptest::prelude::*;

fn fb() -> FreeBoundary {
    boundary::solve_alpha(boundary::DEFAULT_TOL).unwrap()
}

#[test]
fn pcf_matches_quadrature_on_the_grid() {
    for i in 0..=600 {
        let u = -30.0 + 0.1 * i as f64;
        let c = specfun::pcf(u).unwrap().value;
        let o = specfun::pcf_oracle(u, 1e-12).unwrap();
        assert!((c - o.value).abs() <= 1e-10 * c.max(1.0), "u={u}: {c} vs {}", o.value);
    }
}

#[test]
fn pcf_positive_and_strictly_increasing() {
    let mut prev = 0.0;
    for i in 0..=600 {
        let u = -30.0 + 0.1 * i as f64;
        let v = specfun::pcf(u).unwrap().value;
        assert!(v > 0.0 && v > prev, "u={u}");
        prev = v;
    }
}

#[test]
fn derivative_identity_holds_to_rounding() {
    for i in 0..=60 {
        let u = -30.0 + i as f64;
        let d1 = specfun::pcf_d1(u).unwrap().value;
        let rhs = 1.0 + u * specfun::pcf(u).unwrap().value;
        assert!((d1 - rhs).abs() <= 1e-12 * d1.abs().max(rhs.abs()));
    }
}

#[test]
fn continuity_across_the_boundary() {
    let fb = fb();
    for b in [0.01, 0.25, 1.0, 2.0, 9.0, 100.0] {
        let on = HorizonState::new(fb.level(b), b).unwrap();
        let inside = value::continuation_formula(on, &fb).unwrap();
        assert!((inside - on.payoff()).abs() <= 1e-10, "b={b}");
        assert!(value::bridge_value(on, &fb).unwrap().abs() <= 1e-10);
    }
}

proptest! {
    #[test]
    fn scaling_law(a in -3.0..3.0f64, b in 0.05..20.0f64, s in 0.05..20.0f64) {
        let fb = fb();
        let base = value::value_hat(HorizonState::new(a, b).unwrap(), &fb).unwrap();
        let scaled = value::value_hat(HorizonState::new(s * a, s * s * b).unwrap(), &fb).unwrap();
        prop_assert!((scaled * s - base).abs() <= 1e-10 * base.abs());
    }

    #[test]
    fn value_dominates_payoff(a in -10.0..10.0f64, b in 0.01..10.0f64) {
        let fb = fb();
        let s = HorizonState::new(a, b).unwrap();
        let v = value::value_hat(s, &fb).unwrap();
        match value::classify(s, &fb) {
            Region::Stopping => prop_assert_eq!(v, s.payoff()),
            Region::Continuation => prop_assert!(v >= s.payoff()),
        }
    }

    #[test]
    fn time_change_round_trip(frac in 0.0..0.9999f64, b in 1e-3..1e3f64) {
        let t = frac * b;
        let tau = value::time_change(t, b).unwrap();
        let back = value::time_change_inv(tau, b).unwrap();
        prop_assert!((back - t).abs() <= 1e-12 * t.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn generator_is_never_positive(u in -3.0..3.0f64, b in 0.3..5.0f64) {
        let fb = fb();
        let s = HorizonState::new(u * b.sqrt(), b).unwrap();
        // Stencils across the kink are rejected; everywhere else the drift is <= 0.
        if let Ok(r) = value::generator_residual(s, &fb, value::DEFAULT_FD_STEP) {
            match value::classify(s, &fb) {
                Region::Continuation => prop_assert!(r.abs() <= 1e-6),
                Region::Stopping => prop_assert!((r + s.a / (s.b * s.b)).abs() <= 1e-6),
            }
            prop_assert!(r <= 1e-6);
        }
    }

    #[test]
    fn ode_holds_for_both_solutions(u in -30.0..30.0f64) {
        for which in [Solution::Decaying, Solution::Growing] {
            let h = which.derivatives(u).unwrap()[0];
            prop_assert!(specfun::ode_residual(u, which).unwrap().abs() <= 1e-9 * h.abs().max(1.0));
        }
    }

    #[test]
    fn no_threshold_beats_alpha(c in 0.05..3.0f64, u in -3.0..0.8f64, b in 0.1..4.0f64) {
        let fb = fb();
        let s = HorizonState::new(u * b.sqrt(), b).unwrap();
        let best = value::value_hat(s, &fb).unwrap();
        prop_assert!(value::threshold_value(s, c).unwrap() <= best * (1.0 + 1e-12));
    }
}
