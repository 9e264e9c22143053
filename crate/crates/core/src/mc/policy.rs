use std::fmt;

use serde::Serialize;

use crate::boundary::FreeBoundary;
use crate::error::{domain, Result};
use crate::value::HorizonState;

/// A stopping rule for the bridge `W*` pinned to `-a` at time `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "param", rename_all = "snake_case")]
pub enum Policy {
    /// Sell at time 0.
    Immediate,
    /// Sell at the first grid time `>= t`.
    FixedTime(f64),
    /// Sell at the first grid time with `x + a >= c·√(b - t)`, i.e. when the
    /// restarted problem `(x + a, b - t)` satisfies `a' >= c·√b'`. Holds to
    /// `t = b` (payoff `-a`) otherwise. `c = alpha` is the optimal rule.
    Threshold(f64),
}

impl Policy {
    pub fn optimal(fb: &FreeBoundary) -> Self {
        Policy::Threshold(fb.alpha)
    }

    /// Parses `immediate`, `fixed:T`, `threshold:C` or `optimal` (threshold
    /// at the solved `alpha`).
    pub fn parse(s: &str, fb: &FreeBoundary) -> Result<Self> {
        let s = s.trim();
        let number = |v: &str| -> Result<f64> {
            v.trim()
                .parse::<f64>()
                .map_err(|_| domain(format!("malformed number {v:?} in policy {s:?}")))
        };
        let policy = match s.split_once(':') {
            None if s == "immediate" => Policy::Immediate,
            None if s == "optimal" => Policy::optimal(fb),
            Some(("fixed", t)) => Policy::FixedTime(number(t)?),
            Some(("threshold", c)) => Policy::Threshold(number(c)?),
            _ => {
                return Err(domain(format!(
                    "unknown policy {s:?}; expected immediate | fixed:T | threshold:C | optimal"
                )))
            }
        };
        if let Policy::Threshold(c) = policy {
            if !(c > 0.0) || !c.is_finite() {
                return Err(domain(format!("threshold must be positive, got {c}")));
            }
        }
        if let Policy::FixedTime(t) = policy {
            if !(t >= 0.0) || !t.is_finite() {
                return Err(domain(format!("fixed time must be non-negative, got {t}")));
            }
        }
        Ok(policy)
    }

    pub fn validate(&self, spec: HorizonState) -> Result<()> {
        match *self {
            Policy::Immediate => Ok(()),
            Policy::FixedTime(t) if t >= 0.0 && t <= spec.b => Ok(()),
            Policy::FixedTime(t) => Err(domain(format!("fixed time {t} outside [0, {}]", spec.b))),
            Policy::Threshold(c) if c > 0.0 && c.is_finite() => Ok(()),
            Policy::Threshold(c) => Err(domain(format!("threshold must be positive, got {c}"))),
        }
    }

    /// Index of the grid point at which the rule stops along `values`, the
    /// path sampled every `stride` points of an `n·stride`-step grid.
    pub(crate) fn stop_index(&self, spec: HorizonState, values: &[f64], n: usize, stride: usize) -> usize {
        let HorizonState { a, b } = spec;
        match *self {
            Policy::Immediate => 0,
            Policy::FixedTime(t) => (0..=n)
                .find(|&j| super::bridge::grid_time(b, j, n) >= t)
                .unwrap_or(n),
            Policy::Threshold(c) => (0..n)
                .find(|&j| {
                    let remaining = b - super::bridge::grid_time(b, j, n);
                    values[j * stride] + a >= c * remaining.sqrt()
                })
                .unwrap_or(n),
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Policy::Immediate => write!(f, "immediate"),
            Policy::FixedTime(t) => write!(f, "fixed:{t}"),
            Policy::Threshold(c) => write!(f, "threshold:{c}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fb() -> FreeBoundary {
        crate::boundary::solve_alpha(1e-12).unwrap()
    }

    #[test]
    fn parses_every_form() {
        let fb = fb();
        assert_eq!(Policy::parse("immediate", &fb).unwrap(), Policy::Immediate);
        assert_eq!(Policy::parse("fixed:0.5", &fb).unwrap(), Policy::FixedTime(0.5));
        assert_eq!(Policy::parse("threshold:0.9", &fb).unwrap(), Policy::Threshold(0.9));
        assert_eq!(Policy::parse("optimal", &fb).unwrap(), Policy::Threshold(fb.alpha));
    }

    #[test]
    fn rejects_malformed_strings() {
        let fb = fb();
        for s in ["", "sometimes", "fixed", "fixed:", "threshold:x", "threshold:-1", "threshold:0", "fixed:-2", "optimal:1"] {
            assert!(Policy::parse(s, &fb).is_err(), "{s:?}");
        }
    }

    #[test]
    fn display_round_trips() {
        let fb = fb();
        for p in [Policy::Immediate, Policy::FixedTime(0.25), Policy::Threshold(0.8399)] {
            assert_eq!(Policy::parse(&p.to_string(), &fb).unwrap(), p);
        }
    }

    #[test]
    fn stop_index_rules() {
        let spec = HorizonState::new(0.0, 1.0).unwrap();
        // 4 steps: t = 0, .25, .5, .75, 1
        let path = [0.0, 0.1, 0.6, 0.2, 0.0];
        assert_eq!(Policy::Immediate.stop_index(spec, &path, 4, 1), 0);
        assert_eq!(Policy::FixedTime(0.3).stop_index(spec, &path, 4, 1), 2);
        assert_eq!(Policy::FixedTime(1.0).stop_index(spec, &path, 4, 1), 4);
        // 0.6 >= 0.8·√0.5 ≈ 0.566
        assert_eq!(Policy::Threshold(0.8).stop_index(spec, &path, 4, 1), 2);
        assert_eq!(Policy::Threshold(5.0).stop_index(spec, &path, 4, 1), 4);
        // stride 2 sees only t = 0, .5, 1
        assert_eq!(Policy::Threshold(0.8).stop_index(spec, &path, 2, 2), 1);
    }

    #[test]
    fn validation_against_spec() {
        let spec = HorizonState::new(0.0, 1.0).unwrap();
        assert!(Policy::FixedTime(1.5).validate(spec).is_err());
        assert!(Policy::FixedTime(1.0).validate(spec).is_ok());
        assert!(Policy::Threshold(0.0).validate(spec).is_err());
    }
}
