use rayon::prelude::*;
use serde::Serialize;

use super::bridge::{draw_normals, fill_bridge};
use super::{rng::substream, stats, McConfig, McEstimate, Policy};
use crate::error::{domain, Result};
use crate::value::HorizonState;

/// Simulates `cfg.paths` samples. For each bridge path, `eval` writes one
/// payoff per column into its output slice; antithetic samples average the
/// path and its mirror column by column. Returns the payoffs column-major.
fn simulate<F>(spec: HorizonState, cfg: &McConfig, columns: usize, eval: F) -> Vec<Vec<f64>>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    let steps = cfg.steps;
    let rows: Vec<Vec<f64>> = (0..cfg.paths as u64)
        .into_par_iter()
        .map_init(
            || (Vec::with_capacity(steps), vec![0.0; steps + 1], vec![0.0; columns]),
            |(normals, values, mirror), i| {
                draw_normals(&mut substream(cfg.seed, i), steps, normals);
                let mut out = vec![0.0; columns];
                fill_bridge(spec.a, spec.b, steps, normals, 1.0, values);
                eval(values, &mut out);
                if cfg.antithetic {
                    fill_bridge(spec.a, spec.b, steps, normals, -1.0, values);
                    eval(values, mirror);
                    for (o, m) in out.iter_mut().zip(mirror.iter()) {
                        *o = 0.5 * (*o + *m);
                    }
                }
                out
            },
        )
        .collect();

    (0..columns)
        .map(|c| rows.iter().map(|r| r[c]).collect())
        .collect()
}

fn check_spec_theta(theta: f64) -> Result<()> {
    if !theta.is_finite() || theta == 0.0 {
        return Err(domain(format!("theta must be finite and nonzero, got {theta}")));
    }
    Ok(())
}

fn check_grid(c_grid: &[f64]) -> Result<()> {
    if c_grid.is_empty() {
        return Err(domain("threshold grid is empty"));
    }
    if let Some(c) = c_grid.iter().find(|c| !(**c > 0.0) || !c.is_finite()) {
        return Err(domain(format!("thresholds must be positive, got {c}")));
    }
    Ok(())
}

/// Estimates `E[W*(τ)]` for the rule `policy` monitored on the grid.
pub fn evaluate_policy(spec: HorizonState, policy: Policy, cfg: &McConfig) -> Result<McEstimate> {
    cfg.validate()?;
    policy.validate(spec)?;
    let n = cfg.steps;
    let cols = simulate(spec, cfg, 1, |path, out| {
        out[0] = path[policy.stop_index(spec, path, n, 1)];
    });
    Ok(McEstimate::from_samples(&cols[0], cfg.seed))
}

/// Mean and standard error of a per-sample difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairedDifference {
    pub mean: f64,
    pub stderr: f64,
}

impl PairedDifference {
    fn of(xs: &[f64], ys: &[f64]) -> Self {
        let (mean, stderr) = stats::paired(xs, ys);
        Self { mean, stderr }
    }

    /// Difference in units of its standard error.
    pub fn z(&self) -> f64 {
        self.mean / self.stderr
    }
}

/// Threshold rules evaluated on a common set of paths.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub c_grid: Vec<f64>,
    pub estimates: Vec<McEstimate>,
    samples: Vec<Vec<f64>>,
}

impl Sweep {
    /// `(c, estimate)` pairs in grid order.
    pub fn entries(&self) -> impl Iterator<Item = (f64, McEstimate)> + '_ {
        self.c_grid.iter().copied().zip(self.estimates.iter().copied())
    }

    /// Paired estimate of `value(c_grid[i]) - value(c_grid[j])`.
    pub fn paired(&self, i: usize, j: usize) -> PairedDifference {
        PairedDifference::of(&self.samples[i], &self.samples[j])
    }

    /// Index of the largest estimated mean (first one on ties).
    pub fn argmax(&self) -> usize {
        self.estimates
            .iter()
            .enumerate()
            .fold(0, |best, (i, e)| if e.mean > self.estimates[best].mean { i } else { best })
    }
}

/// Evaluates `threshold(c)` for every `c` on identical paths (common random
/// numbers), so differences between thresholds are estimated pairwise.
pub fn policy_sweep(spec: HorizonState, c_grid: &[f64], cfg: &McConfig) -> Result<Sweep> {
    cfg.validate()?;
    check_grid(c_grid)?;
    let n = cfg.steps;
    let policies: Vec<Policy> = c_grid.iter().map(|&c| Policy::Threshold(c)).collect();
    let samples = simulate(spec, cfg, policies.len(), |path, out| {
        for (o, p) in out.iter_mut().zip(&policies) {
            *o = path[p.stop_index(spec, path, n, 1)];
        }
    });
    let estimates = samples.iter().map(|s| McEstimate::from_samples(s, cfg.seed)).collect();
    Ok(Sweep { c_grid: c_grid.to_vec(), estimates, samples })
}

/// One policy monitored at several resolutions of the same paths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Refinement {
    /// Ascending step counts.
    pub steps: Vec<usize>,
    pub estimates: Vec<McEstimate>,
    /// `estimate(steps[k+1]) - estimate(steps[k])`, paired per sample.
    pub increments: Vec<PairedDifference>,
}

impl Refinement {
    /// Ratio between the last two increments, the empirical factor by which
    /// the bias shrinks per doubling. `None` unless it lies in `(0, 1)`.
    pub fn contraction(&self) -> Option<f64> {
        let [.., prev, last] = self.increments.as_slice() else {
            return None;
        };
        let r = last.mean / prev.mean;
        (r > 0.0 && r < 1.0).then_some(r)
    }

    /// Discretisation bias of each estimate, inferred from the ladder alone:
    /// minus the sum of the remaining increments plus a geometric tail
    /// `last·r/(1 - r)` for the doublings beyond the finest grid.
    pub fn bias_estimates(&self) -> Option<Vec<f64>> {
        self.bias_estimates_with(self.contraction()?)
    }

    /// As [`bias_estimates`](Self::bias_estimates) with a prescribed
    /// contraction `r` per doubling, e.g. `1/√2` for an `O(√Δ)` bias.
    pub fn bias_estimates_with(&self, r: f64) -> Option<Vec<f64>> {
        if !(r > 0.0 && r < 1.0) {
            return None;
        }
        let last = self.increments.last()?.mean;
        let mut remaining = last * r / (1.0 - r);
        let mut out = vec![-remaining];
        for inc in self.increments.iter().rev() {
            remaining += inc.mean;
            out.push(-remaining);
        }
        out.reverse();
        Some(out)
    }

    /// Estimate of the continuously monitored value.
    pub fn extrapolated(&self) -> Option<f64> {
        self.extrapolated_with(self.contraction()?)
    }

    pub fn extrapolated_with(&self, r: f64) -> Option<f64> {
        let bias = self.bias_estimates_with(r)?;
        Some(self.estimates.last()?.mean - bias.last()?)
    }
}

/// Simulates on the finest grid and monitors `policy` on each coarser grid
/// obtained by subsampling. Every step count must divide the finest one by a
/// power of two; the estimate for each count is then bit-identical to
/// [`evaluate_policy`] with that many steps, because coarse paths are
/// prefixes of refined ones.
pub fn refinement_study(spec: HorizonState, policy: Policy, cfg: &McConfig, steps: &[usize]) -> Result<Refinement> {
    policy.validate(spec)?;
    let mut steps = steps.to_vec();
    steps.sort_unstable();
    steps.dedup();
    let finest = *steps.last().ok_or_else(|| domain("no step counts given"))?;
    for &s in &steps {
        if s == 0 || finest % s != 0 || !(finest / s).is_power_of_two() {
            return Err(domain(format!("{s} steps is not a power-of-two coarsening of {finest}")));
        }
    }
    let run = McConfig { steps: finest, ..*cfg };
    run.validate()?;
    let levels: Vec<(usize, usize)> = steps.iter().map(|&s| (s, finest / s)).collect();
    let samples = simulate(spec, &run, levels.len(), |path, out| {
        for (o, &(n, stride)) in out.iter_mut().zip(&levels) {
            *o = path[policy.stop_index(spec, path, n, stride) * stride];
        }
    });
    let estimates = samples.iter().map(|s| McEstimate::from_samples(s, cfg.seed)).collect();
    let increments = samples
        .windows(2)
        .map(|w| PairedDifference::of(&w[1], &w[0]))
        .collect();
    Ok(Refinement { steps, estimates, increments })
}

/// Explores the exponential objective `E[exp(-theta·(a + W(τ))/(b + τ))]`
/// over threshold rules `τ_c`, simulated through the bridge: at a bridge
/// stop `(t, x)` the ratio `(a + W(τ))/(b + τ)` equals `(x + a)/b`.
///
/// When `c <= a/√b` the rule stops at once and every sample equals
/// `exp(-theta·a/b)`.
pub fn exp_model_sweep(spec: HorizonState, theta: f64, c_grid: &[f64], cfg: &McConfig) -> Result<Vec<(f64, McEstimate)>> {
    cfg.validate()?;
    check_spec_theta(theta)?;
    check_grid(c_grid)?;
    let n = cfg.steps;
    let HorizonState { a, b } = spec;
    let policies: Vec<Policy> = c_grid.iter().map(|&c| Policy::Threshold(c)).collect();
    let samples = simulate(spec, cfg, policies.len(), |path, out| {
        for (o, p) in out.iter_mut().zip(&policies) {
            let x = path[p.stop_index(spec, path, n, 1)];
            *o = (-theta * (x + a) / b).exp();
        }
    });
    Ok(c_grid
        .iter()
        .zip(&samples)
        .map(|(&c, s)| (c, McEstimate::from_samples(s, cfg.seed)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::solve_alpha;

    fn spec(a: f64, b: f64) -> HorizonState {
        HorizonState::new(a, b).unwrap()
    }

    fn cfg(paths: usize, steps: usize, seed: u64) -> McConfig {
        McConfig { paths, steps, seed, antithetic: false }
    }

    #[test]
    fn immediate_is_exact() {
        let e = evaluate_policy(spec(2.0, 1.0), Policy::Immediate, &cfg(1000, 50, 1)).unwrap();
        assert_eq!((e.mean, e.stderr), (0.0, 0.0));
        assert_eq!(e.paths, 1000);
    }

    #[test]
    fn holding_to_maturity_pays_the_pinned_value() {
        let e = evaluate_policy(spec(0.0, 1.0), Policy::FixedTime(1.0), &cfg(500, 64, 1)).unwrap();
        assert_eq!((e.mean, e.stderr), (0.0, 0.0));
        let e = evaluate_policy(spec(0.4, 2.0), Policy::FixedTime(2.0), &cfg(500, 64, 1)).unwrap();
        assert_eq!((e.mean, e.stderr), (-0.4, 0.0));
    }

    #[test]
    fn fixed_time_mean_follows_the_mean_line() {
        let e = evaluate_policy(spec(1.0, 1.0), Policy::FixedTime(0.5), &cfg(20_000, 10, 2)).unwrap();
        assert!((e.mean + 0.5).abs() < 4.0 * e.stderr);
    }

    #[test]
    fn deterministic_and_thread_count_independent() {
        let c = cfg(3000, 200, 9);
        let p = Policy::Threshold(0.84);
        let a = evaluate_policy(spec(0.0, 1.0), p, &c).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| evaluate_policy(spec(0.0, 1.0), p, &c).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
    }

    #[test]
    fn single_element_sweep_matches_evaluate_policy() {
        let c = cfg(2000, 100, 4);
        let s = policy_sweep(spec(0.0, 1.0), &[0.84], &c).unwrap();
        let e = evaluate_policy(spec(0.0, 1.0), Policy::Threshold(0.84), &c).unwrap();
        assert_eq!(s.estimates[0], e);
        assert_eq!(s.argmax(), 0);
    }

    #[test]
    fn refinement_levels_equal_independent_runs() {
        let s = spec(0.0, 1.0);
        let p = Policy::Threshold(0.84);
        let c = cfg(2000, 0, 13);
        let r = refinement_study(s, p, &c, &[24, 48, 96]).unwrap();
        for (&n, est) in r.steps.iter().zip(&r.estimates) {
            let direct = evaluate_policy(s, p, &McConfig { steps: n, ..c }).unwrap();
            assert_eq!(*est, direct, "steps {n}");
        }
        assert_eq!(r.increments.len(), 2);
        assert!(refinement_study(s, p, &c, &[30, 96]).is_err());

        let fake = |incs: &[f64]| Refinement {
            steps: vec![1; incs.len() + 1],
            estimates: vec![McEstimate { mean: 1.0, stderr: 0.0, paths: 1, seed: 0 }; incs.len() + 1],
            increments: incs.iter().map(|&mean| PairedDifference { mean, stderr: 0.0 }).collect(),
        };
        // Halving increments: tail equals the last increment.
        let bias = fake(&[0.4, 0.2, 0.1]).bias_estimates().unwrap();
        let want = [-0.8, -0.4, -0.2, -0.1];
        for (b, w) in bias.iter().zip(want) {
            assert!((b - w).abs() < 1e-15);
        }
        assert!(fake(&[0.1]).bias_estimates().is_none());
        assert!(fake(&[0.1, 0.2]).bias_estimates().is_none());
        assert!(refinement_study(s, p, &c, &[]).is_err());
    }

    #[test]
    fn antithetic_reduces_variance() {
        let s = spec(0.0, 1.0);
        let p = Policy::Threshold(0.84);
        let plain = evaluate_policy(s, p, &cfg(4000, 200, 5)).unwrap();
        let anti = evaluate_policy(s, p, &McConfig { antithetic: true, ..cfg(4000, 200, 5) }).unwrap();
        assert!(anti.stderr < plain.stderr);
        assert!((anti.mean - plain.mean).abs() < 4.0 * plain.stderr);
    }

    #[test]
    fn threshold_estimates_track_the_closed_form() {
        let fb = solve_alpha(1e-12).unwrap();
        let s = spec(0.0, 1.0);
        let e = evaluate_policy(s, Policy::optimal(&fb), &cfg(20_000, 400, 17)).unwrap();
        let v = crate::value::bridge_value(s, &fb).unwrap();
        assert!(e.mean <= v + 3.0 * e.stderr);
        assert!((e.mean - v).abs() < 4.0 * e.stderr + 0.005);
    }

    #[test]
    fn exp_model_immediate_row_is_exact() {
        let s = spec(1.0, 1.0);
        let rows = exp_model_sweep(s, 2.0, &[0.5, 1.0], &cfg(500, 20, 3)).unwrap();
        for (_, e) in rows {
            assert_eq!(e.mean, (-2.0f64).exp());
            assert_eq!(e.stderr, 0.0);
        }
    }

    #[test]
    fn exp_model_estimates_are_positive_and_bounded() {
        let s = spec(0.0, 1.0);
        let theta = 1.5;
        let rows = exp_model_sweep(s, theta, &[0.5, 0.84, 1.2], &cfg(2000, 100, 3)).unwrap();
        assert_eq!(rows.len(), 3);
        for (_, e) in &rows {
            // The stopped ratio (x + a)/b lies in [0, c·√b / b]; payoff in (0, 1].
            assert!(e.mean > 0.0 && e.mean <= 1.0);
        }
        let again = exp_model_sweep(s, theta, &[0.5, 0.84, 1.2], &cfg(2000, 100, 3)).unwrap();
        assert_eq!(rows, again);
    }

    #[test]
    fn input_validation() {
        let s = spec(0.0, 1.0);
        assert!(evaluate_policy(s, Policy::Immediate, &cfg(0, 10, 1)).is_err());
        assert!(evaluate_policy(s, Policy::Immediate, &cfg(10, 0, 1)).is_err());
        assert!(evaluate_policy(s, Policy::FixedTime(2.0), &cfg(10, 10, 1)).is_err());
        assert!(policy_sweep(s, &[], &cfg(10, 10, 1)).is_err());
        assert!(policy_sweep(s, &[0.5, -0.1], &cfg(10, 10, 1)).is_err());
        assert!(exp_model_sweep(s, 0.0, &[0.5], &cfg(10, 10, 1)).is_err());
        assert!(exp_model_sweep(s, f64::NAN, &[0.5], &cfg(10, 10, 1)).is_err());
    }
}
