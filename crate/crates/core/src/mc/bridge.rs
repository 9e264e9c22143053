//! Exact sampling of a Brownian bridge from `0` at time `0` to `-a` at `b`.
//!
//! A grid of `N = m·2^k` steps (`m` odd) is built in two phases:
//!
//! 1. On the coarse grid `t_j = j·b/m`, the bridge is advanced sequentially:
//!    from `x` at `t`, the value after `Δ` is Gaussian with mean
//!    `x + Δ·(-a - x)/(b - t)` and variance `Δ·(b - t - Δ)/(b - t)`.
//! 2. Each of the `k` refinement levels fills in interval midpoints, left to
//!    right: a midpoint is Gaussian with mean the average of its endpoints
//!    and variance a quarter of the interval length.
//!
//! Both phases use the exact conditional laws, so every grid gets the exact
//! finite-dimensional distribution (mean `-a·t/b`, covariance
//! `min(s, t) - s·t/b`). Normals are consumed in the order above, which makes
//! the `N`-step path a prefix of the `2N`-step path drawn from the same
//! stream: the coarse grid values coincide bit for bit. Monitoring the same
//! sample at different resolutions therefore compares like with like.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::{rng::substream, stats, McConfig};
use crate::error::{domain, Result};
use crate::value::HorizonState;

/// A sampled bridge on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathGrid {
    /// `0 = t_0 < … < t_N = b`.
    pub times: Vec<f64>,
    /// `values[0] = 0`, `values[N] = -a`.
    pub values: Vec<f64>,
}

impl PathGrid {
    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }
}

/// Splits `n` into its odd part and power of two.
pub(crate) fn odd_part(n: usize) -> (usize, u32) {
    let k = n.trailing_zeros();
    (n >> k, k)
}

/// Time of grid point `j` on an `n`-step grid over `[0, b]`.
///
/// Scaling `j` and `n` by the same power of two leaves the result bit-identical.
#[inline]
pub(crate) fn grid_time(b: f64, j: usize, n: usize) -> f64 {
    b * j as f64 / n as f64
}

/// Draws the `steps - 1` standard normals an `steps`-step path needs.
pub(crate) fn draw_normals<R: Rng + ?Sized>(rng: &mut R, steps: usize, out: &mut Vec<f64>) {
    out.clear();
    out.extend((1..steps).map(|_| rng.sample::<f64, _>(StandardNormal)));
}

/// Builds a bridge path from pre-drawn normals, each multiplied by `sign`
/// (`-1` gives the antithetic path). `values` must have length `steps + 1`.
pub(crate) fn fill_bridge(a: f64, b: f64, steps: usize, normals: &[f64], sign: f64, values: &mut [f64]) {
    debug_assert_eq!(values.len(), steps + 1);
    debug_assert_eq!(normals.len(), steps - 1);
    let (m, k) = odd_part(steps);
    let stride = 1usize << k;
    let mut z = normals.iter().map(|z| sign * z);

    values[0] = 0.0;
    let dt = b / m as f64;
    let mut x = 0.0;
    for j in 0..m - 1 {
        let remaining = (m - j) as f64 * dt;
        let mean = x + dt * (-a - x) / remaining;
        let var = dt * (remaining - dt) / remaining;
        x = mean + var.sqrt() * z.next().expect("normal count");
        values[(j + 1) * stride] = x;
    }
    values[steps] = -a;

    for level in 1..=k {
        let half = 1usize << (k - level);
        let intervals = m << (level - 1);
        let sd = (0.25 * b / intervals as f64).sqrt();
        for i in 0..intervals {
            let left = 2 * half * i;
            let right = left + 2 * half;
            let mid = left + half;
            values[mid] = 0.5 * (values[left] + values[right]) + sd * z.next().expect("normal count");
        }
    }
    debug_assert!(z.next().is_none());
}

/// Samples one bridge path using normals from `rng`.
pub fn sample_bridge<R: Rng + ?Sized>(spec: HorizonState, steps: usize, rng: &mut R) -> Result<PathGrid> {
    if steps == 0 {
        return Err(domain("steps must be at least 1"));
    }
    let mut normals = Vec::with_capacity(steps);
    draw_normals(rng, steps, &mut normals);
    let mut values = vec![0.0; steps + 1];
    fill_bridge(spec.a, spec.b, steps, &normals, 1.0, &mut values);
    let times = (0..=steps).map(|j| grid_time(spec.b, j, steps)).collect();
    Ok(PathGrid { times, values })
}

/// Samples path `index` of a run seeded with `seed`.
pub fn sample_bridge_indexed(spec: HorizonState, steps: usize, seed: u64, index: u64) -> Result<PathGrid> {
    sample_bridge(spec, steps, &mut substream(seed, index))
}

/// Empirical marginal of the bridge at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Marginal {
    pub t: f64,
    pub mean: f64,
    pub mean_stderr: f64,
    pub variance: f64,
    /// Exact theoretical mean `-a·t/b`.
    pub expected_mean: f64,
    /// Exact theoretical variance `t·(b - t)/b`.
    pub expected_variance: f64,
    /// Whether every sampled path ended exactly at `-a`.
    pub all_pinned: bool,
    pub paths: usize,
}

/// Samples `cfg.paths` bridges on `cfg.steps` steps and summarises the value
/// at grid point `index`. Antithetic pairing is ignored: the moments are of
/// individual paths.
pub fn marginal_at(spec: HorizonState, cfg: &McConfig, index: usize) -> Result<Marginal> {
    cfg.validate()?;
    if index > cfg.steps {
        return Err(domain(format!("grid index {index} exceeds steps = {}", cfg.steps)));
    }
    let steps = cfg.steps;
    let samples: Vec<(f64, bool)> = (0..cfg.paths as u64)
        .into_par_iter()
        .map_init(
            || (Vec::with_capacity(steps), vec![0.0; steps + 1]),
            |(normals, values), i| {
                draw_normals(&mut substream(cfg.seed, i), steps, normals);
                fill_bridge(spec.a, spec.b, steps, normals, 1.0, values);
                (values[index], values[steps] == -spec.a)
            },
        )
        .collect();
    let xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let (mean, mean_stderr) = stats::mean_and_stderr(&xs);
    let t = grid_time(spec.b, index, steps);
    Ok(Marginal {
        t,
        mean,
        mean_stderr,
        variance: stats::variance(&xs),
        expected_mean: -spec.a * t / spec.b,
        expected_variance: t * (spec.b - t) / spec.b,
        all_pinned: samples.iter().all(|s| s.1),
        paths: cfg.paths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(a: f64, b: f64) -> HorizonState {
        HorizonState::new(a, b).unwrap()
    }

    #[test]
    fn single_step_is_deterministic() {
        let p = sample_bridge_indexed(spec(1.5, 2.0), 1, 1, 0).unwrap();
        assert_eq!(p.values, vec![0.0, -1.5]);
        assert_eq!(p.times, vec![0.0, 2.0]);
    }

    #[test]
    fn endpoints_are_exact() {
        for steps in [2, 3, 7, 8, 12, 1000] {
            for i in 0..20 {
                let p = sample_bridge_indexed(spec(0.37, 1.3), steps, 11, i).unwrap();
                assert_eq!(p.values[0], 0.0);
                assert_eq!(p.values[steps], -0.37);
                assert_eq!(p.times[steps], 1.3);
                assert_eq!(p.steps(), steps);
            }
        }
    }

    #[test]
    fn coarse_path_is_a_subsample_of_the_refined_one() {
        let s = spec(0.2, 1.7);
        for base in [3usize, 125] {
            let coarse = sample_bridge_indexed(s, base * 2, 5, 9).unwrap();
            let fine = sample_bridge_indexed(s, base * 8, 5, 9).unwrap();
            for (j, (&t, &x)) in coarse.times.iter().zip(&coarse.values).enumerate() {
                assert_eq!(fine.values[4 * j], x);
                assert_eq!(fine.times[4 * j], t);
            }
        }
    }

    #[test]
    fn odd_part_splits() {
        assert_eq!(odd_part(1), (1, 0));
        assert_eq!(odd_part(4000), (125, 5));
        assert_eq!(odd_part(7), (7, 0));
    }

    #[test]
    fn marginal_at_mid_time_matches_theory() {
        let cfg = McConfig { paths: 40_000, steps: 8, seed: 3, antithetic: false };
        let m = marginal_at(spec(1.0, 2.0), &cfg, 4).unwrap();
        assert_eq!(m.t, 1.0);
        assert!(m.all_pinned);
        assert!((m.mean - m.expected_mean).abs() < 4.0 * m.mean_stderr);
        assert!((m.variance / m.expected_variance - 1.0).abs() < 0.05);
    }

    #[test]
    fn sequential_and_refined_grids_share_the_law() {
        // 7 steps is purely sequential, 8 steps purely midpoint refinement.
        // Compare the empirical variance at t = 4/7·b and t = b/2.
        let s = spec(0.0, 1.0);
        for (steps, idx) in [(7usize, 4usize), (8, 4)] {
            let cfg = McConfig { paths: 40_000, steps, seed: 21, antithetic: false };
            let m = marginal_at(s, &cfg, idx).unwrap();
            assert!((m.variance / m.expected_variance - 1.0).abs() < 0.05, "{steps}: {m:?}");
            assert!((m.mean - m.expected_mean).abs() < 4.0 * m.mean_stderr);
        }
    }
}
