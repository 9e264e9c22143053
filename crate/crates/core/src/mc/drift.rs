//! The supermartingale experiment: `Y_t = V(a + W_t, b + t)` along
//! unconditioned Wiener paths in horizon coordinates.
//!
//! The drift of `Y` is the generator `½V_aa + V_b`, which vanishes in the
//! continuation region and equals `-a/b²` in the stopping region, so `E[Y_t]`
//! is flat while paths stay below the boundary and decreases once they
//! spend time above it.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::{rng::substream, stats, McConfig};
use crate::boundary::FreeBoundary;
use crate::error::{domain, Result};
use crate::value::{value_hat, HorizonState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftPoint {
    pub t: f64,
    pub mean: f64,
    pub stderr: f64,
}

/// Paired change of `E[Y]` between consecutive checkpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Increment {
    pub from: f64,
    pub to: f64,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftReport {
    pub points: Vec<DriftPoint>,
    pub increments: Vec<Increment>,
}

impl DriftReport {
    /// Whether no increment rises by more than `slack` standard errors.
    pub fn non_increasing(&self, slack: f64) -> bool {
        self.increments.iter().all(|i| i.mean <= slack * i.stderr)
    }
}

/// Simulates `cfg.paths` samples of `Y` at the given checkpoints.
///
/// Checkpoints must be increasing and lie in `[0, 0.99·b]`. The Wiener
/// process is sampled exactly at the checkpoints, so `cfg.steps` is unused.
pub fn supermartingale_drift(
    spec: HorizonState,
    cfg: &McConfig,
    fb: &FreeBoundary,
    checkpoints: &[f64],
) -> Result<DriftReport> {
    cfg.validate()?;
    if checkpoints.is_empty() {
        return Err(domain("no checkpoints given"));
    }
    let limit = 0.99 * spec.b;
    if let Some(t) = checkpoints.iter().find(|&&t| !(0.0..=limit).contains(&t)) {
        return Err(domain(format!("checkpoint {t} outside [0, {limit}]")));
    }
    if checkpoints.windows(2).any(|w| w[1] <= w[0]) {
        return Err(domain("checkpoints must be strictly increasing"));
    }

    let path = |normals: &[f64], sign: f64, out: &mut [f64]| -> Result<()> {
        let mut w = 0.0;
        let mut prev = 0.0;
        for ((&t, &z), y) in checkpoints.iter().zip(normals).zip(out.iter_mut()) {
            w += sign * (t - prev).sqrt() * z;
            prev = t;
            *y = value_hat(spec.advance(w, t)?, fb)?;
        }
        Ok(())
    };

    let k = checkpoints.len();
    let rows: Vec<Vec<f64>> = (0..cfg.paths as u64)
        .into_par_iter()
        .map(|i| -> Result<Vec<f64>> {
            let mut rng = substream(cfg.seed, i);
            let normals: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
            let mut ys = vec![0.0; k];
            path(&normals, 1.0, &mut ys)?;
            if cfg.antithetic {
                let mut mirror = vec![0.0; k];
                path(&normals, -1.0, &mut mirror)?;
                for (y, m) in ys.iter_mut().zip(&mirror) {
                    *y = 0.5 * (*y + m);
                }
            }
            Ok(ys)
        })
        .collect::<Result<_>>()?;

    let columns: Vec<Vec<f64>> = (0..k).map(|c| rows.iter().map(|r| r[c]).collect()).collect();
    let points = checkpoints
        .iter()
        .zip(&columns)
        .map(|(&t, col)| {
            let (mean, stderr) = stats::mean_and_stderr(col);
            DriftPoint { t, mean, stderr }
        })
        .collect();
    let increments = checkpoints
        .windows(2)
        .zip(columns.windows(2))
        .map(|(t, c)| {
            let (mean, stderr) = stats::paired(&c[1], &c[0]);
            Increment { from: t[0], to: t[1], mean, stderr }
        })
        .collect();
    Ok(DriftReport { points, increments })
}
