//! Adaptive Gauss–Kronrod (7, 15) quadrature on a finite interval.
//!
//! Only used as an oracle for the closed-form evaluations; it shares no code
//! with them.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

// Abscissae and weights of the 15-point Kronrod rule (QUADPACK qk15).
// XGK[1], XGK[3], XGK[5] and XGK[7] are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    /// Sum of the per-panel `|Kronrod - Gauss|` differences.
    pub abs_error: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Panel {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Panel { lo, hi, value, error }
}

/// Integrates `f` over `[lo, hi]` until the summed error estimate drops below
/// `rel_tol` times the magnitude of the running estimate.
///
/// The interval is first cut into `initial_panels` equal pieces; the panel
/// with the largest error is bisected until the target is met or
/// `max_panels` is reached.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    rel_tol: f64,
    initial_panels: usize,
    max_panels: usize,
) -> Integral {
    let n = initial_panels.max(1);
    let width = (hi - lo) / n as f64;
    let mut heap: BinaryHeap<Panel> = (0..n)
        .map(|i| {
            let a = lo + width * i as f64;
            let b = if i + 1 == n { hi } else { lo + width * (i + 1) as f64 };
            kronrod15(&f, a, b)
        })
        .collect();

    loop {
        let value: f64 = heap.iter().map(|p| p.value).sum();
        let error: f64 = heap.iter().map(|p| p.error).sum();
        let target = rel_tol * value.abs();
        if error <= target || heap.len() >= max_panels {
            return Integral { value, abs_error: error, panels: heap.len() };
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // Panel cannot be split further in double precision.
            heap.push(worst);
            let value: f64 = heap.iter().map(|p| p.value).sum();
            let error: f64 = heap.iter().map(|p| p.error).sum();
            return Integral { value, abs_error: error, panels: heap.len() };
        }
        heap.push(kronrod15(&f, worst.lo, mid));
        heap.push(kronrod15(&f, mid, worst.hi));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_integrate_constants() {
        let r = kronrod15(&|_| 1.0, -1.0, 1.0);
        assert!((r.value - 2.0).abs() < 1e-15);
        assert!(r.error < 1e-15);
    }

    #[test]
    fn gauss_exact_to_degree_13_kronrod_to_22() {
        // ∫_{-1}^{1} x^k dx = 2/(k+1) for even k.
        for k in (0..=22).step_by(2) {
            let p = kronrod15(&|x: f64| x.powi(k), -1.0, 1.0);
            let exact = 2.0 / (k as f64 + 1.0);
            assert!((p.value - exact).abs() < 1e-14, "kronrod degree {k}");
            if k <= 12 {
                assert!(p.error < 1e-14, "gauss degree {k}");
            }
        }
    }

    #[test]
    fn adaptive_handles_a_narrow_peak() {
        let f = |x: f64| (-(x - 3.0).powi(2) * 200.0).exp();
        let r = integrate(f, 0.0, 10.0, 1e-13, 4, 10_000);
        let exact = (std::f64::consts::PI / 200.0).sqrt();
        assert!((r.value - exact).abs() / exact < 1e-12);
    }
}
