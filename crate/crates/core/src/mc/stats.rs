//! Order-fixed sample statistics.
//!
//! Sums run sequentially in sample-index order so results do not depend on
//! how the samples were produced. Deviations are taken from the first sample,
//! which makes a constant sample reproduce its value exactly (zero spread).

pub(crate) fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let Some(&pivot) = xs.first() else {
        return (f64::NAN, f64::NAN);
    };
    let n = xs.len() as f64;
    let shift: f64 = xs.iter().map(|x| x - pivot).sum::<f64>() / n;
    let mean = pivot + shift;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - pivot - shift).powi(2)).sum();
    let var = ss / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Sample variance (`n - 1` denominator).
pub(crate) fn variance(xs: &[f64]) -> f64 {
    let (mean, se) = mean_and_stderr(xs);
    if xs.len() < 2 || !mean.is_finite() {
        return 0.0;
    }
    se * se * xs.len() as f64
}

/// Mean and standard error of `xs[i] - ys[i]`.
pub(crate) fn paired(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    debug_assert_eq!(xs.len(), ys.len());
    let diffs: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| x - y).collect();
    mean_and_stderr(&diffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_samples_are_exact() {
        let xs = vec![0.367_879_441_171_442_33; 100_001];
        assert_eq!(mean_and_stderr(&xs), (xs[0], 0.0));
    }

    #[test]
    fn small_sample() {
        let (m, se) = mean_and_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        // s² = 5/3, se = sqrt(5/12)
        assert!((se - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert!((variance(&[1.0, 2.0, 3.0, 4.0]) - 5.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn single_sample_has_zero_stderr() {
        assert_eq!(mean_and_stderr(&[7.0]), (7.0, 0.0));
    }
}
