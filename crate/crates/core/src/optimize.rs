//! One-dimensional derivative-free maximisation: a coarse grid scan that
//! brackets the peak, followed by golden-section refinement.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the maximum of `f` on `[lo, hi]`.
///
/// Returns `(x_max, f_max)` once the bracket is narrower than `tol`.
pub fn golden_max<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Number of local maxima in a sampled curve, ignoring steps smaller than
/// `1e-12` of the curve's range.
pub fn count_peaks(values: &[f64]) -> usize {
    let (min, max) = values
        .iter()
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let eps = 1e-12 * (max - min).abs().max(f64::MIN_POSITIVE);
    let mut peaks = 0;
    let mut rising = true;
    for w in values.windows(2) {
        let d = w[1] - w[0];
        if d > eps {
            rising = true;
        } else if d < -eps {
            if rising {
                peaks += 1;
            }
            rising = false;
        }
    }
    if rising {
        peaks += 1;
    }
    peaks
}

/// Evaluates `f` on `grid` (sorted ascending), brackets the best point by its
/// neighbours and refines it by golden section to `tol`.
///
/// Fails with [`Error::NonUnimodal`] if the sampled curve has more than one
/// local maximum.
pub fn scan_and_refine<F>(mut f: F, grid: &[f64], tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    assert!(grid.len() >= 2, "scan grid needs at least two points");
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let peaks = count_peaks(&values);
    if peaks > 1 {
        return Err(Error::NonUnimodal { peaks });
    }
    let best = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let (x, fx) = golden_max(&mut f, lo, hi, tol);
    if fx >= values[best] {
        Ok((x, fx))
    } else {
        Ok((grid[best], values[best]))
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}
