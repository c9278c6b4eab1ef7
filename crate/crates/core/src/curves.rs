//! Precision-recall curves and their scalar summaries.
//!
//! Boundary and region benchmarks sweep a threshold over a hierarchy and
//! report precision/recall per operating point. The shared summaries are
//! the best F over one dataset-wide threshold (ODS), the best F when each
//! image picks its own threshold (OIS), and average precision (AP).

use crate::error::{Error, Result};
use crate::scalar::{cmp, Scalar};

/// Threshold grids larger than this are downsampled to quantiles.
pub const MAX_THRESHOLDS: usize = 2000;

/// One operating point of a precision-recall sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PRPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
    pub f: f64,
}

/// A finished sweep with its scalar summaries.
#[derive(Debug, Clone, PartialEq)]
pub struct PRCurve {
    pub points: Vec<PRPoint>,
    pub ods_f: f64,
    pub ois_f: f64,
    pub ap: f64,
}

/// Harmonic mean of precision and recall, zero when both vanish.
pub fn f_measure(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Builds the threshold grid for a sweep from the pooled hierarchy levels:
/// every distinct level when there are at most [`MAX_THRESHOLDS`] of them,
/// otherwise that many quantiles of the pooled distribution. Zero is always
/// the first point: boundary sweeps keep values strictly above the
/// threshold, so without it the complete boundary set would never be
/// sampled and a single-level hierarchy could never score full recall.
pub fn default_thresholds<S: Scalar>(levels: &[S]) -> Result<Vec<f64>> {
    if levels.is_empty() {
        return Err(Error::EmptyInput("threshold levels"));
    }
    let mut sorted: Vec<f64> = levels.iter().map(|&v| v.as_f64()).collect();
    if sorted.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite level".into()));
    }
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut distinct = sorted.clone();
    distinct.dedup();
    let mut grid = if distinct.len() <= MAX_THRESHOLDS {
        distinct
    } else {
        let n = sorted.len();
        let mut picks: Vec<f64> = (1..=MAX_THRESHOLDS)
            .map(|i| sorted[(i * n).div_ceil(MAX_THRESHOLDS) - 1])
            .collect();
        picks.dedup();
        picks
    };
    if grid.first().is_some_and(|&v| v > 0.0) {
        grid.insert(0, 0.0);
    }
    Ok(grid)
}

/// Average precision: interpolated precision (the best precision at any
/// recall at least as high) sampled at recall 0.01, 0.02, ... 1.00 and
/// averaged. Samples beyond the reach of the curve contribute zero.
pub fn interpolated_ap(points: &[PRPoint]) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let mut total = 0.0;
    for k in 1..=100 {
        let r = k as f64 / 100.0;
        let best = points
            .iter()
            .filter(|p| p.recall >= r - 1e-12)
            .map(|p| p.precision)
            .fold(0.0, f64::max);
        total += best;
    }
    total / 100.0
}

/// Index of the best operating point: maximal F, ties to the lowest index.
pub fn best_point(points: &[PRPoint]) -> Option<usize> {
    points
        .iter()
        .enumerate()
        .max_by(|(i, a), (j, b)| cmp(a.f, b.f).then(j.cmp(i)))
        .map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(threshold: f64, precision: f64, recall: f64) -> PRPoint {
        PRPoint {
            threshold,
            precision,
            recall,
            f: f_measure(precision, recall),
        }
    }

    #[test]
    fn f_measure_conventions() {
        assert_eq!(f_measure(0.0, 0.0), 0.0);
        assert_eq!(f_measure(1.0, 1.0), 1.0);
        assert!((f_measure(1.0, 0.5) - 2.0 / 3.0).abs() < 1e-12);
        // Empty prediction: precision 1 by convention, recall 0.
        assert_eq!(f_measure(1.0, 0.0), 0.0);
    }

    #[test]
    fn small_level_sets_pass_through_distinct_and_sorted() {
        let grid = default_thresholds(&[0.5, 0.1, 0.5, 0.9, 0.1]).unwrap();
        assert_eq!(grid, vec![0.0, 0.1, 0.5, 0.9]);
        // A grid that already starts at zero gains no extra point.
        let grid = default_thresholds(&[0.5, 0.0]).unwrap();
        assert_eq!(grid, vec![0.0, 0.5]);
    }

    #[test]
    fn large_level_sets_collapse_to_quantiles() {
        let levels: Vec<f64> = (0..10_000).map(|i| i as f64 / 10_000.0).collect();
        let grid = default_thresholds(&levels).unwrap();
        assert_eq!(grid.len(), MAX_THRESHOLDS + 1);
        assert_eq!(grid[0], 0.0);
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*grid.last().unwrap(), levels[9_999]);
        // Quantiles of the pooled distribution: the k-th pick sits at rank
        // ceil(k n / 2000) of the sorted multiset.
        assert_eq!(grid[1], levels[(10_000f64 / 2000.0).ceil() as usize - 1]);
        assert!(default_thresholds::<f64>(&[]).is_err());
    }

    #[test]
    fn quantiles_of_a_skewed_multiset_keep_mass_not_values() {
        // 3000 distinct values below 0.1 plus 7000 copies of 0.9: quantiles
        // of the multiset favor the heavy atom. Picks fall at ranks 5, 10,
        // ..., so 600 distinct small values survive alongside the atom and
        // the leading zero.
        let mut levels: Vec<f64> = (0..3000).map(|i| (i + 1) as f64 / 30_001.0).collect();
        levels.extend(std::iter::repeat(0.9).take(7000));
        let grid = default_thresholds(&levels).unwrap();
        assert_eq!(*grid.last().unwrap(), 0.9);
        assert_eq!(grid.len(), 602);
        assert_eq!(grid[0], 0.0);
        assert!(grid[1..601].iter().all(|&v| v > 0.0 && v < 0.1));
    }

    #[test]
    fn perfect_curve_has_unit_ap() {
        let points = vec![pt(0.1, 1.0, 1.0), pt(0.9, 1.0, 0.3)];
        assert!((interpolated_ap(&points) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ap_ignores_unreached_recall() {
        // Precision 1 up to recall 0.5, nothing beyond: exactly half the
        // samples score.
        let points = vec![pt(0.5, 1.0, 0.5)];
        assert!((interpolated_ap(&points) - 0.5).abs() < 1e-12);
        assert_eq!(interpolated_ap(&[]), 0.0);
    }

    #[test]
    fn interpolation_takes_the_best_later_precision() {
        // A dent in the curve: (r=0.4, p=0.2) is dominated by (r=0.5, p=0.8).
        let points = vec![pt(0.3, 0.2, 0.4), pt(0.2, 0.8, 0.5)];
        let ap = interpolated_ap(&points);
        assert!((ap - 0.5 * 0.8).abs() < 1e-12);
    }

    #[test]
    fn best_point_breaks_ties_low() {
        let points = vec![pt(0.1, 0.6, 0.6), pt(0.2, 0.6, 0.6), pt(0.3, 0.1, 0.1)];
        assert_eq!(best_point(&points), Some(0));
        assert_eq!(best_point(&[]), None);
    }
}
