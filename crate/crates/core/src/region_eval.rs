//! The region benchmark: precision and recall over whole regions rather
//! than boundary pixels.
//!
//! A candidate region and an annotation region form an object match when
//! each covers nearly all of the other; a region whose overlap reaches a
//! quarter of its own area is a part and earns a reduced weight. Precision
//! weighs candidate areas, recall annotation areas, and both are averaged
//! over the annotations before the harmonic mean.

use crate::boundary_eval::GroundTruthSet;
use crate::curves::{best_point, f_measure, interpolated_ap, PRCurve, PRPoint};
use crate::error::{Error, Result};
use crate::grid::LabelMap;
use crate::hierarchy::Hierarchy;
use crate::scalar::Scalar;

/// Overlap fraction both regions must reach for an object match.
pub const OBJECT_THRESHOLD: f64 = 0.95;
/// Overlap fraction of a region's own area that makes it a part.
pub const PART_THRESHOLD: f64 = 0.25;
/// Weight of a part relative to an object match.
pub const PART_WEIGHT: f64 = 0.1;

/// Region precision/recall of one partition against a ground-truth set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionScore {
    pub precision: f64,
    pub recall: f64,
    pub f: f64,
}

/// Precision and recall against a single annotation.
fn score_single(cand: &LabelMap, gt: &LabelMap) -> (f64, f64) {
    let cn = cand.region_count() as usize;
    let gn = gt.region_count() as usize;
    let mut overlap = vec![0usize; cn * gn];
    let mut cand_size = vec![0usize; cn];
    let mut gt_size = vec![0usize; gn];
    for (&ci, &gi) in cand.labels().iter().zip(gt.labels()) {
        overlap[ci as usize * gn + gi as usize] += 1;
        cand_size[ci as usize] += 1;
        gt_size[gi as usize] += 1;
    }

    let object = |i: usize, j: usize| {
        let o = overlap[i * gn + j] as f64;
        o >= OBJECT_THRESHOLD * cand_size[i] as f64
            && o >= OBJECT_THRESHOLD * gt_size[j] as f64
    };

    let mut cand_terms: Vec<f64> = (0..cn)
        .map(|i| {
            let is_object = (0..gn).any(|j| object(i, j));
            let is_part = (0..gn)
                .any(|j| overlap[i * gn + j] as f64 >= PART_THRESHOLD * cand_size[i] as f64);
            let w = if is_object {
                1.0
            } else if is_part {
                PART_WEIGHT
            } else {
                0.0
            };
            w * cand_size[i] as f64
        })
        .collect();
    let mut gt_terms: Vec<f64> = (0..gn)
        .map(|j| {
            let is_object = (0..cn).any(|i| object(i, j));
            let is_part = (0..cn)
                .any(|i| overlap[i * gn + j] as f64 >= PART_THRESHOLD * gt_size[j] as f64);
            let w = if is_object {
                1.0
            } else if is_part {
                PART_WEIGHT
            } else {
                0.0
            };
            w * gt_size[j] as f64
        })
        .collect();
    // Summing in value order keeps the score exactly invariant under label
    // permutations of either partition.
    cand_terms.sort_by(|a, b| a.partial_cmp(b).unwrap());
    gt_terms.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let total = cand.labels().len() as f64;
    (
        cand_terms.into_iter().sum::<f64>() / total,
        gt_terms.into_iter().sum::<f64>() / total,
    )
}

/// Scores a partition against every annotation and averages precision and
/// recall before the harmonic mean.
pub fn region_measure(partition: &LabelMap, gts: &GroundTruthSet) -> Result<RegionScore> {
    if partition.height() != gts.height() || partition.width() != gts.width() {
        return Err(Error::DimensionMismatch(format!(
            "partition is {}x{}, annotations {}x{}",
            partition.height(),
            partition.width(),
            gts.height(),
            gts.width()
        )));
    }
    let mut precision = 0.0;
    let mut recall = 0.0;
    for gt in gts.annotations() {
        let (p, r) = score_single(partition, gt);
        precision += p;
        recall += r;
    }
    let n = gts.annotations().len() as f64;
    let (precision, recall) = (precision / n, recall / n);
    Ok(RegionScore { precision, recall, f: f_measure(precision, recall) })
}

/// Region scores for one image over a shared threshold grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageRegionEval {
    pub thresholds: Vec<f64>,
    pub scores: Vec<RegionScore>,
}

/// Sweeps the thresholds over one image's hierarchy: flatten, score.
/// Thresholds must be sorted ascending.
pub fn eval_region_image<S: Scalar>(
    hierarchy: &Hierarchy<S>,
    gts: &GroundTruthSet,
    thresholds: &[f64],
) -> Result<ImageRegionEval> {
    if thresholds.is_empty() {
        return Err(Error::EmptyInput("threshold grid"));
    }
    if thresholds.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("thresholds not ascending".into()));
    }
    let mut scores = Vec::with_capacity(thresholds.len());
    for &t in thresholds {
        let partition = hierarchy.partition_at(S::of_f64(t));
        scores.push(region_measure(&partition, gts)?);
    }
    Ok(ImageRegionEval { thresholds: thresholds.to_vec(), scores })
}

/// Reduces per-image sweeps into one dataset curve. Scores pool by the
/// mean of precision and recall per threshold; OIS lets each image keep
/// its own best threshold before averaging.
pub fn region_curve(evals: &[ImageRegionEval]) -> Result<PRCurve> {
    let first = evals.first().ok_or(Error::EmptyInput("image evaluations"))?;
    if first.thresholds.is_empty() {
        return Err(Error::EmptyInput("threshold grid"));
    }
    for e in evals {
        if e.thresholds != first.thresholds {
            return Err(Error::Inconsistent(
                "images evaluated on different threshold grids".into(),
            ));
        }
    }
    let n = evals.len() as f64;
    let points: Vec<PRPoint> = (0..first.thresholds.len())
        .map(|k| {
            let precision = evals.iter().map(|e| e.scores[k].precision).sum::<f64>() / n;
            let recall = evals.iter().map(|e| e.scores[k].recall).sum::<f64>() / n;
            PRPoint {
                threshold: first.thresholds[k],
                precision,
                recall,
                f: f_measure(precision, recall),
            }
        })
        .collect();
    let ods_f = best_point(&points).map(|i| points[i].f).unwrap_or(0.0);

    let mut best_precision = 0.0;
    let mut best_recall = 0.0;
    for e in evals {
        let per_image: Vec<PRPoint> = e
            .scores
            .iter()
            .zip(&e.thresholds)
            .map(|(s, &t)| PRPoint {
                threshold: t,
                precision: s.precision,
                recall: s.recall,
                f: s.f,
            })
            .collect();
        let best = best_point(&per_image).expect("nonempty threshold grid");
        best_precision += e.scores[best].precision;
        best_recall += e.scores[best].recall;
    }
    let ois_f = f_measure(best_precision / n, best_recall / n);
    let ap = interpolated_ap(&points);
    Ok(PRCurve { points, ods_f, ois_f, ap })
}

/// Single-image convenience wrapper: sweep and summarize in one step.
pub fn pr_curve_region<S: Scalar>(
    hierarchy: &Hierarchy<S>,
    gts: &GroundTruthSet,
    thresholds: &[f64],
) -> Result<PRCurve> {
    region_curve(&[eval_region_image(hierarchy, gts, thresholds)?])
}
