//! The boundary benchmark: precision and recall of predicted boundary
//! pixels against one or more human annotations.
//!
//! A prediction pixel is a hit when it pairs one-to-one with an annotation
//! boundary pixel within a tolerance radius, a fixed fraction of the image
//! diagonal. Hits against ANY annotation count for precision; recall pools
//! the matched annotation pixels over all annotations. Sweeping the
//! threshold over a boundary strength grid traces the PR curve.

use std::collections::HashMap;

use crate::curves::{best_point, f_measure, interpolated_ap, PRCurve, PRPoint};
use crate::error::{Error, Result};
use crate::grid::{BoundaryGrid, LabelMap};
use crate::scalar::Scalar;
use crate::thin::thin;

/// Boundary pixels of a partition: a pixel lights up when its right or
/// down neighbor carries a different label. The resulting curves are one
/// pixel wide and sit on the upper-left side of each region interface.
pub fn boundary_map(labels: &LabelMap) -> Vec<bool> {
    let (h, w) = (labels.height(), labels.width());
    let mut out = vec![false; h * w];
    for r in 0..h {
        for c in 0..w {
            let own = labels.label(r, c);
            let right = c + 1 < w && labels.label(r, c + 1) != own;
            let down = r + 1 < h && labels.label(r + 1, c) != own;
            out[r * w + c] = right || down;
        }
    }
    out
}

/// The annotations an image is scored against, with their boundary maps.
#[derive(Debug, Clone)]
pub struct GroundTruthSet {
    height: usize,
    width: usize,
    annotations: Vec<LabelMap>,
    boundaries: Vec<Vec<bool>>,
}

impl GroundTruthSet {
    pub fn new(annotations: Vec<LabelMap>) -> Result<Self> {
        let first = annotations
            .first()
            .ok_or(Error::EmptyInput("ground truth annotations"))?;
        let (height, width) = (first.height(), first.width());
        for a in &annotations {
            if a.height() != height || a.width() != width {
                return Err(Error::DimensionMismatch(format!(
                    "annotation is {}x{}, expected {}x{}",
                    a.height(),
                    a.width(),
                    height,
                    width
                )));
            }
        }
        let boundaries = annotations.iter().map(boundary_map).collect();
        Ok(GroundTruthSet { height, width, annotations, boundaries })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn annotations(&self) -> &[LabelMap] {
        &self.annotations
    }

    pub fn boundaries(&self) -> &[Vec<bool>] {
        &self.boundaries
    }
}

/// Pooled matching counts for one prediction against a ground-truth set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MatchCounts {
    /// Prediction pixels matched in at least one annotation.
    pub tp: usize,
    /// Prediction pixels matched in none.
    pub fp: usize,
    /// Total annotation boundary pixels over all annotations.
    pub sum_gt: usize,
    /// Annotation boundary pixels matched, pooled over annotations.
    pub matched_gt: usize,
}

impl MatchCounts {
    /// An empty prediction cannot be wrong: precision 1 by convention.
    pub fn precision(&self) -> f64 {
        if self.tp + self.fp == 0 {
            1.0
        } else {
            self.tp as f64 / (self.tp + self.fp) as f64
        }
    }

    /// Nothing to recall counts as fully recalled.
    pub fn recall(&self) -> f64 {
        if self.sum_gt == 0 {
            1.0
        } else {
            self.matched_gt as f64 / self.sum_gt as f64
        }
    }

    pub fn f(&self) -> f64 {
        f_measure(self.precision(), self.recall())
    }

    pub fn absorb(&mut self, other: MatchCounts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.sum_gt += other.sum_gt;
        self.matched_gt += other.matched_gt;
    }
}

/// Greedy nearest-first one-to-one assignment between two pixel sets.
/// Returns, per `pred` pixel, the index of its partner in `gt` if any.
/// Candidate pairs within `radius` are taken closest first; ties break on
/// the lower pred index, then the lower gt index, so the result is a pure
/// function of the inputs. Growing the radius only appends candidates, so
/// the match count never drops as the tolerance widens.
pub fn greedy_match(
    pred: &[(usize, usize)],
    gt: &[(usize, usize)],
    radius: f64,
) -> Vec<Option<usize>> {
    let mut assignment = vec![None; pred.len()];
    if pred.is_empty() || gt.is_empty() || radius < 0.0 {
        return assignment;
    }
    let cell = radius.max(1.0);
    let bucket = |p: (usize, usize)| ((p.0 as f64 / cell) as i64, (p.1 as f64 / cell) as i64);
    let mut cells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (j, &p) in gt.iter().enumerate() {
        cells.entry(bucket(p)).or_default().push(j);
    }
    // Squared distances are integers, so ordering candidates is exact.
    let limit = radius * radius;
    let mut candidates: Vec<(u64, usize, usize)> = Vec::new();
    for (i, &(pr, pc)) in pred.iter().enumerate() {
        let (br, bc) = bucket((pr, pc));
        for nr in br - 1..=br + 1 {
            for nc in bc - 1..=bc + 1 {
                let Some(cell_gts) = cells.get(&(nr, nc)) else { continue };
                for &j in cell_gts {
                    let (gr, gc) = gt[j];
                    let dr = pr as i64 - gr as i64;
                    let dc = pc as i64 - gc as i64;
                    let d2 = (dr * dr + dc * dc) as u64;
                    if d2 as f64 <= limit {
                        candidates.push((d2, i, j));
                    }
                }
            }
        }
    }
    candidates.sort_unstable();
    let mut gt_taken = vec![false; gt.len()];
    for (_, i, j) in candidates {
        if assignment[i].is_none() && !gt_taken[j] {
            assignment[i] = Some(j);
            gt_taken[j] = true;
        }
    }
    assignment
}

/// Scores a binary prediction map against every annotation. The tolerance
/// is `max_dist` times the image diagonal in pixels.
pub fn match_boundaries(
    pred: &[bool],
    gts: &GroundTruthSet,
    max_dist: f64,
) -> Result<MatchCounts> {
    let (h, w) = (gts.height, gts.width);
    if pred.len() != h * w {
        return Err(Error::DimensionMismatch(format!(
            "prediction holds {} pixels, annotations are {h}x{w}",
            pred.len()
        )));
    }
    if !(max_dist > 0.0 && max_dist < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "max_dist {max_dist} outside (0, 1)"
        )));
    }
    let radius = max_dist * ((h * h + w * w) as f64).sqrt();
    let pred_px: Vec<(usize, usize)> = (0..h * w)
        .filter(|&i| pred[i])
        .map(|i| (i / w, i % w))
        .collect();

    let mut hit_any = vec![false; pred_px.len()];
    let mut counts = MatchCounts::default();
    for bmap in &gts.boundaries {
        let gt_px: Vec<(usize, usize)> = (0..h * w)
            .filter(|&i| bmap[i])
            .map(|i| (i / w, i % w))
            .collect();
        counts.sum_gt += gt_px.len();
        for (i, partner) in greedy_match(&pred_px, &gt_px, radius).iter().enumerate() {
            if partner.is_some() {
                hit_any[i] = true;
                counts.matched_gt += 1;
            }
        }
    }
    counts.tp = hit_any.iter().filter(|&&b| b).count();
    counts.fp = pred_px.len() - counts.tp;
    Ok(counts)
}

/// Pixels whose boundary strength exceeds the threshold. An edgel marks
/// the upper/left pixel of the pair it separates, matching the convention
/// of [`boundary_map`].
pub fn grid_boundary_pixels<S: Scalar>(grid: &BoundaryGrid<S>, threshold: f64) -> Vec<bool> {
    let (h, w) = (grid.image_height(), grid.image_width());
    let mut out = vec![false; h * w];
    for e in grid.edgel_positions() {
        if grid.get(e.row as usize, e.col as usize).as_f64() > threshold {
            let (r, c) = e.pixels().0;
            out[r * w + c] = true;
        }
    }
    out
}

/// Matching counts for one image over a shared threshold grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBoundaryEval {
    pub thresholds: Vec<f64>,
    pub counts: Vec<MatchCounts>,
}

/// Sweeps the thresholds over one image's boundary grid: binarize, thin,
/// match. Thresholds must be sorted ascending.
pub fn eval_boundary_image<S: Scalar>(
    grid: &BoundaryGrid<S>,
    gts: &GroundTruthSet,
    thresholds: &[f64],
    max_dist: f64,
) -> Result<ImageBoundaryEval> {
    if grid.image_height() != gts.height || grid.image_width() != gts.width {
        return Err(Error::DimensionMismatch(format!(
            "boundary grid covers {}x{}, annotations {}x{}",
            grid.image_height(),
            grid.image_width(),
            gts.height,
            gts.width
        )));
    }
    if thresholds.is_empty() {
        return Err(Error::EmptyInput("threshold grid"));
    }
    if thresholds.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("thresholds not ascending".into()));
    }
    let (h, w) = (gts.height, gts.width);
    let mut counts = Vec::with_capacity(thresholds.len());
    for &t in thresholds {
        let pred = thin(&grid_boundary_pixels(grid, t), h, w)?;
        counts.push(match_boundaries(&pred, gts, max_dist)?);
    }
    Ok(ImageBoundaryEval { thresholds: thresholds.to_vec(), counts })
}

/// Reduces per-image sweeps into one dataset curve. All sweeps must share
/// the threshold grid. ODS pools counts per threshold and takes the best F;
/// OIS lets each image keep its own best threshold before pooling.
pub fn boundary_curve(evals: &[ImageBoundaryEval]) -> Result<PRCurve> {
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
    let points: Vec<PRPoint> = (0..first.thresholds.len())
        .map(|k| {
            let mut pooled = MatchCounts::default();
            for e in evals {
                pooled.absorb(e.counts[k]);
            }
            PRPoint {
                threshold: first.thresholds[k],
                precision: pooled.precision(),
                recall: pooled.recall(),
                f: pooled.f(),
            }
        })
        .collect();
    let ods_f = best_point(&points).map(|i| points[i].f).unwrap_or(0.0);

    let mut ois_pool = MatchCounts::default();
    for e in evals {
        let per_image: Vec<PRPoint> = e
            .counts
            .iter()
            .zip(&e.thresholds)
            .map(|(c, &t)| PRPoint {
                threshold: t,
                precision: c.precision(),
                recall: c.recall(),
                f: c.f(),
            })
            .collect();
        let best = best_point(&per_image).expect("nonempty threshold grid");
        ois_pool.absorb(e.counts[best]);
    }
    let ois_f = ois_pool.f();
    let ap = interpolated_ap(&points);
    Ok(PRCurve { points, ods_f, ois_f, ap })
}

/// Single-image convenience wrapper: sweep and summarize in one step.
pub fn pr_curve_boundary<S: Scalar>(
    grid: &BoundaryGrid<S>,
    gts: &GroundTruthSet,
    thresholds: &[f64],
    max_dist: f64,
) -> Result<PRCurve> {
    boundary_curve(&[eval_boundary_image(grid, gts, thresholds, max_dist)?])
}
