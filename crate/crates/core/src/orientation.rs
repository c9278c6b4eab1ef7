//! Boundary orientation: ground-truth tangents from simplified boundary
//! polygons, a smoothed-gradient estimator as the classical baseline, and
//! the confidence-sweep accuracy curve that compares them.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::filters::{gaussian_kernel, separable_correlate};
use crate::geometry::{quantize_orientation, PointIndex};
use crate::grid::{FloatMap, LabelMap};
use crate::owt::{arc_orientations, ORIENTATION_BINS};
use crate::partition::{sparse_from_labels, SparseBoundaries};
use crate::scalar::Scalar;

/// Default smoothing for the gradient baseline, in pixels.
pub const GRADIENT_SIGMA: f64 = 2.0;

/// One oriented boundary pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientationRecord<S: Scalar = f64> {
    pub row: u32,
    pub col: u32,
    pub bin: u32,
    pub confidence: S,
}

/// A set of per-pixel orientation estimates over one image, at most one
/// record per pixel.
#[derive(Debug, Clone)]
pub struct OrientationField<S: Scalar = f64> {
    height: usize,
    width: usize,
    records: Vec<OrientationRecord<S>>,
}

impl<S: Scalar> OrientationField<S> {
    pub fn new(height: usize, width: usize, records: Vec<OrientationRecord<S>>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::EmptyInput("orientation field dimensions must be nonzero"));
        }
        let mut seen = HashMap::new();
        for (i, r) in records.iter().enumerate() {
            if r.row as usize >= height || r.col as usize >= width {
                return Err(Error::InvalidGrid(format!(
                    "record at ({}, {}) outside {height}x{width}",
                    r.row, r.col
                )));
            }
            if r.bin >= ORIENTATION_BINS {
                return Err(Error::InvalidGrid(format!("orientation bin {} out of range", r.bin)));
            }
            if !(r.confidence >= S::zero() && r.confidence <= S::one()) {
                return Err(Error::InvalidGrid(format!(
                    "confidence {} outside [0, 1]",
                    r.confidence
                )));
            }
            if let Some(first) = seen.insert((r.row, r.col), i) {
                return Err(Error::Inconsistent(format!(
                    "records {first} and {i} share pixel ({}, {})",
                    r.row, r.col
                )));
            }
        }
        Ok(OrientationField { height, width, records })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn records(&self) -> &[OrientationRecord<S>] {
        &self.records
    }
}

/// Tangent bins for every boundary pixel of a partition (a pixel whose right
/// or down neighbor belongs to a different region), with confidence 1. Bins
/// come from simplifying each boundary arc with tolerance `epsilon` pixels;
/// a pixel carrying several boundary pieces keeps the first in section
/// order.
pub fn gt_orientations<S: Scalar>(gt: &LabelMap, epsilon: f64) -> Result<OrientationField<S>> {
    let sb: SparseBoundaries<S> = sparse_from_labels(gt);
    let geom = arc_orientations(&sb, epsilon, ORIENTATION_BINS)?;
    let mut records: Vec<OrientationRecord<S>> = Vec::new();
    let mut taken = HashMap::new();
    for (key, entry) in sb.entries() {
        let tangents = geom.section(key.0, key.1).expect("geometry covers every section");
        for (i, e) in entry.coords.iter().enumerate() {
            // The up/left pixel of the pair is the one whose right or down
            // neighbor differs.
            let (p, _) = e.pixels();
            if taken.insert(p, ()).is_none() {
                records.push(OrientationRecord {
                    row: p.0 as u32,
                    col: p.1 as u32,
                    bin: tangents.bins[i],
                    confidence: S::one(),
                });
            }
        }
    }
    OrientationField::new(gt.height(), gt.width(), records)
}

/// Tangent estimates from the smoothed image gradient: every pixel gets the
/// bin perpendicular to its gradient, with confidence proportional to the
/// gradient magnitude (normalized by the image maximum; a flat map has
/// confidence zero everywhere).
pub fn local_gradient_orientation<S: Scalar>(
    contour: &FloatMap<S>,
    sigma: f64,
) -> Result<OrientationField<S>> {
    if contour.channels() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "gradient estimator expects one channel, got {}",
            contour.channels()
        )));
    }
    let (h, w) = (contour.height(), contour.width());
    let g: Vec<S> = gaussian_kernel(sigma, 0)?;
    let g1: Vec<S> = gaussian_kernel(sigma, 1)?;
    let plane = contour.channel(0);
    let gx = separable_correlate(plane, h, w, &g1, &g);
    let gy = separable_correlate(plane, h, w, &g, &g1);
    let mags: Vec<S> = gx
        .iter()
        .zip(&gy)
        .map(|(&x, &y)| (x * x + y * y).sqrt())
        .collect();
    let peak = mags.iter().fold(S::zero(), |a, &b| if b > a { b } else { a });
    let flat = peak <= S::epsilon() * S::of_f64(1024.0);
    let mut records = Vec::with_capacity(h * w);
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            let theta = gy[i].as_f64().atan2(gx[i].as_f64()) + PI / 2.0;
            records.push(OrientationRecord {
                row: r as u32,
                col: c as u32,
                bin: quantize_orientation(theta, ORIENTATION_BINS),
                confidence: if flat { S::zero() } else { mags[i] / peak },
            });
        }
    }
    OrientationField::new(h, w, records)
}

/// Accuracy as a function of prediction confidence: one point per integer
/// percentile of the most confident ground-truth pixels.
#[derive(Debug, Clone)]
pub struct OrientationCurve {
    /// (percentile 1..=100, mean per-class accuracy at that cut).
    pub points: Vec<(u32, f64)>,
    /// Normalized trapezoid area under the curve.
    pub auc: f64,
}

/// Sweeps confidence percentiles over the ground-truth boundary pixels. At
/// each percentile the top slice by prediction confidence (ties included) is
/// scored per orientation class and the class accuracies are averaged over
/// the classes present, which keeps unbalanced classes from dominating.
/// Every ground-truth pixel takes the prediction at its own pixel, or the
/// nearest predicted pixel if its own carries no record.
pub fn orient_accuracy<S: Scalar>(
    pred: &OrientationField<S>,
    gt: &OrientationField<S>,
) -> Result<OrientationCurve> {
    if pred.height != gt.height || pred.width != gt.width {
        return Err(Error::DimensionMismatch(format!(
            "prediction covers {}x{}, ground truth {}x{}",
            pred.height, pred.width, gt.height, gt.width
        )));
    }
    if gt.records.is_empty() {
        return Err(Error::EmptyInput("ground truth holds no boundary pixels"));
    }
    if pred.records.is_empty() {
        return Err(Error::EmptyInput("prediction holds no records"));
    }

    let exact: HashMap<(u32, u32), usize> =
        pred.records.iter().enumerate().map(|(i, r)| ((r.row, r.col), i)).collect();
    let index = PointIndex::new(
        pred.records.iter().map(|r| (r.row as f64, r.col as f64)).collect(),
        8.0,
    );
    let reach = ((pred.height * pred.height + pred.width * pred.width) as f64).sqrt();

    // (pred bin, gt bin, pred confidence) per gt record.
    let mut samples: Vec<(u32, u32, S)> = Vec::with_capacity(gt.records.len());
    for r in &gt.records {
        let p = match exact.get(&(r.row, r.col)) {
            Some(&i) => &pred.records[i],
            None => {
                let (i, _) = index
                    .nearest_within((r.row as f64, r.col as f64), reach)
                    .expect("nonempty prediction within image diagonal");
                &pred.records[i]
            }
        };
        samples.push((p.bin, r.bin, p.confidence));
    }
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_by(|&a, &b| {
        crate::scalar::cmp(samples[b].2, samples[a].2).then(a.cmp(&b))
    });

    let n = samples.len();
    let mut totals = [0usize; ORIENTATION_BINS as usize];
    let mut correct = [0usize; ORIENTATION_BINS as usize];
    let mut cursor = 0usize;
    let mut points = Vec::with_capacity(100);
    for p in 1..=100u32 {
        let want = (n * p as usize).div_ceil(100);
        while cursor < want {
            let (pb, gb, _) = samples[order[cursor]];
            totals[gb as usize] += 1;
            if pb == gb {
                correct[gb as usize] += 1;
            }
            cursor += 1;
        }
        // Confidence ties at the cut are all included.
        while cursor < n
            && samples[order[cursor]].2 == samples[order[cursor - 1]].2
        {
            let (pb, gb, _) = samples[order[cursor]];
            totals[gb as usize] += 1;
            if pb == gb {
                correct[gb as usize] += 1;
            }
            cursor += 1;
        }
        let mut acc = 0.0;
        let mut classes = 0usize;
        for b in 0..ORIENTATION_BINS as usize {
            if totals[b] > 0 {
                acc += correct[b] as f64 / totals[b] as f64;
                classes += 1;
            }
        }
        points.push((p, acc / classes as f64));
    }
    let auc = points.windows(2).map(|w| (w[0].1 + w[1].1) / 2.0).sum::<f64>()
        / (points.len() - 1) as f64;
    Ok(OrientationCurve { points, auc })
}
