//! Multiscale fusion: hierarchies built from coarser contour maps are
//! projected onto the finest partition's boundaries and blended into one
//! hierarchy, keeping coarse-level structure on well-localized fine arcs.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::PointIndex;
use crate::hierarchy::{build_ucm, Hierarchy};
use crate::partition::SparseBoundaries;
use crate::scalar::{cmp, Scalar};

/// Default projection radius as a fraction of the image diagonal, shared
/// with the boundary benchmark's localization tolerance.
pub const PROJECTION_RADIUS_FRACTION: f64 = 0.0075;

/// Projection radius in pixels for an image size.
pub fn projection_radius(height: usize, width: usize, fraction: f64) -> f64 {
    fraction * ((height * height + width * width) as f64).sqrt()
}

/// Hierarchies over the same image with blending weights.
#[derive(Debug, Clone)]
pub struct ScaleSet<S: Scalar = f64> {
    members: Vec<(Hierarchy<S>, S)>,
}

impl<S: Scalar> ScaleSet<S> {
    pub fn new(members: Vec<(Hierarchy<S>, S)>) -> Result<Self> {
        let Some(first) = members.first() else {
            return Err(Error::EmptyInput("a scale set needs at least one hierarchy"));
        };
        let dims = (first.0.height(), first.0.width());
        for (h, w) in &members {
            if (h.height(), h.width()) != dims {
                return Err(Error::DimensionMismatch(format!(
                    "scale covers {}x{}, expected {}x{}",
                    h.height(),
                    h.width(),
                    dims.0,
                    dims.1
                )));
            }
            if !(*w >= S::zero()) {
                return Err(Error::InvalidArgument(format!("negative scale weight {w}")));
            }
        }
        if members.iter().all(|(_, w)| *w == S::zero()) {
            return Err(Error::InvalidArgument("scale weights are all zero".into()));
        }
        Ok(ScaleSet { members })
    }

    pub fn members(&self) -> &[(Hierarchy<S>, S)] {
        &self.members
    }
}

/// Carries one coarse hierarchy's boundary levels over to the finest
/// partition: each fine entry takes the mean, over its edgels, of the coarse
/// boundary value at the nearest positive coarse edgel within `radius`
/// pixels, or zero where the coarse map offers no support. Zero-level coarse
/// boundaries are no support by definition.
pub fn project<S: Scalar>(
    coarse: &Hierarchy<S>,
    fine_sb: &SparseBoundaries<S>,
    radius: f64,
) -> Result<BTreeMap<(u32, u32), S>> {
    if coarse.height() != fine_sb.height() || coarse.width() != fine_sb.width() {
        return Err(Error::DimensionMismatch(format!(
            "coarse hierarchy covers {}x{}, fine boundaries {}x{}",
            coarse.height(),
            coarse.width(),
            fine_sb.height(),
            fine_sb.width()
        )));
    }
    if !(radius >= 0.0) {
        return Err(Error::InvalidArgument(format!("projection radius {radius}")));
    }
    let grid = coarse.ucm_grid()?;
    let mut points = Vec::new();
    let mut values = Vec::new();
    for e in grid.edgel_positions() {
        let v = grid.get(e.row as usize, e.col as usize);
        if v > S::zero() {
            points.push(e.midpoint());
            values.push(v);
        }
    }
    let index = PointIndex::new(points, radius.max(1.0));

    let mut out = BTreeMap::new();
    for (key, entry) in fine_sb.entries() {
        let mut sum = S::zero();
        if !index.is_empty() {
            for e in &entry.coords {
                if let Some((i, _)) = index.nearest_within(e.midpoint(), radius) {
                    sum = sum + values[i];
                }
            }
        }
        out.insert(*key, sum / S::of_usize(entry.coords.len()));
    }
    Ok(out)
}

/// Blends the scales' projected strengths per entry: weighted mean with the
/// weights normalized to unit sum. Contributions are summed in value order,
/// so the result is exactly invariant under permutations of the scale list,
/// and each blend is pinned into the envelope of its inputs (the exact blend
/// is a convex combination; only rounding could escape it).
pub fn fuse_strengths<S: Scalar>(
    scales: &ScaleSet<S>,
    fine_sb: &SparseBoundaries<S>,
    radius: f64,
) -> Result<BTreeMap<(u32, u32), S>> {
    let mut projections = Vec::with_capacity(scales.members.len());
    for (h, w) in &scales.members {
        projections.push((project(h, fine_sb, radius)?, *w));
    }
    let mut weights: Vec<S> = projections.iter().map(|&(_, w)| w).collect();
    weights.sort_by(|a, b| cmp(*a, *b));
    let total = weights.into_iter().fold(S::zero(), |a, b| a + b);

    let mut fused: BTreeMap<(u32, u32), S> = BTreeMap::new();
    for key in fine_sb.entries().map(|(k, _)| *k) {
        let mut terms = Vec::with_capacity(projections.len());
        let mut lo = S::one();
        let mut hi = S::zero();
        for (p, w) in &projections {
            let v = p[&key];
            if v < lo {
                lo = v;
            }
            if v > hi {
                hi = v;
            }
            terms.push(*w * v);
        }
        terms.sort_by(|a, b| cmp(*a, *b));
        let blended = terms.into_iter().fold(S::zero(), |a, b| a + b) / total;
        fused.insert(key, blended.max(lo).min(hi));
    }
    Ok(fused)
}

/// Rebuilds the hierarchy on the fine partition from the blended strengths.
pub fn fuse<S: Scalar>(
    scales: &ScaleSet<S>,
    fine_sb: &SparseBoundaries<S>,
    radius: f64,
) -> Result<Hierarchy<S>> {
    let fused = fuse_strengths(scales, fine_sb, radius)?;
    build_ucm(&fine_sb.with_strengths(|key, _| fused[key]))
}
