//! Oriented reweighting of watershed boundaries. Each boundary section is
//! chained into arcs, arcs are simplified to recover local tangents, and the
//! section strength is re-scored from the oriented contour response along
//! that tangent. This removes the artifact where a weak contour bleeds
//! strength onto a strong watershed line that happens to cross it.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::{chord_angle, quantize_orientation, simplify_polyline};
use crate::grid::{Edgel, FloatMap};
use crate::partition::SparseBoundaries;
use crate::scalar::Scalar;

/// Tangent bins over [0, pi) used across the pipeline.
pub const ORIENTATION_BINS: u32 = 8;

/// Default arc-simplification tolerance, in pixels.
pub const SIMPLIFY_EPSILON: f64 = 3.0;

/// Orders the edgels of one boundary section into maximal chains. Edgels are
/// adjacent when they share a junction; inside a single section a junction
/// never joins more than two of them, so every chain is a simple path (open
/// arcs listed first, starting from their lowest-index endpoint) or a cycle
/// (started at its lowest remaining index). Entries are indices into
/// `coords`.
pub fn chain_edgels(
    coords: &[Edgel],
    grid_height: usize,
    grid_width: usize,
) -> Result<Vec<Vec<usize>>> {
    let n = coords.len();
    let mut incidents: BTreeMap<(u32, u32), Vec<usize>> = BTreeMap::new();
    for (i, e) in coords.iter().enumerate() {
        for j in e.junctions(grid_height, grid_width).into_iter().flatten() {
            incidents.entry(j).or_default().push(i);
        }
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (j, ids) in &incidents {
        if ids.len() > 2 {
            return Err(Error::Inconsistent(format!(
                "junction ({}, {}) joins {} edgels of one section",
                j.0,
                j.1,
                ids.len()
            )));
        }
        if let [a, b] = ids[..] {
            adj[a].push(b);
            adj[b].push(a);
        }
    }

    let mut used = vec![false; n];
    let mut chains = Vec::new();
    // Open arcs first: walk from each endpoint of degree zero or one.
    for start in 0..n {
        if used[start] || adj[start].len() == 2 {
            continue;
        }
        used[start] = true;
        let mut chain = vec![start];
        let mut cur = start;
        while let Some(&next) = adj[cur].iter().find(|&&x| !used[x]) {
            used[next] = true;
            chain.push(next);
            cur = next;
        }
        chains.push(chain);
    }
    // Whatever remains sits on cycles.
    for start in 0..n {
        if used[start] {
            continue;
        }
        used[start] = true;
        let mut chain = vec![start];
        let mut cur = start;
        while let Some(next) = adj[cur].iter().copied().filter(|&x| !used[x]).min() {
            used[next] = true;
            chain.push(next);
            cur = next;
        }
        chains.push(chain);
    }
    Ok(chains)
}

/// Tangents of one section's edgels, aligned with its coordinate order.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcTangents {
    /// Tangent bin of each edgel.
    pub bins: Vec<u32>,
    /// Tangent angle of each edgel, in [0, pi).
    pub angles: Vec<f64>,
}

/// Per-section tangent assignments for a whole boundary table.
#[derive(Debug, Clone)]
pub struct ArcGeometry {
    sections: BTreeMap<(u32, u32), ArcTangents>,
    bins_per_half_turn: u32,
}

impl ArcGeometry {
    pub fn section(&self, a: u32, b: u32) -> Option<&ArcTangents> {
        self.sections.get(&if a < b { (a, b) } else { (b, a) })
    }

    pub fn sections(&self) -> impl Iterator<Item = (&(u32, u32), &ArcTangents)> {
        self.sections.iter()
    }

    /// Number of tangent bins the angles were quantized into.
    pub fn bins_per_half_turn(&self) -> u32 {
        self.bins_per_half_turn
    }
}

/// Geometric endpoints of an edgel in grid coordinates: the two corner
/// points its segment runs between. Border edgels get points half a pixel
/// outside the image; those are unique per edgel, so they never alias.
fn endpoints(e: Edgel) -> [(i64, i64); 2] {
    let (r, c) = (e.row as i64, e.col as i64);
    if r % 2 == 1 {
        [(r, c - 1), (r, c + 1)]
    } else {
        [(r - 1, c), (r + 1, c)]
    }
}

fn shared_endpoint(a: Edgel, b: Edgel) -> Option<(i64, i64)> {
    let eb = endpoints(b);
    endpoints(a).into_iter().find(|p| eb.contains(p))
}

fn to_pixel(p: (i64, i64)) -> (f64, f64) {
    (p.0 as f64 / 2.0, p.1 as f64 / 2.0)
}

/// Estimates a tangent for every edgel of one section. Each chain becomes a
/// polyline through its corner points (the junctions between consecutive
/// edgels plus the free ends), which is simplified with tolerance `epsilon`
/// (in pixels); every edgel inherits the chord direction of the simplified
/// span covering its segment. At epsilon 0 each edgel keeps its own axis;
/// corner points keep right angles sharp instead of smearing them into
/// diagonal steps.
pub fn section_tangents(
    coords: &[Edgel],
    grid_height: usize,
    grid_width: usize,
    epsilon: f64,
    k: u32,
) -> Result<ArcTangents> {
    let chains = chain_edgels(coords, grid_height, grid_width)?;
    let mut bins = vec![0u32; coords.len()];
    let mut angles = vec![0.0f64; coords.len()];
    let mut put = |idx: usize, theta: f64| {
        angles[idx] = theta;
        bins[idx] = quantize_orientation(theta, k);
    };
    for chain in &chains {
        let n = chain.len();
        let e = |i: usize| coords[chain[i]];
        let mut verts: Vec<(f64, f64)> = Vec::with_capacity(n + 1);
        if n == 1 {
            let [a, b] = endpoints(e(0));
            verts.push(to_pixel(a));
            verts.push(to_pixel(b));
        } else {
            let hinge = |i: usize| {
                shared_endpoint(e(i), e(i + 1)).ok_or_else(|| {
                    Error::Inconsistent("chain-adjacent edgels share no corner".into())
                })
            };
            // Chains of three or more whose ends touch are cycles; open
            // chains start and finish at their free corners.
            let closing = if n >= 3 { shared_endpoint(e(n - 1), e(0)) } else { None };
            match closing {
                Some(c) => verts.push(to_pixel(c)),
                None => {
                    let first = hinge(0)?;
                    let [a, b] = endpoints(e(0));
                    verts.push(to_pixel(if a == first { b } else { a }));
                }
            }
            for i in 1..n {
                verts.push(to_pixel(hinge(i - 1)?));
            }
            match closing {
                Some(_) => verts.push(verts[0]),
                None => {
                    let last = hinge(n - 2)?;
                    let [a, b] = endpoints(e(n - 1));
                    verts.push(to_pixel(if a == last { b } else { a }));
                }
            }
        }
        let kept = simplify_polyline(&verts, epsilon);
        for span in kept.windows(2) {
            let theta = chord_angle(verts[span[0]], verts[span[1]]);
            for seg in span[0]..span[1] {
                put(chain[seg], theta);
            }
        }
    }
    Ok(ArcTangents { bins, angles })
}

/// Runs [`section_tangents`] over every entry of a boundary table.
pub fn arc_orientations<S: Scalar>(
    sb: &SparseBoundaries<S>,
    epsilon: f64,
    k: u32,
) -> Result<ArcGeometry> {
    if epsilon < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "simplification tolerance must be nonnegative, got {epsilon}"
        )));
    }
    if k < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 tangent bins, got {k}")));
    }
    let gh = 2 * sb.height() - 1;
    let gw = 2 * sb.width() - 1;
    let mut sections = BTreeMap::new();
    for (key, entry) in sb.entries() {
        sections.insert(*key, section_tangents(&entry.coords, gh, gw, epsilon, k)?);
    }
    Ok(ArcGeometry { sections, bins_per_half_turn: k })
}

/// Oriented contour responses: channel `b` holds the response to boundaries
/// whose tangent falls in bin `b` of [0, pi), with bin centers at b*pi/bins.
/// External producers must follow the same tangent convention.
#[derive(Debug, Clone)]
pub struct OrientedStack<S: Scalar = f64> {
    map: FloatMap<S>,
}

impl<S: Scalar> OrientedStack<S> {
    pub fn new(map: FloatMap<S>) -> Result<Self> {
        if map.channels() < 2 {
            return Err(Error::InvalidArgument(format!(
                "an oriented stack needs at least 2 channels, got {}",
                map.channels()
            )));
        }
        Ok(OrientedStack { map })
    }

    pub fn height(&self) -> usize {
        self.map.height()
    }

    pub fn width(&self) -> usize {
        self.map.width()
    }

    pub fn orientations(&self) -> u32 {
        self.map.channels() as u32
    }

    #[inline]
    pub fn response(&self, bin: u32, row: usize, col: usize) -> S {
        self.map.get(bin as usize, row, col)
    }

    pub fn map(&self) -> &FloatMap<S> {
        &self.map
    }

    pub fn into_map(self) -> FloatMap<S> {
        self.map
    }
}

/// Mean oriented response under one section: each edgel reads the stack
/// channel of its tangent bin and averages its two flanking pixels. Both the
/// sparse path and the dense reference score sections through this exact
/// expression, which is what keeps their outputs bit-identical.
pub(crate) fn flank_mean<S: Scalar>(coords: &[Edgel], bins: &[u32], stack: &OrientedStack<S>) -> S {
    debug_assert!(!coords.is_empty());
    let mut sum = S::zero();
    for (i, e) in coords.iter().enumerate() {
        let (p, q) = e.pixels();
        let bin = bins[i];
        sum = sum
            + (stack.response(bin, p.0, p.1) + stack.response(bin, q.0, q.1)) / S::of_f64(2.0);
    }
    sum / S::of_usize(coords.len())
}

/// Replaces every section strength with the mean oriented response under its
/// edgels, each edgel reading the channel that matches its local tangent and
/// averaging its two flanking pixels. Regions, adjacency, and coordinates
/// pass through untouched; only strengths change.
pub fn owt_reweight<S: Scalar>(
    sb: &SparseBoundaries<S>,
    geom: &ArcGeometry,
    stack: &OrientedStack<S>,
) -> Result<SparseBoundaries<S>> {
    if stack.height() != sb.height() || stack.width() != sb.width() {
        return Err(Error::DimensionMismatch(format!(
            "oriented stack is {}x{}, boundaries cover {}x{}",
            stack.height(),
            stack.width(),
            sb.height(),
            sb.width()
        )));
    }
    if geom.bins_per_half_turn != stack.orientations() {
        return Err(Error::DimensionMismatch(format!(
            "tangents use {} bins, stack has {} channels",
            geom.bins_per_half_turn,
            stack.orientations()
        )));
    }
    let mut rescored: BTreeMap<(u32, u32), S> = BTreeMap::new();
    for (key, entry) in sb.entries() {
        let tangents = geom.sections.get(key).ok_or_else(|| {
            Error::Inconsistent(format!("no tangents for section ({}, {})", key.0, key.1))
        })?;
        if tangents.bins.len() != entry.coords.len() {
            return Err(Error::Inconsistent(format!(
                "section ({}, {}) has {} edgels but {} tangents",
                key.0,
                key.1,
                entry.coords.len(),
                tangents.bins.len()
            )));
        }
        rescored.insert(*key, flank_mean(&entry.coords, &tangents.bins, stack));
    }
    Ok(sb.with_strengths(|key, _| rescored[key]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::LabelMap;
    use crate::partition::sparse_from_labels;
    use std::f64::consts::PI;

    fn map(h: usize, w: usize, labels: &[u32]) -> LabelMap {
        LabelMap::new(h, w, labels.to_vec()).unwrap()
    }

    fn sparse(h: usize, w: usize, labels: &[u32]) -> SparseBoundaries {
        sparse_from_labels(&map(h, w, labels))
    }

    fn stack_of(h: usize, w: usize, k: usize, data: Vec<f64>) -> OrientedStack {
        OrientedStack::new(FloatMap::from_vec(h, w, k, data).unwrap()).unwrap()
    }

    #[test]
    fn straight_boundary_chains_in_order() {
        let sb = sparse(4, 2, &[0, 1, 0, 1, 0, 1, 0, 1]);
        let entry = sb.entry(0, 1).unwrap();
        assert_eq!(entry.coords.len(), 4);
        let chains = chain_edgels(&entry.coords, 7, 3).unwrap();
        assert_eq!(chains, vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn horizontal_arc_lands_in_horizontal_bin() {
        let mut labels = vec![0u32; 10];
        labels.extend(vec![1u32; 10]);
        let sb = sparse(2, 10, &labels);
        assert_eq!(sb.entry(0, 1).unwrap().coords.len(), 10);
        let geom = arc_orientations(&sb, SIMPLIFY_EPSILON, 8).unwrap();
        assert_eq!(geom.section(0, 1).unwrap().bins, vec![0; 10]);
    }

    #[test]
    fn staircase_lands_in_diagonal_bin() {
        // Lower-triangular region: the boundary midpoints are collinear with
        // slope one, so any tolerance collapses them onto the diagonal chord.
        let mut labels = vec![0u32; 16];
        for r in 0..4 {
            for c in 0..4 {
                if c < r {
                    labels[r * 4 + c] = 1;
                }
            }
        }
        let sb = sparse(4, 4, &labels);
        let entry = sb.entry(0, 1).unwrap();
        assert_eq!(entry.coords.len(), 6);
        let geom = arc_orientations(&sb, 1.0, 8).unwrap();
        assert_eq!(geom.section(0, 1).unwrap().bins, vec![2; 6]);
        for &a in &geom.section(0, 1).unwrap().angles {
            assert!((a - PI / 4.0).abs() < 1e-12);
        }

        // Below the zigzag amplitude (sqrt(2)/4 of a pixel per corner) the
        // staircase stays a staircase.
        let geom = arc_orientations(&sb, 0.3, 8).unwrap();
        for &b in &geom.section(0, 1).unwrap().bins {
            assert!(b == 0 || b == 4);
        }
    }

    #[test]
    fn corner_boundary_is_one_chain_with_turn() {
        // 0-region square in the corner; its boundary walks around the bend.
        let sb = sparse(3, 3, &[0, 0, 1, 0, 0, 1, 1, 1, 1]);
        let entry = sb.entry(0, 1).unwrap();
        assert_eq!(
            entry.coords,
            vec![
                Edgel { row: 0, col: 3 },
                Edgel { row: 2, col: 3 },
                Edgel { row: 3, col: 0 },
                Edgel { row: 3, col: 2 },
            ]
        );
        let chains = chain_edgels(&entry.coords, 5, 5).unwrap();
        assert_eq!(chains, vec![vec![0, 1, 3, 2]]);

        // Tight tolerance keeps the corner sharp: a vertical run meeting a
        // horizontal run, no diagonal smear.
        let geom = arc_orientations(&sb, 0.25, 8).unwrap();
        assert_eq!(geom.section(0, 1).unwrap().bins, vec![4, 4, 0, 0]);

        // Loose tolerance collapses everything onto the single chord.
        let geom = arc_orientations(&sb, SIMPLIFY_EPSILON, 8).unwrap();
        assert_eq!(geom.section(0, 1).unwrap().bins, vec![6, 6, 6, 6]);
    }

    #[test]
    fn zero_tolerance_keeps_every_segment_axis() {
        // At tolerance 0 the simplified polygon keeps all corner points, so
        // each edgel's span is exactly its own axis-aligned segment.
        for labels in [
            vec![0u32, 0, 1, 0, 0, 1, 1, 1, 1],
            vec![0, 0, 0, 0, 1, 0, 0, 0, 0],
            vec![0, 1, 2, 0, 1, 2, 3, 3, 2],
        ] {
            let sb = sparse(3, 3, &labels);
            let geom = arc_orientations(&sb, 0.0, 8).unwrap();
            for (key, entry) in sb.entries() {
                let tangents = geom.section(key.0, key.1).unwrap();
                for (i, e) in entry.coords.iter().enumerate() {
                    let expect = if e.row % 2 == 1 { 0.0 } else { PI / 2.0 };
                    assert_eq!(tangents.angles[i], expect, "entry {key:?} edgel {i}");
                }
            }
        }
    }

    #[test]
    fn lone_edgel_keeps_its_axis() {
        let sb = sparse(1, 2, &[0, 1]);
        let geom = arc_orientations(&sb, 3.0, 8).unwrap();
        assert_eq!(geom.section(0, 1).unwrap().bins, vec![4]);
        assert!((geom.section(0, 1).unwrap().angles[0] - PI / 2.0).abs() < 1e-12);

        let sb = sparse(2, 1, &[0, 1]);
        let geom = arc_orientations(&sb, 3.0, 8).unwrap();
        assert_eq!(geom.section(0, 1).unwrap().bins, vec![0]);
        assert_eq!(geom.section(0, 1).unwrap().angles[0], 0.0);
    }

    #[test]
    fn constant_stack_gives_constant_strengths() {
        let sb = sparse(3, 3, &[0, 1, 2, 0, 1, 2, 0, 1, 2]);
        let geom = arc_orientations(&sb, SIMPLIFY_EPSILON, 8).unwrap();
        let stack = stack_of(3, 3, 8, vec![0.35; 8 * 9]);
        let out = owt_reweight(&sb, &geom, &stack).unwrap();
        for (_, entry) in out.entries() {
            assert!((entry.strength - 0.35).abs() < 1e-12);
        }
    }

    #[test]
    fn reweight_reads_matching_channel() {
        let sb = sparse(4, 2, &[0, 1, 0, 1, 0, 1, 0, 1]);
        let mut data = vec![0.0; 8 * 8];
        // Channel 4 is the vertical-tangent channel; the split is vertical.
        for v in &mut data[4 * 8..5 * 8] {
            *v = 1.0;
        }
        let stack = stack_of(4, 2, 8, data);
        let geom = arc_orientations(&sb, SIMPLIFY_EPSILON, 8).unwrap();
        let out = owt_reweight(&sb, &geom, &stack).unwrap();
        assert_eq!(out.entry(0, 1).unwrap().strength, 1.0);
        assert_eq!(out.entry(0, 1).unwrap().coords, sb.entry(0, 1).unwrap().coords);
        assert_eq!(out.finest(), sb.finest());

        // The orthogonal arc reads a zero channel.
        let mut labels = vec![0u32; 4];
        labels.extend(vec![1u32; 4]);
        let horiz = sparse(2, 4, &labels);
        let mut data = vec![0.0; 8 * 8];
        for v in &mut data[4 * 8..5 * 8] {
            *v = 1.0;
        }
        let stack = stack_of(2, 4, 8, data);
        let geom = arc_orientations(&horiz, SIMPLIFY_EPSILON, 8).unwrap();
        let out = owt_reweight(&horiz, &geom, &stack).unwrap();
        assert_eq!(out.entry(0, 1).unwrap().strength, 0.0);
    }

    #[test]
    fn reweight_averages_flanking_pixels() {
        let sb = sparse(1, 3, &[0, 1, 2]);
        // Lone vertical edgels read channel 4 of an 8-channel stack.
        let mut data = vec![0.0; 8 * 3];
        data[4 * 3..5 * 3].copy_from_slice(&[0.2, 0.4, 0.8]);
        let stack = stack_of(1, 3, 8, data);
        let geom = arc_orientations(&sb, SIMPLIFY_EPSILON, 8).unwrap();
        let out = owt_reweight(&sb, &geom, &stack).unwrap();
        assert!((out.entry(0, 1).unwrap().strength - 0.3).abs() < 1e-12);
        assert!((out.entry(1, 2).unwrap().strength - 0.6).abs() < 1e-12);
    }

    #[test]
    fn reweight_rejects_mismatches() {
        let sb = sparse(1, 3, &[0, 1, 2]);
        let geom = arc_orientations(&sb, 3.0, 8).unwrap();
        let stack = stack_of(2, 2, 8, vec![0.0; 8 * 4]);
        assert!(owt_reweight(&sb, &geom, &stack).is_err());
        let stack = stack_of(1, 3, 4, vec![0.0; 4 * 3]);
        assert!(owt_reweight(&sb, &geom, &stack).is_err());

        // Geometry from a coarser table misses the (1, 2) section.
        let coarse = arc_orientations(&sparse(1, 3, &[0, 0, 1]), 3.0, 8).unwrap();
        let stack = stack_of(1, 3, 8, vec![0.0; 8 * 3]);
        assert!(owt_reweight(&sb, &coarse, &stack).is_err());

        // Same pair key, different edgel count.
        let three = sparse(2, 3, &[0, 0, 1, 0, 1, 1]);
        let two = sparse(2, 3, &[0, 1, 1, 1, 1, 1]);
        assert_eq!(three.entry(0, 1).unwrap().coords.len(), 3);
        assert_eq!(two.entry(0, 1).unwrap().coords.len(), 2);
        let geom = arc_orientations(&three, 3.0, 8).unwrap();
        let stack = stack_of(2, 3, 8, vec![0.0; 8 * 6]);
        assert!(owt_reweight(&two, &geom, &stack).is_err());
    }

    #[test]
    fn single_channel_stack_is_rejected() {
        assert!(OrientedStack::new(FloatMap::<f64>::zeros(2, 2, 1).unwrap()).is_err());
    }

    #[test]
    fn closed_ring_chains_as_cycle() {
        // Inner pixel surrounded by the outer region: the four edgels around
        // it form one cycle.
        let sb = sparse(3, 3, &[0, 0, 0, 0, 1, 0, 0, 0, 0]);
        let entry = sb.entry(0, 1).unwrap();
        assert_eq!(entry.coords.len(), 4);
        let chains = chain_edgels(&entry.coords, 5, 5).unwrap();
        assert_eq!(chains.len(), 1);
        assert_eq!(chains[0].len(), 4);
        assert_eq!(chains[0][0], 0);
        let geom = arc_orientations(&sb, 0.1, 8).unwrap();
        assert_eq!(geom.section(0, 1).unwrap().bins.len(), 4);
    }
}
