//! Ultrametric contour maps: a region hierarchy built by erasing boundaries
//! in order of increasing strength.
//!
//! Merging greedily from the weakest boundary and lifting each merge level to
//! at least the previous one yields levels that form an ultrametric: the
//! partition obtained by cutting at any threshold is a coarsening of every
//! cut below it.

use std::collections::BinaryHeap;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::grid::{BoundaryGrid, LabelMap};
use crate::partition::{sparse_from_labels, MergeOutcome, SparseBoundaries};
use crate::scalar::{cmp, Scalar};

/// One merge event: clusters `a` and `b` become cluster `parent` when the
/// threshold reaches `level`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge<S: Scalar = f64> {
    pub a: u32,
    pub b: u32,
    pub parent: u32,
    pub level: S,
}

/// Region hierarchy over a finest partition of R regions: leaves are
/// 0..R-1, parents number onward in merge order, levels never decrease.
#[derive(Debug, Clone, PartialEq)]
pub struct Hierarchy<S: Scalar = f64> {
    finest: LabelMap,
    merges: Vec<Merge<S>>,
}

impl<S: Scalar> Hierarchy<S> {
    /// Wraps externally supplied parts, checking the structural invariants.
    pub fn new(finest: LabelMap, merges: Vec<Merge<S>>) -> Result<Self> {
        let r = finest.region_count() as usize;
        if merges.len() != r - 1 {
            return Err(Error::Inconsistent(format!(
                "{} regions need {} merges, found {}",
                r,
                r - 1,
                merges.len()
            )));
        }
        let mut merged = vec![false; 2 * r - 1];
        let mut prev = S::zero();
        for (i, m) in merges.iter().enumerate() {
            let parent = r + i;
            if m.parent as usize != parent {
                return Err(Error::Inconsistent(format!(
                    "merge {i} creates node {}, expected {parent}",
                    m.parent
                )));
            }
            for child in [m.a, m.b] {
                if child as usize >= parent {
                    return Err(Error::Inconsistent(format!(
                        "merge {i} references node {child} before it exists"
                    )));
                }
                if merged[child as usize] {
                    return Err(Error::Inconsistent(format!("node {child} merged twice")));
                }
                merged[child as usize] = true;
            }
            if !(m.level >= S::zero() && m.level <= S::one()) {
                return Err(Error::Inconsistent(format!("level {} outside [0, 1]", m.level)));
            }
            if m.level < prev {
                return Err(Error::Inconsistent(format!(
                    "level {} after {prev} breaks monotonicity",
                    m.level
                )));
            }
            prev = m.level;
        }
        Ok(Hierarchy { finest, merges })
    }

    pub fn finest(&self) -> &LabelMap {
        &self.finest
    }

    pub fn merges(&self) -> &[Merge<S>] {
        &self.merges
    }

    pub fn height(&self) -> usize {
        self.finest.height()
    }

    pub fn width(&self) -> usize {
        self.finest.width()
    }

    pub fn region_count(&self) -> u32 {
        self.finest.region_count()
    }

    /// Distinct merge levels, ascending.
    pub fn levels(&self) -> Vec<S> {
        let mut out: Vec<S> = Vec::new();
        for m in &self.merges {
            if out.last().map_or(true, |&l| l != m.level) {
                out.push(m.level);
            }
        }
        out
    }

    pub fn level_count(&self) -> usize {
        self.levels().len()
    }

    /// Partition at a threshold: every merge with level at or below `t` is
    /// applied. Region ids follow row-major first-appearance order, so a
    /// threshold below every level returns the finest partition verbatim
    /// whenever the finest map itself is in canonical order.
    pub fn partition_at(&self, t: S) -> LabelMap {
        let r = self.finest.region_count() as usize;
        let mut uf = crate::geometry::UnionFind::new(2 * r - 1);
        for m in &self.merges {
            if m.level <= t {
                uf.union(m.a, m.parent);
                uf.union(m.b, m.parent);
            } else {
                break;
            }
        }
        let mut remap = vec![u32::MAX; 2 * r - 1];
        let mut next = 0u32;
        let mut labels = Vec::with_capacity(self.finest.labels().len());
        for &leaf in self.finest.labels() {
            let root = uf.find(leaf);
            if remap[root as usize] == u32::MAX {
                remap[root as usize] = next;
                next += 1;
            }
            labels.push(remap[root as usize]);
        }
        LabelMap::from_parts_unchecked(self.finest.height(), self.finest.width(), labels, next)
    }

    /// Dense ultrametric grid: every boundary edgel carries the level at
    /// which it disappears, junctions the maximum of their incident edgels.
    ///
    /// Built by replaying the merge list over the finest boundary table, so
    /// thresholding the grid and flood-filling reproduces `partition_at`.
    pub fn ucm_grid(&self) -> Result<BoundaryGrid<S>> {
        let mut grid = BoundaryGrid::zeros(self.finest.height(), self.finest.width())?;
        let mut sb: SparseBoundaries<S> = sparse_from_labels(&self.finest);
        let mut tracker = ClusterTracker::new(self.finest.region_count(), self.node_count());
        for m in &self.merges {
            let ia = tracker.current_of(m.a);
            let ib = tracker.current_of(m.b);
            let outcome = sb.erase_boundary(ia, ib)?;
            for e in &outcome.erased.coords {
                grid.set(e.row as usize, e.col as usize, m.level);
            }
            tracker.apply(&outcome, m.parent);
        }
        grid.refresh_junctions();
        Ok(grid)
    }

    pub fn node_count(&self) -> usize {
        2 * self.finest.region_count() as usize - 1
    }
}

/// Correspondence between hierarchy node ids and the current region ids of a
/// boundary table as merges are applied to it.
struct ClusterTracker {
    node_by_cur: Vec<u32>,
    cur_of_node: Vec<u32>,
}

impl ClusterTracker {
    fn new(leaves: u32, nodes: usize) -> Self {
        ClusterTracker {
            node_by_cur: (0..leaves).collect(),
            cur_of_node: (0..leaves).chain(std::iter::repeat(u32::MAX)).take(nodes).collect(),
        }
    }

    fn current_of(&self, node: u32) -> u32 {
        let cur = self.cur_of_node[node as usize];
        debug_assert_ne!(cur, u32::MAX, "node {node} is not live");
        cur
    }

    fn apply<S: Scalar>(&mut self, outcome: &MergeOutcome<S>, parent: u32) {
        self.node_by_cur[outcome.kept as usize] = parent;
        self.cur_of_node[parent as usize] = outcome.kept;
        if let Some(moved) = outcome.moved {
            let node = self.node_by_cur[moved as usize];
            self.node_by_cur[outcome.vacated as usize] = node;
            self.cur_of_node[node as usize] = outcome.vacated;
        }
        self.node_by_cur.pop();
    }
}

/// Heap key ordered by (strength, pair, generation) ascending.
struct HeapKey<S: Scalar> {
    strength: S,
    pair: (u32, u32),
    gen: u64,
}

impl<S: Scalar> PartialEq for HeapKey<S> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}

impl<S: Scalar> Eq for HeapKey<S> {}

impl<S: Scalar> PartialOrd for HeapKey<S> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl<S: Scalar> Ord for HeapKey<S> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        cmp(self.strength, other.strength)
            .then(self.pair.cmp(&other.pair))
            .then(self.gen.cmp(&other.gen))
    }
}

/// Builds the ultrametric hierarchy of a boundary table.
///
/// Repeatedly erases the entry of minimum strength (ties to the smallest pair
/// lexicographically); the merge level is the erased strength lifted to at
/// least the previous level. Recombined entries reenter the queue under a
/// fresh generation, and stale queued versions are skipped on pop, so the
/// build runs in O(B log B) for B boundary entries.
pub fn build_ucm<S: Scalar>(sb: &SparseBoundaries<S>) -> Result<Hierarchy<S>> {
    let mut sb = sb.clone();
    let finest = sb.finest().clone();
    let r = finest.region_count();
    let mut tracker = ClusterTracker::new(r, 2 * r as usize - 1);
    let mut merges = Vec::with_capacity(r as usize - 1);

    let mut heap: BinaryHeap<std::cmp::Reverse<HeapKey<S>>> = BinaryHeap::new();
    let mut gens: HashMap<(u32, u32), u64> = HashMap::new();
    let mut next_gen = 0u64;
    for (&pair, entry) in sb.entries() {
        gens.insert(pair, next_gen);
        heap.push(std::cmp::Reverse(HeapKey { strength: entry.strength, pair, gen: next_gen }));
        next_gen += 1;
    }

    let mut level = S::zero();
    let mut next_node = r;
    while (merges.len() as u32) < r - 1 {
        let key = match heap.pop() {
            Some(std::cmp::Reverse(k)) => k,
            None => {
                return Err(Error::Inconsistent(
                    "boundary table exhausted before the hierarchy completed".into(),
                ))
            }
        };
        if gens.get(&key.pair) != Some(&key.gen) {
            continue;
        }
        if key.strength > level {
            level = key.strength;
        }
        let (a, b) = key.pair;
        let parent = next_node;
        next_node += 1;
        merges.push(Merge { a: tracker.node_by_cur[a as usize], b: tracker.node_by_cur[b as usize], parent, level });
        let outcome = sb.erase_boundary(a, b)?;
        tracker.apply(&outcome, parent);
        for k in &outcome.removed {
            gens.remove(k);
        }
        for &(pair, strength) in &outcome.updated {
            gens.insert(pair, next_gen);
            heap.push(std::cmp::Reverse(HeapKey { strength, pair, gen: next_gen }));
            next_gen += 1;
        }
    }
    debug_assert_eq!(sb.region_count(), 1);
    debug_assert_eq!(sb.entry_count(), 0);
    Ok(Hierarchy { finest, merges })
}
