//! Sparse boundary representation of an image partition.
//!
//! Boundaries live in a look-up table keyed by unordered region pair. Each
//! entry carries one strength and the list of boundary-grid coordinates the
//! shared boundary occupies, so erasing or reweighting one boundary touches
//! only the entries incident to the regions involved instead of sweeping the
//! full grid.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::error::{Error, Result};
use crate::geometry::UnionFind;
use crate::grid::{BoundaryGrid, Edgel, LabelMap};
use crate::scalar::Scalar;

/// Strength and occupied coordinates of the boundary between one region pair.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryEntry<S: Scalar = f64> {
    pub strength: S,
    pub coords: Vec<Edgel>,
}

/// Length-weighted mean used whenever two boundary entries recombine into
/// one. Every code path (sparse and the dense reference) funnels through this
/// exact expression so recombined strengths agree bit for bit.
pub(crate) fn length_weighted<S: Scalar>(sa: S, la: usize, sb: S, lb: usize) -> S {
    (sa * S::of_usize(la) + sb * S::of_usize(lb)) / S::of_usize(la + lb)
}

/// Report of one `erase_boundary` call.
#[derive(Debug, Clone)]
pub struct MergeOutcome<S: Scalar = f64> {
    /// Current id the merged region keeps (the smaller of the erased pair).
    pub kept: u32,
    /// Id slot vacated by the merge.
    pub vacated: u32,
    /// Previous largest id, when it was remapped into the vacated slot.
    pub moved: Option<u32>,
    /// The erased entry: its edgels no longer separate anything.
    pub erased: BoundaryEntry<S>,
    /// Net effect on touched keys that still exist: current strengths of
    /// entries created, recombined, or rekeyed.
    pub updated: Vec<((u32, u32), S)>,
    /// Net effect on touched keys that no longer exist, the erased pair
    /// included (unless a rekey reused it).
    pub removed: Vec<(u32, u32)>,
    /// Number of table entries read or written, for locality accounting.
    pub touched_entries: usize,
}

/// Partition boundaries as a sparse look-up table.
///
/// The finest label map the table was built from is kept alongside a
/// union-find of merges, so the current partition can be materialized at any
/// time without maintaining per-pixel labels across merges.
#[derive(Debug, Clone)]
pub struct SparseBoundaries<S: Scalar = f64> {
    finest: LabelMap,
    uf: UnionFind,
    /// union-find root -> current region id (valid at roots only).
    root_current: Vec<u32>,
    /// current region id -> union-find root.
    current_root: Vec<u32>,
    /// current region id -> adjacent current ids.
    adj: Vec<BTreeSet<u32>>,
    entries: BTreeMap<(u32, u32), BoundaryEntry<S>>,
}

fn ordered(a: u32, b: u32) -> (u32, u32) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// All edgels separating differently labeled pixels, row-major over the
/// boundary grid, with the labels on either side.
pub(crate) fn separating_edgels(labels: &LabelMap) -> Vec<(Edgel, u32, u32)> {
    let (h, w) = (labels.height(), labels.width());
    let mut out = Vec::new();
    for r in 0..2 * h - 1 {
        let start = 1 - r % 2;
        let mut c = start;
        while c < 2 * w - 1 {
            let e = Edgel::new(r as u32, c as u32);
            let ((r1, c1), (r2, c2)) = e.pixels();
            let (la, lb) = (labels.label(r1, c1), labels.label(r2, c2));
            if la != lb {
                out.push((e, la, lb));
            }
            c += 2;
        }
    }
    out
}

/// Flood-fills pixels under 4-connectivity, crossing a pixel pair only when
/// `blocked` rejects its separating edgel. Region ids follow row-major
/// first-appearance order.
pub(crate) fn flood_partition(
    height: usize,
    width: usize,
    blocked: impl Fn(Edgel) -> bool,
) -> LabelMap {
    let mut labels = vec![u32::MAX; height * width];
    let mut next = 0u32;
    let mut stack = Vec::new();
    for start in 0..labels.len() {
        if labels[start] != u32::MAX {
            continue;
        }
        labels[start] = next;
        stack.push(start);
        while let Some(p) = stack.pop() {
            let (r, c) = (p / width, p % width);
            let step = |q: usize, e: Edgel, labels: &mut Vec<u32>, stack: &mut Vec<usize>| {
                if labels[q] == u32::MAX && !blocked(e) {
                    labels[q] = next;
                    stack.push(q);
                }
            };
            if r > 0 {
                step(p - width, Edgel::new(2 * r as u32 - 1, 2 * c as u32), &mut labels, &mut stack);
            }
            if r + 1 < height {
                step(p + width, Edgel::new(2 * r as u32 + 1, 2 * c as u32), &mut labels, &mut stack);
            }
            if c > 0 {
                step(p - 1, Edgel::new(2 * r as u32, 2 * c as u32 - 1), &mut labels, &mut stack);
            }
            if c + 1 < width {
                step(p + 1, Edgel::new(2 * r as u32, 2 * c as u32 + 1), &mut labels, &mut stack);
            }
        }
        next += 1;
    }
    LabelMap::from_parts_unchecked(height, width, labels, next)
}

impl<S: Scalar> SparseBoundaries<S> {
    fn from_label_map_and_entries(
        finest: LabelMap,
        entries: BTreeMap<(u32, u32), BoundaryEntry<S>>,
    ) -> Self {
        let n = finest.region_count() as usize;
        let mut adj = vec![BTreeSet::new(); n];
        for &(a, b) in entries.keys() {
            adj[a as usize].insert(b);
            adj[b as usize].insert(a);
        }
        SparseBoundaries {
            finest,
            uf: UnionFind::new(n),
            root_current: (0..n as u32).collect(),
            current_root: (0..n as u32).collect(),
            adj,
            entries,
        }
    }

    pub fn height(&self) -> usize {
        self.finest.height()
    }

    pub fn width(&self) -> usize {
        self.finest.width()
    }

    pub fn region_count(&self) -> u32 {
        self.current_root.len() as u32
    }

    /// The partition the table was built from, before any merges.
    pub fn finest(&self) -> &LabelMap {
        &self.finest
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(u32, u32), &BoundaryEntry<S>)> {
        self.entries.iter()
    }

    pub fn entry_count(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, a: u32, b: u32) -> Option<&BoundaryEntry<S>> {
        self.entries.get(&ordered(a, b))
    }

    pub fn neighbors(&self, region: u32) -> impl Iterator<Item = u32> + '_ {
        self.adj[region as usize].iter().copied()
    }

    /// Current region id of a pixel, after all merges so far.
    pub fn current_label(&self, row: usize, col: usize) -> u32 {
        let root = self.uf.find_ro(self.finest.label(row, col));
        self.root_current[root as usize]
    }

    /// Materializes the current partition.
    pub fn to_label_map(&self) -> LabelMap {
        let mut labels = Vec::with_capacity(self.finest.labels().len());
        let mut cache = vec![u32::MAX; self.finest.region_count() as usize];
        for &l in self.finest.labels() {
            if cache[l as usize] == u32::MAX {
                cache[l as usize] = self.root_current[self.uf.find_ro(l) as usize];
            }
            labels.push(cache[l as usize]);
        }
        LabelMap::from_parts_unchecked(
            self.finest.height(),
            self.finest.width(),
            labels,
            self.region_count(),
        )
    }

    /// Clone with every entry's strength replaced; coordinates unchanged.
    pub fn with_strengths(&self, mut f: impl FnMut(&(u32, u32), &BoundaryEntry<S>) -> S) -> Self {
        let mut out = self.clone();
        for (key, entry) in out.entries.iter_mut() {
            entry.strength = f(key, &self.entries[key]);
        }
        out
    }

    pub fn set_strength(&mut self, a: u32, b: u32, strength: S) -> Result<()> {
        let key = ordered(a, b);
        match self.entries.get_mut(&key) {
            Some(e) => {
                e.strength = strength;
                Ok(())
            }
            None => Err(Error::UnknownPair(key.0, key.1)),
        }
    }

    /// Merges the two regions separated by `(a, b)`, dropping that boundary.
    ///
    /// Entries `(a, x)` and `(b, x)` sharing a third region concatenate, with
    /// strengths recombined as the length-weighted mean. The merged region
    /// keeps id `min(a, b)`; ids stay contiguous by remapping the largest id
    /// into the vacated slot. Work touches only entries incident to `a`, `b`,
    /// or the remapped largest id, never the pixel grid.
    pub fn erase_boundary(&mut self, a: u32, b: u32) -> Result<MergeOutcome<S>> {
        let (a, b) = ordered(a, b);
        let erased = self.entries.remove(&(a, b)).ok_or(Error::UnknownPair(a, b))?;
        let mut touched = 1usize;
        let mut touched_keys = BTreeSet::from([(a, b)]);

        let moved_neighbors: Vec<u32> =
            self.adj[b as usize].iter().copied().filter(|&x| x != a).collect();
        for x in moved_neighbors {
            let from = self.entries.remove(&ordered(b, x)).expect("adjacency mirrors entries");
            touched_keys.insert(ordered(b, x));
            touched += 1;
            let key = ordered(a, x);
            touched_keys.insert(key);
            match self.entries.get_mut(&key) {
                Some(into) => {
                    into.strength = length_weighted(
                        into.strength,
                        into.coords.len(),
                        from.strength,
                        from.coords.len(),
                    );
                    into.coords.extend(from.coords);
                    touched += 1;
                }
                None => {
                    self.entries.insert(key, from);
                }
            }
            self.adj[x as usize].remove(&b);
            self.adj[x as usize].insert(a);
            self.adj[a as usize].insert(x);
        }
        self.adj[a as usize].remove(&b);
        self.adj[b as usize].clear();

        let root = self.uf.union(self.current_root[a as usize], self.current_root[b as usize]);
        self.root_current[root as usize] = a;
        self.current_root[a as usize] = root;

        let last = self.region_count() - 1;
        let moved = if b != last {
            let last_neighbors: Vec<u32> = self.adj[last as usize].iter().copied().collect();
            for x in &last_neighbors {
                let entry = self.entries.remove(&ordered(last, *x)).expect("adjacency mirrors entries");
                touched_keys.insert(ordered(last, *x));
                touched += 1;
                touched_keys.insert(ordered(b, *x));
                self.entries.insert(ordered(b, *x), entry);
                self.adj[*x as usize].remove(&last);
                self.adj[*x as usize].insert(b);
            }
            self.adj[b as usize] = std::mem::take(&mut self.adj[last as usize]);
            let last_root = self.current_root[last as usize];
            self.root_current[last_root as usize] = b;
            self.current_root[b as usize] = last_root;
            Some(last)
        } else {
            None
        };
        self.current_root.pop();
        self.adj.pop();

        let mut updated = Vec::new();
        let mut removed = Vec::new();
        for key in touched_keys {
            match self.entries.get(&key) {
                Some(entry) => updated.push((key, entry.strength)),
                None => removed.push(key),
            }
        }
        Ok(MergeOutcome { kept: a, vacated: b, moved, erased, updated, removed, touched_entries: touched })
    }

    /// Clone whose region ids follow row-major first-appearance order of the
    /// current partition. This is the naming convention of the on-disk form.
    pub fn canonicalized(&self) -> SparseBoundaries<S> {
        let current = self.to_label_map();
        let mut remap = vec![u32::MAX; current.region_count() as usize];
        let mut next = 0u32;
        for &l in current.labels() {
            if remap[l as usize] == u32::MAX {
                remap[l as usize] = next;
                next += 1;
            }
        }
        let canonical = current.canonicalize();
        let mut entries = BTreeMap::new();
        for (&(a, b), entry) in &self.entries {
            let key = ordered(remap[a as usize], remap[b as usize]);
            entries.insert(key, entry.clone());
        }
        SparseBoundaries::from_label_map_and_entries(canonical, entries)
    }

    /// Rebuilds a table from externally supplied entries (the on-disk form).
    /// Region ids must follow the canonical row-major first-appearance order
    /// that `canonicalized` produces.
    pub fn from_entries(
        height: usize,
        width: usize,
        region_count: u32,
        entries: BTreeMap<(u32, u32), BoundaryEntry<S>>,
    ) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::EmptyInput("partition dimensions must be nonzero"));
        }
        let (gh, gw) = (2 * height - 1, 2 * width - 1);
        let mut seen = HashSet::new();
        for (&(a, b), entry) in &entries {
            if a >= b {
                return Err(Error::Inconsistent(format!("entry key ({a}, {b}) is not ordered")));
            }
            if entry.coords.is_empty() {
                return Err(Error::Inconsistent(format!("entry ({a}, {b}) has no coordinates")));
            }
            if !(entry.strength >= S::zero() && entry.strength <= S::one()) {
                return Err(Error::Inconsistent(format!(
                    "entry ({a}, {b}) strength {} outside [0, 1]",
                    entry.strength
                )));
            }
            for e in &entry.coords {
                if e.row as usize >= gh || e.col as usize >= gw {
                    return Err(Error::Inconsistent(format!(
                        "edgel ({}, {}) outside the {gh} x {gw} boundary grid",
                        e.row, e.col
                    )));
                }
                if (e.row % 2 == 1) == (e.col % 2 == 1) {
                    return Err(Error::Inconsistent(format!(
                        "coordinate ({}, {}) is not an edgel position",
                        e.row, e.col
                    )));
                }
                if !seen.insert(*e) {
                    return Err(Error::Inconsistent(format!(
                        "edgel ({}, {}) listed twice",
                        e.row, e.col
                    )));
                }
            }
        }
        let finest = flood_partition(height, width, |e| seen.contains(&e));
        if finest.region_count() != region_count {
            return Err(Error::Inconsistent(format!(
                "coordinates imply {} regions, header says {region_count}",
                finest.region_count()
            )));
        }
        let mut expected = 0usize;
        for (e, la, lb) in separating_edgels(&finest) {
            expected += 1;
            let key = ordered(la, lb);
            if !entries.contains_key(&key) {
                return Err(Error::Inconsistent(format!(
                    "regions {} and {} touch but have no entry",
                    key.0, key.1
                )));
            }
            if !seen.contains(&e) {
                return Err(Error::Inconsistent(format!(
                    "edgel ({}, {}) separates regions but is listed nowhere",
                    e.row, e.col
                )));
            }
        }
        if expected != seen.len() {
            return Err(Error::Inconsistent(format!(
                "{} edgels listed but {expected} separate regions",
                seen.len()
            )));
        }
        for (&(a, b), entry) in &entries {
            for e in &entry.coords {
                let ((r1, c1), (r2, c2)) = e.pixels();
                let pair = ordered(finest.label(r1, c1), finest.label(r2, c2));
                if pair != (a, b) {
                    return Err(Error::Inconsistent(format!(
                        "edgel ({}, {}) separates pair ({}, {}), not ({a}, {b}); \
                         region ids must follow row-major first-appearance order",
                        e.row, e.col, pair.0, pair.1
                    )));
                }
            }
        }
        Ok(SparseBoundaries::from_label_map_and_entries(finest, entries))
    }
}

/// Builds the boundary table of a partition. Every adjacent pair gets one
/// entry of strength zero holding the edgels it occupies in row-major order.
pub fn sparse_from_labels<S: Scalar>(labels: &LabelMap) -> SparseBoundaries<S> {
    let mut entries: BTreeMap<(u32, u32), BoundaryEntry<S>> = BTreeMap::new();
    for (e, la, lb) in separating_edgels(labels) {
        entries
            .entry(ordered(la, lb))
            .or_insert_with(|| BoundaryEntry { strength: S::zero(), coords: Vec::new() })
            .coords
            .push(e);
    }
    SparseBoundaries::from_label_map_and_entries(labels.clone(), entries)
}

/// Writes the table onto a dense boundary grid: each listed edgel carries its
/// entry's strength, junctions carry the maximum of their incident edgels,
/// everything else stays zero.
pub fn dense_from_sparse<S: Scalar>(sb: &SparseBoundaries<S>) -> Result<BoundaryGrid<S>> {
    let mut grid = BoundaryGrid::zeros(sb.height(), sb.width())?;
    let mut written = HashSet::new();
    for (&(a, b), entry) in sb.entries() {
        for e in &entry.coords {
            if !written.insert(*e) {
                return Err(Error::Inconsistent(format!(
                    "edgel ({}, {}) listed twice across entries of ({a}, {b})",
                    e.row, e.col
                )));
            }
            grid.set(e.row as usize, e.col as usize, entry.strength);
        }
    }
    grid.refresh_junctions();
    Ok(grid)
}

/// Reads a dense boundary grid back into sparse form. Edgels with positive
/// value block connectivity; junction values are ignored. Per pair, the
/// strength is the mean of its edgel values. Active edgels whose two sides
/// flood together (dangling pieces) are dropped. Region ids follow row-major
/// first-appearance order.
pub fn sparse_from_dense<S: Scalar>(grid: &BoundaryGrid<S>) -> SparseBoundaries<S> {
    let labels =
        flood_partition(grid.image_height(), grid.image_width(), |e| {
            grid.get(e.row as usize, e.col as usize) > S::zero()
        });
    let mut entries: BTreeMap<(u32, u32), (S, S, bool, Vec<Edgel>)> = BTreeMap::new();
    for (e, la, lb) in separating_edgels(&labels) {
        let v = grid.get(e.row as usize, e.col as usize);
        let slot = entries
            .entry(ordered(la, lb))
            .or_insert_with(|| (S::zero(), v, true, Vec::new()));
        slot.0 = slot.0 + v;
        slot.2 = slot.2 && v == slot.1;
        slot.3.push(e);
    }
    let entries = entries
        .into_iter()
        .map(|(key, (sum, first, uniform, coords))| {
            // A uniform arc keeps its value untouched: summing n equal terms
            // and dividing would drift in the last bits and break round trips.
            let strength = if uniform { first } else { sum / S::of_usize(coords.len()) };
            (key, BoundaryEntry { strength, coords })
        })
        .collect();
    SparseBoundaries::from_label_map_and_entries(labels, entries)
}

/// Partition obtained by erasing every entry with strength at or below the
/// threshold. Region ids follow row-major first-appearance order.
pub fn binarize<S: Scalar>(sb: &SparseBoundaries<S>, threshold: S) -> LabelMap {
    let mut blocked = HashSet::new();
    for (_, entry) in sb.entries() {
        if entry.strength > threshold {
            blocked.extend(entry.coords.iter().copied());
        }
    }
    flood_partition(sb.height(), sb.width(), |e| blocked.contains(&e))
}
