//! Watershed oversegmentation of a contour strength map by priority flood.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::grid::{FloatMap, LabelMap};
use crate::scalar::{cmp, Scalar};

struct Queued<S: Scalar> {
    value: S,
    seq: u64,
    pixel: usize,
}

impl<S: Scalar> PartialEq for Queued<S> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}

impl<S: Scalar> Eq for Queued<S> {}

impl<S: Scalar> PartialOrd for Queued<S> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl<S: Scalar> Ord for Queued<S> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        cmp(self.value, other.value).then(self.seq.cmp(&other.seq))
    }
}

/// Floods a single-channel strength map into catchment basins.
///
/// Every local-minimum plateau (a maximal connected set of equal values with
/// no lower 4-neighbor) seeds one region, discovered in row-major order.
/// Remaining pixels join the basin that reaches them first through the
/// priority queue; equal priorities resolve by insertion order, which the
/// row-major scan makes deterministic.
pub fn watershed_oversegment<S: Scalar>(strength: &FloatMap<S>) -> Result<LabelMap> {
    if strength.channels() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "watershed expects one channel, got {}",
            strength.channels()
        )));
    }
    let (h, w) = (strength.height(), strength.width());
    let plane = strength.channel(0);
    let n = h * w;
    let neighbors = |p: usize| {
        let (r, c) = (p / w, p % w);
        let mut out = [usize::MAX; 4];
        let mut k = 0;
        if r > 0 {
            out[k] = p - w;
            k += 1;
        }
        if c > 0 {
            out[k] = p - 1;
            k += 1;
        }
        if c + 1 < w {
            out[k] = p + 1;
            k += 1;
        }
        if r + 1 < h {
            out[k] = p + w;
            k += 1;
        }
        (out, k)
    };

    let mut labels = vec![u32::MAX; n];
    let mut heap: BinaryHeap<std::cmp::Reverse<Queued<S>>> = BinaryHeap::new();
    let mut seq = 0u64;
    let push = |heap: &mut BinaryHeap<_>, seq: &mut u64, pixel: usize, value: S| {
        heap.push(std::cmp::Reverse(Queued { value, seq: *seq, pixel }));
        *seq += 1;
    };

    // Seed pass: find local-minimum plateaus in row-major order.
    let mut plateau_visited = vec![false; n];
    let mut next_label = 0u32;
    let mut plateau = Vec::new();
    let mut stack = Vec::new();
    for start in 0..n {
        if plateau_visited[start] {
            continue;
        }
        let v = plane[start];
        plateau.clear();
        stack.push(start);
        plateau_visited[start] = true;
        let mut is_minimum = true;
        while let Some(p) = stack.pop() {
            plateau.push(p);
            let (ns, k) = neighbors(p);
            for &q in &ns[..k] {
                if plane[q] == v {
                    if !plateau_visited[q] {
                        plateau_visited[q] = true;
                        stack.push(q);
                    }
                } else if plane[q] < v {
                    is_minimum = false;
                }
            }
        }
        if is_minimum {
            plateau.sort_unstable();
            for &p in &plateau {
                labels[p] = next_label;
                push(&mut heap, &mut seq, p, plane[p]);
            }
            next_label += 1;
        }
    }

    // Flood pass: unlabeled pixels take the label of whichever basin pops
    // them first.
    while let Some(std::cmp::Reverse(q)) = heap.pop() {
        let label = labels[q.pixel];
        let (ns, k) = neighbors(q.pixel);
        for &p in &ns[..k] {
            if labels[p] == u32::MAX {
                labels[p] = label;
                push(&mut heap, &mut seq, p, plane[p]);
            }
        }
    }

    Ok(LabelMap::from_parts_unchecked(h, w, labels, next_label))
}
