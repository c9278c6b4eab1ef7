//! Helpers shared by the acceptance tests: random connected partitions,
//! an exact matching oracle, and a PGM writer for pipeline inputs.

use std::path::Path;

use cob_core::{LabelMap, SparseBoundaries};
use rand::seq::SliceRandom;
use rand::Rng;

/// Random partition of an `height`x`width` grid into `regions` 4-connected
/// regions, grown from shuffled seeds by repeatedly claiming a random
/// frontier pixel. Labels follow row-major first-appearance order.
pub fn random_partition<R: Rng>(
    rng: &mut R,
    height: usize,
    width: usize,
    regions: u32,
) -> LabelMap {
    let n = height * width;
    let k = (regions.max(1) as usize).min(n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    let mut assigned = vec![u32::MAX; n];
    let mut frontier: Vec<(usize, u32)> = Vec::new();
    for (label, &seed) in order[..k].iter().enumerate() {
        assigned[seed] = label as u32;
        frontier.push((seed, label as u32));
    }
    while !frontier.is_empty() {
        let i = rng.gen_range(0..frontier.len());
        let (pixel, label) = frontier.swap_remove(i);
        let (r, c) = (pixel / width, pixel % width);
        let mut claim = |nr: usize, nc: usize| {
            let np = nr * width + nc;
            if assigned[np] == u32::MAX {
                assigned[np] = label;
                frontier.push((np, label));
            }
        };
        if r > 0 {
            claim(r - 1, c);
        }
        if r + 1 < height {
            claim(r + 1, c);
        }
        if c > 0 {
            claim(r, c - 1);
        }
        if c + 1 < width {
            claim(r, c + 1);
        }
    }
    LabelMap::new(height, width, canonical(&assigned)).unwrap()
}

/// First-appearance renumbering, so any contiguous-or-not labeling becomes
/// a valid canonical map.
pub fn canonical(raw: &[u32]) -> Vec<u32> {
    let mut remap = std::collections::HashMap::new();
    let mut next = 0u32;
    raw.iter()
        .map(|&l| {
            *remap.entry(l).or_insert_with(|| {
                let id = next;
                next += 1;
                id
            })
        })
        .collect()
}

/// Fresh copy with every boundary strength drawn uniformly from `(lo, hi)`.
pub fn random_strengths<R: Rng>(
    rng: &mut R,
    sb: &SparseBoundaries,
    lo: f64,
    hi: f64,
) -> SparseBoundaries {
    sb.with_strengths(|_, _| rng.gen_range(lo..hi))
}

/// Maximum bipartite matching by augmenting paths over all pairs within
/// `radius`: the exact optimum the greedy matcher is checked against.
pub fn kuhn_max_matching(
    pred: &[(usize, usize)],
    gt: &[(usize, usize)],
    radius: f64,
) -> usize {
    let adj: Vec<Vec<usize>> = pred
        .iter()
        .map(|&(pr, pc)| {
            gt.iter()
                .enumerate()
                .filter(|(_, &(gr, gc))| {
                    let dr = pr as f64 - gr as f64;
                    let dc = pc as f64 - gc as f64;
                    dr * dr + dc * dc <= radius * radius
                })
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    fn augment(i: usize, adj: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
        for &j in &adj[i] {
            if seen[j] {
                continue;
            }
            seen[j] = true;
            if owner[j].is_none() || augment(owner[j].unwrap(), adj, owner, seen) {
                owner[j] = Some(i);
                return true;
            }
        }
        false
    }
    let mut owner = vec![None; gt.len()];
    let mut size = 0;
    for i in 0..pred.len() {
        let mut seen = vec![false; gt.len()];
        if augment(i, &adj, &mut owner, &mut seen) {
            size += 1;
        }
    }
    size
}

/// Writes a binary 8-bit PGM with per-pixel values from `shade`.
pub fn write_pgm(path: &Path, height: usize, width: usize, shade: impl Fn(usize, usize) -> u8) {
    let mut bytes = format!("P5\n{width} {height}\n255\n").into_bytes();
    for r in 0..height {
        for c in 0..width {
            bytes.push(shade(r, c));
        }
    }
    std::fs::write(path, bytes).unwrap();
}
