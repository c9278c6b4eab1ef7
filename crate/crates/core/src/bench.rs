//! Timing benchmark of the boundary pipeline, with a dense reference mode.
//!
//! The sparse mode runs the production path: a boundary look-up table, a
//! lazy-deletion heap, and per-merge updates that touch only the entries
//! incident to the merging pair. The dense reference keeps per-pixel labels
//! and per-edgel strengths instead and rediscovers everything by sweeping
//! the full boundary grid: one sweep to find the weakest section, one to
//! gather the sections it recombines with, one to restamp, plus a pixel
//! pass to relabel. Both modes funnel section scoring through
//! [`flank_mean`](crate::owt) and recombination through the same
//! length-weighted mean, and they break ties identically, so they produce
//! bit-identical hierarchies; only the cost of finding work differs.
//!
//! Timing covers the in-memory stages only (no file I/O), reports the
//! median over repeated runs, and stays single-threaded.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::time::Instant;

use crate::contour::{multiscale_oriented_contours, DEFAULT_SIGMAS};
use crate::error::{Error, Result};
use crate::fusion::{fuse, projection_radius, ScaleSet, PROJECTION_RADIUS_FRACTION};
use crate::grid::{Edgel, FloatMap, LabelMap};
use crate::hierarchy::{build_ucm, Hierarchy, Merge};
use crate::owt::{
    arc_orientations, flank_mean, owt_reweight, section_tangents, OrientedStack,
    ORIENTATION_BINS, SIMPLIFY_EPSILON,
};
use crate::partition::{length_weighted, separating_edgels, sparse_from_labels};
use crate::scalar::{cmp, Scalar};
use crate::watershed::watershed_oversegment;

/// Timing runs per stage; the reported figure is their median.
pub const BENCH_RUNS: usize = 5;

const STAGES: [&str; 4] = ["watershed", "owt", "ucm", "fusion"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchMode {
    Sparse,
    DenseReference,
}

impl BenchMode {
    pub fn name(self) -> &'static str {
        match self {
            BenchMode::Sparse => "sparse",
            BenchMode::DenseReference => "dense-reference",
        }
    }
}

/// Median wall time of one pipeline stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StageTiming {
    pub stage: &'static str,
    pub millis: f64,
}

/// Timings of one mode, plus the hierarchy it built so callers can check
/// the two modes agree bit for bit.
#[derive(Debug, Clone)]
pub struct BenchRun<S: Scalar = f64> {
    pub mode: BenchMode,
    pub stages: Vec<StageTiming>,
    pub hierarchy: Hierarchy<S>,
}

/// Deterministic test card: a product of two slow sinusoids seeds a grid of
/// basins and a faster oblique harmonic bends the ridge lines, so arcs have
/// curvature and simplification has work to do. Values stay inside [0, 1].
pub fn synthetic_image<S: Scalar>(height: usize, width: usize) -> Result<FloatMap<S>> {
    if height < 2 || width < 2 {
        return Err(Error::InvalidArgument(format!(
            "benchmark image must be at least 2x2, got {height}x{width}"
        )));
    }
    let tau = std::f64::consts::TAU;
    let mut data = Vec::with_capacity(height * width);
    for r in 0..height {
        for c in 0..width {
            let y = r as f64 / height as f64;
            let x = c as f64 / width as f64;
            let slow = (tau * 4.0 * y).sin() * (tau * 6.0 * x).sin();
            let fast = (tau * (11.0 * x + 7.0 * y) + 1.0).sin();
            data.push(S::of_f64(0.5 + 0.35 * slow + 0.1 * fast));
        }
    }
    FloatMap::from_vec(height, width, 1, data)
}

fn ordered(a: u32, b: u32) -> (u32, u32) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Visits every edgel slot of the boundary grid in row-major order, passing
/// the slot index and the labels of the two flanking pixels (upper/left
/// first). This is the full sweep the dense reference pays per merge.
fn sweep_edgels(labels: &[u32], height: usize, width: usize, mut visit: impl FnMut(usize, u32, u32)) {
    let gw = 2 * width - 1;
    for r in 0..2 * height - 1 {
        let mut c = 1 - r % 2;
        while c < gw {
            let (p, q) = if r % 2 == 1 {
                ((r - 1) / 2 * width + c / 2, (r + 1) / 2 * width + c / 2)
            } else {
                (r / 2 * width + (c - 1) / 2, r / 2 * width + (c + 1) / 2)
            };
            visit(r * gw + c, labels[p], labels[q]);
            c += 2;
        }
    }
}

/// Dense pipeline state: per-pixel labels and per-edgel strengths, the whole
/// boundary grid materialized. Every edgel of a section carries the
/// section's current strength.
struct DenseState<S: Scalar> {
    finest: LabelMap,
    labels: Vec<u32>,
    region_count: u32,
    stamps: Vec<S>,
}

/// Dense twin of table construction plus oriented reweighting: sections are
/// discovered by one full sweep, scored with the shared tangent and
/// flank-average arithmetic, and stamped back onto the grid.
fn dense_owt<S: Scalar>(
    labels: &LabelMap,
    stack: &OrientedStack<S>,
    epsilon: f64,
    k: u32,
) -> Result<DenseState<S>> {
    if stack.height() != labels.height() || stack.width() != labels.width() {
        return Err(Error::DimensionMismatch(format!(
            "oriented stack is {}x{}, labels cover {}x{}",
            stack.height(),
            stack.width(),
            labels.height(),
            labels.width()
        )));
    }
    if k != stack.orientations() {
        return Err(Error::DimensionMismatch(format!(
            "tangents use {} bins, stack has {} channels",
            k,
            stack.orientations()
        )));
    }
    let (gh, gw) = (2 * labels.height() - 1, 2 * labels.width() - 1);
    let mut sections: BTreeMap<(u32, u32), Vec<Edgel>> = BTreeMap::new();
    for (e, la, lb) in separating_edgels(labels) {
        sections.entry(ordered(la, lb)).or_default().push(e);
    }
    let mut stamps = vec![S::zero(); gh * gw];
    for coords in sections.values() {
        let tangents = section_tangents(coords, gh, gw, epsilon, k)?;
        let s = flank_mean(coords, &tangents.bins, stack);
        for e in coords {
            stamps[e.row as usize * gw + e.col as usize] = s;
        }
    }
    Ok(DenseState {
        finest: labels.clone(),
        labels: labels.labels().to_vec(),
        region_count: labels.region_count(),
        stamps,
    })
}

/// Dense twin of the hierarchy build. Each merge rediscovers the weakest
/// section, its recombination partners, and the restamp set by full-grid
/// sweeps, then relabels the pixel grid; the sparse path gets all of that
/// from the heap and the adjacency sets. Selection order, id bookkeeping,
/// level lifting, and recombination arithmetic mirror the sparse build
/// exactly, so the merge list comes out bit-identical.
fn dense_ucm<S: Scalar>(mut st: DenseState<S>) -> Result<Hierarchy<S>> {
    let (h, w) = (st.finest.height(), st.finest.width());
    let r = st.region_count;
    let mut node_by_cur: Vec<u32> = (0..r).collect();
    let mut merges: Vec<Merge<S>> = Vec::with_capacity(r.saturating_sub(1) as usize);
    let mut level = S::zero();
    let mut next_node = r;
    while (merges.len() as u32) < r - 1 {
        // Weakest live section, ties to the smaller pair: the same order the
        // sparse heap pops in.
        let mut best: Option<(S, (u32, u32))> = None;
        sweep_edgels(&st.labels, h, w, |idx, la, lb| {
            if la == lb {
                return;
            }
            let key = (st.stamps[idx], ordered(la, lb));
            let better = match &best {
                None => true,
                Some((s, p)) => match cmp(key.0, *s) {
                    Ordering::Less => true,
                    Ordering::Equal => key.1 < *p,
                    Ordering::Greater => false,
                },
            };
            if better {
                best = Some(key);
            }
        });
        let Some((s_min, (a, b))) = best else {
            return Err(Error::Inconsistent(
                "boundary grid exhausted before the hierarchy completed".into(),
            ));
        };
        if s_min > level {
            level = s_min;
        }
        let parent = next_node;
        next_node += 1;
        merges.push(Merge {
            a: node_by_cur[a as usize],
            b: node_by_cur[b as usize],
            parent,
            level,
        });

        // Lengths and strengths of every section touching the merging pair.
        // x -> (length beside a, length beside b, strength beside a,
        // strength beside b); every edgel of a section carries one stamp.
        let mut third: BTreeMap<u32, (usize, usize, S, S)> = BTreeMap::new();
        sweep_edgels(&st.labels, h, w, |idx, la, lb| {
            if la == lb {
                return;
            }
            let (p, q) = ordered(la, lb);
            if (p, q) == (a, b) {
                return;
            }
            if p == a || q == a {
                let x = if p == a { q } else { p };
                let e = third.entry(x).or_insert((0, 0, S::zero(), S::zero()));
                e.0 += 1;
                e.2 = st.stamps[idx];
            } else if p == b || q == b {
                let x = if p == b { q } else { p };
                let e = third.entry(x).or_insert((0, 0, S::zero(), S::zero()));
                e.1 += 1;
                e.3 = st.stamps[idx];
            }
        });
        // Sections seen from both sides recombine by the length-weighted
        // mean, the side of the kept id first. Sections beside the vacated
        // id alone keep their strength; the relabel rekeys them for free.
        let mut news: BTreeMap<u32, S> = BTreeMap::new();
        for (&x, &(la, lb, sa, sb)) in &third {
            if la > 0 && lb > 0 {
                news.insert(x, length_weighted(sa, la, sb, lb));
            }
        }
        // Restamp while the labels still name both sides; the erased pair's
        // edgels become interior once the relabel lands.
        sweep_edgels(&st.labels, h, w, |idx, la, lb| {
            if la == lb {
                return;
            }
            let (p, q) = ordered(la, lb);
            if (p, q) == (a, b) {
                st.stamps[idx] = S::zero();
            } else if p == a || p == b {
                if let Some(&s) = news.get(&q) {
                    st.stamps[idx] = s;
                }
            } else if q == a || q == b {
                if let Some(&s) = news.get(&p) {
                    st.stamps[idx] = s;
                }
            }
        });

        // Relabel the pixel grid: the vacated id joins the kept one and the
        // largest id moves into the vacated slot, keeping ids contiguous.
        // A pixel can match at most one arm because a < b <= last.
        let last = st.region_count - 1;
        for l in st.labels.iter_mut() {
            if *l == b {
                *l = a;
            } else if *l == last {
                *l = b;
            }
        }
        node_by_cur[a as usize] = parent;
        if b != last {
            node_by_cur[b as usize] = node_by_cur[last as usize];
        }
        node_by_cur.pop();
        st.region_count -= 1;
    }
    Hierarchy::new(st.finest, merges)
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Median of the collected samples; even counts take the upper middle.
fn median(samples: &mut [f64]) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).expect("timings are finite"));
    samples[samples.len() / 2]
}

/// Times the watershed, oriented reweighting, hierarchy build, and fusion
/// stages on one image, `runs` times, reporting per-stage medians.
///
/// The contour bank, the coarse-scale hierarchies the fusion stage consumes,
/// and all file handling stay outside the clock. The returned hierarchy is
/// the finest scale's build, the artifact the two modes must agree on.
pub fn bench_pipeline<S: Scalar>(
    image: &FloatMap<S>,
    mode: BenchMode,
    runs: usize,
) -> Result<BenchRun<S>> {
    if runs == 0 {
        return Err(Error::InvalidArgument("need at least one timing run".into()));
    }
    let scales = multiscale_oriented_contours(image, &DEFAULT_SIGMAS)?;
    let mut coarse: Vec<(Hierarchy<S>, S)> = Vec::new();
    for sr in &scales[1..] {
        let labels = watershed_oversegment(&sr.strength)?;
        let sb = sparse_from_labels(&labels);
        let geom = arc_orientations(&sb, SIMPLIFY_EPSILON, ORIENTATION_BINS)?;
        let sb = owt_reweight(&sb, &geom, &sr.stack)?;
        coarse.push((build_ucm(&sb)?, S::one()));
    }
    let fine = &scales[0];
    // The dense mode has no boundary table of its own for the fusion stage
    // to refine, so it borrows this one; it is bit-identical to the table
    // the sparse mode builds inside its timed reweighting stage.
    let fine_sb = match mode {
        BenchMode::Sparse => None,
        BenchMode::DenseReference => {
            let labels = watershed_oversegment(&fine.strength)?;
            let sb = sparse_from_labels(&labels);
            let geom = arc_orientations(&sb, SIMPLIFY_EPSILON, ORIENTATION_BINS)?;
            Some(owt_reweight(&sb, &geom, &fine.stack)?)
        }
    };
    let radius = projection_radius(image.height(), image.width(), PROJECTION_RADIUS_FRACTION);

    let mut samples: [Vec<f64>; 4] = std::array::from_fn(|_| Vec::with_capacity(runs));
    let mut hierarchy = None;
    for _ in 0..runs {
        let t = Instant::now();
        let labels = watershed_oversegment(&fine.strength)?;
        samples[0].push(ms_since(t));

        match mode {
            BenchMode::Sparse => {
                let t = Instant::now();
                let sb = sparse_from_labels(&labels);
                let geom = arc_orientations(&sb, SIMPLIFY_EPSILON, ORIENTATION_BINS)?;
                let sb = owt_reweight(&sb, &geom, &fine.stack)?;
                samples[1].push(ms_since(t));

                let t = Instant::now();
                let h = build_ucm(&sb)?;
                samples[2].push(ms_since(t));

                let mut members = vec![(h.clone(), S::one())];
                members.extend(coarse.iter().cloned());
                let set = ScaleSet::new(members)?;
                let t = Instant::now();
                let fused = fuse(&set, &sb, radius)?;
                samples[3].push(ms_since(t));
                drop(fused);
                hierarchy = Some(h);
            }
            BenchMode::DenseReference => {
                let t = Instant::now();
                let state = dense_owt(&labels, &fine.stack, SIMPLIFY_EPSILON, ORIENTATION_BINS)?;
                samples[1].push(ms_since(t));

                let t = Instant::now();
                let h = dense_ucm(state)?;
                samples[2].push(ms_since(t));

                let mut members = vec![(h.clone(), S::one())];
                members.extend(coarse.iter().cloned());
                let set = ScaleSet::new(members)?;
                let sb = fine_sb.as_ref().expect("dense mode prepared a fine table");
                let t = Instant::now();
                let fused = fuse(&set, sb, radius)?;
                samples[3].push(ms_since(t));
                drop(fused);
                hierarchy = Some(h);
            }
        }
    }

    let stages = STAGES
        .iter()
        .zip(samples.iter_mut())
        .map(|(stage, s)| StageTiming { stage, millis: median(s) })
        .collect();
    Ok(BenchRun { mode, stages, hierarchy: hierarchy.expect("at least one run") })
}

/// One line per stage per mode: stage, mode, median milliseconds.
pub fn timing_tsv<S: Scalar>(runs: &[BenchRun<S>]) -> String {
    use std::fmt::Write;
    let mut out = String::from("stage\tmode\tms\n");
    for run in runs {
        for st in &run.stages {
            writeln!(out, "{}\t{}\t{:.3}", st.stage, run.mode.name(), st.millis)
                .expect("writing to a string cannot fail");
        }
    }
    out
}

/// Totals of the mode-differentiated stages (reweighting plus hierarchy
/// build) and their ratio when both modes are present.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TimingSummary {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sparse_owt_ucm_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dense_owt_ucm_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub speedup: Option<f64>,
}

pub fn timing_summary<S: Scalar>(runs: &[BenchRun<S>]) -> TimingSummary {
    fn owt_ucm<S: Scalar>(run: &BenchRun<S>) -> f64 {
        run.stages.iter().filter(|s| s.stage == "owt" || s.stage == "ucm").map(|s| s.millis).sum()
    }
    let sparse = runs.iter().find(|r| r.mode == BenchMode::Sparse).map(owt_ucm);
    let dense = runs.iter().find(|r| r.mode == BenchMode::DenseReference).map(owt_ucm);
    let speedup = match (sparse, dense) {
        (Some(s), Some(d)) if s > 0.0 => Some(d / s),
        _ => None,
    };
    TimingSummary { sparse_owt_ucm_ms: sparse, dense_owt_ucm_ms: dense, speedup }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_strength(rng: &mut ChaCha8Rng, h: usize, w: usize) -> FloatMap {
        let data = (0..h * w).map(|_| rng.gen_range(0.0..1.0)).collect();
        FloatMap::from_vec(h, w, 1, data).unwrap()
    }

    fn random_stack(rng: &mut ChaCha8Rng, h: usize, w: usize) -> OrientedStack {
        let k = ORIENTATION_BINS as usize;
        let data = (0..k * h * w).map(|_| rng.gen_range(0.0..1.0)).collect();
        OrientedStack::new(FloatMap::from_vec(h, w, k, data).unwrap()).unwrap()
    }

    fn sparse_build(labels: &LabelMap, stack: &OrientedStack) -> Hierarchy {
        let sb = sparse_from_labels::<f64>(labels);
        let geom = arc_orientations(&sb, SIMPLIFY_EPSILON, ORIENTATION_BINS).unwrap();
        let sb = owt_reweight(&sb, &geom, stack).unwrap();
        build_ucm(&sb).unwrap()
    }

    fn dense_build(labels: &LabelMap, stack: &OrientedStack) -> Hierarchy {
        let state = dense_owt(labels, stack, SIMPLIFY_EPSILON, ORIENTATION_BINS).unwrap();
        dense_ucm(state).unwrap()
    }

    #[test]
    fn dense_reference_matches_sparse_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for case in 0..30 {
            let h = rng.gen_range(3..12);
            let w = rng.gen_range(3..12);
            let labels = watershed_oversegment(&random_strength(&mut rng, h, w)).unwrap();
            let stack = random_stack(&mut rng, h, w);
            assert_eq!(
                sparse_build(&labels, &stack),
                dense_build(&labels, &stack),
                "case {case}: {h}x{w}, {} regions",
                labels.region_count()
            );
        }
    }

    #[test]
    fn dense_reference_matches_sparse_on_deeper_tables() {
        // Larger grids stack recombinations on top of recombinations, so a
        // single rounding or ordering slip would surface here.
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for case in 0..4 {
            let labels = watershed_oversegment(&random_strength(&mut rng, 24, 30)).unwrap();
            assert!(labels.region_count() > 10, "case {case} degenerated");
            let stack = random_stack(&mut rng, 24, 30);
            assert_eq!(sparse_build(&labels, &stack), dense_build(&labels, &stack), "case {case}");
        }
    }

    #[test]
    fn single_region_yields_empty_hierarchy_in_both_modes() {
        let labels = watershed_oversegment(&FloatMap::<f64>::zeros(4, 5, 1).unwrap()).unwrap();
        assert_eq!(labels.region_count(), 1);
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let stack = random_stack(&mut rng, 4, 5);
        let hs = sparse_build(&labels, &stack);
        let hd = dense_build(&labels, &stack);
        assert_eq!(hs, hd);
        assert!(hs.merges().is_empty());
    }

    #[test]
    fn synthetic_image_is_deterministic_and_bounded() {
        let a = synthetic_image::<f64>(30, 40).unwrap();
        let b = synthetic_image::<f64>(30, 40).unwrap();
        assert_eq!(a.values(), b.values());
        assert!(a.values().iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert!(synthetic_image::<f64>(1, 9).is_err());
    }

    #[test]
    fn pipeline_modes_agree_and_report_stages() {
        let image = synthetic_image::<f64>(40, 56).unwrap();
        let sparse = bench_pipeline(&image, BenchMode::Sparse, 1).unwrap();
        let dense = bench_pipeline(&image, BenchMode::DenseReference, 1).unwrap();
        assert_eq!(sparse.hierarchy, dense.hierarchy);
        assert!(sparse.hierarchy.region_count() > 1);
        for run in [&sparse, &dense] {
            let names: Vec<_> = run.stages.iter().map(|s| s.stage).collect();
            assert_eq!(names, STAGES);
            assert!(run.stages.iter().all(|s| s.millis >= 0.0));
        }
        assert!(bench_pipeline(&image, BenchMode::Sparse, 0).is_err());
    }

    #[test]
    fn tsv_and_summary_report_the_ratio() {
        let labels = LabelMap::new(1, 2, vec![0, 1]).unwrap();
        let mut sb = sparse_from_labels::<f64>(&labels);
        sb.set_strength(0, 1, 0.5).unwrap();
        let h = build_ucm(&sb).unwrap();
        let stages = |ms: [f64; 4]| {
            STAGES
                .iter()
                .zip(ms)
                .map(|(stage, millis)| StageTiming { stage, millis })
                .collect::<Vec<_>>()
        };
        let runs = vec![
            BenchRun { mode: BenchMode::Sparse, stages: stages([1.0, 2.0, 3.0, 4.0]), hierarchy: h.clone() },
            BenchRun {
                mode: BenchMode::DenseReference,
                stages: stages([1.0, 10.0, 15.0, 4.0]),
                hierarchy: h,
            },
        ];
        let tsv = timing_tsv(&runs);
        assert!(tsv.starts_with("stage\tmode\tms\n"));
        assert!(tsv.contains("owt\tsparse\t2.000\n"));
        assert!(tsv.contains("ucm\tdense-reference\t15.000\n"));
        assert_eq!(tsv.lines().count(), 9);

        let summary = timing_summary(&runs);
        assert_eq!(summary.sparse_owt_ucm_ms, Some(5.0));
        assert_eq!(summary.dense_owt_ucm_ms, Some(25.0));
        assert_eq!(summary.speedup, Some(5.0));
        let json = serde_json::to_string(&summary).unwrap();
        assert_eq!(
            json,
            "{\"sparse_owt_ucm_ms\":5.0,\"dense_owt_ucm_ms\":25.0,\"speedup\":5.0}"
        );

        let alone = timing_summary(&runs[..1]);
        assert_eq!(alone.dense_owt_ucm_ms, None);
        assert_eq!(alone.speedup, None);
        assert_eq!(serde_json::to_string(&alone).unwrap(), "{\"sparse_owt_ucm_ms\":5.0}");
    }

    #[test]
    fn median_takes_the_middle_sample() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0]), 4.0);
        assert_eq!(median(&mut [7.5]), 7.5);
    }

    #[test]
    fn dense_owt_rejects_mismatched_inputs() {
        let labels = LabelMap::new(2, 2, vec![0, 1, 0, 1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let stack = random_stack(&mut rng, 3, 2);
        assert!(dense_owt(&labels, &stack, SIMPLIFY_EPSILON, ORIENTATION_BINS).is_err());
        let stack = random_stack(&mut rng, 2, 2);
        assert!(dense_owt(&labels, &stack, SIMPLIFY_EPSILON, 4).is_err());
    }
}
