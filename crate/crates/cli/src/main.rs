//! Command-line driver: contour detection, oriented watershed reweighting,
//! hierarchy construction, multiscale fusion, thresholding, and benchmark
//! evaluation, glued together by small binary and JSON file formats.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{ensure, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use cob_core::io;
use cob_core::{
    arc_orientations, bench_pipeline, boundary_curve, build_ucm, default_thresholds,
    eval_boundary_image, eval_region_image, fuse, multiscale_oriented_contours, orient_accuracy,
    owt_reweight, projection_radius, region_curve, sparse_from_labels, synthetic_image,
    timing_summary, timing_tsv, watershed_oversegment, BenchMode, GroundTruthSet, Hierarchy,
    OrientedStack, ScaleSet, BENCH_RUNS, PROJECTION_RADIUS_FRACTION, SIMPLIFY_EPSILON,
};
use rayon::prelude::*;

#[derive(Parser)]
#[command(
    name = "cob",
    version,
    about = "Hierarchical image segmentation: oriented contours, watershed \
             hierarchies, multiscale fusion, and benchmark evaluation"
)]
struct Cli {
    /// Worker threads for batch evaluation commands (0 = all cores).
    #[arg(long, global = true, env = "COB_JOBS", default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the oriented contour bank on a grayscale image, writing one
    /// strength/stack .fmap pair per scale into a directory.
    Detect {
        /// Input image (binary 8-bit PGM).
        input: PathBuf,
        /// Gaussian scales, ascending.
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0, 4.0])]
        sigmas: Vec<f64>,
        /// Output directory for the per-scale .fmap pairs.
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Watershed a strength map, orient its arcs, and reweight them from the
    /// oriented stack, writing a sparse boundary table.
    Owt {
        /// Per-pixel contour strength (single-channel .fmap).
        strength: PathBuf,
        /// Oriented responses (.fmap, one channel per tangent bin).
        stack: PathBuf,
        /// Arc simplification tolerance, in pixels.
        #[arg(long, default_value_t = SIMPLIFY_EPSILON)]
        epsilon: f64,
        /// Output boundary table (.sb.json).
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Build the merge hierarchy of a boundary table.
    Ucm {
        /// Input boundary table (.sb.json).
        input: PathBuf,
        /// Also export the dense ultrametric grid to this .fmap path.
        #[arg(long)]
        grid: Option<PathBuf>,
        /// Output hierarchy (.ucm.json, plus a sibling .finest.lmap).
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Blend hierarchies from several scales over a fine boundary table.
    Fuse {
        /// A scale to blend, as PATH:WEIGHT (repeatable).
        #[arg(long = "scale", value_name = "PATH:WEIGHT", required = true)]
        scales: Vec<String>,
        /// Boundary table of the finest scale (.sb.json).
        #[arg(long)]
        fine: PathBuf,
        /// Projection radius as a fraction of the image diagonal.
        #[arg(long, default_value_t = PROJECTION_RADIUS_FRACTION)]
        radius_fraction: f64,
        /// Output hierarchy (.ucm.json).
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Cut a hierarchy at a threshold, writing the resulting partition.
    Threshold {
        /// Input hierarchy (.ucm.json).
        input: PathBuf,
        /// Cut level: every merge at or below it is applied.
        #[arg(long, default_value_t = 0.5)]
        t: f64,
        /// Output partition (.lmap).
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Score predicted hierarchies against boundary ground truth.
    EvalBoundary {
        /// Manifest: one image per line, tab-separated id, prediction
        /// .ucm.json, semicolon-separated ground-truth .lmap paths.
        #[arg(long)]
        manifest: PathBuf,
        /// Matching tolerance as a fraction of the image diagonal.
        #[arg(long, default_value_t = 0.0075)]
        max_dist: f64,
        /// Output curve (.tsv); a .summary.json lands beside it.
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Score predicted hierarchies against region ground truth.
    EvalRegion {
        /// Manifest in the same format as eval-boundary.
        #[arg(long)]
        manifest: PathBuf,
        /// Output curve (.tsv); a .summary.json lands beside it.
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Score a predicted orientation field against a ground-truth one.
    EvalOrient {
        /// Predicted orientations (.orient.json).
        #[arg(long)]
        pred: PathBuf,
        /// Ground-truth orientations (.orient.json).
        #[arg(long)]
        gt: PathBuf,
        /// Output curve (.tsv); a .summary.json lands beside it.
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Time the pipeline stages on a synthetic image, in the sparse mode,
    /// the dense-reference mode, or both. Single-threaded by design.
    Bench {
        /// Image size as HEIGHTxWIDTH.
        #[arg(long, default_value = "321x481")]
        size: String,
        #[arg(long, value_enum, default_value_t = ModeArg::Both)]
        mode: ModeArg,
        /// Output timings (.tsv); a .summary.json lands beside it.
        #[arg(short, long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Sparse,
    DenseReference,
    Both,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Detect { input, sigmas, out } => run_detect(&input, &sigmas, &out),
        Command::Owt { strength, stack, epsilon, out } => run_owt(&strength, &stack, epsilon, &out),
        Command::Ucm { input, grid, out } => run_ucm(&input, grid.as_deref(), &out),
        Command::Fuse { scales, fine, radius_fraction, out } => {
            run_fuse(&scales, &fine, radius_fraction, &out)
        }
        Command::Threshold { input, t, out } => run_threshold(&input, t, &out),
        Command::EvalBoundary { manifest, max_dist, out } => {
            with_pool(cli.jobs, || run_eval_boundary(&manifest, max_dist, &out))
        }
        Command::EvalRegion { manifest, out } => {
            with_pool(cli.jobs, || run_eval_region(&manifest, &out))
        }
        Command::EvalOrient { pred, gt, out } => run_eval_orient(&pred, &gt, &out),
        Command::Bench { size, mode, out } => run_bench(&size, mode, &out),
    }
}

fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .context("building the worker pool")?
        .install(f)
}

/// `curve.tsv` -> `curve.summary.json`, next to the main output.
fn summary_path(out: &Path) -> PathBuf {
    out.with_extension("summary.json")
}

/// Wraps a reader so failures name the file they came from.
fn reading<T>(path: &Path, r: cob_core::Result<T>) -> Result<T> {
    r.with_context(|| format!("reading {}", path.display()))
}

fn run_detect(input: &Path, sigmas: &[f64], out: &Path) -> Result<()> {
    let image = reading(input, io::read_pgm::<f64>(input))?;
    let scales = multiscale_oriented_contours(&image, sigmas)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let stem = input
        .file_stem()
        .and_then(|s| s.to_str())
        .context("input path has no usable file name")?;
    for sr in &scales {
        let tag = format!("{stem}.s{}", sr.sigma);
        io::write_float_map(&out.join(format!("{tag}.strength.fmap")), &sr.strength)?;
        io::write_float_map(&out.join(format!("{tag}.stack.fmap")), sr.stack.map())?;
    }
    Ok(())
}

fn run_owt(strength: &Path, stack: &Path, epsilon: f64, out: &Path) -> Result<()> {
    let strength = reading(strength, io::read_float_map::<f64>(strength))?;
    let stack = OrientedStack::new(reading(stack, io::read_float_map(stack))?)?;
    let labels = watershed_oversegment(&strength)?;
    let sb = sparse_from_labels::<f64>(&labels);
    let geom = arc_orientations(&sb, epsilon, stack.orientations())?;
    let sb = owt_reweight(&sb, &geom, &stack)?;
    io::write_sparse(out, &sb.canonicalized())?;
    Ok(())
}

fn run_ucm(input: &Path, grid: Option<&Path>, out: &Path) -> Result<()> {
    let sb = reading(input, io::read_sparse::<f64>(input))?;
    let hierarchy = build_ucm(&sb)?;
    io::write_hierarchy(out, &hierarchy)?;
    if let Some(grid_path) = grid {
        io::write_boundary_grid(grid_path, &hierarchy.ucm_grid()?)?;
    }
    Ok(())
}

fn run_fuse(scales: &[String], fine: &Path, radius_fraction: f64, out: &Path) -> Result<()> {
    ensure!(
        radius_fraction.is_finite() && radius_fraction >= 0.0,
        "projection radius fraction must be finite and nonnegative, got {radius_fraction}"
    );
    let fine_sb = reading(fine, io::read_sparse::<f64>(fine))?;
    let mut members = Vec::with_capacity(scales.len());
    for spec in scales {
        let (path, weight) = spec
            .rsplit_once(':')
            .with_context(|| format!("scale '{spec}' is not PATH:WEIGHT"))?;
        let weight: f64 =
            weight.parse().with_context(|| format!("scale weight in '{spec}'"))?;
        let path = Path::new(path);
        members.push((reading(path, io::read_hierarchy(path))?, weight));
    }
    let set = ScaleSet::new(members)?;
    let radius = projection_radius(fine_sb.height(), fine_sb.width(), radius_fraction);
    io::write_hierarchy(out, &fuse(&set, &fine_sb, radius)?)?;
    Ok(())
}

fn run_threshold(input: &Path, t: f64, out: &Path) -> Result<()> {
    let hierarchy = reading(input, io::read_hierarchy::<f64>(input))?;
    io::write_label_map(out, &hierarchy.partition_at(t))?;
    Ok(())
}

/// Reads every manifest entry's prediction hierarchy and ground-truth set,
/// in parallel, keeping manifest order.
fn read_eval_inputs(manifest: &Path) -> Result<Vec<(Hierarchy, GroundTruthSet)>> {
    let entries = reading(manifest, io::read_manifest(manifest))?;
    entries
        .par_iter()
        .map(|e| {
            let hierarchy = io::read_hierarchy(&e.prediction)
                .with_context(|| format!("prediction of '{}'", e.id))?;
            let gts = e
                .ground_truths
                .iter()
                .map(|p| {
                    io::read_label_map(p)
                        .with_context(|| format!("ground truth of '{}'", e.id))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((hierarchy, GroundTruthSet::new(gts)?))
        })
        .collect()
}

/// Shared threshold grid: the distinct merge levels pooled over the dataset,
/// quantile-subsampled when there are too many.
fn pooled_thresholds(inputs: &[(Hierarchy, GroundTruthSet)]) -> Result<Vec<f64>> {
    let pooled: Vec<f64> = inputs.iter().flat_map(|(h, _)| h.levels()).collect();
    default_thresholds(&pooled).context("building the threshold grid")
}

fn run_eval_boundary(manifest: &Path, max_dist: f64, out: &Path) -> Result<()> {
    let inputs = read_eval_inputs(manifest)?;
    let thresholds = pooled_thresholds(&inputs)?;
    let evals = inputs
        .par_iter()
        .map(|(h, gts)| {
            let grid = h.ucm_grid()?;
            eval_boundary_image(&grid, gts, &thresholds, max_dist)
        })
        .collect::<cob_core::Result<Vec<_>>>()?;
    let curve = boundary_curve(&evals)?;
    io::write_pr_curve(out, &curve)?;
    io::write_curve_summary(&summary_path(out), &curve)?;
    Ok(())
}

fn run_eval_region(manifest: &Path, out: &Path) -> Result<()> {
    let inputs = read_eval_inputs(manifest)?;
    let thresholds = pooled_thresholds(&inputs)?;
    let evals = inputs
        .par_iter()
        .map(|(h, gts)| eval_region_image(h, gts, &thresholds))
        .collect::<cob_core::Result<Vec<_>>>()?;
    let curve = region_curve(&evals)?;
    io::write_pr_curve(out, &curve)?;
    io::write_curve_summary(&summary_path(out), &curve)?;
    Ok(())
}

fn run_eval_orient(pred: &Path, gt: &Path, out: &Path) -> Result<()> {
    let pred = reading(pred, io::read_orientation_field::<f64>(pred))?;
    let gt = reading(gt, io::read_orientation_field::<f64>(gt))?;
    let curve = orient_accuracy(&pred, &gt)?;
    io::write_orientation_curve(out, &curve)?;
    let summary = serde_json::json!({ "auc": curve.auc });
    io::atomic_write(&summary_path(out), summary.to_string().as_bytes())?;
    Ok(())
}

fn parse_size(size: &str) -> Result<(usize, usize)> {
    let (h, w) = size
        .split_once('x')
        .with_context(|| format!("size '{size}' is not HEIGHTxWIDTH"))?;
    Ok((
        h.parse().with_context(|| format!("height in '{size}'"))?,
        w.parse().with_context(|| format!("width in '{size}'"))?,
    ))
}

fn run_bench(size: &str, mode: ModeArg, out: &Path) -> Result<()> {
    let (height, width) = parse_size(size)?;
    let image = synthetic_image::<f64>(height, width)?;
    let modes: &[BenchMode] = match mode {
        ModeArg::Sparse => &[BenchMode::Sparse],
        ModeArg::DenseReference => &[BenchMode::DenseReference],
        ModeArg::Both => &[BenchMode::Sparse, BenchMode::DenseReference],
    };
    let runs = modes
        .iter()
        .map(|&m| bench_pipeline(&image, m, BENCH_RUNS))
        .collect::<cob_core::Result<Vec<_>>>()?;
    if let [a, b] = &runs[..] {
        ensure!(
            a.hierarchy == b.hierarchy,
            "sparse and dense-reference modes disagree; the timings are not comparable"
        );
    }
    io::atomic_write(out, timing_tsv(&runs).as_bytes())?;
    io::atomic_write(
        &summary_path(out),
        serde_json::to_string(&timing_summary(&runs))?.as_bytes(),
    )?;
    Ok(())
}
