//! Hierarchical image segmentation on sparse boundary representations.
//!
//! The pipeline runs contour detection, oriented watershed oversegmentation,
//! ultrametric contour map construction, and multiscale fusion, with boundary
//! and region benchmarks alongside. All stages operate on a look-up table of
//! region-pair boundaries instead of dense boundary grids, which keeps merge
//! operations proportional to the boundaries they touch.
//!
//! Numeric types are generic over [`Scalar`] (`f32` or `f64`); the unsuffixed
//! type aliases below fix `f64`, which is also the default type parameter
//! everywhere.

pub mod bench;
pub mod boundary_eval;
pub mod contour;
pub mod curves;
pub mod error;
pub mod filters;
pub mod fusion;
pub mod geometry;
pub mod grid;
pub mod hierarchy;
pub mod io;
pub mod orientation;
pub mod owt;
pub mod partition;
pub mod region_eval;
pub mod scalar;
pub mod thin;
pub mod watershed;

pub use bench::{
    bench_pipeline, synthetic_image, timing_summary, timing_tsv, BenchMode, BenchRun,
    StageTiming, TimingSummary, BENCH_RUNS,
};
pub use boundary_eval::{
    boundary_curve, boundary_map, eval_boundary_image, greedy_match, grid_boundary_pixels,
    match_boundaries, pr_curve_boundary, GroundTruthSet, ImageBoundaryEval, MatchCounts,
};
pub use contour::{multiscale_oriented_contours, ScaleResponses, DEFAULT_SIGMAS};
pub use curves::{
    best_point, default_thresholds, f_measure, interpolated_ap, PRCurve, PRPoint, MAX_THRESHOLDS,
};
pub use error::{Error, Result};
pub use fusion::{
    fuse, fuse_strengths, project, projection_radius, ScaleSet, PROJECTION_RADIUS_FRACTION,
};
pub use grid::{BoundaryGrid, Edgel, FloatMap, LabelMap};
pub use hierarchy::{build_ucm, Hierarchy, Merge};
pub use orientation::{
    gt_orientations, local_gradient_orientation, orient_accuracy, OrientationCurve,
    OrientationField, OrientationRecord, GRADIENT_SIGMA,
};
pub use owt::{
    arc_orientations, owt_reweight, ArcGeometry, ArcTangents, OrientedStack, ORIENTATION_BINS,
    SIMPLIFY_EPSILON,
};
pub use partition::{
    binarize, dense_from_sparse, sparse_from_dense, sparse_from_labels, BoundaryEntry,
    MergeOutcome, SparseBoundaries,
};
pub use region_eval::{
    eval_region_image, pr_curve_region, region_curve, region_measure, ImageRegionEval,
    RegionScore, OBJECT_THRESHOLD, PART_THRESHOLD, PART_WEIGHT,
};
pub use scalar::Scalar;
pub use thin::thin;
pub use watershed::watershed_oversegment;

/// Single-precision aliases; the default type parameter on the generic types
/// is `f64`.
pub type FloatMap32 = FloatMap<f32>;
pub type BoundaryGrid32 = BoundaryGrid<f32>;
pub type SparseBoundaries32 = SparseBoundaries<f32>;
