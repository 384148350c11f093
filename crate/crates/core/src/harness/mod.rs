//! Synthetic scenes, accuracy metrics, file formats and benchmarks.

pub mod bench;
pub mod io;
pub mod metrics;
pub mod synth;

pub use bench::{iteration_curves, run_benchmark, run_method, BenchGrid, BenchMethod, CellSummary, CurveRow};
pub use io::{read_correspondences, read_ground_truth, read_report, write_report};
pub use metrics::{evaluate, evaluate_parts, MetricsReport};
pub use synth::{generate_scene, GroundTruth, SyntheticSceneSpec};
