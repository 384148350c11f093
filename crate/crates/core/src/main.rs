use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sepfour::estimator::{EstimatorConfig, FallbackBasis, InlierRatio, Variant};
use sepfour::geometry::SedKind;
use sepfour::harness::bench::{self, summarize, BenchGrid, BenchMethod, CellSummary};
use sepfour::harness::{io, metrics, synth};
use sepfour::lines::HoughParams;
use sepfour::Error;

/// Fundamental matrix estimation from putative correspondences.
#[derive(Parser)]
#[command(name = "sepfour", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate F from a correspondence file and write a JSON report.
    Estimate(EstimateArgs),
    /// Generate a synthetic scene: correspondences and ground truth.
    Synth(SynthArgs),
    /// Score a report against ground truth.
    Eval(EvalArgs),
    /// Run a benchmark grid and write a CSV table.
    Bench(BenchArgs),
}

#[derive(Args)]
struct EstimateArgs {
    /// Correspondence file: `x y x' y'` per line, optional `size w1 h1 w2 h2` header.
    input: PathBuf,
    #[arg(long, default_value = "separable")]
    method: BenchMethod,
    #[command(flatten)]
    estimator: EstimatorArgs,
    #[command(flatten)]
    hough: HoughArgs,
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the line-matching time to stderr.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct EstimatorArgs {
    #[arg(long, default_value_t = 0.99)]
    confidence: f64,
    /// A probability, or `adaptive`.
    #[arg(long, default_value = "0.5")]
    inlier_ratio: InlierRatio,
    /// Homography transfer threshold in pixels.
    #[arg(long, default_value_t = 0.5)]
    t1: f64,
    /// Epipolar distance threshold in pixels.
    #[arg(long, default_value_t = 3.0)]
    t2: f64,
    /// Completion solver of the separable method, and the LMEDS solver.
    #[arg(long, default_value = "7", value_parser = parse_variant)]
    variant: Variant,
    #[arg(long, default_value_t = 0.3)]
    fallback_ratio: f64,
    #[arg(long, default_value = "assumed", value_parser = parse_basis)]
    fallback_basis: FallbackBasis,
    #[arg(long, default_value_t = 100_000)]
    max_iterations: u64,
    #[arg(long, default_value_t = 20)]
    min_inliers: usize,
    /// Use the sum of squared distances instead of the mean distance.
    #[arg(long)]
    squared_sum: bool,
    #[arg(long)]
    no_refit: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl EstimatorArgs {
    fn config(&self) -> EstimatorConfig {
        EstimatorConfig {
            confidence: self.confidence,
            inlier_ratio: self.inlier_ratio,
            t1: self.t1,
            t2: self.t2,
            variant: self.variant,
            fallback_inlier_ratio: self.fallback_ratio,
            fallback_basis: self.fallback_basis,
            max_iterations: self.max_iterations,
            seed: self.seed,
            min_success_inliers: self.min_inliers,
            refit_on_inliers: !self.no_refit,
            sed_kind: if self.squared_sum { SedKind::SquaredSum } else { SedKind::Mean },
        }
    }
}

#[derive(Args)]
struct HoughArgs {
    #[arg(long, default_value_t = 1.0)]
    hough_rho_step: f64,
    /// Angular step in degrees.
    #[arg(long, default_value_t = 1.0)]
    hough_theta_step: f64,
    #[arg(long, default_value_t = 4)]
    hough_min_votes: usize,
    #[arg(long, default_value_t = 512)]
    hough_target_width: usize,
    /// Line membership distance, in cells of the downscaled grid.
    #[arg(long, default_value_t = 2.0)]
    hough_neighbor_distance: f64,
    /// Detect lines from a random subset of this many correspondences.
    #[arg(long)]
    hough_subsample: Option<usize>,
}

impl HoughArgs {
    fn params(&self) -> HoughParams {
        HoughParams {
            rho_step: self.hough_rho_step,
            theta_step: self.hough_theta_step.to_radians(),
            min_votes: self.hough_min_votes,
            target_width: self.hough_target_width,
            neighbor_distance: self.hough_neighbor_distance,
            detection_subsample: self.hough_subsample,
        }
    }
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 100)]
    n_points: usize,
    #[arg(long, default_value_t = 10)]
    n_on_line: usize,
    #[arg(long, default_value_t = 0.0)]
    outlier_rate: f64,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 640.0)]
    width: f64,
    #[arg(long, default_value_t = 480.0)]
    height: f64,
    #[arg(long, default_value_t = 500.0)]
    focal: f64,
    #[arg(long, default_value_t = 1.0)]
    baseline: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Correspondence file to write.
    #[arg(long)]
    out: PathBuf,
    /// Ground-truth JSON to write.
    #[arg(long)]
    gt: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    report: PathBuf,
    #[arg(long)]
    gt: PathBuf,
    /// The correspondence file the report was computed from.
    #[arg(long)]
    corrs: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Grid description (JSON); built-in defaults when omitted.
    grid: Option<PathBuf>,
    /// Summary table.
    #[arg(long)]
    out: PathBuf,
    /// Closed-form iteration curves over the grid's outlier rates.
    #[arg(long)]
    curves: Option<PathBuf>,
    /// Override the number of trials per cell.
    #[arg(long)]
    trials: Option<usize>,
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    match s {
        "7" | "seven-point" => Ok(Variant::SevenPoint),
        "8" | "eight-point" => Ok(Variant::EightPoint),
        _ => Err(format!("expected 7 or 8, got {s:?}")),
    }
}

fn parse_basis(s: &str) -> Result<FallbackBasis, String> {
    match s {
        "assumed" => Ok(FallbackBasis::Assumed),
        "estimated" => Ok(FallbackBasis::Estimated),
        _ => Err(format!("expected assumed or estimated, got {s:?}")),
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> sepfour::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn estimate(args: &EstimateArgs) -> sepfour::Result<()> {
    let cfg = args.estimator.config();
    let hough = args.hough.params();
    let corrs = io::read_correspondences(&args.input)?;
    match bench::run_method(args.method, &corrs, &cfg, &hough) {
        Ok(report) => {
            if args.timing {
                if let Some(t) = report.line_matching_time {
                    eprintln!("line matching: {:.3} ms", t.as_secs_f64() * 1e3);
                }
            }
            emit(&io::report_json(&report, &cfg, &hough, None)?, args.out.as_ref())
        }
        Err(Error::EstimationFailure { reason, report: Some(report) }) => {
            // Keep the best-effort model for inspection.
            emit(&io::report_json(&report, &cfg, &hough, None)?, args.out.as_ref())?;
            Err(Error::EstimationFailure { reason, report: None })
        }
        Err(e) => Err(e),
    }
}

fn synth(args: &SynthArgs) -> sepfour::Result<()> {
    let spec = synth::SyntheticSceneSpec {
        n_points: args.n_points,
        n_on_line: args.n_on_line,
        outlier_rate: args.outlier_rate,
        noise_sigma: args.noise,
        image_size: (args.width, args.height),
        focal: args.focal,
        baseline: args.baseline,
        seed: args.seed,
        ..Default::default()
    };
    let (corrs, gt) = synth::generate_scene(&spec)?;
    io::write_correspondences(&corrs, &args.out)?;
    io::write_ground_truth(&gt, Some(&spec), &args.gt)
}

fn eval(args: &EvalArgs) -> sepfour::Result<()> {
    let report = io::read_report(&args.report)?;
    let gt = io::read_ground_truth(&args.gt)?;
    let corrs = io::read_correspondences(&args.corrs)?;
    let f = sepfour::geometry::FundamentalMatrix::from_row_major(&report.fundamental)?;
    let m = metrics::evaluate_parts(&f, &report.inliers, &gt, &corrs)?;
    let mut text = serde_json::to_string_pretty(&m)?;
    text.push('\n');
    emit(&text, args.out.as_ref())
}

fn run_bench(args: &BenchArgs) -> sepfour::Result<()> {
    let mut grid: BenchGrid = match &args.grid {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
        None => BenchGrid::default(),
    };
    if let Some(t) = args.trials {
        grid.trials = t;
    }
    let results = bench::run_benchmark(&grid)?;
    let rows: Vec<CellSummary> = results.iter().map(|(cell, r)| summarize(cell, r)).collect();
    bench::write_csv(&rows, &args.out)?;
    if let Some(p) = &args.curves {
        bench::write_csv(&bench::iteration_curves(&grid.outlier_rates, grid.config.confidence)?, p)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Estimate(a) => estimate(a),
        Command::Synth(a) => synth(a),
        Command::Eval(a) => eval(a),
        Command::Bench(a) => run_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::EstimationFailure { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
