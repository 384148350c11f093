//! File formats: correspondence text files, estimate reports and ground
//! truth as JSON.
//!
//! Correspondence files hold one `x y x' y'` row per match, separated by
//! whitespace or commas. Blank lines and lines starting with `#` are ignored.
//! An optional first row `size w1 h1 w2 h2` gives the image sizes; otherwise
//! bounds are inferred from the coordinates.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::correspondence::{CorrespondenceSet, ImageSize};
use crate::error::{Error, Result};
use crate::estimator::{EstimateReport, EstimatorConfig, Method, ResidualStats};
use crate::geometry::{FundamentalMatrix, HomogeneousPoint};
use crate::harness::metrics::MetricsReport;
use crate::harness::synth::{GroundTruth, SyntheticSceneSpec};
use crate::lines::HoughParams;

pub const SCHEMA_VERSION: u32 = 1;

/// Fewest pairs a correspondence file may hold: one eight-point sample.
pub const MIN_PAIRS: usize = 8;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Parses the text correspondence format.
pub fn parse_correspondences(text: &str) -> Result<CorrespondenceSet> {
    let mut sizes: Option<(ImageSize, ImageSize)> = None;
    let mut pairs = Vec::new();
    let mut seen_row = false;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .peekable();
        if tokens.peek() == Some(&"size") {
            if seen_row {
                return Err(parse_err(line_no, "size header must come first"));
            }
            tokens.next();
            let v = numbers(tokens, line_no)?;
            if v.iter().any(|&d| !(d > 0.0)) {
                return Err(parse_err(line_no, "image sizes must be positive"));
            }
            sizes = Some((ImageSize::new(v[0], v[1]), ImageSize::new(v[2], v[3])));
            seen_row = true;
            continue;
        }
        seen_row = true;
        let v = numbers(tokens, line_no)?;
        pairs.push(((v[0], v[1]), (v[2], v[3])));
    }
    if pairs.len() < MIN_PAIRS {
        return Err(Error::InvalidInput(format!(
            "need at least {MIN_PAIRS} correspondences, found {}",
            pairs.len()
        )));
    }
    match sizes {
        Some((s1, s2)) => CorrespondenceSet::new(pairs, s1, s2),
        None => CorrespondenceSet::with_inferred_bounds(pairs),
    }
}

fn numbers<'a>(tokens: impl Iterator<Item = &'a str>, line: usize) -> Result<[f64; 4]> {
    let v: Vec<&str> = tokens.collect();
    if v.len() != 4 {
        return Err(parse_err(line, format!("expected 4 numbers, found {}", v.len())));
    }
    let mut out = [0.0f64; 4];
    for (o, t) in out.iter_mut().zip(&v) {
        *o = t.parse().map_err(|_| parse_err(line, format!("not a number: {t:?}")))?;
        if !o.is_finite() {
            return Err(parse_err(line, format!("not finite: {t:?}")));
        }
    }
    Ok(out)
}

pub fn read_correspondences(path: impl AsRef<Path>) -> Result<CorrespondenceSet> {
    parse_correspondences(&std::fs::read_to_string(path)?)
}

/// Text form with a size header; coordinates round-trip exactly.
pub fn format_correspondences(set: &CorrespondenceSet) -> String {
    let (s1, s2) = (set.size1(), set.size2());
    let mut out = format!("size {} {} {} {}\n", s1.width, s1.height, s2.width, s2.height);
    for c in set.pairs() {
        let _ = writeln!(out, "{} {} {} {}", c.x.0, c.x.1, c.xp.0, c.xp.1);
    }
    out
}

pub fn write_correspondences(set: &CorrespondenceSet, path: impl AsRef<Path>) -> Result<()> {
    Ok(std::fs::write(path, format_correspondences(set))?)
}

/// A float written with 17 significant digits.
fn raw(v: f64) -> Box<RawValue> {
    RawValue::from_string(format!("{v:.16e}")).expect("finite floats are valid JSON")
}

fn raw_fundamental(f: &FundamentalMatrix) -> Vec<Box<RawValue>> {
    f.to_row_major().iter().map(|&v| raw(v)).collect()
}

fn point3(p: &HomogeneousPoint) -> [f64; 3] {
    let c = p.coords();
    [c.x, c.y, c.z]
}

fn vec3(v: &Vector3<f64>) -> [f64; 3] {
    [v.x, v.y, v.z]
}

#[derive(Serialize)]
struct ControlPointsDoc {
    x1: [f64; 3],
    x2: [f64; 3],
    x1p: [f64; 3],
    x2p: [f64; 3],
}

#[derive(Serialize)]
struct StepOneDoc {
    homography: [f64; 4],
    line1: [f64; 3],
    line2: [f64; 3],
    line_members: Vec<usize>,
    line_score: usize,
    vote_sum: usize,
    control_points: ControlPointsDoc,
    anchors: [usize; 3],
    line_inliers: Vec<usize>,
    orientation_swapped: bool,
}

#[derive(Serialize)]
struct ConfigDoc<'a> {
    #[serde(flatten)]
    estimator: &'a EstimatorConfig,
    hough: &'a HoughParams,
}

#[derive(Serialize)]
struct ReportDoc<'a> {
    schema: u32,
    fundamental: Vec<Box<RawValue>>,
    inliers: &'a [usize],
    method: Method,
    samples_drawn: u64,
    hypothesis_evaluations: u64,
    low_confidence: bool,
    budget_saturated: bool,
    step1: Option<StepOneDoc>,
    residuals: ResidualStats,
    config: ConfigDoc<'a>,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    metrics: Option<&'a MetricsReport>,
}

/// Report JSON. Wall-clock times are left out so identical runs produce
/// identical bytes.
pub fn report_json(
    report: &EstimateReport,
    cfg: &EstimatorConfig,
    hough: &HoughParams,
    metrics: Option<&MetricsReport>,
) -> Result<String> {
    let step1 = report.step1.as_ref().map(|s| StepOneDoc {
        homography: s.homography.entries(),
        line1: vec3(&s.line_match.line1.coeffs()),
        line2: vec3(&s.line_match.line2.coeffs()),
        line_members: s.line_match.member_indices.clone(),
        line_score: s.line_match.score,
        vote_sum: s.line_match.vote_sum,
        control_points: ControlPointsDoc {
            x1: point3(&s.control_points.x1),
            x2: point3(&s.control_points.x2),
            x1p: point3(&s.control_points.x1p),
            x2p: point3(&s.control_points.x2p),
        },
        anchors: s.anchor_indices,
        line_inliers: s.line_inliers.clone(),
        orientation_swapped: s.orientation_swapped,
    });
    let doc = ReportDoc {
        schema: SCHEMA_VERSION,
        fundamental: raw_fundamental(&report.f),
        inliers: &report.inlier_indices,
        method: report.method_used,
        samples_drawn: report.samples_drawn,
        hypothesis_evaluations: report.hypothesis_evaluations,
        low_confidence: report.low_confidence,
        budget_saturated: report.budget_saturated,
        step1,
        residuals: report.residual_stats,
        config: ConfigDoc { estimator: cfg, hough },
        seed: cfg.seed,
        metrics,
    };
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

pub fn write_report(
    report: &EstimateReport,
    cfg: &EstimatorConfig,
    hough: &HoughParams,
    metrics: Option<&MetricsReport>,
    path: impl AsRef<Path>,
) -> Result<()> {
    Ok(std::fs::write(path, report_json(report, cfg, hough, metrics)?)?)
}

/// The parts of a report file needed to evaluate it.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ReportSummary {
    pub fundamental: [f64; 9],
    pub inliers: Vec<usize>,
    pub method: Method,
    pub samples_drawn: u64,
    pub hypothesis_evaluations: u64,
    pub seed: u64,
}

pub fn parse_report(text: &str) -> Result<ReportSummary> {
    Ok(serde_json::from_str(text)?)
}

pub fn read_report(path: impl AsRef<Path>) -> Result<ReportSummary> {
    parse_report(&std::fs::read_to_string(path)?)
}

#[derive(Serialize)]
struct GroundTruthDoc<'a> {
    schema: u32,
    fundamental: Vec<Box<RawValue>>,
    inlier_mask: &'a [bool],
    line_mask: &'a [bool],
    epipole1: [f64; 3],
    epipole2: [f64; 3],
    #[serde(skip_serializing_if = "Option::is_none")]
    spec: Option<&'a SyntheticSceneSpec>,
}

#[derive(Deserialize)]
struct GroundTruthIn {
    fundamental: [f64; 9],
    inlier_mask: Vec<bool>,
    line_mask: Vec<bool>,
    epipole1: [f64; 3],
    epipole2: [f64; 3],
}

pub fn ground_truth_json(gt: &GroundTruth, spec: Option<&SyntheticSceneSpec>) -> Result<String> {
    let doc = GroundTruthDoc {
        schema: SCHEMA_VERSION,
        fundamental: raw_fundamental(&gt.f_gt),
        inlier_mask: &gt.inlier_mask,
        line_mask: &gt.line3d_member_mask,
        epipole1: vec3(&gt.epipole1),
        epipole2: vec3(&gt.epipole2),
        spec,
    };
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

pub fn parse_ground_truth(text: &str) -> Result<GroundTruth> {
    let doc: GroundTruthIn = serde_json::from_str(text)?;
    if doc.inlier_mask.len() != doc.line_mask.len() {
        return Err(Error::InvalidInput("ground truth masks differ in length".into()));
    }
    Ok(GroundTruth {
        f_gt: FundamentalMatrix::from_row_major(&doc.fundamental)?,
        inlier_mask: doc.inlier_mask,
        line3d_member_mask: doc.line_mask,
        epipole1: Vector3::from(doc.epipole1),
        epipole2: Vector3::from(doc.epipole2),
    })
}

pub fn read_ground_truth(path: impl AsRef<Path>) -> Result<GroundTruth> {
    parse_ground_truth(&std::fs::read_to_string(path)?)
}

pub fn write_ground_truth(gt: &GroundTruth, spec: Option<&SyntheticSceneSpec>, path: impl AsRef<Path>) -> Result<()> {
    Ok(std::fs::write(path, ground_truth_json(gt, spec)?)?)
}
