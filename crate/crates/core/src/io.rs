//! Text formats: TOML curve and run configuration files, CSV block tables
//! and traces, TOML summaries.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so a block
//! table read back reproduces every field bit for bit.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::chordscan::{FeedrateScatter, Limits};
use crate::error::{Error, Result};
use crate::geometry::Curve;
use crate::profile::ProfileFamily;
use crate::segmentation::{Block, BlockKind};
use crate::simulator::{InterpolationSample, RunSummary};

/// Header of the block table.
pub const BLOCK_COLUMNS: [&str; 8] = [
    "u_s",
    "u_e",
    "v_s [mm/s]",
    "v_e [mm/s]",
    "length [mm]",
    "duration [s]",
    "shape_s",
    "kind",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveFile {
    degree: usize,
    control_points: Vec<Vec<f64>>,
    /// All ones when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
    /// Uniform clamped knots when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    knots: Option<Vec<f64>>,
}

/// 1-based line and column of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text.as_bytes()[..offset];
    let line = before.iter().filter(|&&b| b == b'\n').count() + 1;
    let line_start = before.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1);
    let col = String::from_utf8_lossy(&before[line_start..]).chars().count() + 1;
    (line, col)
}

fn toml_error(source_name: &str, text: &str, err: &toml::de::Error) -> Error {
    let location = match err.span() {
        Some(span) => {
            let (line, col) = line_col(text, span.start);
            format!("{line}:{col}")
        }
        None => "?".to_string(),
    };
    Error::parse(source_name, location, err.message().trim_end())
}

/// Parses a curve document:
///
/// ```toml
/// degree = 3
/// control_points = [[0, 0], [10, 0], [10, 10], [20, 10]]
/// weights = [1, 1, 1, 1]
/// knots = [0, 0, 0, 0, 1, 1, 1, 1]
/// ```
pub fn parse_curve(text: &str, source_name: &str) -> Result<Curve> {
    let file: CurveFile = toml::from_str(text).map_err(|e| toml_error(source_name, text, &e))?;
    let n = file.control_points.len();
    let weights = file.weights.unwrap_or_else(|| vec![1.0; n]);
    let knots = match file.knots {
        Some(k) => k,
        None => {
            if file.degree == 0 || n <= file.degree {
                return Err(Error::InvalidCurve(format!(
                    "cannot build default knots for {n} control points of degree {}",
                    file.degree
                )));
            }
            Curve::uniform_knots(file.degree, n)
        }
    };
    Curve::new(file.degree, &file.control_points, weights, knots)
}

pub fn format_curve(curve: &Curve) -> Result<String> {
    let dim = curve.dim();
    let file = CurveFile {
        degree: curve.degree(),
        control_points: curve.control_points().iter().map(|p| p.to_array()[..dim].to_vec()).collect(),
        weights: Some(curve.weights().to_vec()),
        knots: Some(curve.knots().to_vec()),
    };
    toml::to_string(&file).map_err(|e| Error::InternalConsistency(format!("curve serialization: {e}")))
}

pub fn read_curve(path: &Path) -> Result<Curve> {
    let text = read_text(path)?;
    parse_curve(&text, &path.display().to_string())
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Which pipelines to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Sigmoid,
    Sine,
    Both,
}

impl Method {
    pub fn families(self) -> &'static [ProfileFamily] {
        match self {
            Method::Sigmoid => &[ProfileFamily::Sigmoid],
            Method::Sine => &[ProfileFamily::Sine],
            Method::Both => &[ProfileFamily::Sigmoid, ProfileFamily::Sine],
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "sigmoid" => Ok(Method::Sigmoid),
            "sine" => Ok(Method::Sine),
            "both" => Ok(Method::Both),
            other => Err(format!("unknown method `{other}` (expected sigmoid, sine or both)")),
        }
    }
}

/// Which output files to write.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Emit {
    /// Feed, kinematics, chord error and scatter traces.
    pub traces: bool,
    pub blocks: bool,
    /// Per-method summary and, for both methods, the comparison.
    pub summary: bool,
}

impl Default for Emit {
    fn default() -> Self {
        Emit {
            traces: true,
            blocks: true,
            summary: true,
        }
    }
}

/// Per-field overrides applied on top of a preset.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitOverrides {
    pub ts: Option<f64>,
    pub delta_max: Option<f64>,
    pub v_max: Option<f64>,
    pub a_max: Option<f64>,
    pub j_max: Option<f64>,
    pub shape_s: Option<f64>,
    pub mu_s: Option<f64>,
}

impl LimitOverrides {
    pub fn apply(&self, base: Limits) -> Limits {
        Limits {
            ts: self.ts.unwrap_or(base.ts),
            delta_max: self.delta_max.unwrap_or(base.delta_max),
            v_max: self.v_max.unwrap_or(base.v_max),
            a_max: self.a_max.unwrap_or(base.a_max),
            j_max: self.j_max.unwrap_or(base.j_max),
            shape_s: self.shape_s.unwrap_or(base.shape_s),
            mu_s: self.mu_s.or(base.mu_s),
        }
    }
}

/// Run configuration document. Every field is optional:
///
/// ```toml
/// preset = "high-dynamics"
/// method = "both"
/// curve = "path.toml"      # relative to this file
/// out_dir = "out"          # relative to this file
///
/// [limits]
/// j_max = 40000.0
///
/// [emit]
/// traces = false
/// ```
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub preset: Option<String>,
    pub method: Option<Method>,
    pub curve: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub limits: LimitOverrides,
    pub emit: Emit,
}

impl ConfigFile {
    /// Preset (standard when unnamed) with the overrides applied, validated.
    pub fn limits(&self) -> Result<Limits> {
        let base = match &self.preset {
            None => Limits::standard(),
            Some(name) => Limits::preset(name).ok_or_else(|| {
                Error::InvalidLimits(format!("unknown preset `{name}` (expected standard or high-dynamics)"))
            })?,
        };
        let limits = self.limits.apply(base);
        limits.validate()?;
        Ok(limits)
    }
}

pub fn parse_config(text: &str, source_name: &str) -> Result<ConfigFile> {
    let config: ConfigFile = toml::from_str(text).map_err(|e| toml_error(source_name, text, &e))?;
    config.limits().map_err(|e| Error::parse(source_name, "limits", e.to_string()))?;
    Ok(config)
}

/// Reads a configuration file; relative `curve` and `out_dir` paths are
/// resolved against the file's directory.
pub fn read_config(path: &Path) -> Result<ConfigFile> {
    let mut config = parse_config(&read_text(path)?, &path.display().to_string())?;
    let dir = path.parent().unwrap_or(Path::new(""));
    for p in [&mut config.curve, &mut config.out_dir].into_iter().flatten() {
        if p.is_relative() {
            *p = dir.join(&*p);
        }
    }
    Ok(config)
}

fn finite(what: &str, x: f64) -> Result<String> {
    if x.is_finite() {
        Ok(x.to_string())
    } else {
        Err(Error::InternalConsistency(format!("{what} is not finite ({x})")))
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn write_table<W: Write>(out: W, header: &[&str], rows: impl IntoIterator<Item = Result<Vec<String>>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        w.write_record(&row?).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_blocks<W: Write>(out: W, blocks: &[Block]) -> Result<()> {
    write_table(
        out,
        &BLOCK_COLUMNS,
        blocks.iter().map(|b| {
            Ok(vec![
                finite("u_s", b.u_s)?,
                finite("u_e", b.u_e)?,
                finite("v_s", b.v_s)?,
                finite("v_e", b.v_e)?,
                finite("length", b.length)?,
                finite("duration", b.duration)?,
                finite("shape_s", b.shape_s)?,
                b.kind.as_str().to_string(),
            ])
        }),
    )
}

/// Reads a block table written by [`write_blocks`]. Rows are checked field
/// by field; cross-block consistency is left to the consumer.
pub fn parse_blocks(text: &str, source_name: &str) -> Result<Vec<Block>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let loc = |pos: Option<&csv::Position>| pos.map_or("?".to_string(), |p| format!("line {}", p.line()));
    let header = reader
        .headers()
        .map_err(|e| Error::parse(source_name, loc(e.position()), e.to_string()))?
        .clone();
    if header.iter().ne(BLOCK_COLUMNS.iter().copied()) {
        return Err(Error::parse(
            source_name,
            "line 1",
            format!("expected header `{}`", BLOCK_COLUMNS.join(",")),
        ));
    }
    let mut blocks = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::parse(source_name, loc(e.position()), e.to_string()))?;
        let at = loc(record.position());
        let num = |i: usize| -> Result<f64> {
            let field = &record[i];
            let x: f64 = field
                .parse()
                .map_err(|_| Error::parse(source_name, &at, format!("{}: `{field}` is not a number", BLOCK_COLUMNS[i])))?;
            if !x.is_finite() {
                return Err(Error::parse(source_name, &at, format!("{}: `{field}` is not finite", BLOCK_COLUMNS[i])));
            }
            Ok(x)
        };
        let block = Block {
            u_s: num(0)?,
            u_e: num(1)?,
            v_s: num(2)?,
            v_e: num(3)?,
            length: num(4)?,
            duration: num(5)?,
            shape_s: num(6)?,
            kind: record[7]
                .parse::<BlockKind>()
                .map_err(|m| Error::parse(source_name, &at, m))?,
        };
        let bad = if !(0.0..=1.0).contains(&block.u_s) || !(block.u_s..=1.0).contains(&block.u_e) {
            Some("parameters must satisfy 0 <= u_s <= u_e <= 1")
        } else if block.v_s < 0.0 || block.v_e < 0.0 || block.length < 0.0 || block.duration < 0.0 {
            Some("feeds, length and duration must be non-negative")
        } else if block.shape_s <= 0.0 {
            Some("shape_s must be positive")
        } else {
            None
        };
        if let Some(message) = bad {
            return Err(Error::parse(source_name, at, message));
        }
        blocks.push(block);
    }
    if blocks.is_empty() {
        return Err(Error::parse(source_name, "line 2", "block table has no rows"));
    }
    Ok(blocks)
}

pub fn read_blocks(path: &Path) -> Result<Vec<Block>> {
    parse_blocks(&read_text(path)?, &path.display().to_string())
}

/// Chord-limited feed per scan point.
pub fn write_scatter<W: Write>(out: W, scatter: &FeedrateScatter) -> Result<()> {
    write_table(
        out,
        &["u", "limit [mm/s]"],
        scatter.points.iter().map(|p| Ok(vec![finite("u", p.u)?, finite("limit", p.v)?])),
    )
}

/// Commanded feed against the curve parameter.
pub fn write_feedrate<W: Write>(out: W, samples: &[InterpolationSample]) -> Result<()> {
    write_table(
        out,
        &["u", "feed [mm/s]"],
        samples.iter().map(|s| Ok(vec![finite("u", s.u)?, finite("feed", s.v)?])),
    )
}

/// Position, feed, acceleration and jerk against time.
pub fn write_kinematics<W: Write>(out: W, samples: &[InterpolationSample]) -> Result<()> {
    write_table(
        out,
        &[
            "t [s]",
            "u",
            "x [mm]",
            "y [mm]",
            "z [mm]",
            "feed [mm/s]",
            "accel [mm/s^2]",
            "jerk [mm/s^3]",
        ],
        samples.iter().map(|s| {
            Ok(vec![
                finite("t", s.t)?,
                finite("u", s.u)?,
                finite("x", s.position.x)?,
                finite("y", s.position.y)?,
                finite("z", s.position.z)?,
                finite("feed", s.v)?,
                finite("accel", s.accel)?,
                finite("jerk", s.jerk)?,
            ])
        }),
    )
}

pub fn write_chord_error<W: Write>(out: W, samples: &[InterpolationSample]) -> Result<()> {
    write_table(
        out,
        &["u", "chord_err [mm]"],
        samples.iter().map(|s| Ok(vec![finite("u", s.u)?, finite("chord_err", s.chord_err)?])),
    )
}

/// Per-method summary document.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryDoc {
    pub method: ProfileFamily,
    pub max_feed: f64,
    pub max_accel: f64,
    pub max_jerk: f64,
    pub max_chord_err: f64,
    pub total_time: f64,
    pub n_points: usize,
    /// Breaking points including both path ends; absent for replayed tables.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breakpoints: Option<usize>,
    pub blocks: usize,
    /// Measured peak over its limit; zero for an unbounded limit.
    pub accel_utilization: f64,
    pub jerk_utilization: f64,
    pub chord_utilization: f64,
}

fn utilization(peak: f64, limit: f64) -> f64 {
    if limit.is_finite() {
        peak / limit
    } else {
        0.0
    }
}

impl SummaryDoc {
    pub fn new(
        method: ProfileFamily,
        run: &RunSummary,
        breakpoints: Option<usize>,
        blocks: usize,
        limits: &Limits,
    ) -> Self {
        SummaryDoc {
            method,
            max_feed: run.max_feed,
            max_accel: run.max_accel,
            max_jerk: run.max_jerk,
            max_chord_err: run.max_chord_err,
            total_time: run.total_time,
            n_points: run.n_points,
            breakpoints,
            blocks,
            accel_utilization: utilization(run.max_accel, limits.a_max),
            jerk_utilization: utilization(run.max_jerk, limits.j_max),
            chord_utilization: utilization(run.max_chord_err, limits.delta_max),
        }
    }

    pub fn run_summary(&self) -> RunSummary {
        RunSummary {
            max_feed: self.max_feed,
            max_accel: self.max_accel,
            max_jerk: self.max_jerk,
            max_chord_err: self.max_chord_err,
            total_time: self.total_time,
            n_points: self.n_points,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodFigures {
    pub total_time: f64,
    pub n_points: usize,
    pub accel_utilization: f64,
    pub jerk_utilization: f64,
}

impl From<&SummaryDoc> for MethodFigures {
    fn from(s: &SummaryDoc) -> Self {
        MethodFigures {
            total_time: s.total_time,
            n_points: s.n_points,
            accel_utilization: s.accel_utilization,
            jerk_utilization: s.jerk_utilization,
        }
    }
}

/// Sigmoid against sine on the same blocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonDoc {
    /// Sigmoid time over sine time.
    pub time_ratio: f64,
    pub point_ratio: f64,
    /// Time saved by the sigmoid schedule, percent of the sine time.
    pub improvement_percent: f64,
    pub sigmoid: MethodFigures,
    pub sine: MethodFigures,
}

impl ComparisonDoc {
    pub fn new(sigmoid: &SummaryDoc, sine: &SummaryDoc) -> Self {
        let time_ratio = sigmoid.total_time / sine.total_time;
        ComparisonDoc {
            time_ratio,
            point_ratio: sigmoid.n_points as f64 / sine.n_points as f64,
            improvement_percent: 100.0 * (1.0 - time_ratio),
            sigmoid: sigmoid.into(),
            sine: sine.into(),
        }
    }
}

/// TOML text of a summary or comparison; rejects non-finite numbers.
pub fn format_toml<T: Serialize>(doc: &T) -> Result<String> {
    let value = toml::Value::try_from(doc).map_err(|e| Error::InternalConsistency(e.to_string()))?;
    check_finite(&value, "")?;
    toml::to_string(&value).map_err(|e| Error::InternalConsistency(e.to_string()))
}

fn check_finite(value: &toml::Value, path: &str) -> Result<()> {
    match value {
        toml::Value::Float(x) => finite(path, *x).map(|_| ()),
        toml::Value::Table(t) => t.iter().try_for_each(|(k, v)| check_finite(v, k)),
        toml::Value::Array(a) => a.iter().try_for_each(|v| check_finite(v, path)),
        _ => Ok(()),
    }
}

pub fn parse_summary(text: &str, source_name: &str) -> Result<SummaryDoc> {
    toml::from_str(text).map_err(|e| toml_error(source_name, text, &e))
}

pub fn parse_comparison(text: &str, source_name: &str) -> Result<ComparisonDoc> {
    toml::from_str(text).map_err(|e| toml_error(source_name, text, &e))
}
