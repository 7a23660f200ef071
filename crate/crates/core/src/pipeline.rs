//! Scan, segment, schedule and replay a curve, then write the results.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use log::warn;

use crate::chordscan::{scan_curve, FeedrateScatter, Limits};
use crate::error::{Error, Result};
use crate::geometry::Curve;
use crate::io::{self, ComparisonDoc, Emit, Method, SummaryDoc};
use crate::optimizer::{schedule_with, ScheduleOptions};
use crate::profile::ProfileFamily;
use crate::segmentation::{segment, Block};
use crate::simulator::{interpolate, summarize, InterpolationSample};
use crate::sprofile::MONOTONE_SHAPE_LIMIT;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub curve_path: PathBuf,
    pub limits: Limits,
    pub method: Method,
    pub out_dir: PathBuf,
    pub emit: Emit,
}

/// Everything one profile family produced.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodOutcome {
    pub family: ProfileFamily,
    pub blocks: Vec<Block>,
    pub samples: Vec<InterpolationSample>,
    pub summary: SummaryDoc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub scatter: FeedrateScatter,
    /// Blocks as segmented, before scheduling.
    pub segmented: Vec<Block>,
    pub outcomes: Vec<MethodOutcome>,
    pub comparison: Option<ComparisonDoc>,
}

impl RunReport {
    pub fn outcome(&self, family: ProfileFamily) -> Option<&MethodOutcome> {
        self.outcomes.iter().find(|o| o.family == family)
    }
}

/// Schedules and replays `blocks` with one profile family.
pub fn run_method(
    curve: &Curve,
    segmented: &[Block],
    scatter: &FeedrateScatter,
    limits: &Limits,
    family: ProfileFamily,
) -> Result<MethodOutcome> {
    let blocks = schedule_with(curve, segmented, scatter, limits, family, &ScheduleOptions::default())?;
    let samples = interpolate(curve, &blocks, family, limits)?;
    let run = summarize(&samples, &blocks)?;
    let summary = SummaryDoc::new(family, &run, Some(segmented.len() + 1), blocks.len(), limits);
    Ok(MethodOutcome {
        family,
        blocks,
        samples,
        summary,
    })
}

/// The whole computation without any file output. With both methods the two
/// schedules share one segmentation and run on separate threads.
pub fn plan(curve: &Curve, limits: &Limits, method: Method) -> Result<RunReport> {
    limits.validate()?;
    if limits.shape_s > MONOTONE_SHAPE_LIMIT {
        warn!(
            "shape parameter {} exceeds {MONOTONE_SHAPE_LIMIT:.4}; block feeds will overshoot their end values",
            limits.shape_s
        );
    }
    let scatter = scan_curve(curve, limits)?;
    let segmented = segment(curve, &scatter, limits)?;
    let (segmented_ref, scatter_ref) = (&segmented, &scatter);
    let outcomes = std::thread::scope(|scope| {
        let handles: Vec<_> = method
            .families()
            .iter()
            .map(|&family| scope.spawn(move || run_method(curve, segmented_ref, scatter_ref, limits, family)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|p| std::panic::resume_unwind(p)))
            .collect::<Result<Vec<_>>>()
    })?;
    let comparison = match outcomes.as_slice() {
        [a, b] => Some(ComparisonDoc::new(&a.summary, &b.summary)),
        _ => None,
    };
    Ok(RunReport {
        scatter,
        segmented,
        outcomes,
        comparison,
    })
}

/// Replays a stored block table.
pub fn replay(curve: &Curve, blocks: &[Block], family: ProfileFamily, limits: &Limits) -> Result<MethodOutcome> {
    limits.validate()?;
    let samples = interpolate(curve, blocks, family, limits)?;
    let run = summarize(&samples, blocks)?;
    let summary = SummaryDoc::new(family, &run, None, blocks.len(), limits);
    Ok(MethodOutcome {
        family,
        blocks: blocks.to_vec(),
        samples,
        summary,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write_string(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Writes one method's files into `dir`.
pub fn write_outcome(dir: &Path, outcome: &MethodOutcome, emit: &Emit) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    if emit.traces {
        io::write_feedrate(create(&dir.join("feedrate.csv"))?, &outcome.samples)?;
        io::write_kinematics(create(&dir.join("kinematics.csv"))?, &outcome.samples)?;
        io::write_chord_error(create(&dir.join("chord_error.csv"))?, &outcome.samples)?;
    }
    if emit.blocks {
        io::write_blocks(create(&dir.join("blocks.csv"))?, &outcome.blocks)?;
    }
    if emit.summary {
        write_string(&dir.join("summary.toml"), &io::format_toml(&outcome.summary)?)?;
    }
    Ok(())
}

/// Writes a report under `out_dir`: `scatter.csv`, one directory per method
/// and, when both ran, `comparison.toml`.
pub fn write_report(out_dir: &Path, report: &RunReport, emit: &Emit) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::Io(format!("{}: {e}", out_dir.display())))?;
    if emit.traces {
        io::write_scatter(create(&out_dir.join("scatter.csv"))?, &report.scatter)?;
    }
    for outcome in &report.outcomes {
        write_outcome(&out_dir.join(outcome.family.as_str()), outcome, emit)?;
    }
    if let (true, Some(cmp)) = (emit.summary, &report.comparison) {
        write_string(&out_dir.join("comparison.toml"), &io::format_toml(cmp)?)?;
    }
    Ok(())
}

/// Loads the curve, plans and writes the report.
pub fn run(config: &RunConfig) -> Result<RunReport> {
    let curve = io::read_curve(&config.curve_path)?;
    let report = plan(&curve, &config.limits, config.method)?;
    write_report(&config.out_dir, &report, &config.emit)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(len: f64) -> Curve {
        Curve::new(1, &[vec![0.0, 0.0], vec![len, 0.0]], vec![1.0; 2], vec![0.0, 0.0, 1.0, 1.0]).unwrap()
    }

    #[test]
    fn straight_line_cruises() {
        let report = plan(&line(50.0), &Limits::standard(), Method::Both).unwrap();
        for o in &report.outcomes {
            assert_eq!(o.summary.max_chord_err, 0.0);
            assert!((o.summary.total_time - 0.5).abs() < 1e-12, "{}", o.summary.total_time);
            assert_eq!(o.summary.max_feed, 100.0);
        }
        let cmp = report.comparison.unwrap();
        assert_eq!(cmp.time_ratio, 1.0);
    }

    #[test]
    fn replay_matches_plan() {
        let curve = crate::testcurves::random_curve(3, &Default::default()).unwrap();
        let limits = Limits::high_dynamics();
        let report = plan(&curve, &limits, Method::Sigmoid).unwrap();
        let o = &report.outcomes[0];
        let again = replay(&curve, &o.blocks, o.family, &limits).unwrap();
        assert_eq!(again.samples, o.samples);
        assert_eq!(again.summary.run_summary(), o.summary.run_summary());
    }

    #[test]
    fn invalid_limits_stop_early() {
        let limits = Limits {
            v_max: 0.0,
            ..Limits::standard()
        };
        assert!(matches!(plan(&line(1.0), &limits, Method::Sine), Err(Error::InvalidLimits(_))));
    }
}
