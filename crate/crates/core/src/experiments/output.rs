//! CSV emission of batch summaries and per-round traces.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::batch::BatchSummary;
use crate::error::{Error, Result};
use crate::game::{RunResult, Tracking};
use crate::learners::LearnerKind;
use crate::thresholds::ThresholdMode;

pub const SUMMARY_HEADER: &str = "scenario,learner,tracking,threshold_mode,d,runs,delta,mean_tau,q1_tau,q3_tau,error_count,mean_round_nanos,mean_support_size";
pub const TRACE_HEADER: &str = "t,action,statistic,beta,candidate,support_size";

/// One line of the summary CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scenario: String,
    pub learner: LearnerKind,
    pub tracking: Tracking,
    pub threshold_mode: ThresholdMode,
    pub d: usize,
    pub runs: u64,
    pub delta: f64,
    pub mean_tau: f64,
    pub q1_tau: f64,
    pub q3_tau: f64,
    pub error_count: u64,
    pub mean_round_nanos: f64,
    pub mean_support_size: f64,
}

impl From<&BatchSummary> for SummaryRow {
    fn from(s: &BatchSummary) -> Self {
        Self {
            scenario: s.scenario.clone(),
            learner: s.config.learner,
            tracking: s.config.tracking,
            threshold_mode: s.config.threshold,
            d: s.d,
            runs: s.stats.runs,
            delta: s.config.delta,
            mean_tau: s.stats.mean_tau,
            q1_tau: s.stats.q1_tau,
            q3_tau: s.stats.q3_tau,
            error_count: s.stats.error_count,
            mean_round_nanos: s.timing.mean_round_nanos,
            mean_support_size: s.stats.mean_support_size,
        }
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes one row per summary under [`SUMMARY_HEADER`].
pub fn emit_csv(summaries: &[BatchSummary], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    write_csv(summaries, file).map_err(csv_err(path))
}

pub fn write_csv<W: Write>(
    summaries: &[BatchSummary],
    out: W,
) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    if summaries.is_empty() {
        w.write_record(SUMMARY_HEADER.split(','))?;
    }
    for s in summaries {
        w.serialize(SummaryRow::from(s))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<SummaryRow>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(csv_err(path))
}

/// Writes the per-round records of a run under [`TRACE_HEADER`]; the
/// action field is empty in the stopping round.
pub fn emit_run_trace(result: &RunResult, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    write_run_trace(result, BufWriter::new(file)).map_err(io_err(path))
}

pub fn write_run_trace<W: Write>(result: &RunResult, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for r in &result.rounds {
        let action = r
            .action
            .as_ref()
            .map(ToString::to_string)
            .unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.t, action, r.statistic, r.beta, r.candidate, r.support_size
        )?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{run_batch, Scenario};
    use crate::game::{run_combgame, GameConfig};
    use crate::learners::LearnerKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn summaries() -> Vec<BatchSummary> {
        let s = Scenario::uniform_matroid(5, 3, 0.1).unwrap();
        [LearnerKind::Lloo, LearnerKind::Uniform]
            .into_iter()
            .map(|learner| {
                let config = GameConfig {
                    learner,
                    ..GameConfig::default()
                };
                run_batch(&s, &config, 4, 1, 2).unwrap()
            })
            .collect()
    }

    #[test]
    fn header_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("summary.csv");
        let sums = summaries();
        emit_csv(&sums, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().next().unwrap(), SUMMARY_HEADER);
        assert_eq!(text.lines().count(), 3);
        let rows = read_csv(&path).unwrap();
        let want: Vec<SummaryRow> = sums.iter().map(SummaryRow::from).collect();
        assert_eq!(rows, want);
        assert_eq!(rows[0].learner, LearnerKind::Lloo);
    }

    #[test]
    fn empty_summary_still_has_header() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim_end(), SUMMARY_HEADER);
    }

    #[test]
    fn trace_lines() {
        let s = Scenario::uniform_matroid(5, 3, 0.1).unwrap();
        let config = GameConfig {
            record_rounds: true,
            ..GameConfig::default()
        };
        let r = run_combgame(
            &config,
            &s.instance,
            &s.actions,
            &s.answers,
            &mut ChaCha8Rng::seed_from_u64(3),
        )
        .unwrap();
        let mut buf = Vec::new();
        write_run_trace(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], TRACE_HEADER);
        assert_eq!(lines.len(), r.rounds.len() + 1);
        assert!(lines[1..].iter().all(|l| l.split(',').count() == 6));
        let last: Vec<&str> = lines.last().unwrap().split(',').collect();
        assert_eq!(last[0], r.stopping_time.to_string());
        assert_eq!(last[1], "");
    }

    #[test]
    fn io_errors_carry_the_path() {
        let err = emit_csv(&[], Path::new("/nonexistent/dir/x.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/x.csv"));
    }
}
