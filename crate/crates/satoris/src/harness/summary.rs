//! Summary emission: aggregate table, per-level rankings and a long-format
//! file for external plotting.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::io::format_value;

use super::records::{write_aggregates, AggregateRow, CellRecord};
use super::run::ExperimentResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SummaryFormat {
    #[default]
    Csv,
}

impl std::str::FromStr for SummaryFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(SummaryFormat::Csv),
            other => Err(Error::InvalidArgument(format!(
                "unknown summary format {other:?}, expected csv"
            ))),
        }
    }
}

pub const RANKINGS_FILE: &str = "rankings.txt";
pub const LONG_FILE: &str = "long.csv";

/// Writes `aggregate.csv`, `rankings.txt` and `long.csv` under `dir` and
/// returns their paths.
pub fn summarize(
    result: &ExperimentResult,
    format: SummaryFormat,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    if result.records.is_empty() {
        return Err(Error::InvalidArgument("no records to summarize".into()));
    }
    let SummaryFormat::Csv = format;
    std::fs::create_dir_all(dir)?;
    let aggregate_path = write_aggregates(dir, &result.aggregates)?;
    let rankings_path = write_rankings(dir, &result.aggregates)?;
    let long_path = write_long(dir, &result.records)?;
    Ok(vec![aggregate_path, rankings_path, long_path])
}

/// Plain-text table: methods ranked by mean RRMSE within each level.
fn write_rankings(dir: &Path, rows: &[AggregateRow]) -> Result<PathBuf> {
    let mut levels: Vec<f64> = rows.iter().map(|r| r.level).collect();
    levels.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    levels.dedup();

    let mut out = String::new();
    for level in levels {
        let mut at_level: Vec<&AggregateRow> =
            rows.iter().filter(|r| r.level == level).collect();
        at_level.sort_by(|a, b| {
            a.rrmse_mean
                .partial_cmp(&b.rrmse_mean)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.method.cmp(&b.method))
        });
        out.push_str(&format!("missingness {level}\n"));
        for (rank, row) in at_level.iter().enumerate() {
            out.push_str(&format!(
                "  {:>2}. {:<16} rrmse {:.6} +- {:.6}   mae {:.6} +- {:.6}   ({} cells)\n",
                rank + 1,
                row.method,
                row.rrmse_mean,
                row.rrmse_std,
                row.mae_mean,
                row.mae_std,
                row.cells
            ));
        }
        out.push('\n');
    }
    let path = dir.join(RANKINGS_FILE);
    std::fs::write(&path, out)?;
    Ok(path)
}

/// Long format: one row per (record, metric), ready for external plotting.
fn write_long(dir: &Path, records: &[CellRecord]) -> Result<PathBuf> {
    let mut out = String::from("day,method,level,trial,metric,value\n");
    for r in records {
        if let Some(v) = r.rrmse {
            out.push_str(&format!(
                "{},{},{},{},rrmse,{}\n",
                r.day,
                r.method,
                r.level,
                r.trial,
                format_value(v)
            ));
        }
        if let Some(v) = r.mae {
            out.push_str(&format!(
                "{},{},{},{},mae,{}\n",
                r.day,
                r.method,
                r.level,
                r.trial,
                format_value(v)
            ));
        }
    }
    let path = dir.join(LONG_FILE);
    std::fs::write(&path, out)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::records::TimingRecord;

    fn record(method: &str, level: f64, rrmse: f64) -> CellRecord {
        CellRecord {
            day: 0,
            method: method.into(),
            level,
            trial: 0,
            mask_seed: 1,
            mask_hash: "aa".into(),
            rrmse: Some(rrmse),
            mae: Some(rrmse * 2.0),
            n_holdout: 10,
            status: "ok".into(),
        }
    }

    fn result_with(records: Vec<CellRecord>) -> ExperimentResult {
        let aggregates = crate::harness::records::aggregate_records(&records);
        ExperimentResult {
            records,
            timings: Vec::<TimingRecord>::new(),
            aggregates,
        }
    }

    #[test]
    fn single_record_summary() {
        let dir = tempfile::tempdir().unwrap();
        let result = result_with(vec![record("mean", 0.5, 0.3)]);
        let files = summarize(&result, SummaryFormat::Csv, dir.path()).unwrap();
        assert_eq!(files.len(), 3);
        let aggregate = std::fs::read_to_string(&files[0]).unwrap();
        assert_eq!(aggregate.lines().count(), 2);
        assert!(aggregate.lines().nth(1).unwrap().starts_with("mean,0.5"));
        // Single report: std exactly 0.
        assert!(aggregate.contains(",0,"));
    }

    #[test]
    fn rankings_sort_by_rrmse_within_level() {
        let dir = tempfile::tempdir().unwrap();
        let result = result_with(vec![
            record("worse", 0.5, 0.9),
            record("better", 0.5, 0.1),
            record("middle", 0.5, 0.4),
        ]);
        summarize(&result, SummaryFormat::Csv, dir.path()).unwrap();
        let text = std::fs::read_to_string(dir.path().join(RANKINGS_FILE)).unwrap();
        let b = text.find("better").unwrap();
        let m = text.find("middle").unwrap();
        let w = text.find("worse").unwrap();
        assert!(b < m && m < w, "ranking order wrong:\n{text}");
    }

    #[test]
    fn long_format_round_trips_values() {
        let dir = tempfile::tempdir().unwrap();
        let result = result_with(vec![record("mean", 0.25, 0.125)]);
        summarize(&result, SummaryFormat::Csv, dir.path()).unwrap();
        let text = std::fs::read_to_string(dir.path().join(LONG_FILE)).unwrap();
        let mut got_rrmse = false;
        for line in text.lines().skip(1) {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 6);
            if fields[4] == "rrmse" {
                let v: f64 = fields[5].parse().unwrap();
                assert!((v - 0.125).abs() < 1e-12);
                got_rrmse = true;
            }
        }
        assert!(got_rrmse);
    }

    #[test]
    fn empty_result_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let result = result_with(vec![]);
        assert!(summarize(&result, SummaryFormat::Csv, dir.path()).is_err());
    }
}
