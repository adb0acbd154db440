//! Result record types and their CSV persistence.
//!
//! Two files with different contracts: `records.partial.csv` is an
//! append-only completion log that makes interrupted grids resumable, and
//! `records.csv` is the canonical output, rewritten sorted at the end of a
//! run so its bytes do not depend on scheduling. Wall-clock timings live in
//! a separate `timings.csv` sidecar; they can never be run-reproducible and
//! must not pollute the canonical records.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::io::format_value;

/// One (day, method, level, trial) measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct CellRecord {
    pub day: u32,
    pub method: String,
    pub level: f64,
    pub trial: u32,
    pub mask_seed: u64,
    /// Hex fingerprint of the mask; equal across methods within a cell.
    pub mask_hash: String,
    pub rrmse: Option<f64>,
    pub mae: Option<f64>,
    pub n_holdout: usize,
    pub status: String,
}

impl CellRecord {
    /// Resume key: one record per (day, method, level, trial).
    pub fn key(&self) -> (u32, String, String, u32) {
        (self.day, self.method.clone(), format!("{}", self.level), self.trial)
    }
}

/// Wall time for one grid cell, sidecar only.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingRecord {
    pub day: u32,
    pub method: String,
    pub level: f64,
    pub trial: u32,
    pub wall_seconds: f64,
}

/// Per-(method, level) aggregate over successful records.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub method: String,
    pub level: f64,
    pub rrmse_mean: f64,
    pub rrmse_std: f64,
    pub mae_mean: f64,
    pub mae_std: f64,
    pub cells: usize,
}

pub const RECORDS_FILE: &str = "records.csv";
pub const PARTIAL_FILE: &str = "records.partial.csv";
pub const TIMINGS_FILE: &str = "timings.csv";
pub const AGGREGATE_FILE: &str = "aggregate.csv";

const RECORD_HEADER: &str = "day,method,level,trial,mask_seed,mask_hash,rrmse,mae,n_holdout,status";

fn record_line(r: &CellRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        r.day,
        r.method,
        r.level,
        r.trial,
        r.mask_seed,
        r.mask_hash,
        r.rrmse.map(format_value).unwrap_or_default(),
        r.mae.map(format_value).unwrap_or_default(),
        r.n_holdout,
        r.status
    )
}

fn parse_record(line: &str) -> Result<CellRecord> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != 10 {
        return Err(Error::Data(format!(
            "record has {} fields, expected 10: {line:?}",
            fields.len()
        )));
    }
    let parse_opt = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse::<f64>()
                .map(Some)
                .map_err(|_| Error::Data(format!("bad number {s:?} in record")))
        }
    };
    Ok(CellRecord {
        day: fields[0]
            .parse()
            .map_err(|_| Error::Data(format!("bad day {:?}", fields[0])))?,
        method: fields[1].to_string(),
        level: fields[2]
            .parse()
            .map_err(|_| Error::Data(format!("bad level {:?}", fields[2])))?,
        trial: fields[3]
            .parse()
            .map_err(|_| Error::Data(format!("bad trial {:?}", fields[3])))?,
        mask_seed: fields[4]
            .parse()
            .map_err(|_| Error::Data(format!("bad seed {:?}", fields[4])))?,
        mask_hash: fields[5].to_string(),
        rrmse: parse_opt(fields[6])?,
        mae: parse_opt(fields[7])?,
        n_holdout: fields[8]
            .parse()
            .map_err(|_| Error::Data(format!("bad holdout count {:?}", fields[8])))?,
        status: fields[9].to_string(),
    })
}

/// Append-only writer for the partial log.
pub struct PartialWriter {
    file: fs::File,
}

impl PartialWriter {
    pub fn open(dir: &Path) -> Result<Self> {
        let path = dir.join(PARTIAL_FILE);
        let fresh = !path.exists();
        let mut file = fs::OpenOptions::new().create(true).append(true).open(&path)?;
        if fresh {
            writeln!(file, "{RECORD_HEADER}")?;
        }
        Ok(Self { file })
    }

    pub fn append(&mut self, record: &CellRecord) -> Result<()> {
        writeln!(self.file, "{}", record_line(record))?;
        self.file.flush()?;
        Ok(())
    }
}

/// Loads completed cells from an interrupted run. Missing file means a
/// fresh start.
pub fn load_partial(dir: &Path) -> Result<Vec<CellRecord>> {
    let path = dir.join(PARTIAL_FILE);
    if !path.exists() {
        return Ok(Vec::new());
    }
    read_records(&path)
}

pub fn read_records(path: &Path) -> Result<Vec<CellRecord>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Data(format!("cannot read {}: {e}", path.display())))?;
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        records.push(parse_record(line)?);
    }
    Ok(records)
}

/// Canonical ordering: day, then level, then trial, then method.
pub fn sort_canonical(records: &mut [CellRecord]) {
    records.sort_by(|a, b| {
        (a.day, a.level, a.trial, &a.method)
            .partial_cmp(&(b.day, b.level, b.trial, &b.method))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
}

/// Rewrites the canonical records file.
pub fn write_records(dir: &Path, records: &[CellRecord]) -> Result<PathBuf> {
    let path = dir.join(RECORDS_FILE);
    let mut out = String::from(RECORD_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&record_line(r));
        out.push('\n');
    }
    fs::write(&path, out)?;
    Ok(path)
}

/// Appends timings to the sidecar.
pub fn append_timings(dir: &Path, timings: &[TimingRecord]) -> Result<PathBuf> {
    let path = dir.join(TIMINGS_FILE);
    let fresh = !path.exists();
    let mut file = fs::OpenOptions::new().create(true).append(true).open(&path)?;
    if fresh {
        writeln!(file, "day,method,level,trial,wall_seconds")?;
    }
    for t in timings {
        writeln!(
            file,
            "{},{},{},{},{:.6}",
            t.day, t.method, t.level, t.trial, t.wall_seconds
        )?;
    }
    Ok(path)
}

/// Groups successful records by (method, level) and aggregates the metrics
/// with population standard deviations.
pub fn aggregate_records(records: &[CellRecord]) -> Vec<AggregateRow> {
    let mut keys: Vec<(String, f64)> = Vec::new();
    for r in records {
        let key = (r.method.clone(), r.level);
        if !keys.iter().any(|k| k.0 == key.0 && k.1 == key.1) {
            keys.push(key);
        }
    }
    keys.sort_by(|a, b| {
        (&a.0, a.1)
            .partial_cmp(&(&b.0, b.1))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    keys.into_iter()
        .filter_map(|(method, level)| {
            let reports: Vec<crate::metrics::ErrorReport> = records
                .iter()
                .filter(|r| r.method == method && r.level == level)
                .filter_map(|r| {
                    Some(crate::metrics::ErrorReport {
                        rrmse: r.rrmse?,
                        mae: r.mae?,
                        n_holdout: r.n_holdout,
                    })
                })
                .collect();
            let summary = crate::metrics::aggregate(&reports).ok()?;
            Some(AggregateRow {
                method,
                level,
                rrmse_mean: summary.rrmse_mean,
                rrmse_std: summary.rrmse_std,
                mae_mean: summary.mae_mean,
                mae_std: summary.mae_std,
                cells: summary.count,
            })
        })
        .collect()
}

/// Writes the aggregate table.
pub fn write_aggregates(dir: &Path, rows: &[AggregateRow]) -> Result<PathBuf> {
    let path = dir.join(AGGREGATE_FILE);
    let mut out = String::from("method,level,rrmse_mean,rrmse_std,mae_mean,mae_std,cells\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.method,
            r.level,
            format_value(r.rrmse_mean),
            format_value(r.rrmse_std),
            format_value(r.mae_mean),
            format_value(r.mae_std),
            r.cells
        ));
    }
    fs::write(&path, out)?;
    Ok(path)
}

/// Keys of already-completed cells.
pub fn done_keys(records: &[CellRecord]) -> HashSet<(u32, String, String, u32)> {
    records.iter().map(|r| r.key()).collect()
}
