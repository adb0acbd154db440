//! Grid execution: days x methods x missingness x trials.
//!
//! Every (day, level, trial) cell derives one mask from the master seed and
//! the cell coordinates, and every method in the cell runs on that same
//! masked input. Cells execute independently — optionally on a worker pool —
//! and append to a partial log for resumability; the canonical outputs are
//! rewritten sorted at the end so bytes never depend on scheduling.

use std::collections::HashMap;

use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::formulations::{
    default_deltas, impute_explicit_with_report, ExplicitMethod, ExplicitVariant, ImputeOptions,
};
use crate::imputers::{impute_stacked, ImputerRegistry};
use crate::mask::{apply_mask, generate_mask};
use crate::matrix::DensityMatrix;
use crate::metrics::evaluate;
use crate::subspace::{build_prior, SubspacePrior};

use super::data::load_dataset;
use super::records::{
    aggregate_records, append_timings, done_keys, load_partial, sort_canonical, write_aggregates,
    write_records, AggregateRow, CellRecord, PartialWriter, TimingRecord,
};
use super::seeds::mask_seed;
use super::spec::{base_name, resolve_method, DatasetSource, ExperimentSpec, MethodKind};
use super::synth::generate_synthetic_days;

/// Everything a finished grid produced.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub records: Vec<CellRecord>,
    pub timings: Vec<TimingRecord>,
    pub aggregates: Vec<AggregateRow>,
}

/// Runs the grid single-threaded.
pub fn run(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    run_with_jobs(spec, 1)
}

/// Runs the grid on `jobs` worker threads. Masks derive from cell
/// coordinates, so parallelism cannot change any result.
pub fn run_with_jobs(spec: &ExperimentSpec, jobs: usize) -> Result<ExperimentResult> {
    run_with_registry(spec, jobs, &ImputerRegistry::with_builtins())
}

/// Like [`run_with_jobs`], against a caller-supplied registry. Externally
/// registered imputers become benchmark methods, including their -h/-v
/// stacked variants.
pub fn run_with_registry(
    spec: &ExperimentSpec,
    jobs: usize,
    registry: &ImputerRegistry,
) -> Result<ExperimentResult> {
    spec.validate()?;
    let days = load_days(&spec.dataset)?;
    let pairs = resolve_pairs(spec, &days)?;

    // Resolve method names before spending any solver time.
    let methods: Vec<(usize, MethodKind)> = spec
        .methods
        .iter()
        .enumerate()
        .map(|(i, m)| resolve_method(m, registry).map(|k| (i, k)))
        .collect::<Result<_>>()?;

    // Priors are shared across cells: build each (neighbor, k) combination
    // once, up front.
    let mut priors: HashMap<(u32, usize), SubspacePrior> = HashMap::new();
    for (_, kind) in &methods {
        if let MethodKind::Explicit(em) = kind {
            for (_, neighbor_id) in &pairs {
                if let std::collections::hash_map::Entry::Vacant(slot) =
                    priors.entry((*neighbor_id, em.k))
                {
                    let neighbor = day_matrix(&days, *neighbor_id)?;
                    slot.insert(build_prior(neighbor, em.k)?.with_source_day(*neighbor_id));
                }
            }
        }
    }

    std::fs::create_dir_all(&spec.output_dir)?;
    let existing = load_partial(&spec.output_dir)?;
    let done = done_keys(&existing);

    struct Task<'a> {
        day_id: u32,
        truth: &'a DensityMatrix,
        neighbor_id: u32,
        neighbor: &'a DensityMatrix,
        level_index: usize,
        level: f64,
        trial: u32,
        method_index: usize,
        kind: &'a MethodKind,
    }

    let mut tasks = Vec::new();
    for (target_id, neighbor_id) in &pairs {
        let truth = day_matrix(&days, *target_id)?;
        let neighbor = day_matrix(&days, *neighbor_id)?;
        for (level_index, level) in spec.missing_levels.iter().enumerate() {
            for trial in 0..spec.trials_per_cell as u32 {
                for (method_index, kind) in &methods {
                    let name = spec.methods[*method_index].display_name();
                    let key = (*target_id, name.to_string(), format!("{level}"), trial);
                    if done.contains(&key) {
                        continue;
                    }
                    tasks.push(Task {
                        day_id: *target_id,
                        truth,
                        neighbor_id: *neighbor_id,
                        neighbor,
                        level_index,
                        level: *level,
                        trial,
                        method_index: *method_index,
                        kind,
                    });
                }
            }
        }
    }

    let writer = Mutex::new(PartialWriter::open(&spec.output_dir)?);
    let execute = |task: &Task| -> Result<(CellRecord, TimingRecord)> {
        let method_spec = &spec.methods[task.method_index];
        let seed = mask_seed(
            spec.master_seed,
            task.day_id as u64,
            task.level_index as u64,
            task.trial as u64,
        );
        let mask = generate_mask(task.truth.rows(), task.truth.cols(), task.level, seed)?;
        let y = apply_mask(task.truth, &mask)?;

        let started = Instant::now();
        let outcome: Result<(DensityMatrix, String)> = match task.kind {
            MethodKind::Explicit(em) => {
                let prior = priors
                    .get(&(task.neighbor_id, em.k))
                    .expect("prior prebuilt for every explicit method");
                let options = ImputeOptions {
                    solver: spec.solver,
                    clip_nonnegative: spec.clip_nonnegative,
                    hresi_fallback: true,
                };
                materialize_deltas(em, prior)
                    .and_then(|method| {
                        impute_explicit_with_report(&y, &mask, prior, &method, &options)
                    })
                    .map(|report| {
                        let status = if report.fell_back {
                            format!("{}+fallback", report.status)
                        } else {
                            report.status.to_string()
                        };
                        (report.completed, status)
                    })
            }
            MethodKind::Base => registry
                .create(&method_spec.name, &method_spec.imputer_params(spec.solver))
                .and_then(|imputer| imputer.impute(&y, &mask))
                .map(|m| (clip_missing(m, &mask, spec.clip_nonnegative), "ok".into())),
            MethodKind::Stacked(mode) => registry
                .create(
                    base_name(&method_spec.name),
                    &method_spec.imputer_params(spec.solver),
                )
                .and_then(|imputer| {
                    impute_stacked(imputer.as_ref(), &y, &mask, task.neighbor, *mode)
                })
                .map(|m| (clip_missing(m, &mask, spec.clip_nonnegative), "ok".into())),
        };
        let wall_seconds = started.elapsed().as_secs_f64();

        // Method and evaluation failures land in the status column; the
        // grid keeps going.
        let record = match outcome.and_then(|(imputed, status)| {
            evaluate(task.truth, &imputed, &mask).map(|report| (report, status))
        }) {
            Ok((report, status)) => {
                // Store what persistence will keep: 12 significant digits.
                // Aggregates then agree whether computed in-run or from a
                // reloaded records file.
                CellRecord {
                    day: task.day_id,
                    method: method_spec.display_name().to_string(),
                    level: task.level,
                    trial: task.trial,
                    mask_seed: seed,
                    mask_hash: format!("{:016x}", mask.fingerprint()),
                    rrmse: Some(round_persisted(report.rrmse)),
                    mae: Some(round_persisted(report.mae)),
                    n_holdout: report.n_holdout,
                    status,
                }
            }
            Err(err) => CellRecord {
                day: task.day_id,
                method: method_spec.display_name().to_string(),
                level: task.level,
                trial: task.trial,
                mask_seed: seed,
                mask_hash: format!("{:016x}", mask.fingerprint()),
                rrmse: None,
                mae: None,
                n_holdout: mask.missing_count(),
                status: format!("error:{}", error_kind(&err)),
            },
        };
        let timing = TimingRecord {
            day: task.day_id,
            method: method_spec.display_name().to_string(),
            level: task.level,
            trial: task.trial,
            wall_seconds,
        };
        writer
            .lock()
            .map_err(|_| Error::Data("record writer poisoned".into()))?
            .append(&record)?;
        Ok((record, timing))
    };

    let outcomes: Vec<(CellRecord, TimingRecord)> = if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Data(format!("cannot build worker pool: {e}")))?;
        pool.install(|| tasks.par_iter().map(execute).collect::<Result<_>>())?
    } else {
        tasks.iter().map(execute).collect::<Result<_>>()?
    };

    let mut records = existing;
    let mut timings = Vec::new();
    for (record, timing) in outcomes {
        records.push(record);
        timings.push(timing);
    }
    sort_canonical(&mut records);
    write_records(&spec.output_dir, &records)?;
    append_timings(&spec.output_dir, &timings)?;
    let aggregates = aggregate_records(&records);
    write_aggregates(&spec.output_dir, &aggregates)?;
    Ok(ExperimentResult {
        records,
        timings,
        aggregates,
    })
}

fn load_days(source: &DatasetSource) -> Result<Vec<(u32, DensityMatrix)>> {
    match source {
        DatasetSource::Directory(dir) => load_dataset(dir),
        DatasetSource::Synthetic { generator, n_days } => {
            let days = generate_synthetic_days(generator, *n_days)?;
            Ok(days
                .into_iter()
                .enumerate()
                .map(|(i, m)| (i as u32, m))
                .collect())
        }
    }
}

fn day_matrix(days: &[(u32, DensityMatrix)], id: u32) -> Result<&DensityMatrix> {
    days.iter()
        .find(|(i, _)| *i == id)
        .map(|(_, m)| m)
        .ok_or_else(|| Error::Data(format!("day {id} not present in the dataset")))
}

/// Explicit pairs from the spec, or every day targeting the next one
/// (wrapping) by default.
fn resolve_pairs(
    spec: &ExperimentSpec,
    days: &[(u32, DensityMatrix)],
) -> Result<Vec<(u32, u32)>> {
    if !spec.day_pairs.is_empty() {
        for (t, n) in &spec.day_pairs {
            day_matrix(days, *t)?;
            day_matrix(days, *n)?;
            if t == n {
                return Err(Error::InvalidArgument(format!(
                    "day {t} cannot be its own neighbor"
                )));
            }
        }
        return Ok(spec.day_pairs.clone());
    }
    if days.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least two days to pair targets with neighbors".into(),
        ));
    }
    Ok((0..days.len())
        .map(|i| (days[i].0, days[(i + 1) % days.len()].0))
        .collect())
}

/// Fills in prior-relative ball radii left unset in the method spec.
fn materialize_deltas(method: &ExplicitMethod, prior: &SubspacePrior) -> Result<ExplicitMethod> {
    match method.variant {
        ExplicitVariant::SrrsiDelta { delta1, delta2 } if delta1.is_nan() || delta2.is_nan() => {
            let (d1, d2) = default_deltas(prior);
            ExplicitMethod::new(
                ExplicitVariant::SrrsiDelta {
                    delta1: if delta1.is_nan() { d1 } else { delta1 },
                    delta2: if delta2.is_nan() { d2 } else { delta2 },
                },
                method.k,
            )
        }
        _ => Ok(*method),
    }
}

fn clip_missing(m: DensityMatrix, mask: &crate::mask::ObservationMask, clip: bool) -> DensityMatrix {
    if !clip {
        return m;
    }
    let mut out = m.into_inner();
    for i in 0..out.nrows() {
        for j in 0..out.ncols() {
            if !mask.is_observed(i, j) && out[(i, j)] < 0.0 {
                out[(i, j)] = 0.0;
            }
        }
    }
    DensityMatrix::from_matrix_unchecked(out)
}

fn round_persisted(v: f64) -> f64 {
    crate::io::format_value(v).parse().unwrap_or(v)
}

fn error_kind(err: &Error) -> &'static str {
    match err {
        Error::Dimension(_) => "dimension",
        Error::InvalidArgument(_) => "argument",
        Error::NonFinite(_) => "nonfinite",
        Error::Evaluation(_) => "evaluation",
        Error::Data(_) => "data",
        Error::Solver(_) => "solver",
        Error::Io(_) => "io",
    }
}
