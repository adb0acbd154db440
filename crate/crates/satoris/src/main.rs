//! Command-line interface: single-matrix imputation, benchmark grids,
//! subspace-stability reports, synthetic data generation and summaries.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 solver failure.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use satoris::error::Error;
use satoris::formulations::{
    default_deltas, impute_explicit_with_report, ExplicitMethod, ExplicitVariant, ImputeOptions,
};
use satoris::harness::spec::{base_name, resolve_method, MethodKind};
use satoris::harness::{
    self, load_config, load_dataset, records, summarize, ExperimentSpec, MethodSpec,
    SummaryFormat, SyntheticGenerator,
};
use satoris::imputers::{impute_stacked, ImputerRegistry};
use satoris::io;
use satoris::mask::{apply_mask, generate_mask, ObservationMask};
use satoris::sdp::SolverOptions;
use satoris::subspace::{build_prior, stability_series, Side};

#[derive(Parser)]
#[command(
    name = "satoris",
    about = "Subspace-informed low-rank matrix completion",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Complete a single matrix with one method.
    Impute(ImputeArgs),
    /// Run a benchmark grid described by a config file.
    Bench(BenchArgs),
    /// Measure adjacent-day subspace overlap for a dataset.
    Stability(StabilityArgs),
    /// Generate a synthetic dataset of day matrices.
    Synth(SynthArgs),
    /// Aggregate and rank an existing records file.
    Summarize(SummarizeArgs),
}

#[derive(Args)]
struct SolverArgs {
    /// Config file; its [solver] table supplies solver options.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Relative convergence tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Iteration cap.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Penalty parameter.
    #[arg(long)]
    rho: Option<f64>,
}

impl SolverArgs {
    fn resolve(&self) -> Result<SolverOptions, Error> {
        let mut options = match &self.config {
            Some(path) => load_config(path)?.solver,
            None => SolverOptions::default(),
        };
        if let Some(t) = self.tolerance {
            options.tolerance = t;
        }
        if let Some(m) = self.max_iter {
            options.max_iter = m;
        }
        if let Some(r) = self.rho {
            options.rho = r;
        }
        Ok(options)
    }
}

#[derive(Args)]
struct ImputeArgs {
    /// Matrix to complete (CSV, no header).
    #[arg(long)]
    input: PathBuf,
    /// Observation mask CSV of 0/1; omit to generate one with --level.
    #[arg(long)]
    mask: Option<PathBuf>,
    /// MCAR missing fraction used when no mask file is given.
    #[arg(long)]
    level: Option<f64>,
    /// Seed for mask generation.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Method name: hresi | sresi | srrsi_delta | srrsi_reg | srwsi, or a
    /// registered imputer (mean, knn, softimpute, itersvd, nnmin) with an
    /// optional -h/-v stacking suffix.
    #[arg(long)]
    method: String,
    /// Fully observed neighbor matrix (required by explicit and stacked
    /// methods).
    #[arg(long)]
    neighbor: Option<PathBuf>,
    /// Output CSV for the completed matrix.
    #[arg(long)]
    out: PathBuf,
    /// Prior rank for explicit methods.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    delta1: Option<f64>,
    #[arg(long)]
    delta2: Option<f64>,
    #[arg(long)]
    n_neighbors: Option<usize>,
    /// Rank for itersvd.
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long)]
    nuclear_weight: Option<f64>,
    /// Switch nnmin to its soft masked-residual objective.
    #[arg(long)]
    residual_weight: Option<f64>,
    /// Clip imputed entries at zero.
    #[arg(long)]
    clip: bool,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct BenchArgs {
    /// Experiment description (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Worker threads for grid cells.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Override the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct StabilityArgs {
    /// Dataset directory of day_<index>.csv files.
    #[arg(long)]
    data: PathBuf,
    /// Truncation rank.
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// left (spatial, U) or right (temporal, V).
    #[arg(long, default_value = "left")]
    side: String,
    /// Output CSV: day_index,mean,std.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory for day_<index>.csv files.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 8)]
    days: usize,
    #[arg(long, default_value_t = 40)]
    rows: usize,
    #[arg(long, default_value_t = 24)]
    cols: usize,
    #[arg(long, default_value_t = 5)]
    rank: usize,
    /// Per-day subspace drift angle in radians.
    #[arg(long, default_value_t = 0.1)]
    theta: f64,
    /// Additive Gaussian noise level.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Draw each day's subspaces independently instead of sharing them.
    #[arg(long)]
    independent: bool,
}

#[derive(Args)]
struct SummarizeArgs {
    /// A records.csv produced by bench.
    #[arg(long)]
    records: PathBuf,
    /// Directory for aggregate.csv, rankings.txt and long.csv.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "csv")]
    format: String,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidArgument(_) => 1,
        Error::Dimension(_)
        | Error::NonFinite(_)
        | Error::Evaluation(_)
        | Error::Data(_)
        | Error::Io(_) => 2,
        Error::Solver(_) => 3,
    }
}

fn dispatch(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Impute(args) => cmd_impute(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Stability(args) => cmd_stability(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Summarize(args) => cmd_summarize(args),
    }
}

fn cmd_impute(args: ImputeArgs) -> Result<(), Error> {
    let input = io::read_matrix(&args.input)?;
    // With --level the input is ground truth and the held-out entries can
    // be scored after completion.
    let mut truth_for_scoring = None;
    let (y, mask) = match (&args.mask, args.level) {
        (Some(path), _) => {
            let mask = io::read_mask(path)?;
            (apply_mask(&input, &mask)?, mask)
        }
        (None, Some(level)) => {
            let mask = generate_mask(input.rows(), input.cols(), level, args.seed)?;
            truth_for_scoring = Some(input.clone());
            (apply_mask(&input, &mask)?, mask)
        }
        (None, None) => {
            let mask = ObservationMask::all_observed(input.rows(), input.cols())?;
            (input.clone(), mask)
        }
    };

    let method_spec = MethodSpec {
        name: args.method.clone(),
        label: None,
        k: args.k,
        alpha: args.alpha,
        beta: args.beta,
        delta1: args.delta1,
        delta2: args.delta2,
        n_neighbors: args.n_neighbors,
        rank: args.rank,
        nuclear_weight: args.nuclear_weight,
        residual_weight: args.residual_weight,
    };
    let registry = ImputerRegistry::with_builtins();
    let kind = resolve_method(&method_spec, &registry)?;
    let solver = args.solver.resolve()?;

    let completed = match kind {
        MethodKind::Explicit(method) => {
            let neighbor_path = args.neighbor.as_ref().ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "method {} needs --neighbor for its subspace prior",
                    args.method
                ))
            })?;
            let neighbor = io::read_matrix(neighbor_path)?;
            let prior = build_prior(&neighbor, method.k)?;
            let variant = match method.variant {
                ExplicitVariant::SrrsiDelta { delta1, delta2 }
                    if delta1.is_nan() || delta2.is_nan() =>
                {
                    let (d1, d2) = default_deltas(&prior);
                    ExplicitVariant::SrrsiDelta {
                        delta1: if delta1.is_nan() { d1 } else { delta1 },
                        delta2: if delta2.is_nan() { d2 } else { delta2 },
                    }
                }
                v => v,
            };
            let method = ExplicitMethod::new(variant, method.k)?;
            let options = ImputeOptions {
                solver,
                clip_nonnegative: args.clip,
                hresi_fallback: true,
            };
            let report = impute_explicit_with_report(&y, &mask, &prior, &method, &options)?;
            eprintln!(
                "{}: {} after {} iterations",
                args.method, report.status, report.iterations
            );
            report.completed
        }
        MethodKind::Base => {
            let imputer = registry.create(&args.method, &method_spec.imputer_params(solver))?;
            clip_if(imputer.impute(&y, &mask)?, &mask, args.clip)
        }
        MethodKind::Stacked(mode) => {
            let neighbor_path = args.neighbor.as_ref().ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "stacked method {} needs --neighbor",
                    args.method
                ))
            })?;
            let neighbor = io::read_matrix(neighbor_path)?;
            let imputer = registry.create(
                base_name(&args.method),
                &method_spec.imputer_params(solver),
            )?;
            clip_if(
                impute_stacked(imputer.as_ref(), &y, &mask, &neighbor, mode)?,
                &mask,
                args.clip,
            )
        }
    };
    io::write_matrix(&args.out, &completed)?;
    if let Some(truth) = truth_for_scoring {
        if let Ok(score) = satoris::metrics::evaluate(&truth, &completed, &mask) {
            eprintln!(
                "held-out metrics: rrmse {:.6}, mae {:.6} over {} entries",
                score.rrmse, score.mae, score.n_holdout
            );
        }
    }
    println!("wrote {}", args.out.display());
    Ok(())
}

fn clip_if(
    m: satoris::DensityMatrix,
    mask: &ObservationMask,
    clip: bool,
) -> satoris::DensityMatrix {
    if !clip {
        return m;
    }
    let mut values = m.into_inner();
    for i in 0..values.nrows() {
        for j in 0..values.ncols() {
            if !mask.is_observed(i, j) && values[(i, j)] < 0.0 {
                values[(i, j)] = 0.0;
            }
        }
    }
    satoris::DensityMatrix::from_matrix(values).expect("clipping preserves finiteness")
}

fn cmd_bench(args: BenchArgs) -> Result<(), Error> {
    let mut spec: ExperimentSpec = load_config(&args.config)?;
    if let Some(out) = args.out {
        spec.output_dir = out;
    }
    if let Some(seed) = args.seed {
        spec.master_seed = seed;
    }
    if args.jobs == 0 {
        return Err(Error::InvalidArgument("--jobs must be >= 1".into()));
    }
    let result = harness::run_with_jobs(&spec, args.jobs)?;
    summarize(&result, SummaryFormat::Csv, &spec.output_dir)?;
    println!(
        "{} records, {} aggregate rows -> {}",
        result.records.len(),
        result.aggregates.len(),
        spec.output_dir.display()
    );
    for row in &result.aggregates {
        println!(
            "  {:<16} level {:<5} rrmse {:.4} +- {:.4}",
            row.method, row.level, row.rrmse_mean, row.rrmse_std
        );
    }
    Ok(())
}

fn cmd_stability(args: StabilityArgs) -> Result<(), Error> {
    let side = Side::from_str(&args.side)?;
    let days = load_dataset(&args.data)?;
    let matrices: Vec<_> = days.iter().map(|(_, m)| m.clone()).collect();
    let series = stability_series(&matrices, args.k, side)?;
    let mut out = String::from("day_index,mean,std\n");
    for (pair, (mean, std)) in series.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{}\n",
            days[pair].0,
            io::format_value(*mean),
            io::format_value(*std)
        ));
    }
    std::fs::write(&args.out, out)?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<(), Error> {
    let generator = SyntheticGenerator {
        rows: args.rows,
        cols: args.cols,
        rank: args.rank,
        shared_subspace: !args.independent,
        theta: args.theta,
        noise: args.noise,
        seed: args.seed,
    };
    let days = harness::generate_synthetic_days(&generator, args.days)?;
    std::fs::create_dir_all(&args.out)?;
    for (i, day) in days.iter().enumerate() {
        io::write_matrix(&args.out.join(format!("day_{i}.csv")), day)?;
    }
    println!("wrote {} days to {}", days.len(), args.out.display());
    Ok(())
}

fn cmd_summarize(args: SummarizeArgs) -> Result<(), Error> {
    let format = SummaryFormat::from_str(&args.format)?;
    let recs = records::read_records(&args.records)?;
    let aggregates = records::aggregate_records(&recs);
    let result = harness::ExperimentResult {
        records: recs,
        timings: Vec::new(),
        aggregates,
    };
    let files = summarize(&result, format, &args.out)?;
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
