//! Declarative TOML configuration mapping one-to-one onto
//! [`ExperimentSpec`].
//!
//! ```toml
//! master_seed = 42
//! missing_levels = [0.10, 0.25, 0.50, 0.75, 0.90]
//! trials_per_cell = 1
//! output_dir = "out"
//! clip_nonnegative = true
//! pairs = [[0, 1], [1, 2]]        # optional; default: next day, wrapping
//!
//! [dataset]
//! dir = "data/"                    # or a [dataset.synthetic] table
//!
//! [solver]
//! tolerance = 1e-6
//! max_iter = 5000
//! rho = 1.0
//!
//! [[methods]]
//! name = "sresi"
//! k = 10
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::sdp::SolverOptions;

use super::spec::{DatasetSource, ExperimentSpec, MethodSpec};
use super::synth::SyntheticGenerator;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    master_seed: u64,
    missing_levels: Option<Vec<f64>>,
    #[serde(default = "default_trials")]
    trials_per_cell: usize,
    output_dir: Option<PathBuf>,
    #[serde(default = "default_clip")]
    clip_nonnegative: bool,
    pairs: Option<Vec<(u32, u32)>>,
    dataset: DatasetConfig,
    solver: Option<SolverConfig>,
    methods: Vec<MethodConfig>,
}

fn default_trials() -> usize {
    1
}

fn default_clip() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetConfig {
    dir: Option<PathBuf>,
    synthetic: Option<SyntheticConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SyntheticConfig {
    #[serde(flatten)]
    generator: SyntheticGenerator,
    days: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverConfig {
    tolerance: Option<f64>,
    max_iter: Option<usize>,
    rho: Option<f64>,
    adaptive_rho: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MethodConfig {
    name: String,
    label: Option<String>,
    k: Option<usize>,
    alpha: Option<f64>,
    beta: Option<f64>,
    delta1: Option<f64>,
    delta2: Option<f64>,
    n_neighbors: Option<usize>,
    rank: Option<usize>,
    nuclear_weight: Option<f64>,
    residual_weight: Option<f64>,
}

/// Parses a config file into an experiment description. Relative dataset
/// and output paths resolve against the config file's directory.
pub fn load_config(path: &Path) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Data(format!("cannot read {}: {e}", path.display())))?;
    let parsed: ConfigFile = toml::from_str(&text)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    spec_from_config(parsed, base)
}

fn spec_from_config(cfg: ConfigFile, base: &Path) -> Result<ExperimentSpec> {
    let dataset = match (cfg.dataset.dir, cfg.dataset.synthetic) {
        (Some(dir), None) => DatasetSource::Directory(resolve_path(base, dir)),
        (None, Some(synth)) => DatasetSource::Synthetic {
            generator: synth.generator,
            n_days: synth.days,
        },
        (Some(_), Some(_)) => {
            return Err(Error::Data(
                "dataset: choose either dir or synthetic, not both".into(),
            ))
        }
        (None, None) => {
            return Err(Error::Data(
                "dataset: one of dir or synthetic is required".into(),
            ))
        }
    };
    let mut solver = SolverOptions::default();
    if let Some(s) = cfg.solver {
        if let Some(t) = s.tolerance {
            solver.tolerance = t;
        }
        if let Some(m) = s.max_iter {
            solver.max_iter = m;
        }
        if let Some(r) = s.rho {
            solver.rho = r;
        }
        if let Some(a) = s.adaptive_rho {
            solver.adaptive_rho = a;
        }
    }
    let methods = cfg
        .methods
        .into_iter()
        .map(|m| MethodSpec {
            name: m.name,
            label: m.label,
            k: m.k,
            alpha: m.alpha,
            beta: m.beta,
            delta1: m.delta1,
            delta2: m.delta2,
            n_neighbors: m.n_neighbors,
            rank: m.rank,
            nuclear_weight: m.nuclear_weight,
            residual_weight: m.residual_weight,
        })
        .collect();
    let spec = ExperimentSpec {
        dataset,
        day_pairs: cfg.pairs.unwrap_or_default(),
        methods,
        missing_levels: cfg
            .missing_levels
            .unwrap_or_else(ExperimentSpec::default_levels),
        trials_per_cell: cfg.trials_per_cell,
        master_seed: cfg.master_seed,
        output_dir: resolve_path(base, cfg.output_dir.unwrap_or_else(|| "satoris-out".into())),
        solver,
        clip_nonnegative: cfg.clip_nonnegative,
    };
    spec.validate()?;
    Ok(spec)
}

fn resolve_path(base: &Path, p: PathBuf) -> PathBuf {
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}
