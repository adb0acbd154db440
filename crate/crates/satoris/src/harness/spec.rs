//! Declarative benchmark description and method resolution.

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::formulations::{ExplicitMethod, ExplicitVariant};
use crate::imputers::{ImputerParams, ImputerRegistry, StackingMode};
use crate::sdp::SolverOptions;

use super::synth::SyntheticGenerator;

/// Where the day matrices come from.
#[derive(Debug, Clone)]
pub enum DatasetSource {
    /// Directory of `day_<index>.csv` files.
    Directory(PathBuf),
    /// Deterministic synthetic days.
    Synthetic {
        generator: SyntheticGenerator,
        n_days: usize,
    },
}

/// One method column of the benchmark grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSpec {
    /// Registry or explicit-method name, with an optional -h/-v suffix on
    /// base imputers.
    pub name: String,
    /// Record label; defaults to the name. Lets hyperparameter sweeps run
    /// the same method several times without colliding in the records.
    pub label: Option<String>,
    pub k: Option<usize>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub delta1: Option<f64>,
    pub delta2: Option<f64>,
    pub n_neighbors: Option<usize>,
    pub rank: Option<usize>,
    pub nuclear_weight: Option<f64>,
    pub residual_weight: Option<f64>,
}

impl MethodSpec {
    pub fn named(name: &str) -> Self {
        Self {
            name: name.to_string(),
            label: None,
            k: None,
            alpha: None,
            beta: None,
            delta1: None,
            delta2: None,
            n_neighbors: None,
            rank: None,
            nuclear_weight: None,
            residual_weight: None,
        }
    }

    /// The name that appears in records and aggregates.
    pub fn display_name(&self) -> &str {
        self.label.as_deref().unwrap_or(&self.name)
    }

    pub fn imputer_params(&self, solver: SolverOptions) -> ImputerParams {
        ImputerParams {
            n_neighbors: self.n_neighbors,
            rank: self.rank,
            nuclear_weight: self.nuclear_weight,
            residual_weight: self.residual_weight,
            solver: Some(solver),
        }
    }
}

/// A resolved method: how the harness will actually run it.
#[derive(Debug, Clone)]
pub enum MethodKind {
    /// Subspace-injection SDP variant; needs a neighbor-day prior.
    Explicit(ExplicitMethod),
    /// Base imputer straight from the registry.
    Base,
    /// Base imputer on a neighbor-stacked matrix.
    Stacked(StackingMode),
}

/// Parses the method name and validates hyperparameters. `delta1`/`delta2`
/// may stay unset for srrsi_delta: the harness then derives them from the
/// prior norms at run time.
pub fn resolve_method(spec: &MethodSpec, registry: &ImputerRegistry) -> Result<MethodKind> {
    let name = spec.name.as_str();
    let k = spec.k.unwrap_or(ExplicitMethod::default_k());
    let explicit = match name {
        "hresi" => Some(ExplicitVariant::Hresi),
        "sresi" => Some(ExplicitVariant::Sresi),
        "srrsi_delta" => Some(ExplicitVariant::SrrsiDelta {
            delta1: spec.delta1.unwrap_or(f64::NAN),
            delta2: spec.delta2.unwrap_or(f64::NAN),
        }),
        "srrsi_reg" => Some(ExplicitVariant::SrrsiReg {
            alpha: spec.alpha.unwrap_or(1.0),
            beta: spec.beta.unwrap_or(1.0),
        }),
        "srwsi" => Some(ExplicitVariant::Srwsi),
        _ => None,
    };
    if let Some(variant) = explicit {
        if k == 0 {
            return Err(Error::InvalidArgument("prior rank k must be >= 1".into()));
        }
        // NaN radii mean "derive from the prior"; skip radius validation.
        if let ExplicitVariant::SrrsiDelta { delta1, delta2 } = variant {
            if delta1.is_nan() && delta2.is_nan() {
                return Ok(MethodKind::Explicit(ExplicitMethod { variant, k }));
            }
        }
        return Ok(MethodKind::Explicit(ExplicitMethod::new(variant, k)?));
    }
    for (suffix, mode) in [("-h", StackingMode::Horizontal), ("-v", StackingMode::Vertical)] {
        if let Some(base) = name.strip_suffix(suffix) {
            if registry.contains(base) {
                return Ok(MethodKind::Stacked(mode));
            }
        }
    }
    if registry.contains(name) {
        return Ok(MethodKind::Base);
    }
    Err(Error::InvalidArgument(format!(
        "unknown method {name:?}; explicit methods: hresi, sresi, srrsi_delta, srrsi_reg, srwsi; registered imputers: {}",
        registry.names().join(", ")
    )))
}

/// Base imputer name for stacked/base methods (suffix stripped).
pub fn base_name(name: &str) -> &str {
    name.strip_suffix("-h")
        .or_else(|| name.strip_suffix("-v"))
        .unwrap_or(name)
}

/// Full benchmark description.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub dataset: DatasetSource,
    /// (target, neighbor) day-identifier pairs. Empty means: every loaded
    /// day is a target, with the next day (wrapping) as its neighbor.
    pub day_pairs: Vec<(u32, u32)>,
    pub methods: Vec<MethodSpec>,
    pub missing_levels: Vec<f64>,
    pub trials_per_cell: usize,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    pub solver: SolverOptions,
    /// Clip imputed entries at zero (densities are nonnegative).
    pub clip_nonnegative: bool,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::InvalidArgument("no methods configured".into()));
        }
        let mut labels: Vec<&str> = self.methods.iter().map(|m| m.display_name()).collect();
        for label in &labels {
            // Labels become CSV fields and resume keys.
            let clean = !label.is_empty()
                && label
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'));
            if !clean {
                return Err(Error::InvalidArgument(format!(
                    "method label {label:?} may only contain ASCII letters, digits, '_', '-' and '.'"
                )));
            }
        }
        labels.sort_unstable();
        if let Some(dup) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(format!(
                "duplicate method label {:?}; give sweep entries distinct labels",
                dup[0]
            )));
        }
        if self.missing_levels.is_empty() {
            return Err(Error::InvalidArgument("no missingness levels".into()));
        }
        for level in &self.missing_levels {
            if !(0.0..1.0).contains(level) {
                return Err(Error::InvalidArgument(format!(
                    "missingness level {level} outside [0, 1)"
                )));
            }
        }
        if self.trials_per_cell == 0 {
            return Err(Error::InvalidArgument("trials_per_cell must be >= 1".into()));
        }
        Ok(())
    }

    /// The default occlusion grid.
    pub fn default_levels() -> Vec<f64> {
        vec![0.10, 0.25, 0.50, 0.75, 0.90]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolves_explicit_and_stacked_names() {
        let reg = ImputerRegistry::with_builtins();
        assert!(matches!(
            resolve_method(&MethodSpec::named("sresi"), &reg),
            Ok(MethodKind::Explicit(_))
        ));
        assert!(matches!(
            resolve_method(&MethodSpec::named("nnmin-h"), &reg),
            Ok(MethodKind::Stacked(StackingMode::Horizontal))
        ));
        assert!(matches!(
            resolve_method(&MethodSpec::named("softimpute-v"), &reg),
            Ok(MethodKind::Stacked(StackingMode::Vertical))
        ));
        assert!(matches!(
            resolve_method(&MethodSpec::named("mean"), &reg),
            Ok(MethodKind::Base)
        ));
        assert!(resolve_method(&MethodSpec::named("gain"), &reg).is_err());
    }

    #[test]
    fn srrsi_delta_without_radii_defers_to_prior() {
        let reg = ImputerRegistry::with_builtins();
        let kind = resolve_method(&MethodSpec::named("srrsi_delta"), &reg).unwrap();
        match kind {
            MethodKind::Explicit(m) => match m.variant {
                ExplicitVariant::SrrsiDelta { delta1, delta2 } => {
                    assert!(delta1.is_nan() && delta2.is_nan());
                }
                other => panic!("unexpected variant {other:?}"),
            },
            other => panic!("unexpected kind {other:?}"),
        }
    }

    #[test]
    fn spec_validation() {
        let mut spec = ExperimentSpec {
            dataset: DatasetSource::Synthetic {
                generator: SyntheticGenerator::default(),
                n_days: 2,
            },
            day_pairs: vec![],
            methods: vec![MethodSpec::named("mean")],
            missing_levels: ExperimentSpec::default_levels(),
            trials_per_cell: 1,
            master_seed: 0,
            output_dir: PathBuf::from("out"),
            solver: SolverOptions::default(),
            clip_nonnegative: true,
        };
        assert!(spec.validate().is_ok());
        spec.missing_levels = vec![1.0];
        assert!(spec.validate().is_err());
        spec.missing_levels = vec![0.5];
        spec.trials_per_cell = 0;
        assert!(spec.validate().is_err());
        spec.trials_per_cell = 1;
        // Labels feed CSV records: no separators allowed.
        spec.methods[0].label = Some("mean,v2".into());
        assert!(spec.validate().is_err());
        spec.methods[0].label = Some("mean_v2".into());
        assert!(spec.validate().is_ok());
    }
}
