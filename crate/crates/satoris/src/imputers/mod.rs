//! Subspace-unaware baseline imputers and the stacking meta-algorithm that
//! promotes any of them into an implicitly subspace-informed method.

mod iterative_svd;
mod knn;
mod mean;
mod nnmin;
mod soft_impute;
mod stacking;

pub use iterative_svd::IterativeSvd;
pub use knn::KnnImputer;
pub use mean::{MeanFill, MeanStrategy};
pub use nnmin::NnMin;
pub use soft_impute::{SoftImpute, SweepRecord};
pub use stacking::{impute_stacked, srisi, StackedImputer, StackingMode};

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::mask::ObservationMask;
use crate::matrix::DensityMatrix;
use crate::sdp::SolverOptions;

/// A completion capability: given masked data, produce a completed matrix of
/// the same shape with observed entries passed through unchanged and no NaN.
pub trait Imputer: Send + Sync {
    fn name(&self) -> &str;

    fn impute(&self, y: &DensityMatrix, mask: &ObservationMask) -> Result<DensityMatrix>;
}

/// Shared input validation: shapes must match and something must be
/// observed. Public so external imputer implementations can reuse it.
pub fn check_inputs(y: &DensityMatrix, mask: &ObservationMask) -> Result<()> {
    if y.shape() != mask.shape() {
        return Err(Error::Dimension(format!(
            "data {:?} vs mask {:?}",
            y.shape(),
            mask.shape()
        )));
    }
    if mask.observed_count() == 0 {
        return Err(Error::InvalidArgument(
            "input is fully unobserved; nothing to impute from".into(),
        ));
    }
    Ok(())
}

/// Copies observed entries of `y` over `completed`; the final step of
/// every conforming imputer.
pub fn passthrough(
    y: &DensityMatrix,
    mask: &ObservationMask,
    completed: nalgebra::DMatrix<f64>,
) -> DensityMatrix {
    let mut out = completed;
    for i in 0..y.rows() {
        for j in 0..y.cols() {
            if mask.is_observed(i, j) {
                out[(i, j)] = y.get(i, j);
            }
        }
    }
    DensityMatrix::from_matrix_unchecked(out)
}

/// Hyperparameters a factory may consume. Unset fields fall back to each
/// imputer's default.
#[derive(Debug, Clone, Default)]
pub struct ImputerParams {
    pub n_neighbors: Option<usize>,
    pub rank: Option<usize>,
    pub nuclear_weight: Option<f64>,
    /// Switches nnmin to its soft masked-residual objective.
    pub residual_weight: Option<f64>,
    pub solver: Option<SolverOptions>,
}

type Factory = Box<dyn Fn(&ImputerParams) -> Result<Box<dyn Imputer>> + Send + Sync>;

/// Name-keyed imputer construction. Ships with the built-in family and
/// accepts externally supplied factories, so any conforming implementation
/// can ride the benchmark harness and the stacking wrappers.
pub struct ImputerRegistry {
    factories: BTreeMap<String, Factory>,
}

impl ImputerRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    /// Registry preloaded with mean, knn, softimpute, itersvd and nnmin.
    pub fn with_builtins() -> Self {
        let mut reg = Self::empty();
        reg.register("mean", |_| Ok(Box::new(MeanFill::default())));
        reg.register("knn", |p| {
            Ok(Box::new(KnnImputer::new(p.n_neighbors.unwrap_or(5))?))
        });
        reg.register("softimpute", |_| Ok(Box::new(SoftImpute::default())));
        reg.register("itersvd", |p| {
            Ok(Box::new(IterativeSvd::new(p.rank.unwrap_or(10))?))
        });
        reg.register("nnmin", |p| {
            let nuclear = p.nuclear_weight.unwrap_or(1.0);
            let solver = p.solver.unwrap_or_default();
            let imputer = match p.residual_weight {
                Some(w) => NnMin::soft(nuclear, w, solver)?,
                None => NnMin::new(nuclear, solver)?,
            };
            Ok(Box::new(imputer))
        });
        reg
    }

    pub fn register<F>(&mut self, name: &str, factory: F)
    where
        F: Fn(&ImputerParams) -> Result<Box<dyn Imputer>> + Send + Sync + 'static,
    {
        self.factories.insert(name.to_string(), Box::new(factory));
    }

    pub fn create(&self, name: &str, params: &ImputerParams) -> Result<Box<dyn Imputer>> {
        match self.factories.get(name) {
            Some(f) => f(params),
            None => Err(Error::InvalidArgument(format!(
                "unknown imputer {name:?}; registered: {}",
                self.names().join(", ")
            ))),
        }
    }

    pub fn contains(&self, name: &str) -> bool {
        self.factories.contains_key(name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.factories.keys().map(|s| s.as_str()).collect()
    }
}
