//! The explicit subspace-injection imputers: five ways of feeding Gram
//! priors `A₀ = U Σ Uᵀ`, `B₀ = V Σ Vᵀ` from a neighbor day into the
//! block-PSD completion program, plus the SDP characterization of the
//! nuclear norm used for self-verification.

use crate::error::{Error, Result};
use crate::mask::ObservationMask;
use crate::matrix::{DensityMatrix, RANK_EPS};
use crate::sdp::{
    solve, GramConstraint, Objective, SdpProblem, SdpSolution, SolverOptions, SolverStatus,
    XConstraint,
};
use crate::subspace::SubspacePrior;

/// The five explicit variants. Parameters ride along with the variants that
/// use them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExplicitVariant {
    /// Observed entries must match exactly; priors are hard.
    Hresi,
    /// Observed entries enter a residual objective; priors are hard.
    Sresi,
    /// Free Gram blocks confined to Frobenius balls around the priors.
    SrrsiDelta { delta1: f64, delta2: f64 },
    /// Free Gram blocks with deviation penalties in the objective.
    SrrsiReg { alpha: f64, beta: f64 },
    /// Only the spectral weights of the prior subspaces are free.
    Srwsi,
}

impl ExplicitVariant {
    pub fn name(&self) -> &'static str {
        match self {
            ExplicitVariant::Hresi => "hresi",
            ExplicitVariant::Sresi => "sresi",
            ExplicitVariant::SrrsiDelta { .. } => "srrsi_delta",
            ExplicitVariant::SrrsiReg { .. } => "srrsi_reg",
            ExplicitVariant::Srwsi => "srwsi",
        }
    }
}

/// An explicit method: variant plus the prior rank.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExplicitMethod {
    pub variant: ExplicitVariant,
    /// Rank at which the neighbor-day prior is extracted.
    pub k: usize,
}

impl ExplicitMethod {
    pub fn new(variant: ExplicitVariant, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("prior rank k must be >= 1".into()));
        }
        match variant {
            ExplicitVariant::SrrsiDelta { delta1, delta2 }
                if !(delta1 >= 0.0 && delta2 >= 0.0 && delta1.is_finite() && delta2.is_finite()) =>
            {
                return Err(Error::InvalidArgument(format!(
                    "ball radii must be nonnegative, got ({delta1}, {delta2})"
                )));
            }
            ExplicitVariant::SrrsiReg { alpha, beta }
                if !(alpha >= 0.0 && beta >= 0.0 && alpha.is_finite() && beta.is_finite()) =>
            {
                return Err(Error::InvalidArgument(format!(
                    "regularization weights must be nonnegative, got ({alpha}, {beta})"
                )));
            }
            _ => {}
        }
        Ok(Self { variant, k })
    }

    /// Default hyperparameters: rank 10 priors; unit regularization weights.
    pub fn default_k() -> usize {
        10
    }
}

/// Options shared by the explicit imputers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImputeOptions {
    pub solver: SolverOptions,
    /// Clip imputed (missing) entries at zero. Off for generic matrices;
    /// the traffic benchmark pipeline turns it on.
    pub clip_nonnegative: bool,
    /// When a hard-equality problem comes back infeasible, rerun with the
    /// soft-residual objective instead of failing.
    pub hresi_fallback: bool,
}

impl Default for ImputeOptions {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            clip_nonnegative: false,
            hresi_fallback: true,
        }
    }
}

/// Diagnostics from an explicit imputation.
#[derive(Debug, Clone)]
pub struct ImputeReport {
    pub completed: DensityMatrix,
    pub status: SolverStatus,
    /// True when an infeasible hard-equality run was replaced by the
    /// soft-residual variant.
    pub fell_back: bool,
    pub iterations: usize,
    pub objective_value: f64,
}

/// Builds the variant's problem over the masked data and prior.
pub fn build_problem(
    y: &DensityMatrix,
    mask: &ObservationMask,
    prior: &SubspacePrior,
    variant: ExplicitVariant,
) -> Result<SdpProblem> {
    let (objective, x_constraint, gram_constraint) = match variant {
        ExplicitVariant::Hresi => (
            Objective::constant(),
            XConstraint::FixedObserved,
            GramConstraint::Fixed,
        ),
        ExplicitVariant::Sresi => (
            Objective::residual(),
            XConstraint::Free,
            GramConstraint::Fixed,
        ),
        ExplicitVariant::SrrsiDelta { delta1, delta2 } => (
            Objective::residual(),
            XConstraint::Free,
            GramConstraint::Ball {
                delta_a: delta1,
                delta_b: delta2,
            },
        ),
        ExplicitVariant::SrrsiReg { alpha, beta } => (
            Objective {
                residual_weight: 1.0,
                trace_weight: 0.0,
                prior_weight_a: alpha,
                prior_weight_b: beta,
            },
            XConstraint::Free,
            GramConstraint::Free,
        ),
        ExplicitVariant::Srwsi => (
            Objective::residual(),
            XConstraint::Free,
            GramConstraint::SpectralWeights,
        ),
    };
    SdpProblem::new(
        y.clone(),
        Some(mask.clone()),
        objective,
        x_constraint,
        gram_constraint,
        Some(prior.clone()),
    )
}

/// Default ball radii for the delta variant: a tenth of the prior norms.
pub fn default_deltas(prior: &SubspacePrior) -> (f64, f64) {
    (0.1 * prior.a().norm(), 0.1 * prior.b().norm())
}

/// Completes `y` with the chosen explicit variant and returns diagnostics
/// alongside the matrix. Observed entries are copied from `y` into the
/// output; the optimizer only ever fills the missing ones.
pub fn impute_explicit_with_report(
    y: &DensityMatrix,
    mask: &ObservationMask,
    prior: &SubspacePrior,
    method: &ExplicitMethod,
    options: &ImputeOptions,
) -> Result<ImputeReport> {
    if y.shape() != mask.shape() {
        return Err(Error::Dimension(format!(
            "data {:?} vs mask {:?}",
            y.shape(),
            mask.shape()
        )));
    }
    if prior.rank() != method.k {
        return Err(Error::InvalidArgument(format!(
            "prior rank {} does not match method rank {}",
            prior.rank(),
            method.k
        )));
    }
    let problem = build_problem(y, mask, prior, method.variant)?;
    let mut solution = solve(&problem, &options.solver)?;
    let mut fell_back = false;

    // A hard-equality run is a pure feasibility program: anything short of
    // convergence means no reliable feasible point exists (observed entries
    // off the prior's spans make it genuinely infeasible, and a stall is
    // the same condition short of proof). Fall back to the soft residual.
    let hresi_unusable = matches!(method.variant, ExplicitVariant::Hresi)
        && solution.status != SolverStatus::Converged;
    if hresi_unusable && options.hresi_fallback {
        log::warn!(
            "hard-equality completion {} after {} iterations; retrying with soft residual",
            solution.status,
            solution.iterations
        );
        let soft = build_problem(y, mask, prior, ExplicitVariant::Sresi)?;
        solution = solve(&soft, &options.solver)?;
        fell_back = true;
    }
    if solution.status == SolverStatus::Infeasible {
        let context = if fell_back {
            "soft fallback also infeasible"
        } else {
            "problem reported infeasible"
        };
        return Err(solver_error(&solution, context));
    }
    if hresi_unusable && !options.hresi_fallback && !fell_back {
        return Err(solver_error(
            &solution,
            "hard equalities unsatisfied and fallback disabled",
        ));
    }

    let completed = finalize(y, mask, &solution, options.clip_nonnegative);
    Ok(ImputeReport {
        completed,
        status: solution.status,
        fell_back,
        iterations: solution.iterations,
        objective_value: solution.objective_value,
    })
}

/// Like [`impute_explicit_with_report`], returning only the completed matrix.
pub fn impute_explicit(
    y: &DensityMatrix,
    mask: &ObservationMask,
    prior: &SubspacePrior,
    method: &ExplicitMethod,
    options: &ImputeOptions,
) -> Result<DensityMatrix> {
    impute_explicit_with_report(y, mask, prior, method, options).map(|r| r.completed)
}

fn solver_error(solution: &SdpSolution, context: &str) -> Error {
    Error::Solver(format!(
        "{context} (status {}, primal {:.3e}, dual {:.3e}, {} iterations)",
        solution.status, solution.primal_residual, solution.dual_residual, solution.iterations
    ))
}

/// Copies observed entries from the data and optionally clips the imputed
/// ones at zero.
fn finalize(
    y: &DensityMatrix,
    mask: &ObservationMask,
    solution: &SdpSolution,
    clip: bool,
) -> DensityMatrix {
    let mut out = solution.x.inner().clone();
    for i in 0..y.rows() {
        for j in 0..y.cols() {
            if mask.is_observed(i, j) {
                out[(i, j)] = y.get(i, j);
            } else if clip && out[(i, j)] < 0.0 {
                out[(i, j)] = 0.0;
            }
        }
    }
    DensityMatrix::from_matrix_unchecked(out)
}

/// Evaluates the nuclear norm through the block-PSD program: X pinned to
/// `x0`, free Gram blocks, objective (tr A + tr B)/2. Cross-checks the
/// SVD route through an entirely different code path.
pub fn nuclear_norm_sdp(x0: &DensityMatrix, options: &SolverOptions) -> Result<f64> {
    let problem = SdpProblem::new(
        x0.clone(),
        None,
        Objective {
            residual_weight: 0.0,
            trace_weight: 0.5,
            prior_weight_a: 0.0,
            prior_weight_b: 0.0,
        },
        XConstraint::FixedAll,
        GramConstraint::Free,
        None,
    )?;
    let solution = solve(&problem, options)?;
    if solution.status != SolverStatus::Converged {
        return Err(solver_error(&solution, "nuclear-norm evaluation failed"));
    }
    Ok(solution.objective_value)
}

/// Closed-form check of the factorization characterization of the nuclear
/// norm: with `A = U √Σ` and `B = V √Σ` from a rank-`k` SVD,
/// `(‖A‖_F² + ‖B‖_F²)/2` equals the nuclear norm. `k` must cover the
/// numerical rank. The factor pair is optimal as-is, so the iteration
/// budget is accepted for signature parity with iterative searches and
/// left unused.
pub fn factorization_norm_oracle(
    x0: &DensityMatrix,
    k: usize,
    _iterations: usize,
) -> Result<f64> {
    let svd = x0.truncated_svd(k)?;
    let sigma_max = svd.sigma().first().copied().unwrap_or(0.0);
    // Verify that rank k captures everything: look one value past k.
    let full = x0.inner().clone().singular_values();
    if let Some(next) = full.iter().nth(k) {
        if *next > RANK_EPS * sigma_max.max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "k = {k} is below the numerical rank (sigma_{} = {next:.3e})",
                k + 1
            )));
        }
    }
    let mut half_sq = 0.0;
    for (c, s) in svd.sigma().iter().enumerate() {
        let root = s.sqrt();
        let a_col = svd.u().column(c) * root;
        let b_col = svd.v().column(c) * root;
        half_sq += 0.5 * (a_col.norm_squared() + b_col.norm_squared());
    }
    Ok(half_sq)
}
