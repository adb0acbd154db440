//! A first-order solver for the small structured SDPs this crate generates:
//! convex objectives over the blocks of
//!
//! ```text
//!   [ A   X  ]  ⪰ 0
//!   [ Xᵀ  B  ]
//! ```
//!
//! with fixed-entry equalities on X, Frobenius-ball or structural
//! constraints on the Gram blocks, and masked-residual / trace / deviation
//! objective terms.

mod blocks;
mod solver;
mod verify;

pub use verify::{verify_kkt, KktReport};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::mask::ObservationMask;
use crate::matrix::DensityMatrix;
use crate::subspace::SubspacePrior;

/// Objective weights. Terms with weight zero are absent.
///
/// The full objective is
/// `w_res ‖Ω∘(X−Y)‖_F + w_tr (tr A + tr B) + α ‖A−A₀‖_F + β ‖B−B₀‖_F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Objective {
    pub residual_weight: f64,
    pub trace_weight: f64,
    pub prior_weight_a: f64,
    pub prior_weight_b: f64,
}

impl Objective {
    pub fn constant() -> Self {
        Self {
            residual_weight: 0.0,
            trace_weight: 0.0,
            prior_weight_a: 0.0,
            prior_weight_b: 0.0,
        }
    }

    pub fn residual() -> Self {
        Self {
            residual_weight: 1.0,
            ..Self::constant()
        }
    }

    fn is_constant(&self) -> bool {
        self.residual_weight == 0.0
            && self.trace_weight == 0.0
            && self.prior_weight_a == 0.0
            && self.prior_weight_b == 0.0
    }
}

/// Equality constraints on the X block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XConstraint {
    Free,
    /// `X_ij = Y_ij` wherever the mask observes.
    FixedObserved,
    /// `X = Y` entirely (the nuclear-norm evaluation instance).
    FixedAll,
}

/// Constraints on the Gram blocks A and B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GramConstraint {
    Free,
    /// `A = A₀`, `B = B₀` from the prior.
    Fixed,
    /// `‖A−A₀‖_F ≤ delta_a`, `‖B−B₀‖_F ≤ delta_b`.
    Ball { delta_a: f64, delta_b: f64 },
    /// `A = U diag(d) Uᵀ`, `B = V diag(d) Vᵀ` with `d ≥ 0` the only freedom.
    SpectralWeights,
}

/// A fully specified problem instance.
#[derive(Debug, Clone)]
pub struct SdpProblem {
    y: DensityMatrix,
    mask: Option<ObservationMask>,
    objective: Objective,
    x_constraint: XConstraint,
    gram_constraint: GramConstraint,
    prior: Option<SubspacePrior>,
}

impl SdpProblem {
    /// Validates shapes and parameter consistency.
    pub fn new(
        y: DensityMatrix,
        mask: Option<ObservationMask>,
        objective: Objective,
        x_constraint: XConstraint,
        gram_constraint: GramConstraint,
        prior: Option<SubspacePrior>,
    ) -> Result<Self> {
        if let Some(m) = &mask {
            if m.shape() != y.shape() {
                return Err(Error::Dimension(format!(
                    "mask {:?} does not match data {:?}",
                    m.shape(),
                    y.shape()
                )));
            }
        }
        for (name, w) in [
            ("residual", objective.residual_weight),
            ("trace", objective.trace_weight),
            ("prior A", objective.prior_weight_a),
            ("prior B", objective.prior_weight_b),
        ] {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} weight must be finite and nonnegative, got {w}"
                )));
            }
        }
        if objective.residual_weight > 0.0 && mask.is_none() {
            return Err(Error::InvalidArgument(
                "masked-residual objective requires a mask".into(),
            ));
        }
        if x_constraint == XConstraint::FixedObserved && mask.is_none() {
            return Err(Error::InvalidArgument(
                "fixed-observed constraint requires a mask".into(),
            ));
        }
        let needs_prior = objective.prior_weight_a > 0.0
            || objective.prior_weight_b > 0.0
            || !matches!(gram_constraint, GramConstraint::Free);
        if needs_prior && prior.is_none() {
            return Err(Error::InvalidArgument(
                "gram constraints and prior-deviation terms require a subspace prior".into(),
            ));
        }
        if let GramConstraint::Ball { delta_a, delta_b } = gram_constraint {
            if !(delta_a.is_finite() && delta_a >= 0.0 && delta_b.is_finite() && delta_b >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "ball radii must be finite and nonnegative, got ({delta_a}, {delta_b})"
                )));
            }
        }
        if let Some(p) = &prior {
            if p.a().nrows() != y.rows() || p.b().nrows() != y.cols() {
                return Err(Error::Dimension(format!(
                    "prior blocks ({}, {}) do not match data shape {:?}",
                    p.a().nrows(),
                    p.b().nrows(),
                    y.shape()
                )));
            }
        }
        Ok(Self {
            y,
            mask,
            objective,
            x_constraint,
            gram_constraint,
            prior,
        })
    }

    pub fn rows(&self) -> usize {
        self.y.rows()
    }

    pub fn cols(&self) -> usize {
        self.y.cols()
    }

    /// Side length of the assembled block matrix.
    pub fn block_dim(&self) -> usize {
        self.rows() + self.cols()
    }

    pub fn y(&self) -> &DensityMatrix {
        &self.y
    }

    pub fn mask(&self) -> Option<&ObservationMask> {
        self.mask.as_ref()
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn x_constraint(&self) -> XConstraint {
        self.x_constraint
    }

    pub fn gram_constraint(&self) -> GramConstraint {
        self.gram_constraint
    }

    pub fn prior(&self) -> Option<&SubspacePrior> {
        self.prior.as_ref()
    }

    /// Objective value at a candidate point.
    pub fn objective_at(&self, a: &DMatrix<f64>, x: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        let mut value = 0.0;
        if self.objective.residual_weight > 0.0 {
            let mask = self.mask.as_ref().expect("validated at construction");
            let mut sq = 0.0;
            for i in 0..x.nrows() {
                for j in 0..x.ncols() {
                    if mask.is_observed(i, j) {
                        let d = x[(i, j)] - self.y.get(i, j);
                        sq += d * d;
                    }
                }
            }
            value += self.objective.residual_weight * sq.sqrt();
        }
        if self.objective.trace_weight > 0.0 {
            value += self.objective.trace_weight * (a.trace() + b.trace());
        }
        if self.objective.prior_weight_a > 0.0 || self.objective.prior_weight_b > 0.0 {
            let p = self.prior.as_ref().expect("validated at construction");
            value += self.objective.prior_weight_a * (a - p.a()).norm();
            value += self.objective.prior_weight_b * (b - p.b()).norm();
        }
        value
    }
}

/// Solver tuning knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Relative residual tolerance, scaled by 1 + iterate norm.
    pub tolerance: f64,
    pub max_iter: usize,
    /// Initial penalty parameter.
    pub rho: f64,
    /// Rescale rho when the primal/dual residual ratio exceeds 10.
    pub adaptive_rho: bool,
    /// Relaxation factor for the splitting step; 1 disables, values in
    /// (1, 2) typically speed up convergence.
    pub over_relaxation: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-5,
            max_iter: 5000,
            rho: 1.0,
            adaptive_rho: true,
            over_relaxation: 1.6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverStatus {
    Converged,
    MaxIter,
    Infeasible,
}

impl std::fmt::Display for SolverStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolverStatus::Converged => write!(f, "converged"),
            SolverStatus::MaxIter => write!(f, "max_iter"),
            SolverStatus::Infeasible => write!(f, "infeasible"),
        }
    }
}

/// Solver output: optimized blocks plus convergence diagnostics.
#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub x: DensityMatrix,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    /// Spectral weights, present for [`GramConstraint::SpectralWeights`].
    pub d: Option<Vec<f64>>,
    pub objective_value: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub status: SolverStatus,
}

pub use solver::solve;
