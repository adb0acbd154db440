//! Nuclear-norm minimization through the block-PSD program, with the
//! nuclear norm realized as `(tr A + tr B)/2` under the block PSD
//! constraint.
//!
//! The default keeps observed entries as hard equalities:
//! `min ‖X‖_*  s.t.  X_ij = Y_ij on Ω`. A soft variant replaces the
//! equalities with a weighted residual term,
//! `min w ‖Ω∘(X−Y)‖_F + nuclear_weight ‖X‖_*`. Note the soft form needs
//! `w` comfortably above 1: the residual term's subgradient never exceeds
//! unit Frobenius norm, so at unit weight the zero matrix is always among
//! the optima and the completion collapses.

use super::{check_inputs, passthrough, Imputer};
use crate::error::{Error, Result};
use crate::mask::ObservationMask;
use crate::matrix::DensityMatrix;
use crate::sdp::{
    solve, GramConstraint, Objective, SdpProblem, SolverOptions, SolverStatus, XConstraint,
};

#[derive(Debug, Clone, Copy)]
pub struct NnMin {
    /// Weight on the nuclear-norm term.
    pub nuclear_weight: f64,
    /// `None` keeps observed entries as hard equalities; `Some(w)` switches
    /// to the soft masked-residual objective with weight `w`.
    pub residual_weight: Option<f64>,
    pub solver: SolverOptions,
}

impl NnMin {
    pub fn new(nuclear_weight: f64, solver: SolverOptions) -> Result<Self> {
        if !(nuclear_weight.is_finite() && nuclear_weight > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "nuclear weight must be positive, got {nuclear_weight}"
            )));
        }
        Ok(Self {
            nuclear_weight,
            residual_weight: None,
            solver,
        })
    }

    /// Soft-agreement variant.
    pub fn soft(nuclear_weight: f64, residual_weight: f64, solver: SolverOptions) -> Result<Self> {
        let mut s = Self::new(nuclear_weight, solver)?;
        if !(residual_weight.is_finite() && residual_weight > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "residual weight must be positive, got {residual_weight}"
            )));
        }
        s.residual_weight = Some(residual_weight);
        Ok(s)
    }
}

impl Default for NnMin {
    fn default() -> Self {
        Self {
            nuclear_weight: 1.0,
            residual_weight: None,
            solver: SolverOptions::default(),
        }
    }
}

impl Imputer for NnMin {
    fn name(&self) -> &str {
        "nnmin"
    }

    fn impute(&self, y: &DensityMatrix, mask: &ObservationMask) -> Result<DensityMatrix> {
        check_inputs(y, mask)?;
        let masked = crate::mask::apply_mask(y, mask)?;
        let (objective, x_constraint) = match self.residual_weight {
            None => (
                Objective {
                    residual_weight: 0.0,
                    trace_weight: 0.5 * self.nuclear_weight,
                    prior_weight_a: 0.0,
                    prior_weight_b: 0.0,
                },
                XConstraint::FixedObserved,
            ),
            Some(w) => (
                Objective {
                    residual_weight: w,
                    trace_weight: 0.5 * self.nuclear_weight,
                    prior_weight_a: 0.0,
                    prior_weight_b: 0.0,
                },
                XConstraint::Free,
            ),
        };
        let problem = SdpProblem::new(
            masked,
            Some(mask.clone()),
            objective,
            x_constraint,
            GramConstraint::Free,
            None,
        )?;
        let solution = solve(&problem, &self.solver)?;
        match solution.status {
            SolverStatus::Converged => {}
            SolverStatus::MaxIter => {
                log::warn!(
                    "nuclear-norm completion stopped at max_iter (primal {:.3e}, dual {:.3e})",
                    solution.primal_residual,
                    solution.dual_residual
                );
            }
            SolverStatus::Infeasible => {
                return Err(Error::Solver(
                    "nuclear-norm completion reported infeasible".into(),
                ));
            }
        }
        Ok(passthrough(y, mask, solution.x.into_inner()))
    }
}
