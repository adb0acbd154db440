//! Iterative soft-thresholded SVD along a warm-started shrinkage ladder.
//!
//! At each regularization level lambda the fixed-point sweep
//! `X <- SVT_lambda(P_O(Y) + P_O⊥(X))` minimizes
//! `f(X) = 1/2 ‖P_O(Y − X)‖_F² + lambda ‖X‖_*`, whose value is
//! nonincreasing sweep over sweep. The ladder decays geometrically from
//! half the top singular value of the zero-filled data down to half a
//! percent of it, warm-starting each level at the previous solution.

use nalgebra::DMatrix;

use super::{check_inputs, passthrough, Imputer};
use crate::error::Result;
use crate::mask::ObservationMask;
use crate::matrix::DensityMatrix;

#[derive(Debug, Clone, Copy)]
pub struct SoftImpute {
    pub n_lambdas: usize,
    pub max_sweeps: usize,
    pub rel_tol: f64,
}

impl Default for SoftImpute {
    fn default() -> Self {
        Self {
            n_lambdas: 10,
            max_sweeps: 100,
            rel_tol: 1e-5,
        }
    }
}

/// Objective trace entry for one sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord {
    pub lambda: f64,
    pub sweep: usize,
    pub objective: f64,
}

impl SoftImpute {
    /// Runs the ladder and returns the per-sweep objective trace alongside
    /// the completed matrix.
    pub fn impute_with_trace(
        &self,
        y: &DensityMatrix,
        mask: &ObservationMask,
    ) -> Result<(DensityMatrix, Vec<SweepRecord>)> {
        check_inputs(y, mask)?;
        let masked = crate::mask::apply_mask(y, mask)?;
        let sigma_max = masked
            .inner()
            .clone()
            .singular_values()
            .iter()
            .cloned()
            .fold(0.0f64, f64::max);
        if sigma_max == 0.0 {
            // All observed entries are zero; the zero matrix is optimal.
            return Ok((masked, Vec::new()));
        }

        let hi = 0.5 * sigma_max;
        let lo = 0.005 * sigma_max;
        let decay = if self.n_lambdas > 1 {
            (lo / hi).powf(1.0 / (self.n_lambdas as f64 - 1.0))
        } else {
            1.0
        };

        let mut x = masked.inner().clone();
        let mut trace = Vec::new();
        let mut lambda = hi;
        for _ in 0..self.n_lambdas {
            for sweep in 0..self.max_sweeps {
                let filled = fill_observed(&x, y, mask);
                let next = svt(&filled, lambda);
                let delta = (&next - &x).norm();
                let denom = x.norm().max(1e-12);
                x = next;
                trace.push(SweepRecord {
                    lambda,
                    sweep,
                    objective: objective(&x, y, mask, lambda),
                });
                if delta / denom < self.rel_tol {
                    break;
                }
            }
            lambda *= decay;
        }
        Ok((passthrough(y, mask, x), trace))
    }
}

/// `P_O(Y) + P_O⊥(X)`.
fn fill_observed(x: &DMatrix<f64>, y: &DensityMatrix, mask: &ObservationMask) -> DMatrix<f64> {
    let mut out = x.clone();
    for i in 0..y.rows() {
        for j in 0..y.cols() {
            if mask.is_observed(i, j) {
                out[(i, j)] = y.get(i, j);
            }
        }
    }
    out
}

/// Soft-thresholds the singular values at `lambda`.
fn svt(m: &DMatrix<f64>, lambda: f64) -> DMatrix<f64> {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("SVD with vectors requested");
    let v_t = svd.v_t.expect("SVD with vectors requested");
    let mut scaled = u;
    for (c, s) in svd.singular_values.iter().enumerate() {
        scaled.column_mut(c).scale_mut((s - lambda).max(0.0));
    }
    scaled * v_t
}

fn objective(x: &DMatrix<f64>, y: &DensityMatrix, mask: &ObservationMask, lambda: f64) -> f64 {
    let mut residual_sq = 0.0;
    for i in 0..y.rows() {
        for j in 0..y.cols() {
            if mask.is_observed(i, j) {
                let d = y.get(i, j) - x[(i, j)];
                residual_sq += d * d;
            }
        }
    }
    let nuclear: f64 = x.clone().singular_values().iter().sum();
    0.5 * residual_sq + lambda * nuclear
}

impl Imputer for SoftImpute {
    fn name(&self) -> &str {
        "softimpute"
    }

    fn impute(&self, y: &DensityMatrix, mask: &ObservationMask) -> Result<DensityMatrix> {
        self.impute_with_trace(y, mask).map(|(m, _)| m)
    }
}
