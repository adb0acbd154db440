//! Alternating hard rank projection: refill observed entries, project onto
//! rank-r matrices, repeat.

use super::{check_inputs, passthrough, Imputer};
use crate::error::{Error, Result};
use crate::mask::ObservationMask;
use crate::matrix::DensityMatrix;

#[derive(Debug, Clone, Copy)]
pub struct IterativeSvd {
    pub rank: usize,
    pub max_sweeps: usize,
    pub rel_tol: f64,
}

impl IterativeSvd {
    pub fn new(rank: usize) -> Result<Self> {
        if rank == 0 {
            return Err(Error::InvalidArgument("rank must be >= 1".into()));
        }
        Ok(Self {
            rank,
            max_sweeps: 100,
            rel_tol: 1e-5,
        })
    }
}

impl Default for IterativeSvd {
    fn default() -> Self {
        Self {
            rank: 10,
            max_sweeps: 100,
            rel_tol: 1e-5,
        }
    }
}

impl Imputer for IterativeSvd {
    fn name(&self) -> &str {
        "itersvd"
    }

    fn impute(&self, y: &DensityMatrix, mask: &ObservationMask) -> Result<DensityMatrix> {
        check_inputs(y, mask)?;
        // Small inputs cap the usable rank.
        let rank = self.rank.min(y.rows().min(y.cols()));
        let mut x = crate::mask::apply_mask(y, mask)?.into_inner();
        for _ in 0..self.max_sweeps {
            let mut filled = x.clone();
            for i in 0..y.rows() {
                for j in 0..y.cols() {
                    if mask.is_observed(i, j) {
                        filled[(i, j)] = y.get(i, j);
                    }
                }
            }
            let truncated = DensityMatrix::from_matrix_unchecked(filled)
                .truncated_svd(rank)?
                .reconstruct()
                .into_inner();
            let delta = (&truncated - &x).norm();
            let denom = x.norm().max(1e-12);
            x = truncated;
            if delta / denom < self.rel_tol {
                break;
            }
        }
        Ok(passthrough(y, mask, x))
    }
}
