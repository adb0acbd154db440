//! Mean fill: the simplest statistical baseline.

use nalgebra::DMatrix;

use super::{check_inputs, passthrough, Imputer};
use crate::error::Result;
use crate::mask::ObservationMask;
use crate::matrix::DensityMatrix;

/// Which observed population supplies the fill value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeanStrategy {
    /// Mean of the column's observed entries; columns with no observations
    /// fall back to the global observed mean. At 90% missingness and two
    /// dozen columns, empty columns are routine.
    #[default]
    Column,
    /// Mean of all observed entries.
    Global,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MeanFill {
    pub strategy: MeanStrategy,
}

impl MeanFill {
    pub fn global() -> Self {
        Self {
            strategy: MeanStrategy::Global,
        }
    }
}

impl Imputer for MeanFill {
    fn name(&self) -> &str {
        "mean"
    }

    fn impute(&self, y: &DensityMatrix, mask: &ObservationMask) -> Result<DensityMatrix> {
        check_inputs(y, mask)?;
        let mut global_sum = 0.0;
        let mut global_n = 0usize;
        for i in 0..y.rows() {
            for j in 0..y.cols() {
                if mask.is_observed(i, j) {
                    global_sum += y.get(i, j);
                    global_n += 1;
                }
            }
        }
        let global_mean = global_sum / global_n as f64;

        let fill_for = |j: usize| -> f64 {
            match self.strategy {
                MeanStrategy::Global => global_mean,
                MeanStrategy::Column => {
                    let mut sum = 0.0;
                    let mut n = 0usize;
                    for i in 0..y.rows() {
                        if mask.is_observed(i, j) {
                            sum += y.get(i, j);
                            n += 1;
                        }
                    }
                    if n > 0 {
                        sum / n as f64
                    } else {
                        global_mean
                    }
                }
            }
        };

        let mut out = DMatrix::zeros(y.rows(), y.cols());
        for j in 0..y.cols() {
            let fill = fill_for(j);
            for i in 0..y.rows() {
                out[(i, j)] = fill;
            }
        }
        Ok(passthrough(y, mask, out))
    }
}
