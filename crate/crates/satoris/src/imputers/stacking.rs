//! The implicit subspace-alignment meta-algorithm: concatenate the target
//! with a fully observed neighbor day and run any base imputer on the stack.
//! Horizontal stacking shares rows, encouraging a common spatial (left)
//! subspace; vertical stacking shares columns, encouraging a common temporal
//! (right) subspace. Only the target block of the completion is returned.

use nalgebra::DMatrix;

use super::{check_inputs, passthrough, Imputer, NnMin};
use crate::error::{Error, Result};
use crate::mask::ObservationMask;
use crate::matrix::DensityMatrix;
use crate::sdp::SolverOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StackingMode {
    /// `[Y | D2]`: column-wise concatenation.
    Horizontal,
    /// `[Y; D2]`: row-wise concatenation.
    Vertical,
}

impl StackingMode {
    pub fn suffix(&self) -> &'static str {
        match self {
            StackingMode::Horizontal => "-h",
            StackingMode::Vertical => "-v",
        }
    }
}

impl std::str::FromStr for StackingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "h" | "horizontal" => Ok(StackingMode::Horizontal),
            "v" | "vertical" => Ok(StackingMode::Vertical),
            other => Err(Error::InvalidArgument(format!(
                "unknown stacking mode {other:?}, expected h or v"
            ))),
        }
    }
}

/// Runs `base` on the stack of the masked target and the fully observed
/// neighbor, then extracts the target block. The neighbor block's mask is
/// all ones.
pub fn impute_stacked(
    base: &dyn Imputer,
    y1: &DensityMatrix,
    mask1: &ObservationMask,
    d2_full: &DensityMatrix,
    mode: StackingMode,
) -> Result<DensityMatrix> {
    check_inputs(y1, mask1)?;
    let (rows, cols) = y1.shape();
    let (stacked, stacked_mask) = match mode {
        StackingMode::Horizontal => {
            if d2_full.rows() != rows {
                return Err(Error::Dimension(format!(
                    "horizontal stacking needs matching row counts: {} vs {}",
                    rows,
                    d2_full.rows()
                )));
            }
            let mut m = DMatrix::zeros(rows, cols + d2_full.cols());
            m.view_mut((0, 0), (rows, cols)).copy_from(y1.inner());
            m.view_mut((0, cols), (rows, d2_full.cols()))
                .copy_from(d2_full.inner());
            let mask = mask1.hstack(&ObservationMask::all_observed(
                d2_full.rows(),
                d2_full.cols(),
            )?)?;
            (DensityMatrix::from_matrix_unchecked(m), mask)
        }
        StackingMode::Vertical => {
            if d2_full.cols() != cols {
                return Err(Error::Dimension(format!(
                    "vertical stacking needs matching column counts: {} vs {}",
                    cols,
                    d2_full.cols()
                )));
            }
            let mut m = DMatrix::zeros(rows + d2_full.rows(), cols);
            m.view_mut((0, 0), (rows, cols)).copy_from(y1.inner());
            m.view_mut((rows, 0), (d2_full.rows(), cols))
                .copy_from(d2_full.inner());
            let mask = mask1.vstack(&ObservationMask::all_observed(
                d2_full.rows(),
                d2_full.cols(),
            )?)?;
            (DensityMatrix::from_matrix_unchecked(m), mask)
        }
    };
    let completed = base.impute(&stacked, &stacked_mask)?;
    let block = completed.inner().view((0, 0), (rows, cols)).into_owned();
    Ok(passthrough(y1, mask1, block))
}

/// Implicitly informed nuclear-norm completion: horizontal stacking with
/// the nuclear-norm base imputer.
pub fn srisi(
    y1: &DensityMatrix,
    mask1: &ObservationMask,
    d2_full: &DensityMatrix,
    options: &SolverOptions,
) -> Result<DensityMatrix> {
    let base = NnMin::new(1.0, *options)?;
    impute_stacked(&base, y1, mask1, d2_full, StackingMode::Horizontal)
}

/// Wraps a base imputer so it always imputes through a stack with a fixed
/// neighbor. Lets stacked variants ride the same registry plumbing as their
/// bases.
pub struct StackedImputer {
    base: Box<dyn Imputer>,
    neighbor: DensityMatrix,
    mode: StackingMode,
    name: String,
}

impl StackedImputer {
    pub fn new(base: Box<dyn Imputer>, neighbor: DensityMatrix, mode: StackingMode) -> Self {
        let name = format!("{}{}", base.name(), mode.suffix());
        Self {
            base,
            neighbor,
            mode,
            name,
        }
    }
}

impl Imputer for StackedImputer {
    fn name(&self) -> &str {
        &self.name
    }

    fn impute(&self, y: &DensityMatrix, mask: &ObservationMask) -> Result<DensityMatrix> {
        impute_stacked(self.base.as_ref(), y, mask, &self.neighbor, self.mode)
    }
}
