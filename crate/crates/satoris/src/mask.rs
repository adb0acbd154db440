//! Observation masks and MCAR mask simulation.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::DensityMatrix;

/// Binary observation pattern: `true` marks an observed entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationMask {
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
}

impl ObservationMask {
    /// Builds a mask from row-major bits.
    pub fn from_bits(rows: usize, cols: usize, bits: Vec<bool>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(
                "mask dimensions must be positive".into(),
            ));
        }
        if bits.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "expected {} bits for a {rows}x{cols} mask, got {}",
                rows * cols,
                bits.len()
            )));
        }
        Ok(Self { rows, cols, bits })
    }

    pub fn all_observed(rows: usize, cols: usize) -> Result<Self> {
        Self::from_bits(rows, cols, vec![true; rows * cols])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_observed(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.cols + j]
    }

    pub fn observed_count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn missing_count(&self) -> usize {
        self.bits.len() - self.observed_count()
    }

    /// 0/1 matrix view, convenient for Hadamard projections.
    pub fn to_matrix(&self) -> DensityMatrix {
        let m = DMatrix::from_fn(self.rows, self.cols, |i, j| {
            if self.is_observed(i, j) {
                1.0
            } else {
                0.0
            }
        });
        DensityMatrix::from_matrix_unchecked(m)
    }

    /// FNV-1a hash of the packed bit pattern. Stable across platforms, used
    /// to confirm every method in a benchmark cell saw the same mask.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut byte: u8 = 0;
        for (idx, &b) in self.bits.iter().enumerate() {
            byte = (byte << 1) | (b as u8);
            if idx % 8 == 7 {
                h ^= byte as u64;
                h = h.wrapping_mul(0x100000001b3);
                byte = 0;
            }
        }
        h ^= byte as u64;
        h = h.wrapping_mul(0x100000001b3);
        h ^= (self.rows as u64) << 32 | self.cols as u64;
        h.wrapping_mul(0x100000001b3)
    }

    /// Stacks two masks side by side (same row count).
    pub fn hstack(&self, other: &ObservationMask) -> Result<ObservationMask> {
        if self.rows != other.rows {
            return Err(Error::Dimension(format!(
                "hstack row counts differ: {} vs {}",
                self.rows, other.rows
            )));
        }
        let cols = self.cols + other.cols;
        let mut bits = Vec::with_capacity(self.rows * cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                bits.push(self.is_observed(i, j));
            }
            for j in 0..other.cols {
                bits.push(other.is_observed(i, j));
            }
        }
        ObservationMask::from_bits(self.rows, cols, bits)
    }

    /// Stacks two masks top to bottom (same column count).
    pub fn vstack(&self, other: &ObservationMask) -> Result<ObservationMask> {
        if self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "vstack column counts differ: {} vs {}",
                self.cols, other.cols
            )));
        }
        let mut bits = self.bits.clone();
        bits.extend_from_slice(&other.bits);
        ObservationMask::from_bits(self.rows + other.rows, self.cols, bits)
    }
}

/// Draws an MCAR mask: each entry is missing independently with probability
/// `missing_fraction`. The generator is seeded, so identical
/// (seed, shape, fraction) triples give bit-identical masks.
pub fn generate_mask(
    rows: usize,
    cols: usize,
    missing_fraction: f64,
    seed: u64,
) -> Result<ObservationMask> {
    if !(0.0..1.0).contains(&missing_fraction) {
        return Err(Error::InvalidArgument(format!(
            "missing_fraction must lie in [0, 1), got {missing_fraction}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bits: Vec<bool> = (0..rows * cols)
        .map(|_| rng.random::<f64>() >= missing_fraction)
        .collect();
    ObservationMask::from_bits(rows, cols, bits)
}

/// `Y = D ∘ Ω`: keeps observed entries, zeroes the rest.
pub fn apply_mask(d: &DensityMatrix, mask: &ObservationMask) -> Result<DensityMatrix> {
    if d.shape() != mask.shape() {
        return Err(Error::Dimension(format!(
            "matrix {:?} vs mask {:?}",
            d.shape(),
            mask.shape()
        )));
    }
    d.hadamard(&mask.to_matrix())
}
