//! The solver's iterate: the three distinct blocks (A, X, B) of the
//! symmetric matrix
//!
//! ```text
//!   Z = [ A   X  ]
//!       [ Xᵀ  B  ]
//! ```
//!
//! All inner products count the X block twice, matching the Frobenius
//! geometry of the assembled Z. Under that metric, clipping negative
//! eigenvalues of Z is the exact projection onto the PSD cone.

use nalgebra::{DMatrix, SymmetricEigen};

/// One (A, X, B) iterate. A is rows x rows, X is rows x cols,
/// B is cols x cols; A and B stay symmetric throughout.
#[derive(Debug, Clone)]
pub(crate) struct BlockVar {
    pub a: DMatrix<f64>,
    pub x: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

impl BlockVar {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            a: DMatrix::zeros(rows, rows),
            x: DMatrix::zeros(rows, cols),
            b: DMatrix::zeros(cols, cols),
        }
    }

    pub fn rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn cols(&self) -> usize {
        self.x.ncols()
    }

    /// Frobenius norm of the assembled Z (X counted twice).
    pub fn norm(&self) -> f64 {
        (self.a.norm_squared() + 2.0 * self.x.norm_squared() + self.b.norm_squared()).sqrt()
    }

    pub fn sub(&self, other: &BlockVar) -> BlockVar {
        BlockVar {
            a: &self.a - &other.a,
            x: &self.x - &other.x,
            b: &self.b - &other.b,
        }
    }

    pub fn add_assign(&mut self, other: &BlockVar) {
        self.a += &other.a;
        self.x += &other.x;
        self.b += &other.b;
    }

    pub fn scale_assign(&mut self, s: f64) {
        self.a.scale_mut(s);
        self.x.scale_mut(s);
        self.b.scale_mut(s);
    }

    pub fn distance(&self, other: &BlockVar) -> f64 {
        self.sub(other).norm()
    }

    /// Assembles the full (rows+cols) x (rows+cols) symmetric matrix.
    pub fn assemble(&self) -> DMatrix<f64> {
        let (m, n) = (self.rows(), self.cols());
        let d = m + n;
        let mut z = DMatrix::zeros(d, d);
        z.view_mut((0, 0), (m, m)).copy_from(&self.a);
        z.view_mut((0, m), (m, n)).copy_from(&self.x);
        z.view_mut((m, 0), (n, m)).copy_from(&self.x.transpose());
        z.view_mut((m, m), (n, n)).copy_from(&self.b);
        z
    }

    /// Splits a full symmetric matrix back into blocks, re-symmetrizing the
    /// diagonal blocks against round-off.
    pub fn disassemble(z: &DMatrix<f64>, rows: usize, cols: usize) -> BlockVar {
        let a = z.view((0, 0), (rows, rows)).into_owned();
        let b = z.view((rows, rows), (cols, cols)).into_owned();
        let x_upper = z.view((0, rows), (rows, cols)).into_owned();
        let x_lower_t = z.view((rows, 0), (cols, rows)).transpose();
        BlockVar {
            a: (&a + a.transpose()) * 0.5,
            x: (x_upper + x_lower_t) * 0.5,
            b: (&b + b.transpose()) * 0.5,
        }
    }

    /// Exact projection onto {Z ⪰ 0}: eigendecompose and clip negative
    /// eigenvalues. Also returns the smallest eigenvalue seen.
    pub fn project_psd(&self) -> (BlockVar, f64) {
        let z = self.assemble();
        let eig = SymmetricEigen::new(z);
        let min_eig = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig >= 0.0 {
            return (self.clone(), min_eig);
        }
        let d = eig.eigenvalues.len();
        let mut scaled = eig.eigenvectors.clone();
        for c in 0..d {
            scaled.column_mut(c).scale_mut(eig.eigenvalues[c].max(0.0));
        }
        let projected = scaled * eig.eigenvectors.transpose();
        (
            BlockVar::disassemble(&projected, self.rows(), self.cols()),
            min_eig,
        )
    }
}

/// Smallest eigenvalue of the assembled block matrix.
pub(crate) fn min_eigenvalue(v: &BlockVar) -> f64 {
    let eig = SymmetricEigen::new(v.assemble());
    eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}
