//! Dense real-matrix foundation: shapes, element-wise operations, norms and
//! singular value decompositions sized for desk-scale problems
//! (hundreds of rows by tens of columns).

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Relative threshold below which a singular value is treated as zero for
/// rank decisions.
pub const RANK_EPS: f64 = 1e-12;

/// Tolerance for orthonormality checks on SVD factors.
pub const ORTHO_TOL: f64 = 1e-10;

/// A dense real matrix. Rows index vectorized spatial cells, columns index
/// time slots, but the API places no restriction beyond finiteness.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    data: DMatrix<f64>,
}

impl DensityMatrix {
    /// Builds a matrix from row-major values, validating shape and finiteness.
    pub fn from_rows_vec(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if values.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "expected {} values for a {rows}x{cols} matrix, got {}",
                rows * cols,
                values.len()
            )));
        }
        let data = DMatrix::from_row_slice(rows, cols, &values);
        Self::from_matrix(data)
    }

    /// Wraps an existing matrix, validating shape and finiteness.
    pub fn from_matrix(data: DMatrix<f64>) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(Error::InvalidArgument(
                "matrix dimensions must be positive".into(),
            ));
        }
        if let Some((i, j)) = find_non_finite(&data) {
            return Err(Error::NonFinite(format!("entry ({i}, {j}) is not finite")));
        }
        Ok(Self { data })
    }

    /// Wraps a matrix produced by internal arithmetic on already-validated
    /// inputs, skipping the finiteness scan.
    pub(crate) fn from_matrix_unchecked(data: DMatrix<f64>) -> Self {
        debug_assert!(data.iter().all(|v| v.is_finite()));
        Self { data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(
                "matrix dimensions must be positive".into(),
            ));
        }
        Ok(Self {
            data: DMatrix::zeros(rows, cols),
        })
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.data.nrows(), self.data.ncols())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[(i, j)]
    }

    /// Borrowed view of the underlying storage.
    pub fn inner(&self) -> &DMatrix<f64> {
        &self.data
    }

    /// Consumes the wrapper and yields the underlying matrix.
    pub fn into_inner(self) -> DMatrix<f64> {
        self.data
    }

    /// Element-wise (Hadamard) product.
    pub fn hadamard(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        if self.shape() != other.shape() {
            return Err(Error::Dimension(format!(
                "hadamard operands differ: {:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(DensityMatrix::from_matrix_unchecked(
            self.data.component_mul(&other.data),
        ))
    }

    /// Square root of the sum of squared entries.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.norm()
    }

    /// Sum of singular values, computed from a full SVD. This is the
    /// reference route the SDP-based evaluation is checked against.
    pub fn nuclear_norm_svd(&self) -> f64 {
        self.data.clone().singular_values().iter().sum()
    }

    /// Best rank-`k` approximation factors, columns sign-aligned so repeated
    /// runs produce identical factors.
    pub fn truncated_svd(&self, k: usize) -> Result<SvdResult> {
        let max_rank = self.rows().min(self.cols());
        if k == 0 || k > max_rank {
            return Err(Error::InvalidArgument(format!(
                "rank {k} out of range 1..={max_rank}"
            )));
        }
        let svd = self.data.clone().svd(true, true);
        let u_full = svd.u.expect("SVD with vectors requested");
        let v_t_full = svd.v_t.expect("SVD with vectors requested");

        // nalgebra sorts descending; keep a defensive argsort so the
        // nonincreasing invariant never depends on backend behaviour.
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| {
            svd.singular_values[b]
                .partial_cmp(&svd.singular_values[a])
                .unwrap_or(std::cmp::Ordering::Equal)
        });

        let mut u = DMatrix::zeros(self.rows(), k);
        let mut v = DMatrix::zeros(self.cols(), k);
        let mut sigma = Vec::with_capacity(k);
        for (col, &src) in order.iter().take(k).enumerate() {
            u.set_column(col, &u_full.column(src));
            v.set_column(col, &v_t_full.row(src).transpose());
            sigma.push(svd.singular_values[src]);
        }

        SvdResult::new(u, sigma, v).map(|r| r.sign_align())
    }
}

/// A rank-`k` truncated singular value decomposition with orthonormal
/// factor columns and nonincreasing singular values.
#[derive(Debug, Clone)]
pub struct SvdResult {
    u: DMatrix<f64>,
    sigma: Vec<f64>,
    v: DMatrix<f64>,
}

impl SvdResult {
    /// Validates and wraps SVD factors: `u` is rows x k, `v` is cols x k,
    /// both with orthonormal columns; `sigma` holds k nonincreasing
    /// nonnegative values.
    pub fn new(u: DMatrix<f64>, sigma: Vec<f64>, v: DMatrix<f64>) -> Result<Self> {
        let k = sigma.len();
        if u.ncols() != k || v.ncols() != k {
            return Err(Error::Dimension(format!(
                "factor column counts ({}, {}) do not match {k} singular values",
                u.ncols(),
                v.ncols()
            )));
        }
        if k > u.nrows().min(v.nrows()) {
            return Err(Error::InvalidArgument(format!(
                "retained rank {k} exceeds min dimension {}",
                u.nrows().min(v.nrows())
            )));
        }
        if sigma.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::NonFinite("singular values must be finite and nonnegative".into()));
        }
        if sigma.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(
                "singular values must be nonincreasing".into(),
            ));
        }
        for (name, m) in [("U", &u), ("V", &v)] {
            let gram = m.transpose() * m;
            let dev = (&gram - DMatrix::identity(k, k)).norm();
            if dev > ORTHO_TOL * (k as f64).sqrt().max(1.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} columns are not orthonormal (deviation {dev:.3e})"
                )));
            }
        }
        Ok(Self { u, sigma, v })
    }

    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    /// `U diag(sigma) V^T`.
    pub fn reconstruct(&self) -> DensityMatrix {
        let mut scaled = self.u.clone();
        for (c, s) in self.sigma.iter().enumerate() {
            scaled.column_mut(c).scale_mut(*s);
        }
        DensityMatrix::from_matrix_unchecked(scaled * self.v.transpose())
    }

    /// Flips each U column (and its matching V column) so the
    /// largest-magnitude U entry is positive. The reconstruction is
    /// unchanged; factorizations become reproducible across runs.
    pub fn sign_align(mut self) -> SvdResult {
        for c in 0..self.sigma.len() {
            let col = self.u.column(c);
            let mut lead = 0usize;
            let mut best = 0.0f64;
            for (i, v) in col.iter().enumerate() {
                if v.abs() > best {
                    best = v.abs();
                    lead = i;
                }
            }
            if self.u[(lead, c)] < 0.0 {
                self.u.column_mut(c).neg_mut();
                self.v.column_mut(c).neg_mut();
            }
        }
        self
    }
}

fn find_non_finite(m: &DMatrix<f64>) -> Option<(usize, usize)> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if !m[(i, j)].is_finite() {
                return Some((i, j));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DVector;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn seeded_matrix(rows: usize, cols: usize, seed: u64) -> DensityMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<f64> = (0..rows * cols).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        DensityMatrix::from_rows_vec(rows, cols, values).unwrap()
    }

    /// Independent nuclear-norm oracle: singular values are the square
    /// roots of the eigenvalues of X^T X.
    fn nuclear_norm_eigen_oracle(x: &DensityMatrix) -> f64 {
        let gram = x.inner().transpose() * x.inner();
        let eig = nalgebra::SymmetricEigen::new(gram);
        eig.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).sum()
    }

    #[test]
    fn construction_rejects_bad_inputs() {
        assert!(DensityMatrix::from_rows_vec(0, 3, vec![]).is_err());
        assert!(DensityMatrix::from_rows_vec(2, 2, vec![1.0; 3]).is_err());
        assert!(DensityMatrix::from_rows_vec(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(DensityMatrix::from_rows_vec(1, 2, vec![1.0, f64::INFINITY]).is_err());
        assert!(DensityMatrix::from_rows_vec(2, 2, vec![0.0; 4]).is_ok());
    }

    #[test]
    fn hadamard_identity_and_zero() {
        let x = seeded_matrix(4, 3, 7);
        let ones = DensityMatrix::from_rows_vec(4, 3, vec![1.0; 12]).unwrap();
        let zeros = DensityMatrix::zeros(4, 3).unwrap();
        assert_eq!(x.hadamard(&ones).unwrap(), x);
        assert_eq!(x.hadamard(&zeros).unwrap(), zeros);
    }

    #[test]
    fn hadamard_hand_computed() {
        let x = DensityMatrix::from_rows_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let z = DensityMatrix::from_rows_vec(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let expect = DensityMatrix::from_rows_vec(2, 2, vec![0.0, 2.0, 3.0, 0.0]).unwrap();
        assert_eq!(x.hadamard(&z).unwrap(), expect);
    }

    #[test]
    fn hadamard_shape_mismatch() {
        let x = seeded_matrix(2, 3, 1);
        let z = seeded_matrix(3, 2, 1);
        assert!(matches!(x.hadamard(&z), Err(Error::Dimension(_))));
    }

    #[test]
    fn hadamard_commutative_associative() {
        let a = seeded_matrix(5, 4, 11);
        let b = seeded_matrix(5, 4, 12);
        let c = seeded_matrix(5, 4, 13);
        let ab = a.hadamard(&b).unwrap();
        let ba = b.hadamard(&a).unwrap();
        assert_eq!(ab, ba);
        let ab_c = ab.hadamard(&c).unwrap();
        let a_bc = a.hadamard(&b.hadamard(&c).unwrap()).unwrap();
        assert_relative_eq!(ab_c.inner(), a_bc.inner(), epsilon = 1e-14);
    }

    #[test]
    fn frobenius_examples() {
        assert_eq!(DensityMatrix::zeros(3, 5).unwrap().frobenius_norm(), 0.0);
        let eye = DensityMatrix::from_matrix(DMatrix::identity(3, 3)).unwrap();
        assert_relative_eq!(eye.frobenius_norm(), 3.0_f64.sqrt(), epsilon = 1e-14);
        let row = DensityMatrix::from_rows_vec(1, 2, vec![3.0, 4.0]).unwrap();
        assert_relative_eq!(row.frobenius_norm(), 5.0, epsilon = 1e-14);
    }

    #[test]
    fn nuclear_norm_identity_and_rank_one() {
        let eye = DensityMatrix::from_matrix(DMatrix::identity(4, 4)).unwrap();
        assert_relative_eq!(eye.nuclear_norm_svd(), 4.0, epsilon = 1e-12);

        let u = DVector::from_vec(vec![1.0, 2.0, -1.0]);
        let v = DVector::from_vec(vec![0.5, 3.0]);
        let x = DensityMatrix::from_matrix(&u * v.transpose()).unwrap();
        assert_relative_eq!(x.nuclear_norm_svd(), u.norm() * v.norm(), epsilon = 1e-12);
    }

    #[test]
    fn nuclear_norm_matches_eigen_oracle() {
        let x = seeded_matrix(8, 6, 42);
        let oracle = nuclear_norm_eigen_oracle(&x);
        assert_relative_eq!(x.nuclear_norm_svd(), oracle, epsilon = 1e-9);
    }

    #[test]
    fn nuclear_dominates_frobenius() {
        for seed in 0..5 {
            let x = seeded_matrix(6, 5, seed);
            assert!(x.nuclear_norm_svd() >= x.frobenius_norm() - 1e-12);
        }
        // Equality iff rank <= 1.
        let u = DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0]);
        let v = DVector::from_vec(vec![2.0, 1.0, -1.0]);
        let r1 = DensityMatrix::from_matrix(&u * v.transpose()).unwrap();
        assert_relative_eq!(r1.nuclear_norm_svd(), r1.frobenius_norm(), epsilon = 1e-10);
        let full = seeded_matrix(4, 3, 99);
        assert!(full.nuclear_norm_svd() > full.frobenius_norm() + 1e-6);
    }

    #[test]
    fn truncated_svd_diagonal() {
        let x = DensityMatrix::from_matrix(DMatrix::from_diagonal(&DVector::from_vec(vec![
            5.0, 3.0, 1.0,
        ])))
        .unwrap();
        let svd = x.truncated_svd(2).unwrap();
        assert_relative_eq!(svd.sigma()[0], 5.0, epsilon = 1e-12);
        assert_relative_eq!(svd.sigma()[1], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn truncated_svd_full_rank_reconstructs() {
        let x = seeded_matrix(7, 5, 3);
        let svd = x.truncated_svd(5).unwrap();
        let err = (svd.reconstruct().inner() - x.inner()).norm() / x.frobenius_norm();
        assert!(err < 1e-8, "relative reconstruction error {err}");
    }

    #[test]
    fn truncated_svd_recovers_planted_rank() {
        // X built from explicit rank-3 factors.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let a = DMatrix::from_fn(20, 3, |_, _| rng.random::<f64>() - 0.5);
        let b = DMatrix::from_fn(12, 3, |_, _| rng.random::<f64>() - 0.5);
        let x = DensityMatrix::from_matrix(&a * b.transpose()).unwrap();
        let svd = x.truncated_svd(3).unwrap();
        let err = (svd.reconstruct().inner() - x.inner()).norm() / x.frobenius_norm();
        assert!(err < 1e-8, "relative reconstruction error {err}");
    }

    #[test]
    fn truncated_svd_rank_out_of_range() {
        let x = seeded_matrix(4, 3, 5);
        assert!(x.truncated_svd(0).is_err());
        assert!(x.truncated_svd(4).is_err());
    }

    #[test]
    fn truncated_svd_error_is_monotone_in_rank() {
        let x = seeded_matrix(10, 8, 21);
        let mut prev = f64::INFINITY;
        for k in 1..=8 {
            let svd = x.truncated_svd(k).unwrap();
            let err = (svd.reconstruct().inner() - x.inner()).norm();
            assert!(err <= prev + 1e-10, "error grew at k={k}: {err} > {prev}");
            prev = err;
        }
    }

    #[test]
    fn svd_factors_orthonormal() {
        let x = seeded_matrix(9, 6, 8);
        let svd = x.truncated_svd(4).unwrap();
        let iu = svd.u().transpose() * svd.u();
        let iv = svd.v().transpose() * svd.v();
        assert!((iu - DMatrix::identity(4, 4)).norm() < ORTHO_TOL);
        assert!((iv - DMatrix::identity(4, 4)).norm() < ORTHO_TOL);
    }

    #[test]
    fn sign_align_flips_negative_lead() {
        let u = DMatrix::from_column_slice(3, 1, &[-0.8, 0.6, 0.0]);
        let v = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let svd = SvdResult::new(u, vec![2.0], v).unwrap();
        let before = svd.reconstruct();
        let aligned = svd.sign_align();
        assert!(aligned.u()[(0, 0)] > 0.0);
        assert!(aligned.v()[(0, 0)] < 0.0);
        let after = aligned.reconstruct();
        assert_relative_eq!(before.inner(), after.inner(), epsilon = 1e-12);
    }

    #[test]
    fn sign_align_idempotent_on_aligned_factors() {
        let x = seeded_matrix(6, 4, 30);
        let svd = x.truncated_svd(3).unwrap();
        let twice = svd.clone().sign_align();
        assert_eq!(svd.u(), twice.u());
        assert_eq!(svd.v(), twice.v());
    }

    #[test]
    fn sign_align_preserves_reconstruction() {
        let x = seeded_matrix(8, 5, 31);
        let svd = x.truncated_svd(5).unwrap();
        let rec = svd.reconstruct();
        let realigned = svd.sign_align().reconstruct();
        assert_relative_eq!(rec.inner(), realigned.inner(), epsilon = 1e-12);
    }
}
