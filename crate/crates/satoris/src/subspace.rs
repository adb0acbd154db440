//! Singular-subspace priors extracted from neighbor days, and the overlap
//! metric that quantifies how stable those subspaces are across days.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::{DensityMatrix, SvdResult};

/// Orthonormality tolerance for overlap inputs.
const OVERLAP_ORTHO_TOL: f64 = 1e-8;

/// Which singular factor a stability series tracks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Left factors (U): spatial subspaces.
    Left,
    /// Right factors (V): temporal subspaces.
    Right,
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "left" | "l" | "u" => Ok(Side::Left),
            "right" | "r" | "v" => Ok(Side::Right),
            other => Err(Error::InvalidArgument(format!(
                "unknown side {other:?}, expected left or right"
            ))),
        }
    }
}

/// Rank-k SVD of a neighbor day together with the Gram priors
/// `A = U Σ Uᵀ` and `B = V Σ Vᵀ` injected into the block-PSD constraint.
#[derive(Debug, Clone)]
pub struct SubspacePrior {
    svd: SvdResult,
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    source_day: Option<u32>,
}

impl SubspacePrior {
    pub fn svd(&self) -> &SvdResult {
        &self.svd
    }

    /// Row-space Gram prior `U Σ Uᵀ` (rows x rows, symmetric PSD).
    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// Column-space Gram prior `V Σ Vᵀ` (cols x cols, symmetric PSD).
    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn rank(&self) -> usize {
        self.svd.rank()
    }

    pub fn source_day(&self) -> Option<u32> {
        self.source_day
    }

    pub fn with_source_day(mut self, day: u32) -> Self {
        self.source_day = Some(day);
        self
    }
}

/// Builds the Gram priors from a fully observed neighbor day. The neighbor
/// must be clean: callers pre-impute any stray missing entries first.
pub fn build_prior(neighbor: &DensityMatrix, k: usize) -> Result<SubspacePrior> {
    let svd = neighbor.truncated_svd(k)?;
    let a = gram(svd.u(), svd.sigma());
    let b = gram(svd.v(), svd.sigma());
    Ok(SubspacePrior {
        svd,
        a,
        b,
        source_day: None,
    })
}

/// `M diag(sigma) Mᵀ`, explicitly symmetrized to kill round-off asymmetry
/// before the matrix enters a PSD-cone projection.
fn gram(m: &DMatrix<f64>, sigma: &[f64]) -> DMatrix<f64> {
    let mut scaled = m.clone();
    for (c, s) in sigma.iter().enumerate() {
        scaled.column_mut(c).scale_mut(*s);
    }
    let g = scaled * m.transpose();
    (&g + g.transpose()) * 0.5
}

/// Mean and spread of the singular values of `U1ᵀ U2` — the cosines of the
/// principal angles between the two column spans. 1 means identical
/// subspaces, 0 means orthogonal. The spread uses 1/k normalization.
pub fn subspace_overlap(u1: &DMatrix<f64>, u2: &DMatrix<f64>) -> Result<(f64, f64)> {
    if u1.shape() != u2.shape() {
        return Err(Error::Dimension(format!(
            "subspace shapes differ: {:?} vs {:?}",
            u1.shape(),
            u2.shape()
        )));
    }
    let k = u1.ncols();
    for (name, m) in [("first", u1), ("second", u2)] {
        let dev = (m.transpose() * m - DMatrix::identity(k, k)).norm();
        if dev > OVERLAP_ORTHO_TOL * (k as f64).sqrt().max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "{name} factor columns are not orthonormal (deviation {dev:.3e})"
            )));
        }
    }
    let cosines = (u1.transpose() * u2).singular_values();
    let clipped: Vec<f64> = cosines.iter().map(|s| s.clamp(0.0, 1.0)).collect();
    let mean = clipped.iter().sum::<f64>() / k as f64;
    let var = clipped.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / k as f64;
    Ok((mean, var.sqrt()))
}

/// Overlap of adjacent day pairs (t, t+1) using rank-k truncated SVD factors
/// of the chosen side. Returns one (mean, std) per pair.
pub fn stability_series(
    days: &[DensityMatrix],
    k: usize,
    side: Side,
) -> Result<Vec<(f64, f64)>> {
    if days.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "stability series needs at least two days, got {}",
            days.len()
        )));
    }
    let shape = days[0].shape();
    if days.iter().any(|d| d.shape() != shape) {
        return Err(Error::Dimension("days have inconsistent shapes".into()));
    }
    let factors: Vec<DMatrix<f64>> = days
        .iter()
        .map(|d| {
            d.truncated_svd(k).map(|svd| match side {
                Side::Left => svd.u().clone(),
                Side::Right => svd.v().clone(),
            })
        })
        .collect::<Result<_>>()?;
    factors
        .windows(2)
        .map(|w| subspace_overlap(&w[0], &w[1]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DVector;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_orthonormal(n: usize, k: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = DMatrix::from_fn(n, k, |_, _| rng.random::<f64>() - 0.5);
        let qr = g.qr();
        qr.q().columns(0, k).into_owned()
    }

    #[test]
    fn diagonal_prior() {
        let neighbor =
            DensityMatrix::from_matrix(DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 2.0])))
                .unwrap();
        let prior = build_prior(&neighbor, 2).unwrap();
        for (i, expect) in [(0usize, 4.0), (1usize, 2.0)] {
            assert_relative_eq!(prior.a()[(i, i)], expect, epsilon = 1e-10);
            assert_relative_eq!(prior.b()[(i, i)], expect, epsilon = 1e-10);
        }
        assert_relative_eq!(prior.a()[(0, 1)], 0.0, epsilon = 1e-10);
    }

    #[test]
    fn prior_traces_match_singular_sum() {
        let neighbor = crate::harness::synth::tests::positive_low_rank(12, 8, 3, 5);
        let prior = build_prior(&neighbor, 3).unwrap();
        let sum: f64 = prior.svd().sigma().iter().sum();
        assert_relative_eq!(prior.a().trace(), sum, max_relative = 1e-8);
        assert_relative_eq!(prior.b().trace(), sum, max_relative = 1e-8);
    }

    #[test]
    fn prior_is_symmetric_psd_low_rank() {
        let neighbor = crate::harness::synth::tests::positive_low_rank(15, 9, 3, 8);
        let prior = build_prior(&neighbor, 3).unwrap();
        for g in [prior.a(), prior.b()] {
            assert!((g - g.transpose()).norm() < 1e-10);
            let eig = nalgebra::SymmetricEigen::new(g.clone());
            let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(min > -1e-10, "negative eigenvalue {min}");
            let max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
            let above = eig
                .eigenvalues
                .iter()
                .filter(|l| **l > 1e-8 * max)
                .count();
            assert!(above <= 3, "rank exceeds k: {above}");
        }
    }

    #[test]
    fn prior_grams_share_nonzero_spectrum() {
        let neighbor = crate::harness::synth::tests::positive_low_rank(10, 7, 4, 21);
        let prior = build_prior(&neighbor, 4).unwrap();
        let mut ea: Vec<f64> = nalgebra::SymmetricEigen::new(prior.a().clone())
            .eigenvalues
            .iter()
            .cloned()
            .filter(|l| *l > 1e-8)
            .collect();
        let mut eb: Vec<f64> = nalgebra::SymmetricEigen::new(prior.b().clone())
            .eigenvalues
            .iter()
            .cloned()
            .filter(|l| *l > 1e-8)
            .collect();
        ea.sort_by(|a, b| b.partial_cmp(a).unwrap());
        eb.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert_eq!(ea.len(), eb.len());
        for (a, b) in ea.iter().zip(&eb) {
            assert_relative_eq!(a, b, max_relative = 1e-8);
        }
    }

    #[test]
    fn prior_reconstruction_consistency() {
        // Exactly rank-3 neighbor: X = U (Uᵀ X V) Vᵀ.
        let neighbor = crate::harness::synth::tests::positive_low_rank(20, 12, 3, 10);
        let prior = build_prior(&neighbor, 3).unwrap();
        let u = prior.svd().u();
        let v = prior.svd().v();
        let mid = u.transpose() * neighbor.inner() * v;
        let rec = u * mid * v.transpose();
        let err = (rec - neighbor.inner()).norm() / neighbor.frobenius_norm();
        assert!(err < 1e-8, "reconstruction error {err}");
    }

    #[test]
    fn prior_rejects_bad_rank() {
        let neighbor = crate::matrix::DensityMatrix::zeros(4, 3).unwrap();
        assert!(build_prior(&neighbor, 0).is_err());
        assert!(build_prior(&neighbor, 4).is_err());
    }

    #[test]
    fn overlap_identical_and_orthogonal() {
        let u = random_orthonormal(8, 3, 1);
        let (mean, std) = subspace_overlap(&u, &u).unwrap();
        assert_relative_eq!(mean, 1.0, epsilon = 1e-10);
        assert!(std < 1e-10);

        // Orthogonal spans: split the columns of an orthonormal 8x6 frame.
        let q = random_orthonormal(8, 6, 2);
        let u1 = q.columns(0, 3).into_owned();
        let u2 = q.columns(3, 3).into_owned();
        let (mean, _) = subspace_overlap(&u1, &u2).unwrap();
        assert!(mean < 1e-10, "orthogonal overlap {mean}");
    }

    #[test]
    fn overlap_planted_rotation() {
        // Rotate a 1-D subspace of R^4 by theta inside a fixed plane.
        let q = random_orthonormal(4, 2, 3);
        let u1 = q.columns(0, 1).into_owned();
        let ortho = q.columns(1, 1).into_owned();
        for theta in [0.1f64, 0.3, 0.6, 1.2] {
            let u2 = &u1 * theta.cos() + &ortho * theta.sin();
            let (mean, _) = subspace_overlap(&u1, &u2).unwrap();
            assert_relative_eq!(mean, theta.cos().abs(), epsilon = 1e-10);
        }
    }

    #[test]
    fn overlap_symmetric_and_rotation_invariant() {
        let u1 = random_orthonormal(10, 4, 4);
        let u2 = random_orthonormal(10, 4, 5);
        let (m12, s12) = subspace_overlap(&u1, &u2).unwrap();
        let (m21, s21) = subspace_overlap(&u2, &u1).unwrap();
        assert_relative_eq!(m12, m21, epsilon = 1e-12);
        assert_relative_eq!(s12, s21, epsilon = 1e-12);

        // Right-rotation within the same subspace leaves the overlap fixed.
        let rot = random_orthonormal(4, 4, 6);
        let (mr, sr) = subspace_overlap(&(&u1 * &rot), &u2).unwrap();
        assert_relative_eq!(mr, m12, epsilon = 1e-10);
        assert_relative_eq!(sr, s12, epsilon = 1e-10);
    }

    #[test]
    fn overlap_rejects_bad_inputs() {
        let u = random_orthonormal(6, 2, 7);
        let skewed = &u * 2.0;
        assert!(subspace_overlap(&u, &skewed).is_err());
        let other = random_orthonormal(5, 2, 8);
        assert!(subspace_overlap(&u, &other).is_err());
    }

    #[test]
    fn stability_identical_days() {
        let day = crate::harness::synth::tests::positive_low_rank(10, 6, 2, 2);
        let series = stability_series(&[day.clone(), day.clone(), day], 2, Side::Left).unwrap();
        assert_eq!(series.len(), 2);
        for (mean, _) in series {
            assert_relative_eq!(mean, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn stability_column_permutation_preserves_left_span() {
        let day = crate::harness::synth::tests::positive_low_rank(12, 8, 3, 9);
        // Permute columns; the column space (left factors) is unchanged.
        let mut permuted = day.inner().clone();
        permuted.swap_columns(0, 5);
        permuted.swap_columns(2, 7);
        let p = DensityMatrix::from_matrix(permuted).unwrap();

        // Projector comparison confirms the U-spans agree.
        let u1 = day.truncated_svd(3).unwrap().u().clone();
        let u2 = p.truncated_svd(3).unwrap().u().clone();
        let proj_gap = (&u1 * u1.transpose() - &u2 * u2.transpose()).norm();
        assert!(proj_gap < 1e-8, "projector gap {proj_gap}");

        let series = stability_series(&[day, p], 3, Side::Left).unwrap();
        assert_relative_eq!(series[0].0, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn stability_detects_planted_drift() {
        // Days whose left/right factors rotate by theta per step.
        let theta: f64 = 0.25;
        let r = 3;
        let qu = random_orthonormal(16, 2 * r, 11);
        let qv = random_orthonormal(10, 2 * r, 12);
        let sigma = [8.0, 5.0, 3.0];
        let mut days = Vec::new();
        for t in 0..4 {
            let angle = theta * t as f64;
            let mut u = DMatrix::zeros(16, r);
            let mut v = DMatrix::zeros(10, r);
            for c in 0..r {
                let base_u = qu.column(c);
                let comp_u = qu.column(r + c);
                let base_v = qv.column(c);
                let comp_v = qv.column(r + c);
                u.set_column(c, &(base_u * angle.cos() + comp_u * angle.sin()));
                v.set_column(c, &(base_v * angle.cos() + comp_v * angle.sin()));
            }
            let mut scaled = u.clone();
            for (c, s) in sigma.iter().enumerate() {
                scaled.column_mut(c).scale_mut(*s);
            }
            days.push(DensityMatrix::from_matrix(scaled * v.transpose()).unwrap());
        }
        for side in [Side::Left, Side::Right] {
            let series = stability_series(&days, r, side).unwrap();
            for (mean, _) in series {
                assert_relative_eq!(mean, theta.cos(), epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn stability_needs_two_days() {
        let day = crate::harness::synth::tests::positive_low_rank(6, 4, 2, 1);
        assert!(stability_series(&[day], 2, Side::Left).is_err());
    }
}
