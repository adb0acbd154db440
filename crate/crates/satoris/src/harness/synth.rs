//! Synthetic day generators: low-rank nonnegative matrices whose singular
//! subspaces drift by a controlled angle from day to day. These stand in for
//! proprietary traffic recordings in benchmarks and tests.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::DensityMatrix;

/// Parameters for a synthetic dataset.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SyntheticGenerator {
    pub rows: usize,
    pub cols: usize,
    /// Planted rank.
    pub rank: usize,
    /// When true, all days share base factors and drift from them; when
    /// false, every day draws independent factors.
    pub shared_subspace: bool,
    /// Per-day drift angle (radians) applied cumulatively to the trailing
    /// factor columns, so adjacent days differ by this angle.
    pub theta: f64,
    /// Standard deviation of additive Gaussian noise.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SyntheticGenerator {
    fn default() -> Self {
        Self {
            rows: 40,
            cols: 24,
            rank: 5,
            shared_subspace: true,
            theta: 0.1,
            noise: 0.0,
            seed: 0,
        }
    }
}

impl SyntheticGenerator {
    fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::InvalidArgument("dimensions must be positive".into()));
        }
        if self.rank == 0 || self.rank > self.rows.min(self.cols) {
            return Err(Error::InvalidArgument(format!(
                "rank {} out of range 1..={}",
                self.rank,
                self.rows.min(self.cols)
            )));
        }
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&self.theta) {
            return Err(Error::InvalidArgument(format!(
                "theta must lie in [0, pi/2], got {}",
                self.theta
            )));
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "noise must be nonnegative, got {}",
                self.noise
            )));
        }
        // Drifting columns live in planes spanned by base and companion
        // directions, so the ambient space must fit 2*rank - 1 of them.
        if self.theta > 0.0 && 2 * self.rank - 1 > self.rows.min(self.cols) {
            return Err(Error::InvalidArgument(format!(
                "rank {} leaves no room for drift planes in {}x{}",
                self.rank, self.rows, self.cols
            )));
        }
        if self.rank > self.rows.min(self.cols) {
            return Err(Error::InvalidArgument(format!(
                "rank {} exceeds min dimension of {}x{}",
                self.rank, self.rows, self.cols
            )));
        }
        Ok(())
    }
}

/// A positive, roughly uniform unit vector: the dominant singular direction
/// that keeps generated entries nonnegative.
fn positive_direction(n: usize, rng: &mut ChaCha8Rng) -> nalgebra::DVector<f64> {
    let mut v = nalgebra::DVector::from_fn(n, |_, _| 1.0 + 0.3 * rng.random::<f64>());
    let norm = v.norm();
    v.scale_mut(1.0 / norm);
    v
}

/// Deterministically generates `n_days` nonnegative matrices. Day `t` is
/// `U_t Σ V_tᵀ + noise`, clipped at zero, where the trailing columns of
/// `U_t`, `V_t` are the shared base columns rotated by `t·theta` inside
/// fixed planes. The leading column is a positive direction with a dominant
/// singular value, which keeps the clipping perturbation small.
pub fn generate_synthetic_days(
    gen: &SyntheticGenerator,
    n_days: usize,
) -> Result<Vec<DensityMatrix>> {
    gen.validate()?;
    if n_days == 0 {
        return Err(Error::InvalidArgument("n_days must be positive".into()));
    }
    let r = gen.rank;
    let mut rng = ChaCha8Rng::seed_from_u64(gen.seed);

    // Dominant singular value sized so the positive rank-1 part outweighs
    // the oscillating trailing terms.
    let base_scale = ((gen.rows * gen.cols) as f64).sqrt();
    let mut sigma = vec![0.0f64; r];
    sigma[0] = 4.0 * base_scale;
    for (i, s) in sigma.iter_mut().enumerate().skip(1) {
        *s = base_scale * 0.5 / i as f64;
    }

    // Trailing columns need drift companions only when the angle moves.
    let plane_cols = if gen.theta > 0.0 { 2 * (r - 1) } else { r - 1 };
    let shared_u1 = positive_direction(gen.rows, &mut rng);
    let shared_v1 = positive_direction(gen.cols, &mut rng);
    let shared_qu = orthonormal_complement(&shared_u1, plane_cols, &mut rng);
    let shared_qv = orthonormal_complement(&shared_v1, plane_cols, &mut rng);

    let mut days = Vec::with_capacity(n_days);
    for t in 0..n_days {
        let (u, v) = if gen.shared_subspace {
            let angle = gen.theta * t as f64;
            (
                drifted_factor(&shared_u1, &shared_qu, r, angle),
                drifted_factor(&shared_v1, &shared_qv, r, angle),
            )
        } else {
            let u1 = positive_direction(gen.rows, &mut rng);
            let v1 = positive_direction(gen.cols, &mut rng);
            let qu = orthonormal_complement(&u1, plane_cols, &mut rng);
            let qv = orthonormal_complement(&v1, plane_cols, &mut rng);
            (drifted_factor(&u1, &qu, r, 0.0), drifted_factor(&v1, &qv, r, 0.0))
        };
        let mut scaled = u.clone();
        for (c, s) in sigma.iter().enumerate() {
            scaled.column_mut(c).scale_mut(*s);
        }
        let mut m = scaled * v.transpose();
        if gen.noise > 0.0 {
            for val in m.iter_mut() {
                *val += gen.noise * gaussian(&mut rng);
            }
        }
        for val in m.iter_mut() {
            if *val < 0.0 {
                *val = 0.0;
            }
        }
        days.push(DensityMatrix::from_matrix(m)?);
    }
    Ok(days)
}

/// First column fixed to the positive direction, trailing columns rotated by
/// `angle` inside disjoint (base, companion) planes.
fn drifted_factor(
    lead: &nalgebra::DVector<f64>,
    planes: &DMatrix<f64>,
    r: usize,
    angle: f64,
) -> DMatrix<f64> {
    let n = lead.len();
    let mut f = DMatrix::zeros(n, r);
    f.set_column(0, lead);
    for c in 1..r {
        let base = planes.column(c - 1);
        if angle == 0.0 {
            f.set_column(c, &base.into_owned());
        } else {
            let companion = planes.column(r - 1 + c - 1);
            f.set_column(c, &(base * angle.cos() + companion * angle.sin()));
        }
    }
    f
}

/// `count` orthonormal columns orthogonal to `lead`.
fn orthonormal_complement(
    lead: &nalgebra::DVector<f64>,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> DMatrix<f64> {
    let n = lead.len();
    let mut m = DMatrix::zeros(n, count + 1);
    m.set_column(0, lead);
    for c in 1..=count {
        let col = nalgebra::DVector::from_fn(n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        m.set_column(c, &col);
    }
    let q = m.qr().q();
    q.columns(1, count).into_owned()
}

/// Box-Muller transform over the seeded generator.
fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-12);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}
