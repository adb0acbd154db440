//! Consensus operator splitting over the problem's block variable.
//!
//! Each term of the problem — the objective, the PSD cone and the affine /
//! ball / structural constraint set — gets its own copy of the iterate and a
//! running dual. One iteration applies, per copy, either a proximal step
//! (objective terms have closed-form proxes) or a Euclidean projection, then
//! averages the copies and updates the duals with the disagreement. At a
//! fixed point all copies agree on a point that is feasible and stationary.

use nalgebra::DMatrix;

use super::blocks::BlockVar;
use super::{
    GramConstraint, Objective, SdpProblem, SdpSolution, SolverOptions, SolverStatus, XConstraint,
};
use crate::error::{Error, Result};
use crate::matrix::DensityMatrix;

/// Residual level above which a stagnating run is suspected infeasible.
const STALL_LEVEL: f64 = 1e-2;
/// Consecutive stagnating iterations required before declaring infeasibility.
const STALL_ITERS: usize = 500;
/// Growth factor of the dual variables over a stall window that marks
/// divergence.
const DUAL_GROWTH: f64 = 2.0;

/// Solves the problem. Returns `Ok` with a status of `Converged`, `MaxIter`
/// (best iterate so far) or `Infeasible`; `Err` only when the iteration
/// itself breaks down numerically.
pub fn solve(problem: &SdpProblem, options: &SolverOptions) -> Result<SdpSolution> {
    if options.tolerance <= 0.0 || !options.tolerance.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {}",
            options.tolerance
        )));
    }
    if options.rho <= 0.0 || !options.rho.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "rho must be positive, got {}",
            options.rho
        )));
    }
    Engine::new(problem).run(options)
}

enum Step {
    Objective,
    Psd,
    Constraints,
}

struct TermState {
    step: Step,
    z: BlockVar,
    u: BlockVar,
}

struct Engine<'p> {
    problem: &'p SdpProblem,
}

impl<'p> Engine<'p> {
    fn new(problem: &'p SdpProblem) -> Self {
        Self { problem }
    }

    fn run(&self, options: &SolverOptions) -> Result<SdpSolution> {
        let (rows, cols) = (self.problem.rows(), self.problem.cols());
        let mut consensus = self.initial_point();
        let mut copies = self.make_copies(&consensus);
        let n_copies = copies.len() as f64;

        let mut rho = options.rho;
        let relaxation = options.over_relaxation;
        let mut primal_rel = f64::INFINITY;
        let mut dual_rel = f64::INFINITY;
        let mut best = consensus.clone();
        let mut best_score = f64::INFINITY;
        let mut status = SolverStatus::MaxIter;
        let mut iterations = options.max_iter;

        // Infeasibility bookkeeping: physical duals rho*u are invariant
        // under penalty rescaling.
        let mut stall_count = 0usize;
        let mut stall_dual_norm = 0.0f64;

        for iter in 0..options.max_iter {
            let t = 1.0 / rho;

            for copy in copies.iter_mut() {
                let v = consensus.sub(&copy.u);
                copy.z = match copy.step {
                    Step::Objective => self.prox_objective(&v, t),
                    Step::Psd => v.project_psd().0,
                    Step::Constraints => self.project_constraints(&v),
                };
                if relaxation != 1.0 {
                    // Over-relaxed step: mix past consensus into the copy.
                    copy.z.scale_assign(relaxation);
                    let mut carry = consensus.clone();
                    carry.scale_assign(1.0 - relaxation);
                    copy.z.add_assign(&carry);
                }
            }

            let mut next = BlockVar::zeros(rows, cols);
            for copy in &copies {
                next.add_assign(&copy.z);
                next.add_assign(&copy.u);
            }
            next.scale_assign(1.0 / n_copies);

            let mut primal_gap_max = 0.0f64;
            for copy in copies.iter_mut() {
                let gap = copy.z.sub(&next);
                primal_gap_max = primal_gap_max.max(gap.norm());
                copy.u.add_assign(&gap);
            }

            let den = 1.0 + next.norm();
            primal_rel = primal_gap_max / den;
            dual_rel = rho * consensus.distance(&next) / den;
            consensus = next;

            if !consensus.norm().is_finite() {
                return Err(Error::Solver(format!(
                    "iterates became non-finite at iteration {iter}"
                )));
            }

            let score = primal_rel.max(dual_rel);
            if score < best_score {
                best_score = score;
                best = consensus.clone();
            }

            if primal_rel <= options.tolerance && dual_rel <= options.tolerance {
                status = SolverStatus::Converged;
                iterations = iter + 1;
                break;
            }

            // Infeasibility heuristic: the residual stagnates above a coarse
            // level while the duals keep growing.
            if primal_rel > STALL_LEVEL {
                let dual_norm = rho
                    * copies
                        .iter()
                        .map(|c| c.u.norm().powi(2))
                        .sum::<f64>()
                        .sqrt();
                if stall_count == 0 {
                    stall_dual_norm = dual_norm.max(1e-12);
                }
                stall_count += 1;
                if stall_count >= STALL_ITERS {
                    if dual_norm > DUAL_GROWTH * stall_dual_norm {
                        status = SolverStatus::Infeasible;
                        iterations = iter + 1;
                        break;
                    }
                    stall_count = 0;
                }
            } else {
                stall_count = 0;
            }

            if options.adaptive_rho && iter % 10 == 9 {
                // Rescale toward residual balance when the ratio exceeds 10.
                let ratio = primal_rel / dual_rel.max(1e-300);
                if !(0.1..=10.0).contains(&ratio) {
                    let factor = ratio.sqrt().clamp(0.2, 5.0);
                    let new_rho = (rho * factor).clamp(1e-6, 1e6);
                    let applied = new_rho / rho;
                    if applied != 1.0 {
                        rho = new_rho;
                        for copy in copies.iter_mut() {
                            copy.u.scale_assign(1.0 / applied);
                        }
                    }
                }
            }
        }

        let point = match status {
            SolverStatus::Converged => consensus,
            _ => best,
        };
        // Refresh the spectral weights against the reported point.
        let d = match self.problem.gram_constraint() {
            GramConstraint::SpectralWeights => Some(self.spectral_weights(&point)),
            _ => None,
        };
        let objective_value = self.problem.objective_at(&point.a, &point.x, &point.b);
        let x = DensityMatrix::from_matrix(point.x.clone())
            .map_err(|e| Error::Solver(format!("solution is non-finite: {e}")))?;
        Ok(SdpSolution {
            x,
            a: point.a,
            b: point.b,
            d,
            objective_value,
            primal_residual: primal_rel,
            dual_residual: dual_rel,
            iterations,
            status,
        })
    }

    /// Warm start: observed data in X, priors (or scaled identities with
    /// trace equal to the data norm) in the Gram blocks.
    fn initial_point(&self) -> BlockVar {
        let (rows, cols) = (self.problem.rows(), self.problem.cols());
        let x = match (self.problem.x_constraint(), self.problem.mask()) {
            (XConstraint::FixedAll, _) | (_, None) => self.problem.y().inner().clone(),
            (_, Some(mask)) => {
                let mut x = self.problem.y().inner().clone();
                for i in 0..rows {
                    for j in 0..cols {
                        if !mask.is_observed(i, j) {
                            x[(i, j)] = 0.0;
                        }
                    }
                }
                x
            }
        };
        let (a, b) = match self.problem.prior() {
            Some(p) => (p.a().clone(), p.b().clone()),
            None => {
                let scale = self.problem.y().frobenius_norm();
                (
                    DMatrix::identity(rows, rows) * (scale / rows as f64),
                    DMatrix::identity(cols, cols) * (scale / cols as f64),
                )
            }
        };
        BlockVar { a, x, b }
    }

    fn make_copies(&self, start: &BlockVar) -> Vec<TermState> {
        let (rows, cols) = (self.problem.rows(), self.problem.cols());
        let mut copies = Vec::new();
        if !self.problem.objective().is_constant() {
            copies.push(Step::Objective);
        }
        copies.push(Step::Psd);
        if self.problem.x_constraint() != XConstraint::Free
            || !matches!(self.problem.gram_constraint(), GramConstraint::Free)
        {
            copies.push(Step::Constraints);
        }
        copies
            .into_iter()
            .map(|step| TermState {
                step,
                z: start.clone(),
                u: BlockVar::zeros(rows, cols),
            })
            .collect()
    }

    /// Closed-form prox of the objective at parameter `t = 1/rho`.
    ///
    /// The masked-residual term shrinks the observed residual radially
    /// (the X block carries weight 2 in the ambient metric, hence the t/2);
    /// the trace term is a linear offset on the Gram diagonals; the
    /// prior-deviation terms shrink radially toward the prior.
    fn prox_objective(&self, v: &BlockVar, t: f64) -> BlockVar {
        let Objective {
            residual_weight,
            trace_weight,
            prior_weight_a,
            prior_weight_b,
        } = *self.problem.objective();
        let mut out = v.clone();

        if residual_weight > 0.0 {
            let mask = self.problem.mask().expect("validated at construction");
            let y = self.problem.y();
            let mut norm_sq = 0.0;
            for i in 0..out.rows() {
                for j in 0..out.cols() {
                    if mask.is_observed(i, j) {
                        let r = out.x[(i, j)] - y.get(i, j);
                        norm_sq += r * r;
                    }
                }
            }
            let norm = norm_sq.sqrt();
            let factor = if norm > 0.0 {
                (1.0 - residual_weight * t / (2.0 * norm)).max(0.0)
            } else {
                0.0
            };
            for i in 0..out.rows() {
                for j in 0..out.cols() {
                    if mask.is_observed(i, j) {
                        let r = out.x[(i, j)] - y.get(i, j);
                        out.x[(i, j)] = y.get(i, j) + factor * r;
                    }
                }
            }
        }

        if trace_weight > 0.0 {
            for i in 0..out.rows() {
                out.a[(i, i)] -= t * trace_weight;
            }
            for j in 0..out.cols() {
                out.b[(j, j)] -= t * trace_weight;
            }
        }

        if prior_weight_a > 0.0 || prior_weight_b > 0.0 {
            let p = self.problem.prior().expect("validated at construction");
            if prior_weight_a > 0.0 {
                shrink_toward(&mut out.a, p.a(), t * prior_weight_a);
            }
            if prior_weight_b > 0.0 {
                shrink_toward(&mut out.b, p.b(), t * prior_weight_b);
            }
        }
        out
    }

    /// Exact projection onto the intersection of the per-block constraint
    /// sets (they act on disjoint blocks).
    fn project_constraints(&self, v: &BlockVar) -> BlockVar {
        let mut out = v.clone();
        match self.problem.x_constraint() {
            XConstraint::Free => {}
            XConstraint::FixedAll => out.x.copy_from(self.problem.y().inner()),
            XConstraint::FixedObserved => {
                let mask = self.problem.mask().expect("validated at construction");
                let y = self.problem.y();
                for i in 0..out.rows() {
                    for j in 0..out.cols() {
                        if mask.is_observed(i, j) {
                            out.x[(i, j)] = y.get(i, j);
                        }
                    }
                }
            }
        }
        match self.problem.gram_constraint() {
            GramConstraint::Free => {}
            GramConstraint::Fixed => {
                let p = self.problem.prior().expect("validated at construction");
                out.a.copy_from(p.a());
                out.b.copy_from(p.b());
            }
            GramConstraint::Ball { delta_a, delta_b } => {
                let p = self.problem.prior().expect("validated at construction");
                clamp_ball(&mut out.a, p.a(), delta_a);
                clamp_ball(&mut out.b, p.b(), delta_b);
            }
            GramConstraint::SpectralWeights => {
                let d = self.spectral_weights(&out);
                let p = self.problem.prior().expect("validated at construction");
                out.a = weighted_gram(p.svd().u(), &d);
                out.b = weighted_gram(p.svd().v(), &d);
            }
        }
        out
    }

    /// Least-squares spectral weights for the structural set
    /// {A = U diag(d) Uᵀ, B = V diag(d) Vᵀ, d ≥ 0}:
    /// d_i = max(0, (u_iᵀ A u_i + v_iᵀ B v_i) / 2).
    fn spectral_weights(&self, v: &BlockVar) -> Vec<f64> {
        let p = self.problem.prior().expect("validated at construction");
        let u = p.svd().u();
        let vv = p.svd().v();
        (0..p.rank())
            .map(|i| {
                let ui = u.column(i);
                let vi = vv.column(i);
                let qa = (ui.transpose() * &v.a * ui)[(0, 0)];
                let qb = (vi.transpose() * &v.b * vi)[(0, 0)];
                ((qa + qb) / 2.0).max(0.0)
            })
            .collect()
    }
}

/// `m = center + shrink(m - center)` with radial shrinkage by `amount`.
fn shrink_toward(m: &mut DMatrix<f64>, center: &DMatrix<f64>, amount: f64) {
    let dev = &*m - center;
    let norm = dev.norm();
    let factor = if norm > 0.0 {
        (1.0 - amount / norm).max(0.0)
    } else {
        0.0
    };
    *m = center + dev * factor;
}

/// Projects `m` onto the Frobenius ball of radius `radius` around `center`.
fn clamp_ball(m: &mut DMatrix<f64>, center: &DMatrix<f64>, radius: f64) {
    let dev = &*m - center;
    let norm = dev.norm();
    if norm > radius {
        let factor = if norm > 0.0 { radius / norm } else { 0.0 };
        *m = center + dev * factor;
    }
}

/// `M diag(d) Mᵀ`, symmetrized.
fn weighted_gram(m: &DMatrix<f64>, d: &[f64]) -> DMatrix<f64> {
    let mut scaled = m.clone();
    for (c, w) in d.iter().enumerate() {
        scaled.column_mut(c).scale_mut(*w);
    }
    let g = scaled * m.transpose();
    (&g + g.transpose()) * 0.5
}
