//! Independent feasibility audit of a solver output: reassembles the block
//! matrix and measures every constraint violation from scratch, without
//! trusting the solver's internal residuals.

use super::blocks::{min_eigenvalue, BlockVar};
use super::{GramConstraint, SdpProblem, SdpSolution, XConstraint};

/// Constraint violations, each normalized by 1 + the assembled block norm so
/// they are comparable with the solver's relative tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktReport {
    /// Smallest eigenvalue of the assembled block matrix (unnormalized).
    pub min_eigenvalue: f64,
    /// Positive part of the PSD violation.
    pub psd_violation: f64,
    /// Deviation from the fixed-entry equalities on X and fixed Gram blocks.
    pub equality_violation: f64,
    /// Positive slack violation of the Frobenius-ball constraints.
    pub ball_violation: f64,
    /// Violation of d >= 0 and of the structural Gram equalities.
    pub structural_violation: f64,
    /// Largest of the normalized violations.
    pub max_violation: f64,
}

/// Recomputes all feasibility violations for `solution` on `problem`.
pub fn verify_kkt(problem: &SdpProblem, solution: &SdpSolution) -> KktReport {
    let block = BlockVar {
        a: solution.a.clone(),
        x: solution.x.inner().clone(),
        b: solution.b.clone(),
    };
    let den = 1.0 + block.norm();

    let min_eig = min_eigenvalue(&block);
    let psd_violation = (-min_eig).max(0.0) / den;

    let mut equality_sq = 0.0f64;
    match problem.x_constraint() {
        XConstraint::Free => {}
        XConstraint::FixedAll => {
            equality_sq += (solution.x.inner() - problem.y().inner()).norm_squared();
        }
        XConstraint::FixedObserved => {
            let mask = problem.mask().expect("validated at construction");
            for i in 0..problem.rows() {
                for j in 0..problem.cols() {
                    if mask.is_observed(i, j) {
                        let d = solution.x.get(i, j) - problem.y().get(i, j);
                        equality_sq += d * d;
                    }
                }
            }
        }
    }
    let mut ball_violation = 0.0f64;
    let mut structural_violation = 0.0f64;
    match problem.gram_constraint() {
        GramConstraint::Free => {}
        GramConstraint::Fixed => {
            let p = problem.prior().expect("validated at construction");
            equality_sq += (&solution.a - p.a()).norm_squared();
            equality_sq += (&solution.b - p.b()).norm_squared();
        }
        GramConstraint::Ball { delta_a, delta_b } => {
            let p = problem.prior().expect("validated at construction");
            ball_violation = ((&solution.a - p.a()).norm() - delta_a)
                .max((&solution.b - p.b()).norm() - delta_b)
                .max(0.0)
                / den;
        }
        GramConstraint::SpectralWeights => {
            let p = problem.prior().expect("validated at construction");
            let zero = Vec::new();
            let d = solution.d.as_deref().unwrap_or(&zero);
            let neg = d.iter().cloned().fold(0.0f64, |acc, v| acc.max(-v));
            let mut scaled_u = p.svd().u().clone();
            let mut scaled_v = p.svd().v().clone();
            for (c, w) in d.iter().enumerate() {
                scaled_u.column_mut(c).scale_mut(*w);
                scaled_v.column_mut(c).scale_mut(*w);
            }
            let a_gap = (&solution.a - scaled_u * p.svd().u().transpose()).norm();
            let b_gap = (&solution.b - scaled_v * p.svd().v().transpose()).norm();
            structural_violation = (neg.max(a_gap).max(b_gap)) / den;
        }
    }
    let equality_violation = equality_sq.sqrt() / den;

    let max_violation = psd_violation
        .max(equality_violation)
        .max(ball_violation)
        .max(structural_violation);
    KktReport {
        min_eigenvalue: min_eig,
        psd_violation,
        equality_violation,
        ball_violation,
        structural_violation,
        max_violation,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::DensityMatrix;
    use crate::sdp::{solve, Objective, SolverOptions, SolverStatus};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn seeded_matrix(rows: usize, cols: usize, seed: u64) -> DensityMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<f64> = (0..rows * cols)
            .map(|_| rng.random::<f64>() * 2.0 - 1.0)
            .collect();
        DensityMatrix::from_rows_vec(rows, cols, values).unwrap()
    }

    fn nuclear_problem(x0: &DensityMatrix) -> SdpProblem {
        SdpProblem::new(
            x0.clone(),
            None,
            Objective {
                residual_weight: 0.0,
                trace_weight: 0.5,
                prior_weight_a: 0.0,
                prior_weight_b: 0.0,
            },
            XConstraint::FixedAll,
            GramConstraint::Free,
            None,
        )
        .unwrap()
    }

    #[test]
    fn converged_solution_verifies() {
        let x0 = seeded_matrix(6, 5, 11);
        let problem = nuclear_problem(&x0);
        let options = SolverOptions::default();
        let sol = solve(&problem, &options).unwrap();
        assert_eq!(sol.status, SolverStatus::Converged);
        let report = verify_kkt(&problem, &sol);
        assert!(
            report.max_violation <= 10.0 * options.tolerance,
            "violation {} exceeds 10x tolerance",
            report.max_violation
        );
    }

    #[test]
    fn tampered_solution_is_flagged() {
        let x0 = seeded_matrix(5, 4, 12);
        let problem = nuclear_problem(&x0);
        let options = SolverOptions::default();
        let mut sol = solve(&problem, &options).unwrap();
        // Inject a negative eigenvalue into the A block.
        sol.a[(0, 0)] = -10.0 * (1.0 + sol.a.norm());
        let report = verify_kkt(&problem, &sol);
        assert!(report.psd_violation > options.tolerance);
        assert!(report.max_violation > options.tolerance);
    }

    #[test]
    fn converged_block_is_near_psd_at_stated_tolerance() {
        // Solving at tolerance 1e-6 puts the assembled block within
        // -1e-6 * (1 + ||block||_F) of the PSD cone.
        let x0 = seeded_matrix(8, 6, 21);
        let problem = nuclear_problem(&x0);
        let options = SolverOptions {
            tolerance: 1e-6,
            max_iter: 20_000,
            ..Default::default()
        };
        let sol = solve(&problem, &options).unwrap();
        assert_eq!(sol.status, SolverStatus::Converged);
        let report = verify_kkt(&problem, &sol);
        assert!(
            report.psd_violation <= 1e-6,
            "normalized PSD violation {} exceeds 1e-6",
            report.psd_violation
        );
    }

    #[test]
    fn ball_and_structural_constraints_verify() {
        use crate::mask::{apply_mask, generate_mask};
        use crate::subspace::build_prior;

        let truth = crate::harness::synth::tests::positive_low_rank(10, 7, 2, 3);
        let mask = generate_mask(10, 7, 0.4, 4).unwrap();
        let y = apply_mask(&truth, &mask).unwrap();
        let prior = build_prior(&truth, 2).unwrap();
        let options = SolverOptions::default();

        let ball = SdpProblem::new(
            y.clone(),
            Some(mask.clone()),
            crate::sdp::Objective::residual(),
            crate::sdp::XConstraint::Free,
            crate::sdp::GramConstraint::Ball {
                delta_a: 0.1 * prior.a().norm(),
                delta_b: 0.1 * prior.b().norm(),
            },
            Some(prior.clone()),
        )
        .unwrap();
        let sol = solve(&ball, &options).unwrap();
        assert_eq!(sol.status, SolverStatus::Converged);
        let report = verify_kkt(&ball, &sol);
        assert!(report.max_violation <= 10.0 * options.tolerance);

        let structural = SdpProblem::new(
            y,
            Some(mask),
            crate::sdp::Objective::residual(),
            crate::sdp::XConstraint::Free,
            crate::sdp::GramConstraint::SpectralWeights,
            Some(prior),
        )
        .unwrap();
        let sol = solve(&structural, &options).unwrap();
        let report = verify_kkt(&structural, &sol);
        assert!(report.max_violation <= 10.0 * options.tolerance.max(sol.primal_residual));

        // A tampered weight vector is flagged.
        let mut tampered = sol.clone();
        if let Some(d) = tampered.d.as_mut() {
            d[0] = -1.0;
        }
        let report = verify_kkt(&structural, &tampered);
        assert!(report.structural_violation > options.tolerance);
    }

    #[test]
    fn nuclear_objective_respects_duality_bound() {
        let x0 = seeded_matrix(8, 6, 13);
        let problem = nuclear_problem(&x0);
        let sol = solve(&problem, &SolverOptions::default()).unwrap();
        let star = x0.nuclear_norm_svd();
        assert!(
            sol.objective_value >= star - 1e-3 * (1.0 + star),
            "objective {} undercuts nuclear norm {}",
            sol.objective_value,
            star
        );
    }
}
