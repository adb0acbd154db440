//! Imputation quality metrics, computed over the originally-missing entries
//! only: observed entries are copied through by every imputer, so they carry
//! no information about reconstruction quality.

use crate::error::{Error, Result};
use crate::mask::ObservationMask;
use crate::matrix::DensityMatrix;

/// Error metrics over held-out entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    /// Frobenius error over missing entries divided by the Frobenius norm of
    /// the missing-entry truth.
    pub rrmse: f64,
    /// Mean absolute error over missing entries.
    pub mae: f64,
    /// Number of evaluated (missing) entries.
    pub n_holdout: usize,
}

/// Per-metric mean and population standard deviation across reports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSummary {
    pub rrmse_mean: f64,
    pub rrmse_std: f64,
    pub mae_mean: f64,
    pub mae_std: f64,
    pub count: usize,
}

/// Scores `imputed` against `truth` on the entries hidden by `mask`.
///
/// RRMSE = ‖(1−Ω)∘(truth−imputed)‖_F / ‖(1−Ω)∘truth‖_F,
/// MAE = mean |truth−imputed| over missing entries.
pub fn evaluate(
    truth: &DensityMatrix,
    imputed: &DensityMatrix,
    mask: &ObservationMask,
) -> Result<ErrorReport> {
    if truth.shape() != imputed.shape() || truth.shape() != mask.shape() {
        return Err(Error::Dimension(format!(
            "evaluate shapes differ: truth {:?}, imputed {:?}, mask {:?}",
            truth.shape(),
            imputed.shape(),
            mask.shape()
        )));
    }
    let mut err_sq = 0.0;
    let mut truth_sq = 0.0;
    let mut abs_sum = 0.0;
    let mut n = 0usize;
    for i in 0..truth.rows() {
        for j in 0..truth.cols() {
            if !mask.is_observed(i, j) {
                let d = truth.get(i, j) - imputed.get(i, j);
                err_sq += d * d;
                truth_sq += truth.get(i, j) * truth.get(i, j);
                abs_sum += d.abs();
                n += 1;
            }
        }
    }
    if n == 0 {
        return Err(Error::Evaluation(
            "mask has no missing entries to evaluate".into(),
        ));
    }
    if truth_sq == 0.0 {
        return Err(Error::Evaluation(
            "held-out truth is identically zero; RRMSE undefined".into(),
        ));
    }
    Ok(ErrorReport {
        rrmse: (err_sq / truth_sq).sqrt(),
        mae: abs_sum / n as f64,
        n_holdout: n,
    })
}

/// Sample mean and population standard deviation of each metric.
pub fn aggregate(reports: &[ErrorReport]) -> Result<MetricSummary> {
    if reports.is_empty() {
        return Err(Error::InvalidArgument("no reports to aggregate".into()));
    }
    let n = reports.len() as f64;
    let rrmse_mean = reports.iter().map(|r| r.rrmse).sum::<f64>() / n;
    let mae_mean = reports.iter().map(|r| r.mae).sum::<f64>() / n;
    let rrmse_var = reports
        .iter()
        .map(|r| (r.rrmse - rrmse_mean).powi(2))
        .sum::<f64>()
        / n;
    let mae_var = reports
        .iter()
        .map(|r| (r.mae - mae_mean).powi(2))
        .sum::<f64>()
        / n;
    Ok(MetricSummary {
        rrmse_mean,
        rrmse_std: rrmse_var.sqrt(),
        mae_mean,
        mae_std: mae_var.sqrt(),
        count: reports.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mask::generate_mask;
    use approx::assert_relative_eq;

    fn two_by_two() -> (DensityMatrix, DensityMatrix, ObservationMask) {
        let truth = DensityMatrix::from_rows_vec(2, 2, vec![2.0, 0.0, 0.0, 2.0]).unwrap();
        let imputed = DensityMatrix::from_rows_vec(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let mask = ObservationMask::from_bits(2, 2, vec![false, true, true, false]).unwrap();
        (truth, imputed, mask)
    }

    #[test]
    fn perfect_imputation_scores_zero() {
        let (truth, _, mask) = two_by_two();
        let r = evaluate(&truth, &truth, &mask).unwrap();
        assert_eq!(r.rrmse, 0.0);
        assert_eq!(r.mae, 0.0);
        assert_eq!(r.n_holdout, 2);
    }

    #[test]
    fn constant_offset_gives_unit_mae() {
        let truth = DensityMatrix::from_rows_vec(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let shifted = DensityMatrix::from_rows_vec(2, 3, vec![2.0, 3.0, 4.0, 5.0, 6.0, 7.0]).unwrap();
        let mask = generate_mask(2, 3, 0.5, 3).unwrap();
        if mask.missing_count() == 0 {
            return;
        }
        let r = evaluate(&truth, &shifted, &mask).unwrap();
        assert_relative_eq!(r.mae, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn hand_computed_two_by_two() {
        let (truth, imputed, mask) = two_by_two();
        let r = evaluate(&truth, &imputed, &mask).unwrap();
        // Held-out diagonal entries: errors (1, 1); truth (2, 2).
        assert_relative_eq!(r.mae, 1.0, epsilon = 1e-15);
        assert_relative_eq!(r.rrmse, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn rrmse_is_scale_invariant() {
        let (truth, imputed, mask) = two_by_two();
        let base = evaluate(&truth, &imputed, &mask).unwrap();
        for c in [0.5, 3.0, 100.0, -2.0] {
            let t = DensityMatrix::from_matrix_unchecked(truth.inner() * c);
            let x = DensityMatrix::from_matrix_unchecked(imputed.inner() * c);
            let r = evaluate(&t, &x, &mask).unwrap();
            assert_relative_eq!(r.rrmse, base.rrmse, epsilon = 1e-12);
            assert_relative_eq!(r.mae, c.abs() * base.mae, epsilon = 1e-12);
        }
    }

    #[test]
    fn degenerate_inputs_rejected() {
        let (truth, imputed, _) = two_by_two();
        let full = ObservationMask::all_observed(2, 2).unwrap();
        assert!(matches!(
            evaluate(&truth, &imputed, &full),
            Err(Error::Evaluation(_))
        ));
        // Held-out truth identically zero.
        let zero = DensityMatrix::zeros(2, 2).unwrap();
        let mask = ObservationMask::from_bits(2, 2, vec![false, true, true, true]).unwrap();
        assert!(matches!(
            evaluate(&zero, &imputed, &mask),
            Err(Error::Evaluation(_))
        ));
    }

    #[test]
    fn aggregate_single_and_pair() {
        let one = ErrorReport {
            rrmse: 0.2,
            mae: 1.5,
            n_holdout: 10,
        };
        let s = aggregate(&[one]).unwrap();
        assert_eq!(s.rrmse_mean, 0.2);
        assert_eq!(s.rrmse_std, 0.0);
        assert_eq!(s.count, 1);

        let two = ErrorReport {
            rrmse: 0.4,
            mae: 0.5,
            n_holdout: 10,
        };
        let s = aggregate(&[one, two]).unwrap();
        assert_relative_eq!(s.rrmse_mean, 0.3, epsilon = 1e-15);
        assert_relative_eq!(s.rrmse_std, 0.1, epsilon = 1e-15);
        assert_relative_eq!(s.mae_mean, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn aggregate_matches_direct_formula() {
        let values = [0.11, 0.32, 0.27, 0.05, 0.44, 0.19, 0.23];
        let reports: Vec<ErrorReport> = values
            .iter()
            .map(|&v| ErrorReport {
                rrmse: v,
                mae: 2.0 * v,
                n_holdout: 4,
            })
            .collect();
        let s = aggregate(&reports).unwrap();
        let mean = values.iter().sum::<f64>() / 7.0;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 7.0;
        assert_relative_eq!(s.rrmse_mean, mean, epsilon = 1e-15);
        assert_relative_eq!(s.rrmse_std, var.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(s.mae_mean, 2.0 * mean, epsilon = 1e-15);
    }

    #[test]
    fn aggregate_empty_rejected() {
        assert!(aggregate(&[]).is_err());
    }
}
