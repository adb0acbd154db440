//! Row-similarity nearest-neighbor imputation.

use nalgebra::DMatrix;

use super::{check_inputs, passthrough, Imputer};
use crate::error::{Error, Result};
use crate::mask::ObservationMask;
use crate::matrix::DensityMatrix;

/// Fills a missing entry with the unweighted mean of that column's values
/// over the nearest rows, where row distance is the Euclidean distance over
/// mutually observed columns. Rows sharing no observed column with the
/// target are not neighbors; when no usable neighbor exists the column mean
/// steps in, and the global mean after that.
#[derive(Debug, Clone, Copy)]
pub struct KnnImputer {
    pub n_neighbors: usize,
}

impl KnnImputer {
    pub fn new(n_neighbors: usize) -> Result<Self> {
        if n_neighbors == 0 {
            return Err(Error::InvalidArgument("n_neighbors must be >= 1".into()));
        }
        Ok(Self { n_neighbors })
    }
}

impl Default for KnnImputer {
    fn default() -> Self {
        Self { n_neighbors: 5 }
    }
}

impl Imputer for KnnImputer {
    fn name(&self) -> &str {
        "knn"
    }

    fn impute(&self, y: &DensityMatrix, mask: &ObservationMask) -> Result<DensityMatrix> {
        check_inputs(y, mask)?;
        let (rows, cols) = y.shape();

        let mut global_sum = 0.0;
        let mut global_n = 0usize;
        let mut col_sum = vec![0.0; cols];
        let mut col_n = vec![0usize; cols];
        for i in 0..rows {
            for j in 0..cols {
                if mask.is_observed(i, j) {
                    global_sum += y.get(i, j);
                    global_n += 1;
                    col_sum[j] += y.get(i, j);
                    col_n[j] += 1;
                }
            }
        }
        let global_mean = global_sum / global_n as f64;
        let col_fallback = |j: usize| {
            if col_n[j] > 0 {
                col_sum[j] / col_n[j] as f64
            } else {
                global_mean
            }
        };

        // Pairwise distances over mutually observed columns; usize::MAX
        // shared count marks "computed".
        let mut dist = vec![f64::INFINITY; rows * rows];
        for r1 in 0..rows {
            for r2 in (r1 + 1)..rows {
                let mut sq = 0.0;
                let mut shared = 0usize;
                for j in 0..cols {
                    if mask.is_observed(r1, j) && mask.is_observed(r2, j) {
                        let d = y.get(r1, j) - y.get(r2, j);
                        sq += d * d;
                        shared += 1;
                    }
                }
                if shared > 0 {
                    dist[r1 * rows + r2] = sq.sqrt();
                    dist[r2 * rows + r1] = sq.sqrt();
                }
            }
        }

        let mut out = DMatrix::zeros(rows, cols);
        for i in 0..rows {
            // Candidate neighbors for row i, nearest first; ties break on
            // row index for determinism.
            let mut order: Vec<(f64, usize)> = (0..rows)
                .filter(|&r| r != i && dist[i * rows + r].is_finite())
                .map(|r| (dist[i * rows + r], r))
                .collect();
            order.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));

            for j in 0..cols {
                if mask.is_observed(i, j) {
                    continue;
                }
                let mut sum = 0.0;
                let mut taken = 0usize;
                for &(_, r) in &order {
                    if mask.is_observed(r, j) {
                        sum += y.get(r, j);
                        taken += 1;
                        if taken == self.n_neighbors {
                            break;
                        }
                    }
                }
                out[(i, j)] = if taken > 0 {
                    sum / taken as f64
                } else {
                    col_fallback(j)
                };
            }
        }
        Ok(passthrough(y, mask, out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mask::ObservationMask;

    #[test]
    fn copies_from_identical_neighbor() {
        // Rows 0 and 1 agree on observed columns; row 1 supplies the
        // missing value.
        let y = DensityMatrix::from_rows_vec(
            3,
            3,
            vec![1.0, 2.0, 0.0, 1.0, 2.0, 9.0, 50.0, 60.0, 70.0],
        )
        .unwrap();
        let mask = ObservationMask::from_bits(
            3,
            3,
            vec![true, true, false, true, true, true, true, true, true],
        )
        .unwrap();
        let out = KnnImputer::new(1).unwrap().impute(&y, &mask).unwrap();
        assert_eq!(out.get(0, 2), 9.0);
    }

    #[test]
    fn all_rows_uniform_distance_degenerates_to_column_mean() {
        // Every pair of rows is equidistant (distance 0 on the shared first
        // column); with n_neighbors covering all rows the fill equals the
        // column mean of observed entries.
        let y = DensityMatrix::from_rows_vec(
            4,
            2,
            vec![1.0, 10.0, 1.0, 20.0, 1.0, 30.0, 1.0, 0.0],
        )
        .unwrap();
        let mask = ObservationMask::from_bits(
            4,
            2,
            vec![true, true, true, true, true, true, true, false],
        )
        .unwrap();
        let out = KnnImputer::new(4).unwrap().impute(&y, &mask).unwrap();
        assert_eq!(out.get(3, 1), 20.0);
    }

    #[test]
    fn isolated_row_falls_back_to_column_mean() {
        // Row 2 shares no observed column with anyone.
        let y = DensityMatrix::from_rows_vec(3, 2, vec![4.0, 0.0, 8.0, 0.0, 0.0, 5.0]).unwrap();
        let mask = ObservationMask::from_bits(
            3,
            2,
            vec![true, false, true, false, false, true],
        )
        .unwrap();
        let out = KnnImputer::default().impute(&y, &mask).unwrap();
        assert_eq!(out.get(2, 0), 6.0);
    }

    #[test]
    fn zero_neighbors_rejected() {
        assert!(KnnImputer::new(0).is_err());
    }
}
