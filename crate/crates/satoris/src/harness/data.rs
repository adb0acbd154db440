//! Dataset ingestion: a directory of `day_<index>.csv` matrices.

use std::path::Path;

use crate::error::{Error, Result};
use crate::io::read_matrix;
use crate::matrix::DensityMatrix;

/// Loads every `day_<index>.csv` in `dir`, sorted by index. All days must
/// share one shape; NaN entries are rejected by the reader.
pub fn load_dataset(dir: &Path) -> Result<Vec<(u32, DensityMatrix)>> {
    let mut days: Vec<(u32, DensityMatrix)> = Vec::new();
    let entries = std::fs::read_dir(dir)
        .map_err(|e| Error::Data(format!("cannot read {}: {e}", dir.display())))?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::Data(e.to_string()))?;
        let name = entry.file_name();
        let name = name.to_string_lossy();
        if let Some(index) = parse_day_index(&name) {
            let matrix = read_matrix(&entry.path())?;
            days.push((index, matrix));
        }
    }
    if days.is_empty() {
        return Err(Error::Data(format!(
            "no day_<index>.csv files in {}",
            dir.display()
        )));
    }
    days.sort_by_key(|(index, _)| *index);
    let shape = days[0].1.shape();
    for (index, m) in &days {
        if m.shape() != shape {
            return Err(Error::Data(format!(
                "day {index} has shape {:?}, expected {:?}",
                m.shape(),
                shape
            )));
        }
    }
    Ok(days)
}

fn parse_day_index(name: &str) -> Option<u32> {
    let stem = name.strip_prefix("day_")?.strip_suffix(".csv")?;
    stem.parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::write_matrix;

    #[test]
    fn loads_sorted_consistent_days() {
        let dir = tempfile::tempdir().unwrap();
        let a = crate::harness::synth::tests::positive_low_rank(6, 4, 2, 1);
        let b = crate::harness::synth::tests::positive_low_rank(6, 4, 2, 2);
        write_matrix(&dir.path().join("day_2.csv"), &b).unwrap();
        write_matrix(&dir.path().join("day_0.csv"), &a).unwrap();
        std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
        let days = load_dataset(dir.path()).unwrap();
        assert_eq!(days.len(), 2);
        assert_eq!(days[0].0, 0);
        assert_eq!(days[1].0, 2);
        // Written at 12 significant digits, so compare up to that precision.
        let gap = (days[0].1.inner() - a.inner()).norm() / a.frobenius_norm();
        assert!(gap < 1e-11, "round-trip gap {gap}");
    }

    #[test]
    fn shape_mismatch_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let a = crate::harness::synth::tests::positive_low_rank(10, 4, 2, 1);
        let b = crate::harness::synth::tests::positive_low_rank(12, 4, 2, 2);
        write_matrix(&dir.path().join("day_0.csv"), &a).unwrap();
        write_matrix(&dir.path().join("day_1.csv"), &b).unwrap();
        assert!(matches!(load_dataset(dir.path()), Err(Error::Data(_))));
    }

    #[test]
    fn empty_directory_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_dataset(dir.path()), Err(Error::Data(_))));
    }

    #[test]
    fn unparseable_file_rejected() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("day_0.csv"), "1,2\n3,oops\n").unwrap();
        assert!(matches!(load_dataset(dir.path()), Err(Error::Data(_))));
    }
}
