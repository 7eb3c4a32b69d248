use super::features::FeatureMatrix;
use crate::error::{Error, Result};

/// Holds out `test_cohort` as the test set; training uses all earlier cohorts.
/// Rows from later cohorts belong to neither side.
pub fn split_by_cohort(m: &FeatureMatrix, test_cohort: i32) -> Result<(FeatureMatrix, FeatureMatrix)> {
    let train: Vec<usize> = (0..m.n_rows()).filter(|&i| m.cohorts[i] < test_cohort).collect();
    let test: Vec<usize> = (0..m.n_rows()).filter(|&i| m.cohorts[i] == test_cohort).collect();
    if test.is_empty() {
        return Err(Error::EmptySplit("test"));
    }
    if train.is_empty() {
        return Err(Error::EmptySplit("train"));
    }
    Ok((m.select_rows(&train), m.select_rows(&test)))
}

/// The most recent cohort present in `m`.
pub fn last_cohort(m: &FeatureMatrix) -> Option<i32> {
    m.cohorts.iter().copied().max()
}
