use serde::{Deserialize, Serialize};

use super::features::{FeatureMatrix, MISSING_SENTINEL};
use super::schema::ColumnKind;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnScale {
    pub name: String,
    pub median: f64,
    /// Interquartile range, stored as 1 for constant columns.
    pub iqr: f64,
}

/// Median/IQR scaling of continuous columns. Binary columns are left untouched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustScaler {
    pub columns: Vec<ColumnScale>,
}

/// Quantile with linear interpolation between order statistics of sorted `v`.
pub(crate) fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    let pos = q * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

impl RobustScaler {
    /// Fits on the supplied (training) rows, ignoring missing cells.
    pub fn fit(train: &FeatureMatrix) -> Self {
        let d = train.n_cols();
        let mut columns = Vec::new();
        for (j, spec) in train.columns.iter().enumerate() {
            if spec.kind != ColumnKind::Continuous {
                continue;
            }
            let mut v: Vec<f64> = (0..train.n_rows())
                .filter(|&i| !train.missing_mask[i * d + j])
                .map(|i| train.values[i * d + j])
                .collect();
            let (median, iqr) = if v.is_empty() {
                (0.0, 1.0)
            } else {
                v.sort_by(f64::total_cmp);
                let iqr = quantile_sorted(&v, 0.75) - quantile_sorted(&v, 0.25);
                (quantile_sorted(&v, 0.5), if iqr > 0.0 { iqr } else { 1.0 })
            };
            columns.push(ColumnScale {
                name: spec.name.clone(),
                median,
                iqr,
            });
        }
        Self { columns }
    }

    fn plan(&self, m: &FeatureMatrix) -> Result<Vec<(usize, f64, f64)>> {
        let mut plan = Vec::with_capacity(self.columns.len());
        for (j, spec) in m.columns.iter().enumerate() {
            if spec.kind != ColumnKind::Continuous {
                continue;
            }
            let c = self
                .columns
                .iter()
                .find(|c| c.name == spec.name)
                .ok_or_else(|| Error::InvalidInput(format!("scaler has no column `{}`", spec.name)))?;
            plan.push((j, c.median, c.iqr));
        }
        Ok(plan)
    }

    /// Applies `(x - median) / iqr` to continuous columns; missing cells keep the sentinel.
    pub fn apply(&self, m: &FeatureMatrix) -> Result<FeatureMatrix> {
        let plan = self.plan(m)?;
        let mut out = m.clone();
        let d = m.n_cols();
        for i in 0..m.n_rows() {
            for &(j, med, iqr) in &plan {
                let k = i * d + j;
                out.values[k] = if m.missing_mask[k] {
                    MISSING_SENTINEL
                } else {
                    (m.values[k] - med) / iqr
                };
            }
        }
        Ok(out)
    }

    pub fn inverse(&self, m: &FeatureMatrix) -> Result<FeatureMatrix> {
        let plan = self.plan(m)?;
        let mut out = m.clone();
        let d = m.n_cols();
        for i in 0..m.n_rows() {
            for &(j, med, iqr) in &plan {
                let k = i * d + j;
                if !m.missing_mask[k] {
                    out.values[k] = m.values[k] * iqr + med;
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohort::features::{ColumnSpec, FeatureSet};
    use crate::cohort::records::Format;
    use crate::cohort::schema::Category;
    use proptest::prelude::*;

    fn matrix(cols: &[(&str, ColumnKind)], rows: &[Vec<f64>]) -> FeatureMatrix {
        let n = rows.len();
        FeatureMatrix {
            row_ids: (0..n).map(|i| i.to_string()).collect(),
            columns: cols
                .iter()
                .map(|(name, kind)| ColumnSpec {
                    name: name.to_string(),
                    kind: *kind,
                    category: Category::Course,
                    missing_indicator: None,
                })
                .collect(),
            values: rows.iter().flatten().copied().collect(),
            missing_mask: vec![false; n * cols.len()],
            feature_set: FeatureSet::Aware,
            format: Format::Online,
            labels: vec![0; n],
            cohorts: vec![2017; n],
            groups: vec![[false; 4]; n],
        }
    }

    #[test]
    fn median_and_iqr() {
        let m = matrix(&[("x", ColumnKind::Continuous)], &[vec![1.0], vec![2.0], vec![3.0], vec![4.0], vec![5.0]]);
        let s = RobustScaler::fit(&m);
        assert_eq!(s.columns[0].median, 3.0);
        assert_eq!(s.columns[0].iqr, 2.0);
        assert_eq!(s.apply(&m).unwrap().values, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn constant_column_scales_to_zero() {
        let m = matrix(&[("x", ColumnKind::Continuous)], &[vec![7.0], vec![7.0], vec![7.0]]);
        let s = RobustScaler::fit(&m);
        assert_eq!(s.columns[0].iqr, 1.0);
        assert_eq!(s.apply(&m).unwrap().values, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn held_out_row_uses_training_statistics() {
        let cols = [("x", ColumnKind::Continuous), ("flag", ColumnKind::Binary)];
        let train = matrix(&cols, &[vec![10.0, 1.0], vec![20.0, 0.0], vec![30.0, 1.0], vec![40.0, 0.0]]);
        let test = matrix(&cols, &[vec![52.0, 1.0]]);
        let s = RobustScaler::fit(&train);
        // train: median 25, q1 17.5, q3 32.5 -> IQR 15
        let out = s.apply(&test).unwrap();
        assert_eq!(out.values, vec![(52.0 - 25.0) / 15.0, 1.0]);
    }

    #[test]
    fn missing_cells_keep_sentinel() {
        let mut m = matrix(&[("x", ColumnKind::Continuous)], &[vec![1.0], vec![0.0], vec![3.0]]);
        m.missing_mask[1] = true;
        let s = RobustScaler::fit(&m);
        assert_eq!(s.columns[0].median, 2.0);
        let out = s.apply(&m).unwrap();
        assert_eq!(out.values[1], MISSING_SENTINEL);
    }

    proptest! {
        #[test]
        fn scaling_is_invertible(v in proptest::collection::vec(-1e3f64..1e3, 2..40)) {
            let rows: Vec<Vec<f64>> = v.iter().map(|&x| vec![x]).collect();
            let m = matrix(&[("x", ColumnKind::Continuous)], &rows);
            let s = RobustScaler::fit(&m);
            let back = s.inverse(&s.apply(&m).unwrap()).unwrap();
            for (a, b) in back.values.iter().zip(&m.values) {
                prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
            }
        }
    }
}
