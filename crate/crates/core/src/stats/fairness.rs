use serde::{Deserialize, Serialize};

use super::confusion::{confusion, ConfusionMatrix, Metric};
use crate::cohort::ProtectedAttribute;
use crate::error::{Error, Result};

const Z_95: f64 = 1.959963984540054;

/// One group-difference bar: metric value for the flagged group minus the value
/// for its complement, with a normal-approximation 95% interval. Values are
/// absent when either group has an empty denominator for the metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupFairnessRow {
    pub attribute: ProtectedAttribute,
    pub metric: Metric,
    pub group: String,
    pub reference: String,
    pub group_n: u64,
    pub reference_n: u64,
    pub group_value: Option<f64>,
    pub reference_value: Option<f64>,
    pub difference: Option<f64>,
    pub ci_lower: Option<f64>,
    pub ci_upper: Option<f64>,
}

fn split_confusion(labels: &[u8], predictions: &[u8], flags: &[bool]) -> Result<(ConfusionMatrix, ConfusionMatrix)> {
    if flags.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: flags.len(),
            right: labels.len(),
        });
    }
    let mut g = (Vec::new(), Vec::new());
    let mut r = (Vec::new(), Vec::new());
    for i in 0..labels.len().min(predictions.len()) {
        let side = if flags[i] { &mut g } else { &mut r };
        side.0.push(labels[i]);
        side.1.push(predictions[i]);
    }
    Ok((confusion(&g.0, &g.1)?, confusion(&r.0, &r.1)?))
}

/// Differences in accuracy, recall and TNR between the flagged group and its complement.
pub fn group_fairness(
    labels: &[u8],
    predictions: &[u8],
    flags: &[bool],
    attribute: ProtectedAttribute,
) -> Result<Vec<GroupFairnessRow>> {
    if labels.len() != predictions.len() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: predictions.len(),
        });
    }
    let (group_cm, ref_cm) = split_confusion(labels, predictions, flags)?;
    let (gname, rname) = attribute.group_names();
    if group_cm.n() == 0 {
        return Err(Error::EmptyGroup(gname.into()));
    }
    if ref_cm.n() == 0 {
        return Err(Error::EmptyGroup(rname.into()));
    }
    Ok(Metric::ALL
        .iter()
        .map(|&metric| {
            let (_, n1) = group_cm.counts(metric);
            let (_, n2) = ref_cm.counts(metric);
            let p1 = group_cm.value(metric);
            let p2 = ref_cm.value(metric);
            let (difference, ci_lower, ci_upper) = match (p1, p2) {
                (Some(a), Some(b)) => {
                    let d = a - b;
                    let se = (a * (1.0 - a) / n1 as f64 + b * (1.0 - b) / n2 as f64).sqrt();
                    (Some(d), Some(d - Z_95 * se), Some(d + Z_95 * se))
                }
                _ => (None, None, None),
            };
            GroupFairnessRow {
                attribute,
                metric,
                group: gname.into(),
                reference: rname.into(),
                group_n: n1,
                reference_n: n2,
                group_value: p1,
                reference_value: p2,
                difference,
                ci_lower,
                ci_upper,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRate {
    pub attribute: ProtectedAttribute,
    pub group: String,
    pub n: u64,
    pub dropouts: u64,
    pub rate: Option<f64>,
}

/// Dropout rate of both groups of every protected attribute, flagged group first.
pub fn group_dropout_rates(labels: &[u8], groups: &[[bool; 4]]) -> Result<Vec<GroupRate>> {
    if labels.len() != groups.len() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: groups.len(),
        });
    }
    let mut out = Vec::with_capacity(8);
    for attr in ProtectedAttribute::ALL {
        let (gname, rname) = attr.group_names();
        for (name, flag) in [(gname, true), (rname, false)] {
            let mut n = 0;
            let mut d = 0;
            for (&y, g) in labels.iter().zip(groups) {
                if g[attr.index()] == flag {
                    n += 1;
                    d += u64::from(y != 0);
                }
            }
            out.push(GroupRate {
                attribute: attr,
                group: name.into(),
                n,
                dropouts: d,
                rate: (n > 0).then(|| d as f64 / n as f64),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::confusion::overall_metrics;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_groups_have_zero_differences() {
        let labels = [1, 0, 1, 0, 1, 0, 1, 0];
        let preds = [1, 0, 0, 1, 1, 0, 0, 1];
        let flags = [true, true, true, true, false, false, false, false];
        for row in group_fairness(&labels, &preds, &flags, ProtectedAttribute::Gender).unwrap() {
            assert_eq!(row.difference, Some(0.0));
        }
    }

    #[test]
    fn recall_gap_with_closed_form_interval() {
        let mut labels = vec![1u8; 20];
        let mut preds = vec![1u8; 10];
        preds.extend([1, 1, 1, 1, 1, 0, 0, 0, 0, 0]);
        let mut flags = vec![true; 10];
        flags.extend([false; 10]);
        labels.extend([0, 0]);
        preds.extend([0, 0]);
        flags.extend([true, false]);
        let rows = group_fairness(&labels, &preds, &flags, ProtectedAttribute::Urm).unwrap();
        let recall = rows.iter().find(|r| r.metric == Metric::Recall).unwrap();
        assert_eq!(recall.difference, Some(0.5));
        let se = (0.0f64 / 10.0 + 0.25 / 10.0).sqrt();
        assert!((recall.ci_lower.unwrap() - (0.5 - 1.959963984540054 * se)).abs() < 1e-12);
        assert!((recall.ci_upper.unwrap() - (0.5 + 1.959963984540054 * se)).abs() < 1e-12);
        assert_eq!(recall.group, "URM");
    }

    #[test]
    fn empty_group_and_absent_metric() {
        assert!(matches!(
            group_fairness(&[1, 0], &[1, 0], &[true, true], ProtectedAttribute::Gender),
            Err(Error::EmptyGroup(_))
        ));
        let rows = group_fairness(&[0, 0, 1], &[0, 1, 1], &[true, false, false], ProtectedAttribute::Gender).unwrap();
        let recall = rows.iter().find(|r| r.metric == Metric::Recall).unwrap();
        assert_eq!(recall.group_value, None);
        assert_eq!(recall.difference, None);
    }

    #[test]
    fn dropout_rates_partition_population() {
        let labels = [1, 0, 0, 1, 1];
        let groups = [
            [true, false, true, false],
            [true, true, false, false],
            [false, false, true, true],
            [false, true, false, true],
            [true, false, false, false],
        ];
        let rates = group_dropout_rates(&labels, &groups).unwrap();
        assert_eq!(rates.len(), 8);
        for pair in rates.chunks(2) {
            assert_eq!(pair[0].n + pair[1].n, 5);
            assert_eq!(pair[0].dropouts + pair[1].dropouts, 3);
        }
        assert_eq!(rates[0].rate, Some(2.0 / 3.0));
    }

    proptest! {
        #[test]
        fn population_metric_lies_between_groups(
            data in proptest::collection::vec((0u8..2, 0u8..2, any::<bool>()), 4..200)
        ) {
            let labels: Vec<u8> = data.iter().map(|d| d.0).collect();
            let preds: Vec<u8> = data.iter().map(|d| d.1).collect();
            let flags: Vec<bool> = data.iter().map(|d| d.2).collect();
            let rows = group_fairness(&labels, &preds, &flags, ProtectedAttribute::HighNeed);
            prop_assume!(rows.is_ok());
            let all = overall_metrics(&confusion(&labels, &preds).unwrap());
            for row in rows.unwrap() {
                if let (Some(a), Some(b), Some(p)) = (row.group_value, row.reference_value, all.get(row.metric)) {
                    prop_assert!(p >= a.min(b) - 1e-12 && p <= a.max(b) + 1e-12);
                    let d = row.difference.unwrap();
                    prop_assert_eq!(d, a - b);
                    prop_assert!(row.ci_lower.unwrap() <= d && d <= row.ci_upper.unwrap());
                }
            }
        }
    }
}
