use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Counts with dropout as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn n(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn positives(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> u64 {
        self.tn + self.fp
    }

    /// Numerator and denominator of `metric`.
    pub fn counts(&self, metric: Metric) -> (u64, u64) {
        match metric {
            Metric::Accuracy => (self.tp + self.tn, self.n()),
            Metric::Recall => (self.tp, self.positives()),
            Metric::Tnr => (self.tn, self.negatives()),
        }
    }

    /// `None` when the denominator is zero.
    pub fn value(&self, metric: Metric) -> Option<f64> {
        let (num, den) = self.counts(metric);
        (den > 0).then(|| num as f64 / den as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Accuracy,
    Recall,
    Tnr,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Accuracy, Metric::Recall, Metric::Tnr];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Accuracy => "accuracy",
            Metric::Recall => "recall",
            Metric::Tnr => "tnr",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: Option<f64>,
    pub recall: Option<f64>,
    pub tnr: Option<f64>,
}

impl Metrics {
    pub fn get(&self, m: Metric) -> Option<f64> {
        match m {
            Metric::Accuracy => self.accuracy,
            Metric::Recall => self.recall,
            Metric::Tnr => self.tnr,
        }
    }
}

pub fn confusion(labels: &[u8], predictions: &[u8]) -> Result<ConfusionMatrix> {
    if labels.len() != predictions.len() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: predictions.len(),
        });
    }
    let mut cm = ConfusionMatrix::default();
    for (&y, &p) in labels.iter().zip(predictions) {
        match (y != 0, p != 0) {
            (true, true) => cm.tp += 1,
            (false, true) => cm.fp += 1,
            (false, false) => cm.tn += 1,
            (true, false) => cm.fn_ += 1,
        }
    }
    Ok(cm)
}

pub fn overall_metrics(cm: &ConfusionMatrix) -> Metrics {
    Metrics {
        accuracy: cm.value(Metric::Accuracy),
        recall: cm.value(Metric::Recall),
        tnr: cm.value(Metric::Tnr),
    }
}

/// Accuracy of predicting the majority class for everyone.
pub fn majority_baseline(labels: &[u8]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let ones = labels.iter().filter(|&&y| y != 0).count() as f64;
    let n = labels.len() as f64;
    (ones / n).max(1.0 - ones / n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn forced_arithmetic() {
        let cm = confusion(&[1, 1, 0, 0], &[1, 0, 0, 0]).unwrap();
        let m = overall_metrics(&cm);
        assert_eq!(m.accuracy, Some(0.75));
        assert_eq!(m.recall, Some(0.5));
        assert_eq!(m.tnr, Some(1.0));
    }

    #[test]
    fn perfect_predictions() {
        let y = [1, 0, 1, 1, 0];
        let m = overall_metrics(&confusion(&y, &y).unwrap());
        assert_eq!((m.accuracy, m.recall, m.tnr), (Some(1.0), Some(1.0), Some(1.0)));
    }

    #[test]
    fn undefined_ratios_are_absent() {
        let m = overall_metrics(&confusion(&[0, 0], &[0, 1]).unwrap());
        assert_eq!(m.recall, None);
        assert_eq!(m.tnr, Some(0.5));
        assert!(matches!(confusion(&[0], &[0, 1]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn majority_share() {
        assert_eq!(majority_baseline(&[0, 1, 0, 1]), 0.5);
        let y: Vec<u8> = (0..1000).map(|i| u8::from(i >= 593)).collect();
        assert!((majority_baseline(&y) - 0.593).abs() < 1e-12);
        let y: Vec<u8> = (0..1000).map(|i| u8::from(i >= 831)).collect();
        assert!((majority_baseline(&y) - 0.831).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn accuracy_is_weighted_mean_of_recall_and_tnr(tp in 0u64..500, fp in 0u64..500, tn in 0u64..500, fn_ in 0u64..500) {
            let cm = ConfusionMatrix { tp, fp, tn, fn_ };
            prop_assume!(cm.positives() > 0 && cm.negatives() > 0);
            let m = overall_metrics(&cm);
            let p = cm.positives() as f64;
            let n = cm.negatives() as f64;
            let mix = (m.recall.unwrap() * p + m.tnr.unwrap() * n) / (p + n);
            prop_assert!((mix - m.accuracy.unwrap()).abs() < 1e-12);
        }
    }
}
