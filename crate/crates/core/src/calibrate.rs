//! Prevalence-matching decision thresholds, risk ranks and BLIND→AWARE ranking changes.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cohort::FeatureSet;
use crate::error::{Error, Result};
use crate::learners::ModelKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModelTag {
    pub feature_set: FeatureSet,
    pub kind: ModelKind,
}

impl fmt::Display for ModelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.feature_set, self.kind)
    }
}

/// Outcome of the threshold rule on one test set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    /// Number of rows labeled dropout.
    pub n_positive: usize,
    /// Probability of the lowest-ranked predicted dropout; `None` when nobody is labeled.
    pub probability: Option<f64>,
}

/// `round(rate * n_test)` with the rate given as `positives / n_train`, rounded half up
/// in exact integer arithmetic and clamped to `[0, n_test]`.
pub fn matched_count(train_positives: usize, train_total: usize, n_test: usize) -> usize {
    if train_total == 0 {
        return 0;
    }
    let num = 2 * train_positives as u128 * n_test as u128 + train_total as u128;
    let m = num / (2 * train_total as u128);
    (m as usize).min(n_test)
}

/// Ranks 1..n by descending probability; equal probabilities keep row order.
pub fn rank_by_risk(probs: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]));
    let mut ranks = vec![0; probs.len()];
    for (r, &i) in order.iter().enumerate() {
        ranks[i] = r + 1;
    }
    ranks
}

/// Threshold so the predicted-dropout share of the test set matches the training
/// dropout rate: the top `m` rows by probability are labeled dropout.
pub fn calibrate_threshold(train_labels: &[u8], test_probs: &[f64]) -> Threshold {
    let pos = train_labels.iter().filter(|&&y| y == 1).count();
    let m = matched_count(pos, train_labels.len(), test_probs.len());
    let ranks = rank_by_risk(test_probs);
    let probability = (m > 0).then(|| {
        let i = ranks.iter().position(|&r| r == m).expect("ranks are a permutation");
        test_probs[i]
    });
    Threshold {
        n_positive: m,
        probability,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionSet {
    pub row_ids: Vec<String>,
    pub probabilities: Vec<f64>,
    pub threshold: Threshold,
    pub labels: Vec<u8>,
    pub ranks: Vec<usize>,
    pub model_tag: ModelTag,
}

impl PredictionSet {
    pub fn new(row_ids: Vec<String>, probabilities: Vec<f64>, train_labels: &[u8], model_tag: ModelTag) -> Result<Self> {
        if row_ids.len() != probabilities.len() {
            return Err(Error::LengthMismatch {
                left: row_ids.len(),
                right: probabilities.len(),
            });
        }
        if probabilities.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("predicted probability".into()));
        }
        let threshold = calibrate_threshold(train_labels, &probabilities);
        let ranks = rank_by_risk(&probabilities);
        let labels = ranks.iter().map(|&r| u8::from(r <= threshold.n_positive)).collect();
        Ok(Self {
            row_ids,
            probabilities,
            threshold,
            labels,
            ranks,
            model_tag,
        })
    }

    pub fn len(&self) -> usize {
        self.row_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.row_ids.is_empty()
    }

    /// CSV columns: `row_id, probability, label, rank, model_tag`.
    pub fn write_csv<W: Write>(&self, w: &mut csv::Writer<W>) -> Result<()> {
        for i in 0..self.len() {
            w.write_record([
                self.row_ids[i].clone(),
                self.probabilities[i].to_string(),
                self.labels[i].to_string(),
                self.ranks[i].to_string(),
                self.model_tag.to_string(),
            ])?;
        }
        Ok(())
    }
}

/// Per-student `rank_BLIND - rank_AWARE`; positive means riskier under AWARE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingChange {
    pub row_ids: Vec<String>,
    pub deltas: Vec<i64>,
}

impl RankingChange {
    /// Mean delta of rows where `mask` is true; `None` for an empty selection.
    pub fn mean_where(&self, mask: &[bool]) -> Option<f64> {
        let sel: Vec<f64> = self.deltas.iter().zip(mask).filter(|(_, &m)| m).map(|(&d, _)| d as f64).collect();
        (!sel.is_empty()).then(|| sel.iter().sum::<f64>() / sel.len() as f64)
    }

    pub fn split_by(&self, mask: &[bool]) -> (Vec<f64>, Vec<f64>) {
        let mut yes = Vec::new();
        let mut no = Vec::new();
        for (&d, &m) in self.deltas.iter().zip(mask) {
            if m {
                yes.push(d as f64);
            } else {
                no.push(d as f64);
            }
        }
        (yes, no)
    }
}

/// Pairs students by id. Output follows the row order of `blind`.
pub fn ranking_change(blind: &PredictionSet, aware: &PredictionSet) -> Result<RankingChange> {
    if blind.len() != aware.len() {
        return Err(Error::RowMismatch);
    }
    let aware_rank: HashMap<&str, usize> = aware
        .row_ids
        .iter()
        .map(String::as_str)
        .zip(aware.ranks.iter().copied())
        .collect();
    if aware_rank.len() != aware.len() {
        return Err(Error::RowMismatch);
    }
    let mut deltas = Vec::with_capacity(blind.len());
    for (id, &rb) in blind.row_ids.iter().zip(&blind.ranks) {
        let ra = *aware_rank.get(id.as_str()).ok_or(Error::RowMismatch)?;
        deltas.push(rb as i64 - ra as i64);
    }
    Ok(RankingChange {
        row_ids: blind.row_ids.clone(),
        deltas,
    })
}
