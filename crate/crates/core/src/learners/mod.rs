//! From-scratch learners: L2-regularized logistic regression and second-order
//! gradient-boosted trees, plus class weighting and cross-validated grid search.

pub mod cv;
pub mod gbt;
pub mod logistic;
pub mod weights;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cohort::Design;
use crate::error::{Error, Result};

pub use cv::{auc, grid_search_cv, stratified_folds, CvResult, CvRow, HyperGrid};
pub use gbt::{train_gbt, GbtParams, Node, Tree};
pub use logistic::{lr_loss_grad, train_lr, LrParams};
pub use weights::class_weights;

/// Serialization format version of [`TrainedModel`].
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "LR")]
    Lr,
    #[serde(rename = "GBT")]
    Gbt,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Lr => "LR",
            ModelKind::Gbt => "GBT",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Hyperparameters of one candidate configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Hyper {
    #[serde(rename = "LR")]
    Lr(LrParams),
    #[serde(rename = "GBT")]
    Gbt(GbtParams),
}

impl Hyper {
    pub fn kind(&self) -> ModelKind {
        match self {
            Hyper::Lr(_) => ModelKind::Lr,
            Hyper::Gbt(_) => ModelKind::Gbt,
        }
    }

    pub fn as_map(&self) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        match self {
            Hyper::Lr(p) => {
                m.insert("l2".into(), p.l2);
            }
            Hyper::Gbt(p) => {
                m.insert("trees".into(), p.trees as f64);
                m.insert("max_depth".into(), p.max_depth as f64);
                m.insert("learning_rate".into(), p.learning_rate);
                m.insert("min_child_weight".into(), p.min_child_weight);
                m.insert("lambda".into(), p.lambda);
                m.insert("max_bins".into(), p.max_bins as f64);
            }
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainStatus {
    Converged,
    /// Iteration cap reached before the gradient tolerance.
    Unconverged,
    /// All labels identical; the model is a constant base score.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    /// Mean-normalized weight of the negative and positive class.
    pub class_weights: [f64; 2],
    pub seed: u64,
    pub cv_score: Option<f64>,
    pub status: TrainStatus,
    pub iterations: usize,
    /// Weighted mean training log-loss, one entry per iteration or boosting round.
    pub loss_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelParams {
    Lr { intercept: f64, coefficients: Vec<f64> },
    Gbt { base_score: f64, trees: Vec<Tree> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub version: u32,
    pub kind: ModelKind,
    pub hyper: Hyper,
    pub params: ModelParams,
    pub feature_names: Vec<String>,
    pub meta: TrainingMeta,
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

pub(crate) const PROB_CLIP: f64 = 1e-12;

impl TrainedModel {
    fn check_schema(&self, x: &Design) -> Result<()> {
        if x.n_cols != self.feature_names.len() || x.names != self.feature_names {
            return Err(Error::SchemaMismatch {
                expected: self.feature_names.len(),
                found: x.n_cols,
            });
        }
        Ok(())
    }

    /// Raw log-odds for every row.
    pub fn predict_margin(&self, x: &Design) -> Result<Vec<f64>> {
        self.check_schema(x)?;
        Ok(match &self.params {
            ModelParams::Lr { intercept, coefficients } => (0..x.n_rows)
                .map(|i| intercept + x.row(i).iter().zip(coefficients).map(|(a, b)| a * b).sum::<f64>())
                .collect(),
            ModelParams::Gbt { base_score, trees } => (0..x.n_rows)
                .map(|i| {
                    let row = x.row(i);
                    trees.iter().fold(*base_score, |m, t| m + t.predict_row(row))
                })
                .collect(),
        })
    }

    /// Predicted dropout probabilities, strictly inside (0, 1).
    pub fn predict_proba(&self, x: &Design) -> Result<Vec<f64>> {
        Ok(self
            .predict_margin(x)?
            .into_iter()
            .map(|z| sigmoid(z).clamp(PROB_CLIP, 1.0 - PROB_CLIP))
            .collect())
    }

    /// Bernoulli log-likelihood of `y` under the model, probabilities clipped to
    /// `[1e-12, 1 - 1e-12]`.
    pub fn log_likelihood(&self, x: &Design, y: &[f64]) -> Result<f64> {
        if y.len() != x.n_rows {
            return Err(Error::LengthMismatch {
                left: y.len(),
                right: x.n_rows,
            });
        }
        let p = self.predict_proba(x)?;
        Ok(bernoulli_log_likelihood(&p, y))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: TrainedModel = serde_json::from_str(s)?;
        if m.version != MODEL_VERSION {
            return Err(Error::InvalidInput(format!("unsupported model version {}", m.version)));
        }
        Ok(m)
    }
}

pub fn bernoulli_log_likelihood(p: &[f64], y: &[f64]) -> f64 {
    p.iter()
        .zip(y)
        .map(|(&p, &y)| {
            let p = p.clamp(PROB_CLIP, 1.0 - PROB_CLIP);
            y * p.ln() + (1.0 - y) * (1.0 - p).ln()
        })
        .sum()
}

/// Trains whichever learner `hyper` names.
pub fn train(x: &Design, y: &[f64], weights: &[f64], hyper: &Hyper, seed: u64) -> Result<TrainedModel> {
    match hyper {
        Hyper::Lr(p) => train_lr(x, y, weights, p),
        Hyper::Gbt(p) => train_gbt(x, y, weights, p, seed),
    }
}

pub(crate) fn check_inputs(x: &Design, y: &[f64], weights: &[f64]) -> Result<()> {
    if y.len() != x.n_rows {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: x.n_rows,
        });
    }
    if weights.len() != x.n_rows {
        return Err(Error::LengthMismatch {
            left: weights.len(),
            right: x.n_rows,
        });
    }
    if y.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::InvalidInput("labels must be 0 or 1".into()));
    }
    if weights.iter().any(|&w| !(w.is_finite() && w > 0.0)) {
        return Err(Error::InvalidInput("sample weights must be positive and finite".into()));
    }
    Ok(())
}

/// Rescales weights to mean 1, so a common positive factor has no effect on training.
pub(crate) fn normalize_weights(weights: &[f64]) -> Vec<f64> {
    let mean = weights.iter().sum::<f64>() / weights.len().max(1) as f64;
    weights.iter().map(|w| w / mean).collect()
}

pub(crate) fn class_weight_summary(y: &[f64], w: &[f64]) -> [f64; 2] {
    let mut out = [0.0; 2];
    for (&yi, &wi) in y.iter().zip(w) {
        out[yi as usize] = wi;
    }
    out
}
