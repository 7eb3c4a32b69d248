use serde::{Deserialize, Serialize};

use super::config::AuditConfig;
use crate::calibrate::{ModelTag, PredictionSet, Threshold};
use crate::cohort::{FeatureSet, Format, ProtectedAttribute};
use crate::learners::{CvRow, Hyper, ModelKind, TrainStatus};
use crate::stats::{
    ConfusionMatrix, EncodingResult, GroupFairnessRow, GroupRate, InteractionTestResult, Metric, Metrics,
    ProbabilityHistogram,
};
use crate::synth::MarginalReport;

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub report_version: u32,
    pub package_version: String,
    pub config: AuditConfig,
    pub notes: Vec<String>,
    pub formats: Vec<FormatReport>,
}

impl AuditReport {
    pub fn format(&self, format: Format) -> Option<&FormatReport> {
        self.formats.iter().find(|f| f.format == format)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchemaDiff {
    pub aware: Vec<String>,
    pub blind: Vec<String>,
    /// AWARE columns absent from BLIND, in AWARE order.
    pub removed: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub test_cohort: i32,
    pub n_train: usize,
    pub n_test: usize,
    pub train_dropouts: usize,
    pub test_dropouts: usize,
    pub train_dropout_rate: f64,
    pub test_dropout_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub tag: ModelTag,
    pub hyper: Hyper,
    pub cv_auc: f64,
    pub cv_table: Vec<CvRow>,
    pub train_status: TrainStatus,
    pub iterations: usize,
    pub class_weights: [f64; 2],
    pub threshold: Threshold,
    pub confusion: ConfusionMatrix,
    pub metrics: Metrics,
}

/// AWARE vs BLIND comparison of one metric for one algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverallRow {
    pub algorithm: ModelKind,
    pub metric: Metric,
    pub n: u64,
    pub aware: Option<f64>,
    pub blind: Option<f64>,
    /// AWARE minus BLIND.
    pub delta: Option<f64>,
    pub z: Option<f64>,
    pub p_value: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessEntry {
    pub algorithm: ModelKind,
    pub feature_set: FeatureSet,
    #[serde(flatten)]
    pub row: GroupFairnessRow,
}

/// Welch test of ranking changes between the flagged group and its complement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingTestRow {
    pub attribute: ProtectedAttribute,
    pub group: String,
    pub reference: String,
    pub group_n: usize,
    pub reference_n: usize,
    pub group_mean: Option<f64>,
    pub reference_mean: Option<f64>,
    /// Group mean minus reference mean.
    pub difference: Option<f64>,
    pub t: Option<f64>,
    pub df: Option<f64>,
    pub p_value: Option<f64>,
    pub cohens_d: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankHistogram {
    pub attribute: ProtectedAttribute,
    pub group: String,
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingReport {
    pub algorithm: ModelKind,
    pub n: usize,
    pub delta_sum: i64,
    pub mean_delta: f64,
    pub tests: Vec<RankingTestRow>,
    pub histograms: Vec<RankHistogram>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityHistogramEntry {
    pub tag: ModelTag,
    #[serde(flatten)]
    pub histogram: ProbabilityHistogram,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxiliaryResults {
    /// Saturated protected-attribute model of dropout on the test cohort.
    pub interaction: InteractionTestResult,
    /// BLIND features predicting each protected attribute on the test cohort.
    pub encoding: Vec<EncodingResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormatReport {
    pub format: Format,
    pub data: DatasetSummary,
    pub majority_baseline: f64,
    pub feature_schema: FeatureSchemaDiff,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marginals: Option<MarginalReport>,
    pub group_dropout: Vec<GroupRate>,
    pub models: Vec<ModelReport>,
    pub overall: Vec<OverallRow>,
    pub fairness_algorithm: ModelKind,
    pub fairness: Vec<FairnessEntry>,
    pub ranking: Vec<RankingReport>,
    pub probability_histograms: Vec<ProbabilityHistogramEntry>,
    pub auxiliary: AuxiliaryResults,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub predictions: Vec<PredictionSet>,
}

impl FormatReport {
    pub fn model(&self, tag: ModelTag) -> Option<&ModelReport> {
        self.models.iter().find(|m| m.tag == tag)
    }
}
