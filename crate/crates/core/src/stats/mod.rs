//! Evaluation statistics: confusion-matrix metrics, AWARE-vs-BLIND significance
//! tests, group-fairness differences, ranking-change inference and McFadden R²
//! analyses.

mod confusion;
mod fairness;
mod histogram;
mod pseudo_r2;
mod tests;

pub use confusion::{confusion, majority_baseline, overall_metrics, ConfusionMatrix, Metric, Metrics};
pub use fairness::{group_dropout_rates, group_fairness, GroupFairnessRow, GroupRate};
pub use histogram::{histogram_counts, probability_histogram, ProbabilityHistogram};
pub use pseudo_r2::{
    encoding_test, interaction_terms, mcfadden_adj_r2, null_log_likelihood, protected_interaction_test,
    EncodingResult, InteractionTestResult, PENALTY_FLOOR,
};
pub use tests::{cohens_d, two_proportion_ztest, welch_ttest, StatTestResult};
