//! Fairness audit of dropout-prediction models trained with and without
//! protected attributes.
//!
//! The pipeline engineers AWARE and BLIND feature matrices from student and
//! course records, trains logistic regression and gradient-boosted trees on
//! earlier cohorts, labels the held-out cohort with a prevalence-matching
//! threshold, and compares overall performance, group fairness and individual
//! risk-ranking changes between the two feature sets.

pub mod audit;
pub mod calibrate;
pub mod cohort;
pub mod error;
pub mod learners;
pub mod rng;
pub mod stats;
pub mod synth;

pub use cohort::{FeatureMatrix, FeatureSet, Format, ProtectedAttribute};
pub use error::{Error, Result};
pub use learners::{ModelKind, TrainedModel};
