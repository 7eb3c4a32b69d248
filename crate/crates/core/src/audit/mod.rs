//! End-to-end audit: paired AWARE/BLIND models per format and algorithm, every
//! comparison statistic, and report emission.

mod config;
mod emit;
mod report;

use std::collections::HashSet;

pub use config::{AuditConfig, DataSource};
pub use emit::{emit_report, read_report, write_report_json, EmitFormat};
pub use report::*;

use crate::calibrate::{ranking_change, ModelTag, PredictionSet};
use crate::cohort::{
    engineer_features, load_courses, load_students, split_by_cohort, CategoryVocab, CourseRecord, FeatureMatrix,
    FeatureSet, Format, ProtectedAttribute, RobustScaler, StudentRecord,
};
use crate::error::{Error, Result};
use crate::learners::{class_weights, grid_search_cv, train, ModelKind};
use crate::rng::derive_seed;
use crate::stats::{
    confusion, encoding_test, group_dropout_rates, group_fairness, histogram_counts, majority_baseline,
    overall_metrics, probability_histogram, protected_interaction_test, two_proportion_ztest, welch_ttest, Metric,
};
use crate::synth::{generate, validate_marginals, MarginalReport};

/// Tolerance, in percentage points, of the marginal check attached to synthetic runs.
pub const MARGINAL_TOLERANCE_PP: f64 = 1.5;

trait Stage<T> {
    fn stage(self, format: Format, what: &str) -> Result<T>;
}

impl<T> Stage<T> for Result<T> {
    fn stage(self, format: Format, what: &str) -> Result<T> {
        self.map_err(|e| e.at_stage(format!("{format}: {what}")))
    }
}

fn load_data(config: &AuditConfig, format: Format) -> Result<(Vec<StudentRecord>, Vec<CourseRecord>, Option<MarginalReport>)> {
    match &config.data {
        DataSource::Synth { .. } => {
            let profile = config.profile(format)?;
            let cohort = generate(&profile)?;
            let marginals = validate_marginals(&cohort.students, &profile, MARGINAL_TOLERANCE_PP);
            Ok((cohort.students, cohort.courses, Some(marginals)))
        }
        DataSource::Csv { students, courses } => {
            let all = load_students(students, &config.features.student_columns)?;
            let students: Vec<StudentRecord> = all.into_iter().filter(|s| s.format == format).collect();
            if students.is_empty() {
                return Err(Error::InvalidInput(format!("no {format} students in the input")));
            }
            let ids: HashSet<&str> = students.iter().map(|s| s.student_id.as_str()).collect();
            let courses = load_courses(courses, &config.features)?
                .into_iter()
                .filter(|c| ids.contains(c.student_id.as_str()))
                .collect();
            Ok((students, courses, None))
        }
    }
}

struct Fitted {
    report: ModelReport,
    predictions: PredictionSet,
}

fn count(labels: &[u8]) -> usize {
    labels.iter().filter(|&&y| y != 0).count()
}

#[allow(clippy::too_many_arguments)]
fn fit_model(
    config: &AuditConfig,
    format: Format,
    kind: ModelKind,
    train_m: &FeatureMatrix,
    test_m: &FeatureMatrix,
    weights: &[f64],
    cv_seed: u64,
) -> Result<Fitted> {
    let tag = ModelTag {
        feature_set: train_m.feature_set,
        kind,
    };
    let what = |s: &str| format!("{tag} {s}");
    let nan = kind == ModelKind::Gbt;
    let x_train = train_m.design(nan);
    let x_test = test_m.design(nan);
    let y_train = train_m.labels_f64();
    let cv = grid_search_cv(&x_train, &y_train, weights, kind, &config.grid, config.cv_folds, cv_seed)
        .stage(format, &what("grid search"))?;
    let model = train(&x_train, &y_train, weights, &cv.best, derive_seed(cv_seed, "gbt")).stage(format, &what("fit"))?;
    let probs = model.predict_proba(&x_test).stage(format, &what("predict"))?;
    let predictions = PredictionSet::new(test_m.row_ids.clone(), probs, &train_m.labels, tag).stage(format, &what("threshold"))?;
    let cm = confusion(&test_m.labels, &predictions.labels)?;
    Ok(Fitted {
        report: ModelReport {
            tag,
            hyper: cv.best,
            cv_auc: cv.best_auc,
            cv_table: cv.table,
            train_status: model.meta.status,
            iterations: model.meta.iterations,
            class_weights: model.meta.class_weights,
            threshold: predictions.threshold,
            confusion: cm,
            metrics: overall_metrics(&cm),
        },
        predictions,
    })
}

fn overall_rows(kind: ModelKind, aware: &ModelReport, blind: &ModelReport) -> Vec<OverallRow> {
    Metric::ALL
        .iter()
        .map(|&metric| {
            let (_, n) = aware.confusion.counts(metric);
            let a = aware.metrics.get(metric);
            let b = blind.metrics.get(metric);
            let (z, p_value, note) = match (a, b) {
                (Some(a), Some(b)) => match two_proportion_ztest(a, n, b, n) {
                    Ok(r) => (Some(r.statistic), Some(r.p_value), None),
                    Err(e) => (None, None, Some(e.to_string())),
                },
                _ => (None, None, Some("metric undefined".to_string())),
            };
            OverallRow {
                algorithm: kind,
                metric,
                n,
                aware: a,
                blind: b,
                delta: a.zip(b).map(|(a, b)| a - b),
                z,
                p_value,
                note,
            }
        })
        .collect()
}

fn ranking_report(
    kind: ModelKind,
    aware: &PredictionSet,
    blind: &PredictionSet,
    test_m: &FeatureMatrix,
    bins: usize,
) -> Result<RankingReport> {
    let rc = ranking_change(blind, aware)?;
    let n = rc.deltas.len();
    let delta_sum: i64 = rc.deltas.iter().sum();
    let range = rc.deltas.iter().map(|d| d.unsigned_abs()).max().unwrap_or(0).max(1) as f64;
    let mut tests = Vec::new();
    let mut histograms = Vec::new();
    for attr in ProtectedAttribute::ALL {
        let flags = test_m.group_flags(attr);
        let (g, r) = rc.split_by(&flags);
        let (gname, rname) = attr.group_names();
        let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
        let (gm, rm) = (mean(&g), mean(&r));
        let (t, df, p_value, cohens_d, note) = match welch_ttest(&g, &r) {
            Ok(res) => (Some(res.statistic), res.df, Some(res.p_value), res.effect_size, None),
            Err(e) => (None, None, None, None, Some(e.to_string())),
        };
        tests.push(RankingTestRow {
            attribute: attr,
            group: gname.into(),
            reference: rname.into(),
            group_n: g.len(),
            reference_n: r.len(),
            group_mean: gm,
            reference_mean: rm,
            difference: gm.zip(rm).map(|(a, b)| a - b),
            t,
            df,
            p_value,
            cohens_d,
            note,
        });
        for (name, values) in [(gname, &g), (rname, &r)] {
            let (edges, counts) = histogram_counts(values, -range, range, bins);
            histograms.push(RankHistogram {
                attribute: attr,
                group: name.into(),
                edges,
                counts,
            });
        }
    }
    Ok(RankingReport {
        algorithm: kind,
        n,
        delta_sum,
        mean_delta: if n > 0 { delta_sum as f64 / n as f64 } else { 0.0 },
        tests,
        histograms,
    })
}

fn run_format(config: &AuditConfig, format: Format) -> Result<FormatReport> {
    let (students, courses, marginals) = load_data(config, format).stage(format, "data")?;
    let test_cohort = match config.test_cohort {
        Some(c) => c,
        None => students.iter().map(|s| s.cohort).max().ok_or(Error::EmptySplit("test"))?,
    };
    let train_students: Vec<StudentRecord> = students.iter().filter(|s| s.cohort < test_cohort).cloned().collect();
    let vocab = CategoryVocab::fit(&train_students, config.features.top_k);
    let aware = engineer_features(&students, &courses, FeatureSet::Aware, &config.features, Some(&vocab))
        .stage(format, "feature engineering")?;
    let blind = aware.to_blind();
    let (aware_train, aware_test) = split_by_cohort(&aware, test_cohort).stage(format, "cohort split")?;
    let (blind_train, blind_test) = split_by_cohort(&blind, test_cohort).stage(format, "cohort split")?;
    let scaler = RobustScaler::fit(&aware_train);
    let scale = |m: &FeatureMatrix| scaler.apply(m).stage(format, "scaling");
    let (aware_train, aware_test) = (scale(&aware_train)?, scale(&aware_test)?);
    let (blind_train, blind_test) = (scale(&blind_train)?, scale(&blind_test)?);
    let weights = class_weights(&aware_train.labels).stage(format, "class weights")?;
    let cv_seed = derive_seed(config.seed, &format!("cv-{format}"));

    let mut models = Vec::new();
    let mut overall = Vec::new();
    let mut fairness = Vec::new();
    let mut ranking = Vec::new();
    let mut probability_histograms = Vec::new();
    let mut predictions = Vec::new();
    for &kind in &config.algorithms {
        let a = fit_model(config, format, kind, &aware_train, &aware_test, &weights, cv_seed)?;
        let b = fit_model(config, format, kind, &blind_train, &blind_test, &weights, cv_seed)?;
        overall.extend(overall_rows(kind, &a.report, &b.report));
        for fitted in [&a, &b] {
            for attr in ProtectedAttribute::ALL {
                let rows = group_fairness(&aware_test.labels, &fitted.predictions.labels, &aware_test.group_flags(attr), attr)
                    .stage(format, "group fairness")?;
                fairness.extend(rows.into_iter().map(|row| FairnessEntry {
                    algorithm: kind,
                    feature_set: fitted.report.tag.feature_set,
                    row,
                }));
            }
            probability_histograms.push(ProbabilityHistogramEntry {
                tag: fitted.report.tag,
                histogram: probability_histogram(&fitted.predictions.probabilities, &aware_test.labels, config.histogram_bins)?,
            });
        }
        ranking.push(
            ranking_report(kind, &a.predictions, &b.predictions, &blind_test, config.ranking_bins)
                .stage(format, "ranking change")?,
        );
        models.push(a.report);
        models.push(b.report);
        if config.write_predictions {
            predictions.push(a.predictions);
            predictions.push(b.predictions);
        }
    }

    let interaction = protected_interaction_test(&aware_test.groups, &aware_test.labels, config.r2_count_intercept)
        .stage(format, "protected interaction regression")?;
    let encoding = encoding_test(&blind_test.design(false), &blind_test.groups, config.r2_count_intercept)
        .stage(format, "encoding regressions")?;

    let aware_cols = aware.column_names();
    let blind_cols = blind.column_names();
    let removed = aware_cols.iter().filter(|c| !blind_cols.contains(c)).cloned().collect();
    let train_dropouts = count(&aware_train.labels);
    let test_dropouts = count(&aware_test.labels);
    Ok(FormatReport {
        format,
        data: DatasetSummary {
            test_cohort,
            n_train: aware_train.n_rows(),
            n_test: aware_test.n_rows(),
            train_dropouts,
            test_dropouts,
            train_dropout_rate: train_dropouts as f64 / aware_train.n_rows() as f64,
            test_dropout_rate: test_dropouts as f64 / aware_test.n_rows() as f64,
        },
        majority_baseline: majority_baseline(&aware_test.labels),
        feature_schema: FeatureSchemaDiff {
            aware: aware_cols,
            blind: blind_cols,
            removed,
        },
        marginals,
        group_dropout: group_dropout_rates(&aware_test.labels, &aware_test.groups)?,
        models,
        overall,
        fairness_algorithm: config.fairness_algorithm(),
        fairness,
        ranking,
        probability_histograms,
        auxiliary: AuxiliaryResults { interaction, encoding },
        predictions,
    })
}

/// Runs every configured format and algorithm. Output order follows the config.
pub fn run_audit(config: &AuditConfig) -> Result<AuditReport> {
    config.validate()?;
    let formats = config
        .formats
        .iter()
        .map(|&f| run_format(config, f))
        .collect::<Result<Vec<_>>>()?;
    let fa = config.fairness_algorithm();
    Ok(AuditReport {
        report_version: REPORT_VERSION,
        package_version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        notes: vec![
            "AWARE and BLIND hyperparameters are tuned by separate grid searches; both use the same CV folds and seeds".into(),
            "AWARE-vs-BLIND z-tests treat the two models' proportions as independent samples although both score the same students".into(),
            format!("fig2.csv, table5.csv and fig3 files use the {fa} models; report.json holds every algorithm"),
            "auxiliary regressions are fitted on the test cohort".into(),
        ],
        formats,
    })
}
