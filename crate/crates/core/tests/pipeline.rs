mod common;

use std::sync::OnceLock;

use fairdrop_core::audit::{emit_report, read_report, run_audit, write_report_json, AuditReport, DataSource, EmitFormat};
use fairdrop_core::calibrate::{matched_count, ModelTag};
use fairdrop_core::cohort::{write_courses, write_students};
use fairdrop_core::stats::Metric;
use fairdrop_core::synth::generate;
use fairdrop_core::{FeatureSet, Format, ModelKind, ProtectedAttribute};

fn report() -> &'static AuditReport {
    static R: OnceLock<AuditReport> = OnceLock::new();
    R.get_or_init(|| {
        let mut cfg = common::small_config(3, 4000);
        cfg.write_predictions = true;
        run_audit(&cfg).expect("audit")
    })
}

#[test]
fn every_format_has_four_models() {
    let r = report();
    assert_eq!(r.formats.len(), 2);
    for fr in &r.formats {
        assert_eq!(fr.models.len(), 4);
        for kind in [ModelKind::Gbt, ModelKind::Lr] {
            for fs in [FeatureSet::Aware, FeatureSet::Blind] {
                assert!(fr.model(ModelTag { feature_set: fs, kind }).is_some());
            }
        }
    }
}

#[test]
fn blind_schema_drops_exactly_protected_columns() {
    for fr in &report().formats {
        let s = &fr.feature_schema;
        let removed: Vec<&str> = s.removed.iter().map(String::as_str).collect();
        assert_eq!(removed, ["gender", "first_gen", "urm", "high_need"]);
        assert_eq!(s.aware.len(), s.blind.len() + 4);
        assert!(s.blind.iter().all(|c| s.aware.contains(c)));
    }
}

#[test]
fn thresholds_match_training_prevalence() {
    for fr in &report().formats {
        let want = matched_count(fr.data.train_dropouts, fr.data.n_train, fr.data.n_test);
        for m in &fr.models {
            assert_eq!(m.threshold.n_positive, want, "{}", m.tag);
            assert_eq!((m.confusion.tp + m.confusion.fp) as usize, want);
            let total = m.confusion.tp + m.confusion.fp + m.confusion.tn + m.confusion.fn_;
            assert_eq!(total as usize, fr.data.n_test);
        }
    }
}

#[test]
fn overall_delta_is_aware_minus_blind() {
    for fr in &report().formats {
        assert_eq!(fr.overall.len(), 6);
        for row in &fr.overall {
            let (a, b, d) = (row.aware.unwrap(), row.blind.unwrap(), row.delta.unwrap());
            assert!((d - (a - b)).abs() < 1e-12);
            let p = row.p_value.unwrap();
            assert!((0.0..=1.0).contains(&p));
        }
    }
}

#[test]
fn fairness_rows_cover_every_attribute_and_metric() {
    for fr in &report().formats {
        assert_eq!(fr.fairness_algorithm, ModelKind::Gbt);
        assert_eq!(fr.fairness.len(), 48);
        let main: Vec<_> = fr.fairness.iter().filter(|e| e.algorithm == fr.fairness_algorithm).collect();
        assert_eq!(main.len(), 24);
        for fs in [FeatureSet::Aware, FeatureSet::Blind] {
            for attr in ProtectedAttribute::ALL {
                for metric in Metric::ALL {
                    let n = main
                        .iter()
                        .filter(|e| e.feature_set == fs && e.row.attribute == attr && e.row.metric == metric)
                        .count();
                    assert_eq!(n, 1);
                }
            }
        }
        for e in &fr.fairness {
            let r = &e.row;
            if let (Some(g), Some(rf), Some(d)) = (r.group_value, r.reference_value, r.difference) {
                assert!((d - (g - rf)).abs() < 1e-12);
                assert!(r.ci_lower.unwrap() <= d && d <= r.ci_upper.unwrap());
            }
        }
    }
}

#[test]
fn group_counts_partition_the_test_cohort() {
    for fr in &report().formats {
        assert_eq!(fr.group_dropout.len(), 8);
        for pair in fr.group_dropout.chunks(2) {
            assert_eq!(pair[0].attribute, pair[1].attribute);
            assert_eq!((pair[0].n + pair[1].n) as usize, fr.data.n_test);
            assert_eq!((pair[0].dropouts + pair[1].dropouts) as usize, fr.data.test_dropouts);
        }
    }
}

#[test]
fn ranking_changes_sum_to_zero() {
    for fr in &report().formats {
        assert!(!fr.ranking.is_empty());
        for rk in &fr.ranking {
            assert_eq!(rk.delta_sum, 0);
            assert_eq!(rk.mean_delta, 0.0);
            assert_eq!(rk.n, fr.data.n_test);
            assert_eq!(rk.tests.len(), 4);
            for h in &rk.histograms {
                assert_eq!(h.edges.len(), h.counts.len() + 1);
            }
        }
    }
}

#[test]
fn predictions_are_consistent_with_ranks() {
    for fr in &report().formats {
        assert_eq!(fr.predictions.len(), 4);
        for p in &fr.predictions {
            let mut ranks = p.ranks.clone();
            ranks.sort_unstable();
            assert!(ranks.iter().enumerate().all(|(i, &r)| r == i + 1));
            let labeled = p.labels.iter().filter(|&&l| l == 1).count();
            assert_eq!(labeled, p.threshold.n_positive);
            for i in 0..p.len() {
                for j in 0..p.len().min(50) {
                    if p.ranks[i] < p.ranks[j] {
                        assert!(p.probabilities[i] >= p.probabilities[j]);
                    }
                }
            }
        }
    }
}

#[test]
fn auxiliary_results_cover_every_attribute() {
    for fr in &report().formats {
        let aux = &fr.auxiliary;
        assert_eq!(aux.encoding.len(), 4);
        assert!(aux.interaction.adj_r2 < 0.1);
        assert!(aux.interaction.model_ll >= aux.interaction.null_ll - 1e-6);
    }
}

#[test]
fn json_round_trip_is_lossless() {
    let r = report();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    write_report_json(r, &path).unwrap();
    let back = read_report(&path).unwrap();
    assert_eq!(&back, r);
    let again = dir.path().join("again.json");
    write_report_json(&back, &again).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn csv_emission_writes_every_table() {
    let dir = tempfile::tempdir().unwrap();
    let files = emit_report(report(), dir.path(), EmitFormat::Csv).unwrap();
    let names: Vec<String> = files
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    for want in [
        "table3.csv",
        "table4.csv",
        "table5.csv",
        "fig2.csv",
        "fig1_online.csv",
        "fig3_residential.csv",
        "predictions_online.csv",
        "auxiliary_r2.csv",
    ] {
        assert!(names.iter().any(|n| n == want), "{want} missing from {names:?}");
    }
    let fig2 = std::fs::read_to_string(dir.path().join("fig2.csv")).unwrap();
    assert_eq!(fig2.lines().count(), 1 + 2 * 24);
    let table3 = std::fs::read_to_string(dir.path().join("table3.csv")).unwrap();
    assert_eq!(table3.lines().count(), 1 + 2 * 6);
}

#[test]
fn audit_is_deterministic() {
    let cfg = common::small_config(5, 2500);
    let a = serde_json::to_string(&run_audit(&cfg).unwrap()).unwrap();
    let b = serde_json::to_string(&run_audit(&cfg).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn csv_source_reproduces_synthetic_run() {
    let mut cfg = common::small_config(9, 2500);
    cfg.formats = vec![Format::Online];
    cfg.algorithms = vec![ModelKind::Lr];
    let synth = run_audit(&cfg).unwrap();

    let profile = cfg.profile(Format::Online).unwrap();
    let cohort = generate(&profile).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let students = dir.path().join("students.csv");
    let courses = dir.path().join("courses.csv");
    write_students(std::fs::File::create(&students).unwrap(), &cohort.students).unwrap();
    write_courses(std::fs::File::create(&courses).unwrap(), &cohort.courses).unwrap();
    cfg.data = DataSource::Csv { students, courses };
    let csv = run_audit(&cfg).unwrap();

    let (a, b) = (synth.format(Format::Online).unwrap(), csv.format(Format::Online).unwrap());
    assert!(b.marginals.is_none());
    assert_eq!(a.data, b.data);
    assert_eq!(a.group_dropout, b.group_dropout);
    for (ma, mb) in a.models.iter().zip(&b.models) {
        assert_eq!(ma.confusion, mb.confusion);
    }
}

#[test]
fn lr_only_audit_uses_lr_for_fairness() {
    let mut cfg = common::small_config(2, 2000);
    cfg.formats = vec![Format::Residential];
    cfg.algorithms = vec![ModelKind::Lr];
    let r = run_audit(&cfg).unwrap();
    let fr = r.format(Format::Residential).unwrap();
    assert_eq!(fr.fairness_algorithm, ModelKind::Lr);
    assert_eq!(fr.models.len(), 2);
    assert_eq!(fr.overall.len(), 3);
}
