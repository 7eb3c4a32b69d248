use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fairdrop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fairdrop"))
        .args(args)
        .output()
        .expect("run fairdrop")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, extra: &str) -> String {
    let path = dir.join("audit.toml");
    let text = format!(
        r#"seed = 4
formats = ["online"]
algorithms = ["LR", "GBT"]
cv_folds = 2
{extra}

[data]
source = "synth"
n = 1500

[grid]
lr_l2 = [1.0]
gbt_trees = [20]
gbt_depth = [2]
gbt_learning_rate = [0.3]
gbt_min_child_weight = [1.0]
"#
    );
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn synth_writes_records_and_marginals() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cohort");
    let o = fairdrop(&["synth", "--profile", "residential", "--n", "3000", "--seed", "9", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("wrote 3000 students"));
    let students = fs::read_to_string(out.join("students.csv")).unwrap();
    assert_eq!(students.lines().count(), 3001);
    assert!(out.join("courses.csv").exists());
    let marginals: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("marginals.json")).unwrap()).unwrap();
    assert_eq!(marginals["n"], 3000);
    assert!(marginals["checks"].as_array().unwrap().len() >= 10);
}

#[test]
fn synth_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let o = fairdrop(&["synth", "--profile", "online", "--n", "800", "--seed", "3", "--out", d.to_str().unwrap()]);
        assert!(o.status.success());
    }
    for f in ["students.csv", "courses.csv", "marginals.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn audit_then_report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "write_predictions = true");
    let out = dir.path().join("out");
    let o = fairdrop(&["audit", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("online: train"));
    assert!(text.contains("protected-interaction adj R2"));
    for f in ["report.json", "table3.csv", "table4.csv", "table5.csv", "fig2.csv", "fig1_online.csv", "fig3_online.csv", "predictions_online.csv", "auxiliary_r2.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }

    let again = dir.path().join("again");
    let o = fairdrop(&["report", "--in", out.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["table3.csv", "table4.csv", "table5.csv", "fig2.csv", "fig1_online.csv", "auxiliary_r2.csv"] {
        assert_eq!(fs::read(out.join(f)).unwrap(), fs::read(again.join(f)).unwrap(), "{f}");
    }
    let o = fairdrop(&["report", "--in", out.to_str().unwrap(), "--format", "json", "--out", again.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(fs::read(out.join("report.json")).unwrap(), fs::read(again.join("report.json")).unwrap());
}

#[test]
fn config_errors_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "unknown_key = 1");
    let o = fairdrop(&["audit", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let missing = dir.path().join("nope.toml");
    let o = fairdrop(&["audit", "--config", missing.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let cfg = write_config(dir.path(), "");
    let o = fairdrop(&["audit", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("output directory"));

    let o = fairdrop(&["report", "--in", dir.path().to_str().unwrap(), "--format", "xml"]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn pipeline_errors_exit_with_code_3() {
    let dir = tempfile::tempdir().unwrap();
    let students = dir.path().join("students.csv");
    fs::write(&students, "this,is,not\na,student,file\n").unwrap();
    fs::write(dir.path().join("courses.csv"), "x\n").unwrap();
    let cfg = dir.path().join("csv.toml");
    fs::write(
        &cfg,
        r#"seed = 1
formats = ["online"]
algorithms = ["LR"]

[data]
source = "csv"
students = "students.csv"
courses = "courses.csv"
"#,
    )
    .unwrap();
    let o = fairdrop(&["audit", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));

    let o = fairdrop(&["report", "--in", dir.path().join("empty").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}
