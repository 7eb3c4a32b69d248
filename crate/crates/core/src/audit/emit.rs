use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::report::{AuditReport, FormatReport};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmitFormat {
    /// `report.json`, the complete report.
    Json,
    /// Per-table and per-figure CSV files.
    Csv,
}

impl std::str::FromStr for EmitFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(EmitFormat::Json),
            "csv" => Ok(EmitFormat::Csv),
            other => Err(Error::Config(format!("unknown report format `{other}`"))),
        }
    }
}

pub fn write_report_json(report: &AuditReport, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_report(path: &Path) -> Result<AuditReport> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}


struct CsvFile {
    path: PathBuf,
    writer: csv::Writer<fs::File>,
}

impl CsvFile {
    fn create(dir: &Path, name: &str, header: &[&str]) -> Result<Self> {
        let path = dir.join(name);
        let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut writer = csv::Writer::from_writer(file);
        writer.write_record(header)?;
        Ok(Self { path, writer })
    }

    fn row(&mut self, fields: Vec<String>) -> Result<()> {
        Ok(self.writer.write_record(fields)?)
    }

    fn finish(mut self) -> Result<PathBuf> {
        self.writer.flush().map_err(|e| Error::io(&self.path, e))?;
        Ok(self.path)
    }
}

fn table3(report: &AuditReport, dir: &Path) -> Result<PathBuf> {
    let mut f = CsvFile::create(
        dir,
        "table3.csv",
        &["format", "algorithm", "metric", "n", "aware", "blind", "delta", "z", "p_value", "majority_baseline"],
    )?;
    for fr in &report.formats {
        for r in &fr.overall {
            f.row(vec![
                fr.format.to_string(),
                r.algorithm.to_string(),
                r.metric.to_string(),
                r.n.to_string(),
                opt(r.aware),
                opt(r.blind),
                opt(r.delta),
                opt(r.z),
                opt(r.p_value),
                fr.majority_baseline.to_string(),
            ])?;
        }
    }
    f.finish()
}

fn table4(report: &AuditReport, dir: &Path) -> Result<PathBuf> {
    let mut f = CsvFile::create(dir, "table4.csv", &["format", "attribute", "group", "n", "dropouts", "rate"])?;
    for fr in &report.formats {
        f.row(vec![
            fr.format.to_string(),
            "overall".into(),
            "Overall".into(),
            fr.data.n_test.to_string(),
            fr.data.test_dropouts.to_string(),
            fr.data.test_dropout_rate.to_string(),
        ])?;
        for g in &fr.group_dropout {
            f.row(vec![
                fr.format.to_string(),
                g.attribute.to_string(),
                g.group.clone(),
                g.n.to_string(),
                g.dropouts.to_string(),
                opt(g.rate),
            ])?;
        }
    }
    f.finish()
}

fn table5(report: &AuditReport, dir: &Path) -> Result<PathBuf> {
    let mut f = CsvFile::create(
        dir,
        "table5.csv",
        &[
            "format",
            "algorithm",
            "attribute",
            "group",
            "reference",
            "group_n",
            "reference_n",
            "group_mean",
            "reference_mean",
            "difference",
            "t",
            "df",
            "p_value",
            "cohens_d",
        ],
    )?;
    for fr in &report.formats {
        for rr in fr.ranking.iter().filter(|r| r.algorithm == fr.fairness_algorithm) {
            for t in &rr.tests {
                f.row(vec![
                    fr.format.to_string(),
                    rr.algorithm.to_string(),
                    t.attribute.to_string(),
                    t.group.clone(),
                    t.reference.clone(),
                    t.group_n.to_string(),
                    t.reference_n.to_string(),
                    opt(t.group_mean),
                    opt(t.reference_mean),
                    opt(t.difference),
                    opt(t.t),
                    opt(t.df),
                    opt(t.p_value),
                    opt(t.cohens_d),
                ])?;
            }
        }
    }
    f.finish()
}

fn fig1(fr: &FormatReport, dir: &Path) -> Result<PathBuf> {
    let mut f = CsvFile::create(
        dir,
        &format!("fig1_{}.csv", fr.format),
        &["algorithm", "model", "bin_lower", "bin_upper", "dropout", "non_dropout"],
    )?;
    for h in &fr.probability_histograms {
        let hist = &h.histogram;
        for b in 0..hist.dropout.len() {
            f.row(vec![
                h.tag.kind.to_string(),
                h.tag.feature_set.to_string(),
                hist.edges[b].to_string(),
                hist.edges[b + 1].to_string(),
                hist.dropout[b].to_string(),
                hist.non_dropout[b].to_string(),
            ])?;
        }
    }
    f.finish()
}

fn fig2(report: &AuditReport, dir: &Path) -> Result<PathBuf> {
    let mut f = CsvFile::create(
        dir,
        "fig2.csv",
        &[
            "format",
            "algorithm",
            "model",
            "attribute",
            "metric",
            "group",
            "reference",
            "group_n",
            "reference_n",
            "group_value",
            "reference_value",
            "difference",
            "ci_lower",
            "ci_upper",
        ],
    )?;
    for fr in &report.formats {
        for e in fr.fairness.iter().filter(|e| e.algorithm == fr.fairness_algorithm) {
            let r = &e.row;
            f.row(vec![
                fr.format.to_string(),
                e.algorithm.to_string(),
                e.feature_set.to_string(),
                r.attribute.to_string(),
                r.metric.to_string(),
                r.group.clone(),
                r.reference.clone(),
                r.group_n.to_string(),
                r.reference_n.to_string(),
                opt(r.group_value),
                opt(r.reference_value),
                opt(r.difference),
                opt(r.ci_lower),
                opt(r.ci_upper),
            ])?;
        }
    }
    f.finish()
}

fn fig3(fr: &FormatReport, dir: &Path) -> Result<PathBuf> {
    let mut f = CsvFile::create(
        dir,
        &format!("fig3_{}.csv", fr.format),
        &["algorithm", "attribute", "group", "bin_lower", "bin_upper", "count"],
    )?;
    for rr in fr.ranking.iter().filter(|r| r.algorithm == fr.fairness_algorithm) {
        for h in &rr.histograms {
            for b in 0..h.counts.len() {
                f.row(vec![
                    rr.algorithm.to_string(),
                    h.attribute.to_string(),
                    h.group.clone(),
                    h.edges[b].to_string(),
                    h.edges[b + 1].to_string(),
                    h.counts[b].to_string(),
                ])?;
            }
        }
    }
    f.finish()
}

fn auxiliary(report: &AuditReport, dir: &Path) -> Result<PathBuf> {
    let mut f = CsvFile::create(
        dir,
        "auxiliary_r2.csv",
        &["format", "analysis", "target", "model_ll", "null_ll", "k", "adj_r2"],
    )?;
    for fr in &report.formats {
        let i = &fr.auxiliary.interaction;
        f.row(vec![
            fr.format.to_string(),
            "protected_interactions".into(),
            "dropout".into(),
            i.model_ll.to_string(),
            i.null_ll.to_string(),
            i.k.to_string(),
            i.adj_r2.to_string(),
        ])?;
        for e in &fr.auxiliary.encoding {
            f.row(vec![
                fr.format.to_string(),
                "blind_encoding".into(),
                e.attribute.to_string(),
                e.model_ll.to_string(),
                e.null_ll.to_string(),
                e.k.to_string(),
                e.adj_r2.to_string(),
            ])?;
        }
    }
    f.finish()
}

fn predictions(fr: &FormatReport, dir: &Path) -> Result<Option<PathBuf>> {
    if fr.predictions.is_empty() {
        return Ok(None);
    }
    let mut f = CsvFile::create(
        dir,
        &format!("predictions_{}.csv", fr.format),
        &["row_id", "probability", "label", "rank", "model_tag"],
    )?;
    for p in &fr.predictions {
        p.write_csv(&mut f.writer)?;
    }
    f.finish().map(Some)
}

/// Writes `report` into `dir` and returns the files written.
pub fn emit_report(report: &AuditReport, dir: &Path, format: EmitFormat) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    match format {
        EmitFormat::Json => {
            let path = dir.join("report.json");
            write_report_json(report, &path)?;
            Ok(vec![path])
        }
        EmitFormat::Csv => {
            let mut out = vec![table3(report, dir)?, table4(report, dir)?, table5(report, dir)?, fig2(report, dir)?];
            for fr in &report.formats {
                out.push(fig1(fr, dir)?);
                out.push(fig3(fr, dir)?);
                out.extend(predictions(fr, dir)?);
            }
            out.push(auxiliary(report, dir)?);
            Ok(out)
        }
    }
}
