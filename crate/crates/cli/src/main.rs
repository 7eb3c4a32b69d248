//! `fairdrop`: synthetic cohorts, audits and report re-emission.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fairdrop_core::audit::{emit_report, read_report, run_audit, AuditConfig, AuditReport, EmitFormat};
use fairdrop_core::cohort::{write_courses, write_students};
use fairdrop_core::synth::{default_profile, generate, validate_marginals};
use fairdrop_core::{Error, Format};

const EXIT_CONFIG: u8 = 2;
const EXIT_PIPELINE: u8 = 3;

#[derive(Parser)]
#[command(name = "fairdrop", version, about = "Fairness audit of AWARE vs BLIND dropout-prediction models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic cohort: students.csv, courses.csv and marginals.json.
    Synth {
        #[arg(long)]
        profile: Format,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Marginal-check tolerance in percentage points.
        #[arg(long, default_value_t = 1.5)]
        tolerance: f64,
    },
    /// Run an audit from a TOML config and write report.json plus the CSV bundle.
    Audit {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `output_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-emit a saved report.
    Report {
        /// Directory holding report.json.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "csv")]
        format: EmitFormat,
        /// Destination directory; defaults to the input directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_config() { EXIT_CONFIG } else { EXIT_PIPELINE };
        let mut message = e.to_string();
        let mut source = std::error::Error::source(&e);
        while let Some(s) = source {
            let text = s.to_string();
            if !message.contains(&text) {
                message.push_str(&format!(": {text}"));
            }
            source = s.source();
        }
        Failure { code, message }
    }
}

fn config_error(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        message: message.into(),
    }
}

fn io_error(path: &std::path::Path, e: std::io::Error) -> Failure {
    Failure {
        code: EXIT_PIPELINE,
        message: format!("{}: {e}", path.display()),
    }
}

fn synth(profile: Format, n: usize, seed: u64, out: PathBuf, tolerance: f64) -> Result<(), Failure> {
    let mut p = default_profile(profile);
    p.n = n;
    p.seed = seed;
    p.validate().map_err(|e| config_error(e.to_string()))?;
    let cohort = generate(&p)?;
    fs::create_dir_all(&out).map_err(|e| io_error(&out, e))?;
    let students = out.join("students.csv");
    let courses = out.join("courses.csv");
    write_students(BufWriter::new(File::create(&students).map_err(|e| io_error(&students, e))?), &cohort.students)?;
    write_courses(BufWriter::new(File::create(&courses).map_err(|e| io_error(&courses, e))?), &cohort.courses)?;
    let report = validate_marginals(&cohort.students, &p, tolerance);
    let marginals = out.join("marginals.json");
    let text = serde_json::to_string_pretty(&report).map_err(|e| Failure::from(Error::from(e)))?;
    fs::write(&marginals, text + "\n").map_err(|e| io_error(&marginals, e))?;
    let failed: Vec<&str> = report.checks.iter().filter(|c| !c.pass).map(|c| c.quantity.as_str()).collect();
    println!(
        "wrote {} students and {} course records to {}",
        cohort.students.len(),
        cohort.courses.len(),
        out.display()
    );
    if failed.is_empty() {
        println!("all marginals within {tolerance}pp");
    } else {
        println!("marginals outside {tolerance}pp: {}", failed.join(", "));
    }
    for note in &report.notes {
        println!("note: {note}");
    }
    Ok(())
}

fn summarize(report: &AuditReport) {
    for fr in &report.formats {
        println!(
            "{}: train {} / test {} (cohort {}), majority baseline {:.3}",
            fr.format, fr.data.n_train, fr.data.n_test, fr.data.test_cohort, fr.majority_baseline
        );
        for r in &fr.overall {
            let f = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.3}"));
            println!(
                "  {} {:<8} AWARE {} BLIND {} delta {} p {}",
                r.algorithm,
                r.metric.as_str(),
                f(r.aware),
                f(r.blind),
                f(r.delta),
                f(r.p_value)
            );
        }
        println!(
            "  protected-interaction adj R2 {:.4}; BLIND encoding adj R2 {}",
            fr.auxiliary.interaction.adj_r2,
            fr.auxiliary
                .encoding
                .iter()
                .map(|e| format!("{}={:.3}", e.attribute, e.adj_r2))
                .collect::<Vec<_>>()
                .join(" ")
        );
    }
}

fn audit(config: PathBuf, out: Option<PathBuf>) -> Result<(), Failure> {
    let cfg = AuditConfig::load(&config)?;
    let dir = out
        .or_else(|| cfg.output_dir.clone())
        .ok_or_else(|| config_error("no output directory: set output_dir in the config or pass --out"))?;
    let report = run_audit(&cfg)?;
    emit_report(&report, &dir, EmitFormat::Json)?;
    emit_report(&report, &dir, EmitFormat::Csv)?;
    summarize(&report);
    println!("report written to {}", dir.display());
    Ok(())
}

fn report(input: PathBuf, format: EmitFormat, out: Option<PathBuf>) -> Result<(), Failure> {
    let path = input.join("report.json");
    let report = read_report(&path)?;
    let dir = out.unwrap_or(input);
    for file in emit_report(&report, &dir, format)? {
        println!("{}", file.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth {
            profile,
            n,
            seed,
            out,
            tolerance,
        } => synth(profile, n, seed, out, tolerance),
        Command::Audit { config, out } => audit(config, out),
        Command::Report { input, format, out } => report(input, format, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
