//! CSV and plain-text artifacts of a run.
//!
//! Every CSV has a header row. Floating-point values are written with 17
//! significant digits (`{:.16e}`), which round-trips `f64` exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use crate::runner::{RunReport, Table};
use crate::scenario::Scenario;

/// Environment variable that overrides the output directory.
pub const OUTPUT_DIR_ENV: &str = "KINCLOSURE_OUTPUT_DIR";

pub const DIAGNOSTICS_CSV: &str = "diagnostics.csv";
pub const FIELDS_CSV: &str = "fields.csv";
pub const VERDICTS_CSV: &str = "verdicts.csv";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const REPORT_TXT: &str = "report.txt";

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Output directory: explicit flag, then the environment, then the
/// scenario's `output.directory`, then `runs/<name>`.
pub fn resolve_output_dir(flag: Option<&Path>, scenario: &Scenario) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(p) = std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(p);
    }
    match &scenario.output.directory {
        Some(d) => PathBuf::from(d),
        None => Path::new("runs").join(&scenario.name),
    }
}

fn write_table(
    path: &Path,
    header: &[String],
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

fn write_numeric(path: &Path, table: &Table) -> Result<()> {
    write_table(
        path,
        &table.header,
        table
            .rows
            .iter()
            .map(|r| r.iter().map(|v| fmt_f64(*v)).collect()),
    )
}

/// Writes all artifacts of `report` into `dir`, creating it if needed.
pub fn write_run(report: &RunReport, dir: &Path, fields: bool) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;

    let mut header = vec!["step".to_string(), "time".to_string()];
    header.extend(report.diagnostics_header.iter().cloned());
    let rows = report.diagnostics.iter().map(|r| {
        let mut v = vec![r.step.to_string(), fmt_f64(r.time)];
        v.extend(r.values.iter().map(|x| fmt_f64(*x)));
        v
    });
    write_table(&dir.join(DIAGNOSTICS_CSV), &header, rows)?;

    if fields {
        write_numeric(&dir.join(FIELDS_CSV), &report.fields)?;
    }

    let header: Vec<String> = ["check", "measured", "tolerance", "pass"]
        .map(String::from)
        .to_vec();
    let rows = report.verdicts.iter().map(|v| {
        vec![
            v.check.clone(),
            fmt_f64(v.measured),
            fmt_f64(v.tolerance),
            v.pass.to_string(),
        ]
    });
    write_table(&dir.join(VERDICTS_CSV), &header, rows)?;

    let header: Vec<String> = ["key", "value"].map(String::from).to_vec();
    write_table(
        &dir.join(SUMMARY_CSV),
        &header,
        report
            .summary
            .iter()
            .map(|(k, v)| vec![k.clone(), v.clone()]),
    )?;

    fs::write(dir.join(REPORT_TXT), render_report(report))?;
    Ok(())
}

/// Plain-text verdict table.
pub fn render_verdicts(verdicts: &[(String, f64, f64, bool)]) -> String {
    let mut out = String::new();
    let width = verdicts.iter().map(|v| v.0.len()).max().unwrap_or(5).max(5);
    let _ = writeln!(
        out,
        "{:<width$}  {:>24}  {:>24}  result",
        "check", "measured", "tolerance"
    );
    for (check, measured, tol, pass) in verdicts {
        let _ = writeln!(
            out,
            "{check:<width$}  {:>24}  {:>24}  {}",
            fmt_f64(*measured),
            fmt_f64(*tol),
            if *pass { "PASS" } else { "FAIL" }
        );
    }
    out
}

/// Human-readable summary of one run.
pub fn render_report(report: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "run {} ({})", report.name, report.kind);
    for (k, v) in &report.summary {
        if k != "name" && k != "kind" {
            let _ = writeln!(out, "  {k}: {v}");
        }
    }
    out.push('\n');
    let v: Vec<_> = report
        .verdicts
        .iter()
        .map(|v| (v.check.clone(), v.measured, v.tolerance, v.pass))
        .collect();
    out.push_str(&render_verdicts(&v));
    let _ = writeln!(
        out,
        "\noverall: {}",
        if report.passed() { "PASS" } else { "FAIL" }
    );
    out
}
