//! Reading run directories back and summarizing them.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};

use crate::output::{fmt_f64, render_verdicts, SUMMARY_CSV, VERDICTS_CSV};

/// Summary keys whose refinement behavior is reported.
pub const ERROR_METRICS: [&str; 4] = ["l1_error", "burgers_error", "gap_m0", "gap_m1"];

/// Artifacts of one completed run directory.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredRun {
    pub dir: PathBuf,
    pub summary: Vec<(String, String)>,
    /// `(check, measured, tolerance, pass)`.
    pub verdicts: Vec<(String, f64, f64, bool)>,
}

impl StoredRun {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.summary
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn number(&self, key: &str) -> Option<f64> {
        self.get(key).and_then(|v| v.parse().ok())
    }

    pub fn passed(&self) -> bool {
        self.get("status") == Some("completed") && self.verdicts.iter().all(|v| v.3)
    }
}

fn read_records(path: &Path) -> Result<Vec<csv::StringRecord>> {
    let mut r =
        csv::Reader::from_path(path).with_context(|| format!("cannot read {}", path.display()))?;
    r.records()
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("corrupt {}", path.display()))
}

fn parse_f64(s: &str, path: &Path) -> Result<f64> {
    s.parse()
        .map_err(|_| anyhow!("corrupt {}: `{s}` is not a number", path.display()))
}

/// Loads the summary and verdicts of a run directory.
pub fn load_run(dir: &Path) -> Result<StoredRun> {
    let spath = dir.join(SUMMARY_CSV);
    let mut summary = Vec::new();
    for rec in read_records(&spath)? {
        if rec.len() != 2 {
            bail!("corrupt {}: expected 2 columns", spath.display());
        }
        summary.push((rec[0].to_string(), rec[1].to_string()));
    }
    let vpath = dir.join(VERDICTS_CSV);
    let mut verdicts = Vec::new();
    for rec in read_records(&vpath)? {
        if rec.len() != 4 {
            bail!("corrupt {}: expected 4 columns", vpath.display());
        }
        let pass = match &rec[3] {
            "true" => true,
            "false" => false,
            other => bail!("corrupt {}: pass column `{other}`", vpath.display()),
        };
        verdicts.push((
            rec[0].to_string(),
            parse_f64(&rec[1], &vpath)?,
            parse_f64(&rec[2], &vpath)?,
            pass,
        ));
    }
    Ok(StoredRun {
        dir: dir.to_path_buf(),
        summary,
        verdicts,
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return None;
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Result of `report <dir>`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportOutcome {
    pub text: String,
    pub runs: Vec<StoredRun>,
    /// `(metric, observed order)` for a refinement family.
    pub slopes: Vec<(String, f64)>,
}

impl ReportOutcome {
    pub fn passed(&self) -> bool {
        self.runs.iter().all(|r| r.passed())
    }
}

/// Summarizes a single run directory, or a directory of runs forming a
/// refinement family.
pub fn report(dir: &Path) -> Result<ReportOutcome> {
    if !dir.is_dir() {
        bail!("{} is not a directory", dir.display());
    }
    if dir.join(SUMMARY_CSV).exists() {
        let run = load_run(dir)?;
        let mut text = String::new();
        let _ = writeln!(
            text,
            "run {} ({})",
            run.get("name").unwrap_or("?"),
            run.get("kind").unwrap_or("?")
        );
        text.push_str(&render_verdicts(&run.verdicts));
        let _ = writeln!(
            text,
            "overall: {}",
            if run.passed() { "PASS" } else { "FAIL" }
        );
        return Ok(ReportOutcome {
            text,
            runs: vec![run],
            slopes: Vec::new(),
        });
    }
    let mut subdirs: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("cannot list {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join(SUMMARY_CSV).exists())
        .collect();
    subdirs.sort();
    if subdirs.is_empty() {
        bail!("{} contains no run artifacts", dir.display());
    }
    let mut runs = subdirs
        .iter()
        .map(|d| load_run(d))
        .collect::<Result<Vec<_>>>()?;
    runs.sort_by(|a, b| {
        let (x, y) = (
            a.number("dx").unwrap_or(f64::NAN),
            b.number("dx").unwrap_or(f64::NAN),
        );
        y.total_cmp(&x).then_with(|| a.dir.cmp(&b.dir))
    });

    let mut text = String::new();
    let _ = writeln!(
        text,
        "refinement family of {} runs in {}",
        runs.len(),
        dir.display()
    );
    let mut slopes = Vec::new();
    for metric in ERROR_METRICS {
        let points: Vec<(f64, f64)> = runs
            .iter()
            .filter_map(|r| Some((r.number("dx")?, r.number(metric)?)))
            .collect();
        if points.len() != runs.len() || points.len() < 2 {
            continue;
        }
        let _ = writeln!(text, "\n{metric}:");
        let _ = writeln!(text, "  {:>24}  {:>24}", "dx", metric);
        for (dx, e) in &points {
            let _ = writeln!(text, "  {:>24}  {:>24}", fmt_f64(*dx), fmt_f64(*e));
        }
        match log_log_slope(&points) {
            Some(s) => {
                let _ = writeln!(text, "  observed order: {s:.4}");
                slopes.push((metric.to_string(), s));
            }
            None => {
                let _ = writeln!(text, "  observed order: undefined (nonpositive values)");
            }
        }
    }
    for run in &runs {
        let _ = writeln!(text, "\n{}", run.dir.display());
        text.push_str(&render_verdicts(&run.verdicts));
    }
    let outcome = ReportOutcome { text, runs, slopes };
    let overall = if outcome.passed() { "PASS" } else { "FAIL" };
    let mut outcome = outcome;
    let _ = writeln!(outcome.text, "\noverall: {overall}");
    Ok(outcome)
}
