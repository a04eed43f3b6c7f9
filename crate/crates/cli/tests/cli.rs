//! Scenario parsing, run artifacts and the command-line verbs.

use std::fs;
use std::path::Path;
use std::process::Command;

use kinclosure::Scheme;
use kinclosure_cli::output::{write_run, OUTPUT_DIR_ENV};
use kinclosure_cli::report::{log_log_slope, report};
use kinclosure_cli::runner::run;
use kinclosure_cli::scenario::{parse_scenario_str, Kind, TimeStep};

const MINIMAL_KINETIC: &str = r#"
schema_version = 1
kind = "kinetic"

[grid]
x = [{ cells = 16, lo = 0.0, hi = 1.0 }]
p = [{ cells = 8, lo = -1.0, hi = 1.0 }]

[hamiltonian]
type = "non_relativistic"
mass = 1.0

[initial]
density = { profile = "sine", mean = 1.0, amplitude = 0.5 }
p_profile = { profile = "gaussian", amplitude = 1.0, center = [0.0], width = 0.3 }

[time]
t_end = 0.2
"#;

fn free_streaming(cells: usize) -> String {
    format!(
        r#"
schema_version = 1
kind = "kinetic"
name = "fs{cells}"

[grid]
x = [{{ cells = {cells}, lo = 0.0, hi = 1.0 }}]
p = [{{ cells = 8, lo = -1.0, hi = 1.0 }}]

[hamiltonian]
type = "radiation"
c = 1.0

[initial]
density = {{ profile = "sine", mean = 1.0, amplitude = 0.5 }}
p_profile = {{ profile = "uniform", value = 1.0 }}

[time]
t_end = 0.25

[checks]
l1_error = 1.0
"#
    )
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kinclosure"))
}

fn write_scenario(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn minimal_kinetic_scenario_gets_defaults() {
    let s = parse_scenario_str(MINIMAL_KINETIC, "minimal").unwrap();
    assert_eq!(s.kind, Kind::Kinetic);
    assert_eq!(s.name, "minimal");
    assert_eq!(s.time.step, TimeStep::Cfl(0.5));
    assert_eq!(s.time.scheme, Scheme::Rk2);
    assert_eq!(s.output.cadence, 10);
    assert_eq!(s.checks, vec![("mass_conservation".to_string(), 1e-12)]);
}

#[test]
fn negative_mass_names_field_and_constraint() {
    let text = MINIMAL_KINETIC.replace("mass = 1.0", "mass = -1.0");
    let err = parse_scenario_str(&text, "x").unwrap_err();
    assert!(
        err.errors
            .iter()
            .any(|e| e.contains("hamiltonian.mass") && e.contains("positive")),
        "{err}"
    );
}

#[test]
fn dt_and_cfl_are_exclusive() {
    let text = MINIMAL_KINETIC.replace("t_end = 0.2", "t_end = 0.2\ndt = 0.01\ncfl = 0.4");
    let err = parse_scenario_str(&text, "x").unwrap_err();
    assert!(
        err.errors.iter().any(|e| e.contains("mutually exclusive")),
        "{err}"
    );
}

#[test]
fn every_validation_error_is_reported() {
    let text = MINIMAL_KINETIC
        .replace("mass = 1.0", "mass = 0.0")
        .replace("profile = \"sine\"", "profile = \"triangle\"")
        .replace("t_end = 0.2", "t_end = -1.0\ncfl = 2.0");
    let err = parse_scenario_str(&text, "x").unwrap_err();
    assert!(err.errors.len() >= 4, "{err}");
    assert!(err
        .errors
        .iter()
        .any(|e| e.contains("unknown profile `triangle`")));
    assert!(err.errors.iter().any(|e| e.contains("time.t_end")));
    assert!(err.errors.iter().any(|e| e.contains("time.cfl")));
}

#[test]
fn missing_keys_and_unknown_checks_are_rejected() {
    let text = MINIMAL_KINETIC.replace("p_profile =", "ignored_profile =");
    assert!(parse_scenario_str(&text, "x").is_err());
    let text = format!("{MINIMAL_KINETIC}\n[checks]\nburgers_error = true\n");
    let err = parse_scenario_str(&text, "x").unwrap_err();
    assert!(err.errors[0].contains("checks.burgers_error"), "{err}");
}

#[test]
fn disabled_default_check_is_dropped() {
    let text = format!(
        "{MINIMAL_KINETIC}\n[checks]\nmass_conservation = false\nenergy_conservation = 1e-3\n"
    );
    let s = parse_scenario_str(&text, "x").unwrap();
    assert_eq!(s.checks, vec![("energy_conservation".to_string(), 1e-3)]);
}

#[test]
fn radiation_grid_through_origin_is_rejected() {
    let text = free_streaming(16).replace("cells = 8", "cells = 7");
    let err = parse_scenario_str(&text, "x").unwrap_err();
    assert!(err.errors.iter().any(|e| e.contains("grid.p")), "{err}");
}

#[test]
fn reruns_are_bitwise_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let s = parse_scenario_str(MINIMAL_KINETIC, "det").unwrap();
    for name in ["a", "b"] {
        write_run(&run(&s), &tmp.path().join(name), true).unwrap();
    }
    for file in [
        "diagnostics.csv",
        "fields.csv",
        "verdicts.csv",
        "summary.csv",
        "report.txt",
    ] {
        let a = fs::read(tmp.path().join("a").join(file)).unwrap();
        let b = fs::read(tmp.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs");
    }
}

#[test]
fn diagnostics_time_column_is_monotone() {
    let s = parse_scenario_str(MINIMAL_KINETIC, "mono").unwrap();
    let r = run(&s);
    assert!(r.passed());
    assert!(r.diagnostics.windows(2).all(|w| w[1].time > w[0].time));
    assert_eq!(r.diagnostics.last().unwrap().time, 0.2);
}

#[test]
fn report_of_empty_directory_fails() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(report(tmp.path()).is_err());
    let out = bin().arg("report").arg(tmp.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn report_fits_refinement_order() {
    let tmp = tempfile::tempdir().unwrap();
    for cells in [32, 64, 128] {
        let s = parse_scenario_str(&free_streaming(cells), "x").unwrap();
        write_run(&run(&s), &tmp.path().join(format!("n{cells:04}")), false).unwrap();
    }
    let o = report(tmp.path()).unwrap();
    let (metric, slope) = &o.slopes[0];
    assert_eq!(metric, "l1_error");
    assert!(*slope > 0.7, "{slope}");
    assert!(o.text.contains("observed order"));

    let single = report(&tmp.path().join("n0032")).unwrap();
    assert!(single.slopes.is_empty());
    assert!(single.text.contains("l1_error"));
}

#[test]
fn log_log_slope_recovers_power() {
    let pts: Vec<(f64, f64)> = [0.1, 0.05, 0.025]
        .iter()
        .map(|h: &f64| (*h, 3.0 * h.powi(2)))
        .collect();
    assert!((log_log_slope(&pts).unwrap() - 2.0).abs() < 1e-12);
    assert!(log_log_slope(&[(1.0, 0.0), (0.5, 1.0)]).is_none());
}

#[test]
fn environment_overrides_output_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let scen = write_scenario(tmp.path(), "k.toml", MINIMAL_KINETIC);
    let target = tmp.path().join("from_env");
    let out = bin()
        .current_dir(tmp.path())
        .env(OUTPUT_DIR_ENV, &target)
        .arg("run")
        .arg(&scen)
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(target.join("summary.csv").exists());
    assert!(!tmp.path().join("runs").exists());
}

#[test]
fn validate_verb_reports_errors_with_exit_code() {
    let tmp = tempfile::tempdir().unwrap();
    let good = write_scenario(tmp.path(), "good.toml", MINIMAL_KINETIC);
    let bad = write_scenario(
        tmp.path(),
        "bad.toml",
        &MINIMAL_KINETIC.replace("mass = 1.0", "mass = -2.0"),
    );
    assert_eq!(
        bin()
            .arg("validate")
            .arg(&good)
            .output()
            .unwrap()
            .status
            .code(),
        Some(0)
    );
    let out = bin().arg("validate").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("hamiltonian.mass"));
}

#[test]
fn failing_verdict_exits_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let text = free_streaming(16).replace("l1_error = 1.0", "l1_error = 1e-9");
    let scen = write_scenario(tmp.path(), "fs.toml", &text);
    let out = bin()
        .arg("run")
        .arg(&scen)
        .arg("-o")
        .arg(tmp.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let verdicts = fs::read_to_string(tmp.path().join("out/verdicts.csv")).unwrap();
    assert!(verdicts.contains("l1_error") && verdicts.contains("false"));
}

#[test]
fn solver_abort_keeps_partial_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let text = MINIMAL_KINETIC.replace("t_end = 0.2", "t_end = 0.2\ndt = 0.1");
    let scen = write_scenario(tmp.path(), "k.toml", &text);
    let out = bin()
        .arg("run")
        .arg(&scen)
        .arg("-o")
        .arg(tmp.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("step 0") && stderr.contains("stability limit"),
        "{stderr}"
    );
    let summary = fs::read_to_string(tmp.path().join("out/summary.csv")).unwrap();
    assert!(summary.contains("aborted") && summary.contains("error_time"));
    let diag = fs::read_to_string(tmp.path().join("out/diagnostics.csv")).unwrap();
    assert_eq!(diag.lines().count(), 2);
}

#[test]
fn bundled_scenarios_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let mut n = 0;
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        kinclosure_cli::scenario::parse_scenario(&p)
            .unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        n += 1;
    }
    assert!(n >= 5);
}
