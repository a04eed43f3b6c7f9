//! `kinclosure` command line: run, validate and report scenarios.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kinclosure_cli::output::{render_report, resolve_output_dir, write_run};
use kinclosure_cli::report::report;
use kinclosure_cli::runner::run;
use kinclosure_cli::scenario::parse_scenario;

#[derive(Parser)]
#[command(
    name = "kinclosure",
    version,
    about = "Kinetic transport, moment closures and 2T radiation hydrodynamics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its CSV artifacts and report.
    Run {
        scenario: PathBuf,
        /// Output directory (overrides KINCLOSURE_OUTPUT_DIR and the scenario file).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a scenario file and list every problem found.
    Validate { scenario: PathBuf },
    /// Summarize a run directory or a refinement family of runs.
    Report { dir: PathBuf },
}

/// Exit codes: 0 all verdicts pass, 1 some verdict fails, 2 usage or solver error.
fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { scenario } => match parse_scenario(&scenario) {
            Ok(s) => {
                println!(
                    "{}: valid {} scenario `{}`",
                    scenario.display(),
                    s.kind,
                    s.name
                );
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprint!("{e}");
                ExitCode::from(2)
            }
        },
        Command::Run { scenario, output } => {
            let s = match parse_scenario(&scenario) {
                Ok(s) => s,
                Err(e) => {
                    eprint!("{e}");
                    return ExitCode::from(2);
                }
            };
            let dir = resolve_output_dir(output.as_deref(), &s);
            let r = run(&s);
            if let Err(e) = write_run(&r, &dir, s.output.fields) {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
            print!("{}", render_report(&r));
            println!("artifacts: {}", dir.display());
            if let Some(f) = &r.failure {
                eprintln!(
                    "error: solver aborted at step {} (t = {:e}): {}",
                    f.step, f.time, f.message
                );
                ExitCode::from(2)
            } else if r.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Command::Report { dir } => match report(&dir) {
            Ok(o) => {
                print!("{}", o.text);
                if o.passed() {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                }
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(2)
            }
        },
    }
}
