//! `choquet`: scenario driver and verification suites.

mod exec;
mod report;
mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use choquet_core::ordering::DEFAULT_ENUMERATION_CAP;
use choquet_core::suites::{run_suite, SuiteConfig, SUITES};
use choquet_core::Space;
use clap::{Args, Parser, Subcommand};

use exec::Settings;
use report::{Entry, Report};
use scenario::Scenario;

#[derive(Parser)]
#[command(
    name = "choquet",
    version,
    about = "Run scenarios and verification suites"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Execute the commands of a scenario file.
    Run {
        scenario: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Run one verification suite, or `all` of them.
    Verify {
        suite: String,
        /// JSON space description restricting the suite to that space.
        #[arg(long)]
        space: Option<PathBuf>,
        #[command(flatten)]
        opts: Opts,
    },
}

#[derive(Args)]
struct Opts {
    /// Also write the report as JSON to this path.
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Trial count for verification suites.
    #[arg(long)]
    trials: Option<usize>,
    /// Geometric tolerance of the space.
    #[arg(long)]
    tol: Option<f64>,
    /// Cap on enumerated minimal measures.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    cap: usize,
}

impl Opts {
    fn settings(&self) -> Settings {
        Settings {
            seed: self.seed,
            trials: self.trials,
            cap: self.cap,
        }
    }
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn run(path: &Path, opts: &Opts) -> Result<Report, String> {
    let scenario = Scenario::parse(&read(path)?, opts.tol)?;
    Ok(Report::new(
        opts.seed,
        exec::run(&scenario, &opts.settings()),
    ))
}

fn verify(suite: &str, space: Option<&Path>, opts: &Opts) -> Result<Report, String> {
    let names: Vec<&str> = match suite {
        "all" => SUITES.to_vec(),
        s if SUITES.contains(&s) => vec![s],
        s => {
            return Err(format!(
                "unknown suite `{s}`; expected one of {} or all",
                SUITES.join(", ")
            ))
        }
    };
    let space = match space {
        Some(p) => {
            let s: Space =
                serde_json::from_str(&read(p)?).map_err(|e| format!("{}: {e}", p.display()))?;
            Some(match opts.tol {
                Some(t) => s.retolerance(t).map_err(|e| format!("--tol: {e}"))?,
                None => s,
            })
        }
        None => None,
    };
    let cfg = SuiteConfig {
        seed: opts.seed,
        trials: opts.trials,
        space,
        cap: opts.cap,
    };
    let entries = names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let r = run_suite(name, &cfg).map_err(|e| format!("{name}: {e}"))?;
            let (status, summary, result) = exec::suite_outcome(&r);
            Ok(Entry {
                index: i,
                op: format!("verify {name}"),
                anchor: r.anchor.clone(),
                status,
                summary,
                result,
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok(Report::new(opts.seed, entries))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (outcome, opts) = match &cli.command {
        Cmd::Run { scenario, opts } => (run(scenario, opts), opts),
        Cmd::Verify { suite, space, opts } => (verify(suite, space.as_deref(), opts), opts),
    };
    let report = match outcome {
        Ok(r) => r,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    print!("{}", report.text());
    if let Some(path) = &opts.json {
        if let Err(e) = std::fs::write(path, report.json()) {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    ExitCode::from(report.exit_code())
}
