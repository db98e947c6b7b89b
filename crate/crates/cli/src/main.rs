use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use coop_core::corpus::CORPUS;
use coop_core::engine::Interleaving;
use coop_core::{expect_check, parse, render, run, Scenario, StatementError, TramPolicy};

const OK: u8 = 0;
const ASSERTION_FAILED: u8 = 1;
const USAGE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "coop",
    version,
    about = "Run and check directional trust scenarios"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and print its trace.
    Run {
        path: PathBuf,
        /// Write the trace to this file instead of stdout.
        #[arg(long, value_name = "PATH")]
        trace: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run a scenario and evaluate its expectations.
    Check {
        path: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Print the canonical form of a statement.
    Parse { statement: String },
    /// Print the bundled statement corpus, one per line.
    Corpus,
}

#[derive(Args)]
struct Overrides {
    #[arg(long, value_enum)]
    tram: Option<Tram>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    interleave: Option<Interleave>,
    /// Suppress normal output; the exit code carries the result.
    #[arg(long)]
    quiet: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Tram {
    Incremental,
    #[value(alias = "recency-history")]
    Recency,
}

#[derive(Clone, Copy, ValueEnum)]
enum Interleave {
    FileOrder,
    RoundRobin,
}

impl Overrides {
    fn apply(&self, scenario: &mut Scenario) {
        let policy = &mut scenario.policy;
        if let Some(tram) = self.tram {
            policy.tram = match tram {
                Tram::Incremental => TramPolicy::Incremental,
                Tram::Recency => TramPolicy::RecencyHistory,
            };
        }
        if let Some(seed) = self.seed {
            policy.seed = seed;
        }
        if let Some(interleave) = self.interleave {
            policy.interleave = match interleave {
                Interleave::FileOrder => Interleaving::FileOrder,
                Interleave::RoundRobin => Interleaving::RoundRobin,
            };
        }
    }
}

fn load(path: &Path, overrides: &Overrides) -> Result<Scenario, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut scenario = Scenario::load(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    overrides.apply(&mut scenario);
    Ok(scenario)
}

fn run_command(
    path: &Path,
    trace_path: Option<&Path>,
    overrides: &Overrides,
) -> Result<u8, String> {
    let scenario = load(path, overrides)?;
    let trace = run(&scenario).render();
    match trace_path {
        Some(out) => std::fs::write(out, &trace).map_err(|e| format!("{}: {e}", out.display()))?,
        None if !overrides.quiet => print!("{trace}"),
        None => {}
    }
    Ok(OK)
}

fn check_command(path: &Path, overrides: &Overrides) -> Result<u8, String> {
    let scenario = load(path, overrides)?;
    let trace = run(&scenario);
    let report = expect_check(&scenario, &trace).map_err(|e| format!("{}: {e}", path.display()))?;
    if !overrides.quiet {
        println!("{report}");
    }
    Ok(if report.all_passed() {
        OK
    } else {
        ASSERTION_FAILED
    })
}

/// Renders a parse error with a caret under the offending column.
fn describe(text: &str, err: &StatementError) -> String {
    match err {
        StatementError::Syntax { column, .. } => {
            let pad = " ".repeat(column.saturating_sub(1));
            format!("{err}\n  {text}\n  {pad}^")
        }
        _ => err.to_string(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run {
            path,
            trace,
            overrides,
        } => run_command(path, trace.as_deref(), overrides),
        Command::Check { path, overrides } => check_command(path, overrides),
        Command::Parse { statement } => match parse(statement) {
            Ok(s) => {
                println!("{}", render(&s));
                Ok(OK)
            }
            Err(e) => Err(describe(statement, &e)),
        },
        Command::Corpus => {
            for entry in CORPUS {
                println!("{}", entry.text);
            }
            Ok(OK)
        }
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(USAGE)
        }
    }
}
