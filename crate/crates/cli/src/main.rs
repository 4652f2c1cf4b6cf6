mod commands;

use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use priming_core::rational::{parse_rational, Rational};
use priming_core::Error;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

#[derive(Parser)]
#[command(name = "priming", version, about = "Exact solvers for issue-priming campaign games")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct GlobalArgs {
    /// Utility function of every candidate.
    #[arg(long, global = true, value_enum, default_value_t = Utility::Frac)]
    pub utility: Utility,
    /// Victory weight V for plus and max; defaults to the number of candidates.
    #[arg(long, global = true, value_parser = rational_arg)]
    pub victory_weight: Option<Rational>,
    /// Tolerance: witness accuracy for plus, allowed gain for the grid oracle.
    #[arg(long, global = true, value_parser = rational_arg)]
    pub epsilon: Option<Rational>,
    /// Grid resolution k: allocations in multiples of W/k.
    #[arg(long, global = true, default_value_t = 10)]
    pub grid: u32,
    #[arg(long, global = true, value_enum, default_value_t = Output::Json)]
    pub output: Output,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Utility {
    Frac,
    Ind,
    Plus,
    Max,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Output {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    General,
    TwoCandidate,
    Dynamics,
}

#[derive(Subcommand)]
pub enum Command {
    /// Check an instance or compact game file.
    Validate { input: PathBuf },
    /// Aggregate voters into the compact rank form.
    Aggregate { input: PathBuf },
    /// Votes, shares and utilities of a pure or mixed profile.
    Eval {
        game: PathBuf,
        #[arg(long, conflicts_with = "mixed", required_unless_present = "mixed")]
        profile: Option<PathBuf>,
        #[arg(long)]
        mixed: Option<PathBuf>,
    },
    /// Best response of one candidate to the others' investments.
    BestResponse {
        game: PathBuf,
        /// Investments of the other candidates; the responder's entry is ignored.
        #[arg(long)]
        profile: PathBuf,
        #[arg(long)]
        candidate: String,
    },
    /// Compute an equilibrium.
    Nash {
        game: PathBuf,
        #[arg(long, value_enum, default_value_t = Algorithm::General)]
        algorithm: Algorithm,
        #[arg(long, default_value_t = 100)]
        max_rounds: usize,
        /// Starting profile for dynamics.
        #[arg(long)]
        start: Option<PathBuf>,
    },
    /// Check a profile for improving deviations.
    Verify {
        game: PathBuf,
        #[arg(long)]
        profile: PathBuf,
    },
    /// Exhaustive grid search: a best response with --candidate, a
    /// deviation check with --profile, otherwise all grid equilibria.
    Oracle {
        game: PathBuf,
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long, requires = "profile")]
        candidate: Option<String>,
        /// Maximum utility evaluations for the full equilibrium search.
        #[arg(long, env = "PRIMING_ORACLE_BUDGET")]
        budget: Option<u128>,
    },
    /// Run the bundled counterexample checks.
    Counterexamples {
        #[arg(default_value = "all")]
        name: String,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Aggregate { .. } => "aggregate",
            Command::Eval { .. } => "eval",
            Command::BestResponse { .. } => "best-response",
            Command::Nash { .. } => "nash",
            Command::Verify { .. } => "verify",
            Command::Oracle { .. } => "oracle",
            Command::Counterexamples { .. } => "counterexamples",
        }
    }
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_CONTRACT: u8 = 3;

/// Outcome of a subcommand before it is wrapped in the run report.
pub struct Outcome {
    pub result: Value,
    pub summary: String,
    pub exit_code: u8,
    /// Replaces the JSON report when `--output csv` applies.
    pub csv: Option<String>,
}

pub struct Failure {
    pub code: u8,
    pub message: String,
    pub detail: Value,
}

impl Failure {
    pub fn invalid(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INVALID,
            message: message.into(),
            detail: Value::Null,
        }
    }

    pub fn contract(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_CONTRACT,
            message: message.into(),
            detail: Value::Null,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::OracleBudgetExceeded { .. } | Error::Feasibility(_) | Error::Internal(_) => EXIT_CONTRACT,
            _ => EXIT_INVALID,
        };
        let detail = match &e {
            Error::InvalidInstance(violations) => {
                json!({"violations": violations.iter().map(ToString::to_string).collect::<Vec<_>>()})
            }
            _ => Value::Null,
        };
        Failure {
            code,
            message: e.to_string(),
            detail,
        }
    }
}

/// Reads input files, hashing every byte read into the report digest.
pub struct Inputs {
    hasher: Option<Sha256>,
    used_stdin: bool,
}

impl Inputs {
    fn new() -> Self {
        Inputs {
            hasher: None,
            used_stdin: false,
        }
    }

    pub fn read(&mut self, path: &PathBuf) -> Result<String, Failure> {
        let mut text = String::new();
        if path.as_os_str() == "-" {
            if self.used_stdin {
                return Err(Failure::invalid("stdin can be read only once"));
            }
            self.used_stdin = true;
            std::io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| Failure::invalid(format!("reading stdin: {e}")))?;
        } else {
            text = std::fs::read_to_string(path)
                .map_err(|e| Failure::invalid(format!("reading {}: {e}", path.display())))?;
        }
        self.hasher.get_or_insert_with(Sha256::new).update(text.as_bytes());
        Ok(text)
    }

    fn digest(self) -> Value {
        match self.hasher {
            Some(h) => Value::String(h.finalize().iter().map(|b| format!("{b:02x}")).collect()),
            None => Value::Null,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let subcommand = cli.command.name();
    let mut inputs = Inputs::new();
    let outcome = commands::run(&cli.command, &cli.global, &mut inputs);
    let (result, summary, exit_code, csv) = match outcome {
        Ok(o) => (o.result, o.summary, o.exit_code, o.csv),
        Err(f) => (
            json!({"error": f.message, "detail": f.detail}),
            format!("error: {}", f.message),
            f.code,
            None,
        ),
    };
    let mut stdout = std::io::stdout().lock();
    let written = match csv {
        Some(table) if cli.global.output == Output::Csv => stdout.write_all(table.as_bytes()),
        _ => {
            let report = json!({
                "subcommand": subcommand,
                "input_digest": inputs.digest(),
                "result": result,
                "summary": summary,
                "exit_code": exit_code,
            });
            writeln!(
                stdout,
                "{}",
                serde_json::to_string_pretty(&report).expect("JSON values serialize")
            )
        }
    };
    eprintln!("{summary}");
    if written.is_err() {
        return ExitCode::from(EXIT_CONTRACT);
    }
    ExitCode::from(exit_code)
}
