//! `symbell` command-line front end.

use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

mod commands;
mod output;
mod parse;

use output::{Format, RunRecord};
use symbell::Error;

#[derive(Parser)]
#[command(
    name = "symbell",
    version,
    about = "Bell nonlocality of permutation-symmetric multiqubit states"
)]
struct Cli {
    /// Emit a JSON run record.
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,

    /// Emit CSV.
    #[arg(long, global = true)]
    csv: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dicke coefficients, Majorana points and entanglement of a state.
    State(StateArgs),
    /// Value of an expression under given settings.
    Eval(EvalArgs),
    /// Multistart maximization of an expression over measurement settings.
    Optimize(OptimizeArgs),
    /// Tabulate values over a parameter.
    #[command(subcommand)]
    Scan(ScanCommand),
    /// Exact classical or grouped-classical bound of an expression.
    Lhv(LhvArgs),
    /// Nonsignaling extension audits and monogamy sums.
    #[command(subcommand)]
    Monogamy(MonogamyCommand),
    /// Compare an observed value with stored class bounds.
    Classify(ClassifyArgs),
}

#[derive(Args, Serialize)]
pub struct StateArgs {
    /// `dicke:N,K`, `w:N`, `ghz:N`, `tetra`, `000+`, `zzz_theta:T` or
    /// `raw:c0,c1,...` with complex entries written `re+imi`.
    pub spec: String,
    /// Include the Majorana points.
    #[arg(long)]
    pub majorana: bool,
    /// Include the degeneracy profile.
    #[arg(long)]
    pub degeneracy: bool,
    /// Include the geometric measure of entanglement.
    #[arg(long)]
    pub geometric: bool,
}

#[derive(Args, Serialize, Clone)]
pub struct OptArgs {
    /// Restrict every party to the same pair of bases.
    #[arg(long)]
    pub symmetric: bool,
    /// Random starts besides the deterministic seeds.
    #[arg(long, default_value_t = 64)]
    pub starts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Iteration budget per start.
    #[arg(long, default_value_t = 2000)]
    pub max_iters: usize,
}

#[derive(Args, Serialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub state: String,
    /// `P`, `Q:d`, `L:k`, `L`, `Pprime` or `Qprime:d`.
    #[arg(long, default_value = "P")]
    pub expr: String,
    /// `prescribe`, `analytic`, `sigma`, `optimize` or
    /// `angles:t0,p0,t1,p1[;...]` in radians (one group per party or one
    /// shared group).
    #[arg(long, default_value = "prescribe")]
    pub settings: String,
    #[command(flatten)]
    pub opt: OptArgs,
}

#[derive(Args, Serialize)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub state: String,
    #[arg(long, default_value = "P")]
    pub expr: String,
    /// Report every start, not just the best.
    #[arg(long)]
    pub all_starts: bool,
    #[command(flatten)]
    pub opt: OptArgs,
}

#[derive(Subcommand)]
pub enum ScanCommand {
    /// Optimized values on `zzz_theta` as theta runs over a grid.
    Theta(ScanThetaArgs),
    /// Values along a state family as the number of parties grows.
    N(ScanNArgs),
}

#[derive(Args, Serialize)]
pub struct ScanThetaArgs {
    /// Expressions to evaluate at each point; repeatable.
    #[arg(long, default_values_t = vec!["P".to_string()])]
    pub expr: Vec<String>,
    #[arg(long, default_value_t = 0.0)]
    pub from: f64,
    #[arg(long, default_value_t = std::f64::consts::PI)]
    pub to: f64,
    #[arg(long, default_value_t = 21)]
    pub steps: usize,
    #[command(flatten)]
    pub opt: OptArgs,
}

#[derive(Args, Serialize)]
pub struct ScanNArgs {
    /// `w`, `ghz`, `dicke:k=K` or `dicke:k=n/2`.
    #[arg(long)]
    pub state: String,
    #[arg(long, default_value = "P")]
    pub expr: String,
    /// `prescribe`, `analytic`, `sigma` or `optimize`.
    #[arg(long, default_value = "analytic")]
    pub settings: String,
    /// Inclusive range of party numbers, e.g. `3..8`.
    #[arg(long)]
    pub n: String,
    #[command(flatten)]
    pub opt: OptArgs,
}

#[derive(Args, Serialize)]
pub struct LhvArgs {
    #[arg(long, default_value = "P")]
    pub expr: String,
    #[arg(long)]
    pub n: usize,
    /// Partition into blocks, e.g. `0,1|2|3`; parties within a block may
    /// coordinate their outcomes.
    #[arg(long)]
    pub groups: Option<String>,
}

#[derive(Subcommand)]
pub enum MonogamyCommand {
    /// Largest correlation an extra party can hold with a box.
    Audit(AuditArgs),
    /// Nonsignaling maximum of a monogamy sum.
    Sum(SumArgs),
}

#[derive(Args, Serialize)]
pub struct AuditArgs {
    /// `pr`, `pr:V` (PR box mixed with white noise, visibility V),
    /// `shared`, `uniform:N`, or a path to a JSON file `{"n":..,"table":[..]}`.
    #[arg(long = "box")]
    pub box_spec: String,
}

#[derive(Args, Serialize)]
pub struct SumArgs {
    #[arg(long)]
    pub n: usize,
    /// Size of the shared block.
    #[arg(long)]
    pub k: usize,
    /// Use `Q(n,d)` copies instead of `P^n`.
    #[arg(long)]
    pub d: Option<usize>,
    /// Number of copies (default n - k + 2).
    #[arg(long)]
    pub copies: Option<usize>,
}

#[derive(Args, Serialize)]
pub struct ClassifyArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub value: f64,
    /// `P4` or `Q43`.
    #[arg(long)]
    pub test: String,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::State(_) => "state",
            Command::Eval(_) => "eval",
            Command::Optimize(_) => "optimize",
            Command::Scan(ScanCommand::Theta(_)) => "scan theta",
            Command::Scan(ScanCommand::N(_)) => "scan n",
            Command::Lhv(_) => "lhv",
            Command::Monogamy(MonogamyCommand::Audit(_)) => "monogamy audit",
            Command::Monogamy(MonogamyCommand::Sum(_)) => "monogamy sum",
            Command::Classify(_) => "classify",
        }
    }

    /// Seed of commands whose results depend on one.
    fn seed(&self) -> Option<u64> {
        match self {
            Command::Eval(a) if a.settings.trim().eq_ignore_ascii_case("optimize") => {
                Some(a.opt.seed)
            }
            Command::Optimize(a) => Some(a.opt.seed),
            Command::Scan(ScanCommand::Theta(a)) => Some(a.opt.seed),
            Command::Scan(ScanCommand::N(a))
                if a.settings.trim().eq_ignore_ascii_case("optimize") =>
            {
                Some(a.opt.seed)
            }
            _ => None,
        }
    }

    fn params(&self) -> serde_json::Value {
        let v = match self {
            Command::State(a) => serde_json::to_value(a),
            Command::Eval(a) => serde_json::to_value(a),
            Command::Optimize(a) => serde_json::to_value(a),
            Command::Scan(ScanCommand::Theta(a)) => serde_json::to_value(a),
            Command::Scan(ScanCommand::N(a)) => serde_json::to_value(a),
            Command::Lhv(a) => serde_json::to_value(a),
            Command::Monogamy(MonogamyCommand::Audit(a)) => serde_json::to_value(a),
            Command::Monogamy(MonogamyCommand::Sum(a)) => serde_json::to_value(a),
            Command::Classify(a) => serde_json::to_value(a),
        };
        v.unwrap_or(serde_json::Value::Null)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Numerical(_) | Error::Infeasible | Error::Unbounded | Error::ZeroProjection => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let format = if cli.json {
        Format::Json
    } else if cli.csv {
        Format::Csv
    } else {
        Format::Text
    };
    let start = Instant::now();
    let report = match commands::run(&cli.command) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let record = RunRecord {
        command: cli.command.name().to_string(),
        params: cli.command.params(),
        seed: cli.command.seed(),
        results: report.results,
        timing: start.elapsed().as_secs_f64(),
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    if let Err(e) = output::emit(format, &record, &report.table, &report.text) {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    ExitCode::SUCCESS
}
