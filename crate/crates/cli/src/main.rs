//! `csp3`: command-line verifier and reducer for the Z3 CSP toolkit.
//!
//! Exit codes: 0 on success, 1 when a verification suite reports a
//! failing check, 2 on argument errors (from the parser), 3 when a
//! request exceeds an enumeration capacity, 4 when inputs break the
//! contract (wrong artifact kind, malformed JSON, shape mismatches).

mod demo;
mod reduce;
mod suites;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use csp3::Error;

#[derive(Parser)]
#[command(
    name = "csp3",
    version,
    about = "Verifier and reducer for CSP hardness machinery over Z3"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite and print its JSON report.
    Verify(VerifyArgs),
    /// Apply a gadget or pipeline reduction to an instance file.
    Reduce(ReduceArgs),
    /// Build a small label cover demo, decode tables, print the result.
    DemoDecode(DemoDecodeArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteName {
    Gadgets,
    Tests,
    Fourier,
    Appendix,
    All,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Which checks to run.
    #[arg(long, value_enum, default_value_t = SuiteName::All)]
    suite: SuiteName,
    /// Small-side arity of the test distributions.
    #[arg(long = "K", default_value_t = 2)]
    k: usize,
    /// Projection degree (large side arity is K * d).
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Random table pairs per randomized check.
    #[arg(long, default_value_t = 25)]
    trials: usize,
    /// Seed of the single RNG stream used by randomized checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Slack tolerance for floating point comparisons.
    #[arg(long, default_value_t = csp3::soundness::SLACK_TOLERANCE)]
    tolerance: f64,
    /// Also write the report to this file (CSP3_OUT_DIR joins relative paths).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Pretty-print the JSON report.
    #[arg(long)]
    pretty: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChainName {
    /// Expand each four-variable constraint into two-disequation constraints.
    #[value(name = "4nat-to-2nlin")]
    FourNatToTwoNLin,
    /// Expand each two-disequation constraint into projection constraints.
    #[value(name = "2nlin-to-labelcover")]
    TwoNLinToLabelCover,
    /// The composition of the two gadgets above.
    #[value(name = "4nat-to-labelcover")]
    FourNatToLabelCover,
    /// Expand a label cover instance into a four-variable CSP over orbit
    /// variables of folded long-code tables.
    #[value(name = "longcode-4nat")]
    Longcode4Nat,
}

#[derive(Args)]
pub struct ReduceArgs {
    /// Reduction to apply.
    #[arg(long, value_enum)]
    chain: ChainName,
    /// Input artifact: a CSP instance, or a label cover instance for
    /// longcode-4nat.
    #[arg(long = "in")]
    input: PathBuf,
    /// Output file for the produced artifact; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Pretty-print the artifact.
    #[arg(long)]
    pretty: bool,
    /// Optional completeness threshold to transport through the gadget.
    #[arg(long)]
    completeness: Option<String>,
    /// Optional soundness threshold to transport through the gadget.
    #[arg(long)]
    soundness: Option<String>,
}

#[derive(Args)]
pub struct DemoDecodeArgs {
    /// Small-side arity.
    #[arg(long = "K", default_value_t = 2)]
    k: usize,
    /// Projection degree.
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Seed for the demo instance and the decoding samples.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Optional table file `{"f": [..], "g": [..]}` broadcast to all
    /// vertices; dictator tables of the planted labeling when omitted.
    #[arg(long = "in")]
    tables: Option<PathBuf>,
    /// Optional label cover instance file; a random satisfiable demo
    /// when omitted.
    #[arg(long)]
    labelcover: Option<PathBuf>,
    /// Also write the report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Pretty-print the JSON report.
    #[arg(long)]
    pretty: bool,
}

/// Joins a relative output path onto `CSP3_OUT_DIR` when that is set.
pub fn resolve_out(path: &Path) -> PathBuf {
    if path.is_relative() {
        if let Ok(dir) = std::env::var("CSP3_OUT_DIR") {
            if !dir.is_empty() {
                return PathBuf::from(dir).join(path);
            }
        }
    }
    path.to_path_buf()
}

pub fn write_artifact(path: Option<&Path>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => {
            let target = resolve_out(p);
            std::fs::write(&target, text)
                .map_err(|e| Error::Invalid(format!("cannot write {}: {e}", target.display())))
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

pub fn read_input(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))
}

fn error_exit(err: &Error) -> u8 {
    match err {
        Error::Capacity { .. } | Error::SearchSpace { .. } => 3,
        _ => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Verify(args) => suites::run(&args),
        Command::Reduce(args) => reduce::run(&args),
        Command::DemoDecode(args) => demo::run(&args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(error_exit(&err))
        }
    }
}
