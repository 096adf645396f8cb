//! `gwlab <experiment> --config <path> [--seed N] [--replicas K] [--out DIR] [--assert] [--refresh-fixtures]`
//! and `gwlab summarize <csv>... [--fit X Y]`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use gwlab::harness::{
    error_exit_code, exit_code, run_and_write, summarize, Experiment, ExperimentConfig, RunOptions,
    Verdict,
};

#[derive(Parser, Debug)]
#[command(
    name = "gwlab",
    version,
    about = "Seeded experiments for biased walks on Galton-Watson trees"
)]
struct Cli {
    /// Experiment name, or `summarize`.
    command: String,
    /// CSV files to aggregate (`summarize` only).
    inputs: Vec<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicas: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 1 if any acceptance verdict fails.
    #[arg(long = "assert")]
    assert_verdicts: bool,
    #[arg(long)]
    refresh_fixtures: bool,
    /// Regressor and response columns for the least-squares fit (`summarize` only).
    #[arg(long, num_args = 2, value_names = ["X", "Y"])]
    fit: Option<Vec<String>>,
}

fn fail(code: i32, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("gwlab: {msg}");
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.command == "summarize" {
        let fit = cli.fit.as_ref().map(|v| (v[0].as_str(), v[1].as_str()));
        return match summarize(&cli.inputs, fit) {
            Ok(s) => {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&s).expect("serializable")
                );
                ExitCode::SUCCESS
            }
            Err(e) => fail(error_exit_code(&e), e),
        };
    }
    let exp: Experiment = match cli.command.parse() {
        Ok(e) => e,
        Err(e) => return fail(exit_code::UNKNOWN_EXPERIMENT, e),
    };
    if !cli.inputs.is_empty() {
        return fail(exit_code::CONFIG, "unexpected positional arguments");
    }
    let mut cfg = match &cli.config {
        Some(p) => match ExperimentConfig::from_file(p) {
            Ok(c) => c,
            Err(e) => return fail(exit_code::CONFIG, e),
        },
        None => ExperimentConfig::default(),
    };
    let overrides = [
        ("seed", cli.seed.map(|s| s.to_string())),
        ("replicas", cli.replicas.map(|r| r.to_string())),
        ("out", cli.out.as_ref().map(|p| p.display().to_string())),
    ];
    for (k, v) in overrides {
        if let Some(v) = v {
            if let Err(e) = cfg.set(k, &v) {
                return fail(exit_code::CONFIG, e);
            }
        }
    }
    let opts = RunOptions {
        refresh_fixtures: cli.refresh_fixtures,
    };
    match run_and_write(exp, &cfg, &opts) {
        Ok((outcome, paths)) => {
            for p in &paths {
                println!("wrote {}", p.display());
            }
            for (k, v) in &outcome.verdicts {
                let v = match v {
                    Verdict::Pass => "pass",
                    Verdict::Fail => "FAIL",
                    Verdict::Informational => "informational",
                };
                println!("{exp} {k}: {v}");
            }
            if cli.assert_verdicts && !outcome.passed() {
                return fail(exit_code::ASSERT_FAILED, "acceptance verdicts failed");
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(error_exit_code(&e), e),
    }
}
