//! Named, seeded experiments that write CSV tables and a JSON summary.

pub mod config;
pub mod output;
pub mod summarize;

mod quenched_exps;
mod rw1d_exps;
mod spine_exps;
mod walk_exps;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

pub use config::{law_label, parse_law, ExperimentConfig};
pub use output::{Outcome, Table, Verdict, SCHEMA_VERSION};
pub use summarize::{summarize, summarize_tables, ColumnSummary, Fit, Summary};

use crate::{Error, Result};

/// Process exit codes of the `gwlab` binary.
pub mod exit_code {
    pub const ASSERT_FAILED: i32 = 1;
    pub const UNKNOWN_EXPERIMENT: i32 = 2;
    pub const CONFIG: i32 = 3;
    pub const BUDGET: i32 = 4;
    pub const IO: i32 = 5;
}

/// Exit code for an error raised by an experiment.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::Budget(_) => exit_code::BUDGET,
        Error::Config(_) | Error::Usage(_) | Error::Construction(_) => exit_code::CONFIG,
        Error::Schema(_) | Error::Io(_) => exit_code::IO,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    VerifyLaw,
    TheoremMain,
    Displacement,
    GammaScaling,
    ExcursionTail,
    SpineCheck,
    ZrMoments,
    MuL,
    Rw1dSuite,
    Extremes,
}

impl Experiment {
    pub const ALL: [Experiment; 10] = [
        Experiment::VerifyLaw,
        Experiment::TheoremMain,
        Experiment::Displacement,
        Experiment::GammaScaling,
        Experiment::ExcursionTail,
        Experiment::SpineCheck,
        Experiment::ZrMoments,
        Experiment::MuL,
        Experiment::Rw1dSuite,
        Experiment::Extremes,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Experiment::VerifyLaw => "verify-law",
            Experiment::TheoremMain => "theorem-main",
            Experiment::Displacement => "displacement",
            Experiment::GammaScaling => "gamma-scaling",
            Experiment::ExcursionTail => "excursion-tail",
            Experiment::SpineCheck => "spine-check",
            Experiment::ZrMoments => "zr-moments",
            Experiment::MuL => "mu-l",
            Experiment::Rw1dSuite => "rw1d-suite",
            Experiment::Extremes => "extremes",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The name is not one of [`Experiment::ALL`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownExperiment(pub String);

impl fmt::Display for UnknownExperiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = Experiment::ALL.iter().map(Experiment::as_str).collect();
        write!(
            f,
            "unknown experiment `{}` (expected one of: {})",
            self.0,
            names.join(", ")
        )
    }
}

impl std::error::Error for UnknownExperiment {}

impl FromStr for Experiment {
    type Err = UnknownExperiment;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| UnknownExperiment(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Recompute the frozen reference fixtures before the rw1d suite uses them.
    pub refresh_fixtures: bool,
}

/// Run one experiment. Nothing is written to disk except, with
/// `refresh_fixtures`, the fixture file.
pub fn run(exp: Experiment, cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Outcome> {
    if let Some(name) = &cfg.experiment {
        if name != exp.as_str() {
            return Err(Error::Config(format!(
                "config is for `{name}`, not `{exp}`"
            )));
        }
    }
    if cfg.laws.len() > 1 && exp != Experiment::VerifyLaw {
        return Err(Error::Config(format!("`{exp}` takes a single law")));
    }
    match exp {
        Experiment::VerifyLaw => spine_exps::verify_law(cfg),
        Experiment::TheoremMain => walk_exps::theorem_main(cfg),
        Experiment::Displacement => walk_exps::displacement(cfg),
        Experiment::GammaScaling => quenched_exps::gamma_scaling(cfg),
        Experiment::ExcursionTail => quenched_exps::excursion_tail(cfg),
        Experiment::SpineCheck => spine_exps::spine_check(cfg),
        Experiment::ZrMoments => quenched_exps::zr_moments(cfg),
        Experiment::MuL => spine_exps::mu_l_census(cfg),
        Experiment::Rw1dSuite => rw1d_exps::rw1d_suite(cfg, opts),
        Experiment::Extremes => rw1d_exps::extremes(cfg),
    }
}

/// Run an experiment and write its artifacts under `cfg.out`.
pub fn run_and_write(
    exp: Experiment,
    cfg: &ExperimentConfig,
    opts: &RunOptions,
) -> Result<(Outcome, Vec<PathBuf>)> {
    let outcome = run(exp, cfg, opts)?;
    let paths = outcome.write(&cfg.out, &cfg.digest())?;
    Ok((outcome, paths))
}

/// Map `f` over `0..n` on a pool of scoped threads, one isolated job per
/// index; results come back in index order whatever the scheduling.
pub(crate) fn replica_pool<T, F>(n: u64, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    let workers = workers.clamp(1, n.max(1) as usize);
    if workers == 1 {
        return (0..n).map(&f).collect();
    }
    let next = std::sync::atomic::AtomicU64::new(0);
    let mut slots: Vec<(u64, Result<T>)> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                s.spawn(|| {
                    let mut done = Vec::new();
                    loop {
                        let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                        if i >= n {
                            break done;
                        }
                        done.push((i, f(i)));
                    }
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("replica job panicked"))
            .collect()
    });
    slots.sort_by_key(|(i, _)| *i);
    slots.into_iter().map(|(_, r)| r).collect()
}

/// Worker count for light jobs.
pub(crate) fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}
