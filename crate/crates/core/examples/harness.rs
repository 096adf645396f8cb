//! Drive the experiment harness from code: run an experiment, write its files
//! and aggregate the CSV.
//!
//! cargo run --release --example harness

use gwlab::harness::{run_and_write, summarize, Experiment, ExperimentConfig, RunOptions};

fn main() -> gwlab::Result<()> {
    let out = std::env::temp_dir().join("gwlab-example");
    let cfg = ExperimentConfig::parse(&format!(
        "law = two-point\nseed = 3\nreplicas = 8\nn_steps = 1e3, 1e4, 1e5\nout = {}\n",
        out.display()
    ))?;
    let (outcome, paths) = run_and_write(Experiment::TheoremMain, &cfg, &RunOptions::default())?;
    for p in &paths {
        println!("wrote {}", p.display());
    }
    println!("verdicts: {:?}", outcome.verdicts);
    let s = summarize(&paths[..1], Some(("n_steps", "ratio_V")))?;
    println!(
        "median ratio_V over all rows: {:.4}",
        s.columns["ratio_V"].median
    );
    if let Some(fit) = s.fit {
        println!("ratio_V ~ {:.4} + {:.3e} n", fit.intercept, fit.slope);
    }
    Ok(())
}
