//! Run the biased walk on a few environments and watch max V / (ln n)^2.
//!
//! cargo run --release --example walk_maxima

use gwlab::environment::{EnvironmentLaw, TreeArena};
use gwlab::rng;
use gwlab::walk::{run_excursions, run_steps};

fn main() -> gwlab::Result<()> {
    let law = EnvironmentLaw::two_point();
    for replica in 0..4 {
        let mut arena = TreeArena::new(law, 42, replica);
        let mut rg = rng::stream(&[42, replica]);
        let s = run_steps(&mut arena, 1_000_000, &mut rg)?;
        println!(
            "replica {replica}: max V = {:6.2}, max depth = {:4}, max V/(ln n)^2 = {:.3}, returns to the root's parent = {}, arena size = {}",
            s.max_potential, s.max_depth, s.ratio_potential, s.back_root_hits, arena.len()
        );
    }

    // excursions between visits to the reflecting parent of the root
    let mut arena = TreeArena::new(law, 42, 0);
    let mut rg = rng::stream(&[7]);
    let run = run_excursions(&mut arena, 10_000, 3.0, &mut rg, 1_000_000_000)?;
    let hits = run.records.iter().filter(|r| r.hit_probe).count();
    let longest = run.records.iter().map(|r| r.length).max().unwrap_or(0);
    println!(
        "10000 excursions: {} steps in total, longest {longest}, {hits} reached V >= 3",
        run.total_steps
    );
    Ok(())
}
