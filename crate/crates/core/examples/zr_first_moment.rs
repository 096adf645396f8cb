//! Build the restricted first-passage line and compare the simulated number of
//! its vertices visited per excursion with the exact quenched mean.
//!
//! cargo run --release --example zr_first_moment

use gwlab::environment::{EnvironmentLaw, TreeArena};
use gwlab::quenched::{restricted_line, ExploreLimits, LadderGrid};

fn main() -> gwlab::Result<()> {
    let grid = LadderGrid::new(6.0, 0.6, 0.55, 1.2, 1.5, 1.0)?;
    println!(
        "k = {}, levels {:?}, corridors {:?}, depth bound {}",
        grid.k,
        (0..=grid.k).map(|m| grid.level(m)).collect::<Vec<_>>(),
        (1..=grid.k).map(|m| grid.corridor(m)).collect::<Vec<_>>(),
        grid.depth_bound()
    );
    for replica in 0..3 {
        let mut arena = TreeArena::new(EnvironmentLaw::two_point(), 1, replica);
        let line = restricted_line(&mut arena, &grid, &ExploreLimits::depth(10_000))?;
        let z = line
            .count_visits(&mut arena, 20_000, 1, 100_000_000)
            .mean_count();
        println!(
            "arena {replica}: {} of {} line members kept, exact mean {:.4}, simulated {:.4} +- {:.4}",
            line.members.len(),
            line.line.members.len(),
            line.first_moment,
            z.value,
            z.stderr
        );
    }
    Ok(())
}
