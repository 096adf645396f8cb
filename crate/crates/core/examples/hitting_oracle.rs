//! Compare the exact probability of reaching a fixed vertex before the root's
//! parent with the simulated walk.
//!
//! cargo run --release --example hitting_oracle

use gwlab::environment::{EnvironmentLaw, TreeArena};
use gwlab::quenched::{absorb_prob, hit_prob_vertex, level_slice};
use gwlab::walk::{count_hits, Visit};

fn main() -> gwlab::Result<()> {
    let mut arena = TreeArena::new(EnvironmentLaw::fixed_gaussian(2)?, 3, 0);
    arena.expand_to_depth(4);
    let slice = level_slice(&arena, 4);
    let x = slice[0];
    let p = hit_prob_vertex(&arena, x)?;
    let any = absorb_prob(&arena, &slice)?.prob;
    println!("vertex {} at depth 4, V = {:.3}", x.0, arena.potential(x));
    println!("P(hit x before the root's parent) = {p:.6}");
    println!("P(hit generation 4 first)         = {any:.6}");

    let hits = count_hits(&mut arena, 50_000, 1, 100_000_000, true, |a, y| {
        if y == x {
            Visit::HitReflect
        } else if a.is_ancestor_or_self(y, x) {
            Visit::Pass
        } else {
            Visit::Reflect
        }
    });
    let f = hits.hit_frequency();
    println!(
        "simulated: {:.6} +- {:.6} over {} excursions",
        f.value,
        f.stderr,
        hits.counts.len()
    );
    Ok(())
}
