//! Bracket the probability that an excursion climbs to potential r, and fit
//! ln gamma_r against -(2r)^{1/2}.
//!
//! cargo run --release --example gamma_brackets

use gwlab::environment::{EnvironmentLaw, TreeArena};
use gwlab::quenched::{gamma_r_curve, ExploreLimits};

fn main() -> gwlab::Result<()> {
    let law = EnvironmentLaw::two_point();
    let mut arena = TreeArena::new(law, 7, 0);
    // explore where the hitting score is above e^{-10}, then refine within the budget
    let limits = ExploreLimits::depth(100_000)
        .with_min_log_hit(-10.0)
        .with_max_vertices(2_000_000)
        .with_refinement(20, 0.5);
    let curve = gamma_r_curve(&mut arena, &[4.0, 6.0, 8.0, 10.0, 12.0], &limits)?;
    println!(
        "explored {} vertices in {} rounds",
        curve.explore.vertices, curve.explore.rounds
    );
    for p in &curve.points {
        println!(
            "r = {:4}: {:.4e} <= gamma_r <= {:.4e}  ({} line members, {} truncated)",
            p.r, p.lower, p.upper, p.line_size, p.truncated
        );
    }
    match (curve.slope_mid, curve.slope_min, curve.slope_max) {
        (Some(mid), Some(lo), Some(hi)) => {
            println!("slope of ln gamma_r on -(2r)^(1/2): {mid:.4} (range {lo:.4} .. {hi:.4})")
        }
        _ => println!("slope not certified: some lower bracket is zero"),
    }
    Ok(())
}
