//! The embedded block tree: mu_L estimates and the census inclusion on a few arenas.
//!
//! cargo run --release --example census

use gwlab::environment::{EnvironmentLaw, TreeArena};
use gwlab::quenched::{embedded_tree_census, BlockParams};
use gwlab::spine::{c4_threshold, mu_l, MuIndicators, SpineConfig};

fn main() -> gwlab::Result<()> {
    let law = EnvironmentLaw::two_point();
    println!("c4 must exceed {:.4}", c4_threshold(&law));
    for l in [20, 40, 80] {
        let e = mu_l(
            &law,
            l,
            0.45,
            1.5,
            MuIndicators::All,
            &SpineConfig::new(50_000, 1),
        )?;
        println!("mu_{l} = {:.2} +- {:.2}", e.value, e.stderr);
    }
    let p = BlockParams::new(4, 0.25, 1.5)?;
    for replica in 0..3 {
        let mut arena = TreeArena::new(law, 5, replica);
        let c = embedded_tree_census(&mut arena, &p, 3, 20_000_000)?;
        println!("arena {replica}: generation sizes {:?}", c.generation_sizes);
        for ch in &c.checks {
            println!(
                "  n = {}, s = {:.2}: #K_s = {} >= {} : {}",
                ch.n, ch.s, ch.k_count, ch.rhs, ch.holds
            );
        }
    }
    Ok(())
}
