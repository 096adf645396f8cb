//! One-dimensional estimates: exact gambler's ruin, drawdown corridors and
//! ladder heights.
//!
//! cargo run --release --example random_walk_1d

use gwlab::rw1d::{
    corridor_dp, corridor_mc, exit_prob, ladder_height, lattice_exit_ratio, Corridor, CorridorMode,
    StepLaw1D, DP_STATE_BUDGET,
};

fn main() -> gwlab::Result<()> {
    println!(
        "P(+3 before -7), lattice: {} exactly",
        lattice_exit_ratio(3, 7)
    );
    let g = StepLaw1D::gaussian(1.0)?;
    let e = exit_prob(&g, 3.0, 7.0, 100_000, 1)?;
    println!(
        "P(+3 before -7), gaussian: {:.4} +- {:.4}",
        e.estimate.value, e.estimate.stderr
    );

    for (r, l) in [(100.0, 5.0), (200.0, 7.0), (400.0, 10.0)] {
        let c = Corridor::new(r, l, CorridorMode::NoFloor)?;
        let p = corridor_dp(&c, DP_STATE_BUDGET)?;
        println!(
            "corridor r = {r}, lambda = {l}: P = {p:.3e}, -(lambda/r) ln P = {:.3}",
            -(l / r) * p.ln()
        );
    }
    let c = Corridor::new(40.0, 6.0, CorridorMode::WithFloor)?;
    let mc = corridor_mc(&StepLaw1D::SimpleLattice, &c, 200_000, 2);
    println!(
        "r = 40, lambda = 6 with floor: dp {:.5}, mc {:.5} +- {:.5}",
        corridor_dp(&c, DP_STATE_BUDGET)?,
        mc.value,
        mc.stderr
    );

    let (h, _) = ladder_height(&g, 100_000, 3, 100_000);
    println!(
        "gaussian ladder height {:.4} +- {:.4} (1/sqrt 2 = {:.4})",
        h.value,
        h.stderr,
        std::f64::consts::FRAC_1_SQRT_2
    );
    Ok(())
}
