//! One-dimensional centered random walks: two-sided exits, drawdown corridors,
//! ladder heights and maxima of i.i.d. samples, with exact lattice oracles.

mod corridor;
mod exit;
mod extremes;
mod ladder;
mod step;

pub use corridor::{
    corridor_block_product, corridor_block_product_exact, corridor_dp, corridor_dp_exact,
    corridor_enumerate, corridor_mc, corridor_prob, Corridor, CorridorMethod, CorridorMode,
    EnumerationBracket, DP_STATE_BUDGET,
};
pub use exit::{
    exit_identity, exit_prob, exit_sweep, lattice_exit_prob, lattice_exit_ratio, ExitEstimate,
    ExitIdentity, ExitSweep,
};
pub use extremes::{extremes_check, ExtremesCheck};
pub use ladder::{
    compute_reference_fixtures, find_fixture, fixtures_path, ladder_height, ladder_stats,
    read_fixtures, write_fixtures, Fixture, LadderStats, OvershootSummary, GAUSSIAN_LADDER,
    REFERENCE_STEP_CAP,
};
pub use step::StepLaw1D;
