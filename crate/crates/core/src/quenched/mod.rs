//! Quenched quantities for a fixed realized environment: hitting probabilities,
//! stopping lines, absorption curves and the restricted line.

pub mod census;
pub mod conductance;
pub mod line;
pub mod paths;
pub mod restricted;

pub use census::{embedded_tree_census, BlockParams, Census, InclusionCheck};
pub use conductance::{absorb_prob, level_slice, Absorption, Role};
pub use line::{
    check_stopping_line, explore_refined, gamma_r_curve, log_conductances, stopping_line,
    ExploreLimits, ExploreReport, GammaCurve, GammaPoint, LineMember, StoppingLine,
};
pub use paths::{hit_prob_from, hit_prob_vertex, log_hit_prob_vertex, log_path_sum};
pub use restricted::{classify, restricted_line, LadderGrid, Rejection, RestrictedLine};
