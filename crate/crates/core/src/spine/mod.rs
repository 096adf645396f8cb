//! The size-biased measure and its spine.
//!
//! Under the size-biased law the potential along the spine is a centered random
//! walk `S`, and expectations of sums over a generation or over a first-passage
//! line reduce to single-path expectations weighted by `e^{S}`.

mod enumerate;
mod estimators;
mod sampler;

pub use enumerate::{enumerate_generation, two_point_line_mass, two_point_step_law, SignTable};
pub use estimators::{
    c4_threshold, many_to_one, many_to_one_line, martingale_check, mu_l, overshoot_moment,
    probe_c1, w1_second_moment, wn_second_moment, LineEstimate, MartingaleCheck, MomentProbe,
    MuIndicators, OvershootPoint, SpineConfig, DEFAULT_STEP_CAP,
};
pub use sampler::{
    sample_spine_path, sample_spine_step, sample_spine_to_level, two_point_families, SpineMode,
    SpineSample, SpineStep,
};
