//! Boundary-case environment laws and the lazily realized random tree.

mod arena;
mod law;
mod verify;

pub use arena::{Transitions, TreeArena, VertexId, VertexRecord};
pub use law::{make_law, EnvironmentLaw, Family, LawParams};
pub use verify::{verify_boundary_case, BoundaryReport, DeltaProbe, VerifyMethod, DELTA_PROBES};
