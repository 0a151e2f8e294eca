//! Turn-by-turn multi-type population game dynamics.
//!
//! A population of several agent types arrives one agent per turn; each agent
//! picks, once, the action maximizing its type's affine utility of the current
//! aggregate action-frequency vector. This crate simulates those stochastic
//! dynamics and computes their limiting behavior through the piecewise-affine
//! differential inclusion they track: preference-region enumeration, classical
//! and Filippov attractors with their mean-field-equilibrium profiles, the
//! directed Region-Vertex graph and its cycles, closed-form solutions of the
//! inclusion (region hopping and sliding modes), and a Möbius-map fixed-point
//! test that certifies cyclic limit sets for three-action games.
//!
//! The `preset` module builds the priority-queue game (standard / moderate /
//! premium queues with cost-rational, comparing and avoid-the-crowd customers)
//! that the analysis and acceptance tests exercise end to end.

pub mod attractor;
pub mod cycle3;
pub mod di;
pub mod game;
pub mod io;
pub mod lp;
pub mod preset;
pub mod region;
pub mod report;
pub mod rv;
pub mod sim;

#[cfg(test)]
pub(crate) mod test_support;

pub use attractor::{Attractor, AttractorKind, MfeReport};
pub use game::{Aggregate, BorderFun, GameError, GameSpec};
pub use lp::{LinearProgram, LpError, LpOutcome};
pub use region::{AdjacencyRecord, BorderClass, RegionVertex};
pub use report::{analyze, AnalysisOptions, AnalysisReport};
