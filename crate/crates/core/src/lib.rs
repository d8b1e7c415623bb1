//! Simulation of the feedback loop between people recommenders and users
//! in a bi-populated directed social network.
//!
//! The crate generates networks with controlled minority share and
//! homophily, runs repeated rounds of link recommendation and stochastic
//! acceptance, and measures how group-level exposure and individual
//! in-degree inequality evolve.

pub mod behavior;
pub mod cli;
pub mod config;
pub mod engine;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod netgen;
pub mod recommend;
pub mod rng;
pub mod sweep;

pub use behavior::BehaviorKind;
pub use engine::{run_simulation, IterationRecord, SimConfig, SimOutput};
pub use graph::{Group, LabeledDigraph, NodeId};
pub use netgen::{build_preset, NetConfig, Preset};
pub use recommend::RecommenderKind;
