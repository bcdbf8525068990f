//! Prioritized planning for networked multi-agent motion planning.
//!
//! Agents that share constraints are joined in a [`graph::CouplingGraph`].
//! A priority assignment orients that graph into a DAG whose longest path
//! fixes how many agents must plan one after another. Coloring the graph
//! greedily ([`coloring::greedy_color`]) and ordering agents by color keeps
//! that number low. The [`planning`] and [`sim`] modules close the loop with
//! a receding-horizon vehicle planner and an intersection simulator.

pub mod coloring;
pub mod error;
pub mod graph;
pub mod planning;
pub mod priority;
pub mod seed;
pub mod sim;
pub mod timing;

pub use coloring::{chromatic_number, greedy_color, reorder_levels, Coloring};
pub use error::{Error, Result};
pub use graph::{CouplingDag, CouplingGraph, GraphFile, LevelAssignment};
pub use priority::{
    color_to_priority, enumerate_prioritizations, min_levels, orient_edges, prioritize, PriorityAssignment, Strategy,
};
pub use timing::{compare_strategies, instance_time, InstanceTiming, TimingModel};
