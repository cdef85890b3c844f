//! Finite POMDPs, belief filtering, history trees, and benchmark constructors.

mod belief;
pub mod benchmarks;
mod history;
mod pomdp;
mod spec;

pub use belief::{belief_update, effective_dimension, Belief, BeliefUpdate};
pub use benchmarks::{
    gridworld, hallway, network_monitoring, random_pomdp, rocksample, stationary_witness, tiger_full, tiger_listen_only,
};
pub use history::{history_tree, History, HistoryTree, MAX_HISTORIES};
pub use pomdp::{Pomdp, PomdpParts, PROB_TOL};
pub(crate) use pomdp::check_distribution;
pub use spec::{make_benchmark, BenchmarkSpec, TIGER_ACCURACY};
