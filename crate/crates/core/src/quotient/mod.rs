//! Probe-exact and ε-approximate partitions of the history tree, quotient POMDPs
//! with canonical beliefs, partition agreement, and the soundness check.

mod model;
mod partition;

pub use model::{representative_deviation, soundness_check, QuotientInfo, QuotientPomdp, QUOTIENT_BELIEF_CAP};
pub use partition::{
    adjusted_rand_index, adjusted_rand_index_per_depth, ari_labels, Label, complete_linkage, eps_partition, exact_partition, Partition, EXACT_TOL,
    LINKAGE_SLACK,
};

use crate::error::Result;
use crate::model::Pomdp;

/// Build the quotient of `pomdp` by `partition`.
pub fn build_quotient(pomdp: &Pomdp, partition: &Partition) -> Result<QuotientPomdp> {
    QuotientPomdp::build(pomdp, partition)
}
