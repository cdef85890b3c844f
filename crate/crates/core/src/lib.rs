//! Bounded-observer quotients of finite POMDPs.
//!
//! Finite-state-controller probe families induce a closed-loop Wasserstein
//! pseudometric over observation histories. Histories a bounded controller cannot
//! tell apart are merged into quotient POMDPs, certified by probe-subset and
//! cross-family gaps, and checked against value, monotonicity, and composition bounds.

pub mod error;
pub mod experiments;
pub mod layered;
pub mod model;
pub mod planning;
pub mod probes;
pub mod pseudometric;
pub mod quotient;
pub mod sampling;
pub mod selection;
pub mod transport;

pub use error::{Error, Result};
pub use experiments::{Artifact, Manifest, RunConfig, TableId, Tier};
pub use model::{BenchmarkSpec, HistoryTree, Pomdp};
pub use probes::{FamilyKind, ProbeFamily};
pub use pseudometric::{build_cache, CacheOptions, DistanceCache};
pub use quotient::{eps_partition, Partition, QuotientPomdp};
pub use transport::{GroundMetric, LawDistance};
