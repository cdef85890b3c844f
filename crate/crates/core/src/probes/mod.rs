//! Finite-state-controller probe families and closed-loop suffix laws.

mod family;
mod fsc;
mod law;

pub use family::{
    clock_aware_count, enumerate_clock_aware, enumerate_family, enumerate_stationary, sample_stochastic, stationary_count, FamilyKind, ProbeFamily,
    DEFAULT_FAMILY_CAP,
};
pub use fsc::{Choice, ClockAwareFsc, Fsc, StationaryFsc, StochasticFsc};
pub use law::{normalized_block, observation_law, rollout, suffix_law, ObservationModel, Rollout, SuffixLaw};
