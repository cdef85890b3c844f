//! The closed-loop probe pseudometric: distance caches, history- and model-level
//! distances, probe envelopes, and the `δ_S` / `δ_clk` certificates.

mod cache;
mod envelope;
mod perturb;

pub(crate) use cache::check_guard;
pub use cache::{build_cache, cache_entries, pair_count, pair_index, CacheMeta, CacheOptions, DistanceCache, DEFAULT_PAIR_PROBE_CAP};
pub use envelope::{
    delta_cross_family, delta_s, envelope, model_distance, model_distance_per_probe, CrossFamilyGap, ProbeEnvelope, CROSS_FAMILY_TOL,
};
pub use perturb::{perturb_and_bound, perturb_kernels, PerturbationReport};

use crate::error::{Error, Result};

/// `d^Π(h, h')` for two equal-depth histories given as observation sequences.
pub fn history_distance(cache: &DistanceCache, h: &[usize], h2: &[usize]) -> Result<f64> {
    if h.len() != h2.len() {
        return Err(Error::DimensionMismatch(format!("history depths {} and {} differ", h.len(), h2.len())));
    }
    cache.history_distance_of(h, h2)
}
