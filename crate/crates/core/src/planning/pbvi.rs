//! Finite-horizon point-based value iteration with stage-indexed α-vector sets.

use std::time::Instant;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Pomdp;
use crate::sampling::substream;

/// Default belief points per stage.
pub const PBVI_BELIEF_POINTS: usize = 50;
/// Default subsampling seed.
pub const PBVI_SEED: u64 = 42;

/// PBVI output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PbviResult {
    /// Value at `b0`.
    pub value: f64,
    /// Belief points per stage.
    pub belief_counts: Vec<usize>,
    /// Wall time in seconds.
    pub seconds: f64,
}

fn same_belief(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12)
}

/// Stage belief sets: forward expansion from `b0` over every action and observation,
/// deduplicated, subsampled to `cap` points per stage.
fn belief_sets(pomdp: &Pomdp, horizon: usize, cap: usize, seed: u64) -> Vec<Vec<Vec<f64>>> {
    let mut sets = vec![vec![pomdp.initial().to_vec()]];
    for t in 1..horizon {
        let mut next: Vec<Vec<f64>> = Vec::new();
        for b in &sets[t - 1] {
            for a in 0..pomdp.n_actions() {
                for o in 0..pomdp.n_observations() {
                    let mut post = vec![0.0; pomdp.n_states()];
                    let mass = pomdp.filter_unnormalized(b, a, o, &mut post);
                    if mass <= 0.0 {
                        continue;
                    }
                    post.iter_mut().for_each(|x| *x /= mass);
                    if !next.iter().any(|q| same_belief(q, &post)) {
                        next.push(post);
                    }
                }
            }
        }
        if next.len() > cap {
            let mut rng = substream(seed, t as u64);
            let mut keep = sample(&mut rng, next.len(), cap).into_vec();
            keep.sort_unstable();
            next = keep.into_iter().map(|k| next[k].clone()).collect();
        }
        sets.push(next);
    }
    sets
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Point-based backups over `horizon` stages (no discount) using the latent reward.
pub fn pbvi(pomdp: &Pomdp, horizon: usize, belief_points: usize, seed: u64) -> Result<PbviResult> {
    if horizon == 0 || belief_points == 0 {
        return Err(Error::InvalidConfig("PBVI needs T ≥ 1 and at least one belief point".into()));
    }
    let start = Instant::now();
    let (ns, na, no) = (pomdp.n_states(), pomdp.n_actions(), pomdp.n_observations());
    let sets = belief_sets(pomdp, horizon, belief_points, seed);
    let mut gamma: Vec<Vec<f64>> = vec![vec![0.0; ns]];
    for t in (0..horizon).rev() {
        let mut next_gamma = Vec::with_capacity(sets[t].len());
        for b in &sets[t] {
            let mut best: Option<(f64, Vec<f64>)> = None;
            let mut pred = vec![0.0; ns];
            for a in 0..na {
                pomdp.predict(b, a, &mut pred);
                // h(s') = Σ_o Z(o | s', a) α*_{a,o}(s').
                let mut h = vec![0.0; ns];
                for o in 0..no {
                    let weighted: Vec<f64> = (0..ns).map(|s2| pred[s2] * pomdp.z(a, s2, o)).collect();
                    let star = gamma.iter().max_by(|x, y| dot(x, &weighted).total_cmp(&dot(y, &weighted))).expect("nonempty α set");
                    for s2 in 0..ns {
                        h[s2] += pomdp.z(a, s2, o) * star[s2];
                    }
                }
                let alpha: Vec<f64> = (0..ns).map(|s| pomdp.r(s, a) + dot(pomdp.transition_row(a, s), &h)).collect();
                let v = dot(&alpha, b);
                if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
                    best = Some((v, alpha));
                }
            }
            next_gamma.push(best.expect("|A| ≥ 1").1);
        }
        gamma = next_gamma;
    }
    let value = gamma.iter().map(|a| dot(a, pomdp.initial())).fold(f64::NEG_INFINITY, f64::max);
    Ok(PbviResult { value, belief_counts: sets.iter().map(Vec::len).collect(), seconds: start.elapsed().as_secs_f64() })
}

/// Copy of `pomdp` whose reward is `R(s, a) = E[g(o') | s, a]`.
pub fn observation_aligned(pomdp: &Pomdp, g: &[f64]) -> Result<Pomdp> {
    if g.len() != pomdp.n_observations() {
        return Err(Error::DimensionMismatch(format!("score over {} symbols for |O|={}", g.len(), pomdp.n_observations())));
    }
    let (ns, na) = (pomdp.n_states(), pomdp.n_actions());
    let mut reward = vec![0.0; ns * na];
    for s in 0..ns {
        for a in 0..na {
            reward[s * na + a] =
                pomdp.transition_row(a, s).iter().enumerate().map(|(s2, &p)| p * dot(pomdp.observation_row(a, s2), g)).sum();
        }
    }
    pomdp.with_reward(reward)
}

/// PBVI on the original against PBVI on its `ε`-quotient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PbviComparison {
    /// Value on the original.
    pub original_value: f64,
    /// Value on the materialized quotient.
    pub quotient_value: f64,
    /// `|original − quotient|`.
    pub gap: f64,
    /// Largest number of reachable quotient classes at any planning stage `d < T`.
    pub quotient_states: usize,
    /// States of the materialized quotient process.
    pub materialized_states: usize,
    /// PBVI time on the original.
    pub original_seconds: f64,
    /// Cache plus partition time.
    pub partition_seconds: f64,
    /// Quotient build and materialization time.
    pub build_seconds: f64,
    /// PBVI time on the quotient.
    pub quotient_seconds: f64,
    /// `original / (partition + build + quotient)`.
    pub speedup: f64,
}

/// Largest materialized quotient accepted by [`pbvi_compare`].
pub const PBVI_MAX_STATES: usize = 20_000;

/// Partition, quotient and plan; `score` switches to the observation-aligned reward.
#[allow(clippy::too_many_arguments)]
pub fn pbvi_compare(
    pomdp: &Pomdp,
    family: &crate::probes::ProbeFamily,
    horizon: usize,
    eps: f64,
    distance: &crate::transport::LawDistance,
    belief_points: usize,
    seed: u64,
    score: Option<&[f64]>,
) -> Result<PbviComparison> {
    use crate::pseudometric::{build_cache, CacheOptions};
    use crate::quotient::{eps_partition, QuotientPomdp};

    let target = match score {
        Some(g) => observation_aligned(pomdp, g)?,
        None => pomdp.clone(),
    };
    let original = pbvi(&target, horizon, belief_points, seed)?;
    let t0 = Instant::now();
    let cache = build_cache(&target, target.name(), family, horizon, distance, CacheOptions::default())?;
    let partition = eps_partition(&cache, eps)?;
    let partition_seconds = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let quotient = QuotientPomdp::build(&target, &partition)?;
    let flat = quotient.materialize(PBVI_MAX_STATES)?;
    let build_seconds = t1.elapsed().as_secs_f64();
    let reduced = pbvi(&flat, horizon, belief_points, seed)?;
    let quotient_states = (0..horizon)
        .map(|d| {
            (0..partition.tree().layer_size(d))
                .filter(|&i| !partition.is_sink(d, i))
                .map(|i| partition.class_of(d, i))
                .collect::<std::collections::BTreeSet<_>>()
                .len()
        })
        .max()
        .unwrap_or(0);
    let denominator = partition_seconds + build_seconds + reduced.seconds;
    Ok(PbviComparison {
        original_value: original.value,
        quotient_value: reduced.value,
        gap: (original.value - reduced.value).abs(),
        quotient_states,
        materialized_states: flat.n_states(),
        original_seconds: original.seconds,
        partition_seconds,
        build_seconds,
        quotient_seconds: reduced.seconds,
        speedup: if denominator > 0.0 { original.seconds / denominator } else { f64::INFINITY },
    })
}
