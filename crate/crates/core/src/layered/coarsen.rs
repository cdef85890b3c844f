//! `δ_O`-coarsening: a minimal covering of the observation alphabet and the
//! nearest-representative quantization.

use serde::{Deserialize, Serialize};

use super::wrapper::{apply_wrapper, Wrapper};
use crate::error::{Error, Result};
use crate::model::Pomdp;
use crate::transport::GroundMetric;

/// Largest alphabet for which minimality is confirmed by exhaustive search.
pub const EXHAUSTIVE_COVER_LIMIT: usize = 8;

/// Resolution, representatives and quantization map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoarseningSpec {
    /// `δ_O`.
    pub delta: f64,
    /// Representative observations `O_δ`, ascending.
    pub representatives: Vec<usize>,
    /// `q_δ(o)` as an index into `representatives`.
    pub quantize: Vec<usize>,
}

impl CoarseningSpec {
    /// `|O_δ|`.
    pub fn size(&self) -> usize {
        self.representatives.len()
    }

    /// `Σ_{t ≤ T} |O_δ|^t`.
    pub fn class_bound(&self, horizon: usize) -> u128 {
        (0..=horizon as u32).map(|t| (self.size() as u128).pow(t)).sum()
    }
}

fn covers(metric: &GroundMetric, delta: f64, set: &[usize]) -> bool {
    (0..metric.size()).all(|o| set.iter().any(|&r| metric.d(o, r) <= delta + 1e-12))
}

fn greedy_cover(metric: &GroundMetric, delta: f64) -> Vec<usize> {
    let n = metric.size();
    let mut covered = vec![false; n];
    let mut reps = Vec::new();
    while covered.iter().any(|c| !c) {
        let gain = |r: usize| (0..n).filter(|&o| !covered[o] && metric.d(o, r) <= delta + 1e-12).count();
        let best = (0..n).filter(|r| !reps.contains(r)).max_by_key(|&r| (gain(r), std::cmp::Reverse(r))).expect("uncovered point exists");
        for (o, c) in covered.iter_mut().enumerate() {
            *c |= metric.d(o, best) <= delta + 1e-12;
        }
        reps.push(best);
    }
    reps.sort_unstable();
    reps
}

/// Smallest covering of size `< bound` in lexicographic order, if any.
fn smaller_cover(metric: &GroundMetric, delta: f64, bound: usize) -> Option<Vec<usize>> {
    let n = metric.size();
    for k in 1..bound {
        let mut set: Vec<usize> = (0..k).collect();
        loop {
            if covers(metric, delta, &set) {
                return Some(set);
            }
            // Next k-combination.
            let mut i = k;
            while i > 0 && set[i - 1] == n - k + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            set[i - 1] += 1;
            for j in i..k {
                set[j] = set[j - 1] + 1;
            }
        }
    }
    None
}

/// Minimal `δ_O`-covering by greedy selection (most newly covered, ties to the lowest
/// index), replaced by an exhaustive minimum when one is smaller and `|O| ≤ 8`.
pub fn covering(metric: &GroundMetric, delta: f64) -> Result<CoarseningSpec> {
    if delta.is_nan() || delta < 0.0 {
        return Err(Error::InvalidConfig(format!("resolution δ_O = {delta} must be ≥ 0")));
    }
    let mut reps = greedy_cover(metric, delta);
    if metric.size() <= EXHAUSTIVE_COVER_LIMIT {
        if let Some(smaller) = smaller_cover(metric, delta, reps.len()) {
            reps = smaller;
        }
    }
    let quantize = (0..metric.size())
        .map(|o| {
            let mut best = 0;
            for (k, &r) in reps.iter().enumerate() {
                if metric.d(o, r) < metric.d(o, reps[best]) {
                    best = k;
                }
            }
            best
        })
        .collect();
    Ok(CoarseningSpec { delta, representatives: reps, quantize })
}

/// Quantization wrapper `o ↦ q_δ(o)` with the metric restricted to `O_δ`.
pub fn coarsening_wrapper(pomdp: &Pomdp, spec: &CoarseningSpec, metric: &GroundMetric) -> Result<Wrapper> {
    let reps = &spec.representatives;
    let cost = reps.iter().flat_map(|&a| reps.iter().map(move |&b| metric.d(a, b))).collect();
    let names = reps.iter().map(|&r| pomdp.observation_names()[r].clone()).collect();
    Wrapper::observation_merge(pomdp, &spec.quantize, names, GroundMetric::custom(reps.len(), cost)?)
}

/// `δ_O`-coarsened model and its covering.
pub fn coarsen(pomdp: &Pomdp, delta: f64, metric: &GroundMetric) -> Result<(Pomdp, CoarseningSpec)> {
    if metric.size() != pomdp.n_observations() {
        return Err(Error::DimensionMismatch(format!("metric over {} symbols for |O|={}", metric.size(), pomdp.n_observations())));
    }
    let spec = covering(metric, delta)?;
    let wrapped = apply_wrapper(pomdp, &coarsening_wrapper(pomdp, &spec, metric)?)?;
    Ok((wrapped, spec))
}
