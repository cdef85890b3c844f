//! Kernel perturbation and the `4Tδ` robustness check.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::cache::{build_cache, CacheOptions};
use super::envelope::model_distance;
use crate::error::{Error, Result};
use crate::model::Pomdp;
use crate::probes::ProbeFamily;
use crate::quotient::{eps_partition, QuotientPomdp};
use crate::transport::LawDistance;

/// `ε` of the quotient used as the fixed comparison target.
pub const PERTURBATION_TARGET_EPS: f64 = 0.5;

/// Outcome of one perturbation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationReport {
    /// Per-entry perturbation size.
    pub delta: f64,
    /// `D(M, Q)`.
    pub original: f64,
    /// `D(M̂, Q)`.
    pub perturbed: f64,
    /// `|D(M̂, Q) − D(M, Q)|`.
    pub shift: f64,
    /// `4Tδ`.
    pub bound: f64,
}

impl PerturbationReport {
    /// Does the shift respect the bound?
    pub fn holds(&self) -> bool {
        self.shift <= self.bound + 1e-12
    }
}

fn mix_row(row: &mut [f64], delta: f64, rng: &mut ChaCha8Rng) {
    let noise: Vec<f64> = (0..row.len()).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = noise.iter().sum();
    for (x, u) in row.iter_mut().zip(noise) {
        *x = (1.0 - delta) * *x + delta * u / total;
    }
    let s: f64 = row.iter().sum();
    row.iter_mut().for_each(|x| *x /= s);
}

/// Mix every row of `P` and `Z` with a random Dirichlet(1) row at weight `δ`, so each
/// entry moves by at most `δ` and rows stay normalized.
pub fn perturb_kernels(pomdp: &Pomdp, delta: f64, seed: u64) -> Result<Pomdp> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::InfeasiblePerturbation(format!("δ = {delta} outside [0, 1]")));
    }
    let mut parts = pomdp.to_parts();
    if delta == 0.0 {
        return Pomdp::new(parts);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ns = pomdp.n_states();
    let no = pomdp.n_observations();
    for row in parts.transition.chunks_mut(ns) {
        mix_row(row, delta, &mut rng);
    }
    for row in parts.observation.chunks_mut(no) {
        mix_row(row, delta, &mut rng);
    }
    Pomdp::new(parts)
}

/// Perturb `pomdp` by `δ` and compare its distance to the original's `ε = 0.5` quotient
/// against the unperturbed distance; the shift must stay within `4Tδ`.
pub fn perturb_and_bound(
    pomdp: &Pomdp,
    family: &ProbeFamily,
    horizon: usize,
    distance: &LawDistance,
    delta: f64,
    seed: u64,
) -> Result<PerturbationReport> {
    let cache = build_cache(pomdp, pomdp.name(), family, horizon, distance, CacheOptions::default())?;
    let target = QuotientPomdp::build(pomdp, &eps_partition(&cache, PERTURBATION_TARGET_EPS)?)?;
    let perturbed = perturb_kernels(pomdp, delta, seed)?;
    let original = model_distance(pomdp, &target, family, horizon, distance)?;
    let moved = model_distance(&perturbed, &target, family, horizon, distance)?;
    Ok(PerturbationReport {
        delta,
        original,
        perturbed: moved,
        shift: (moved - original).abs(),
        bound: 4.0 * horizon as f64 * delta,
    })
}
