//! Exhaustive policy search over a finite family, and the sufficiency and value-bound checks.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::objective::{policy_value, Objective};
use crate::error::{Error, Result};
use crate::model::Pomdp;
use crate::probes::{ObservationModel, ProbeFamily};
use crate::quotient::QuotientPomdp;

/// Slack on exact-sufficiency and value-bound checks.
pub const VALUE_TOL: f64 = 1e-9;

/// Values of every family member.
pub fn family_values<M: ObservationModel>(model: &M, family: &ProbeFamily, objective: &Objective, horizon: usize) -> Result<Vec<f64>> {
    family.members().par_iter().map(|f| policy_value(model, f, objective, horizon)).collect()
}

/// First index of the maximum (ties to the lowest index).
fn argmax(values: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (k, &v) in values.iter().enumerate() {
        if v > best.1 {
            best = (k, v);
        }
    }
    best
}

/// Best member of `family` on `model`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    /// Index in the family.
    pub index: usize,
    /// Canonical text of the controller.
    pub policy: String,
    /// Its value.
    pub value: f64,
    /// Search time in seconds.
    pub seconds: f64,
}

/// Argmax of [`policy_value`] over the family.
pub fn exhaustive_search<M: ObservationModel>(model: &M, family: &ProbeFamily, objective: &Objective, horizon: usize) -> Result<SearchResult> {
    if family.is_empty() {
        return Err(Error::InvalidConfig("empty policy family".into()));
    }
    let start = Instant::now();
    let values = family_values(model, family, objective, horizon)?;
    let (index, value) = argmax(&values);
    Ok(SearchResult { index, policy: family.members()[index].to_string(), value, seconds: start.elapsed().as_secs_f64() })
}

/// Search on a quotient and re-evaluate the winner on the original.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    /// Winner on the original.
    pub original: SearchResult,
    /// Winner on the quotient.
    pub quotient: SearchResult,
    /// Quotient winner's value on the original.
    pub quotient_policy_on_original: f64,
    /// `V_M(π*_M) − V_M(π*_Q)`.
    pub regret: f64,
}

/// Compare searches on the original and on a quotient.
pub fn plan_compare(pomdp: &Pomdp, quotient: &QuotientPomdp, family: &ProbeFamily, objective: &Objective, horizon: usize) -> Result<PlanResult> {
    let original = exhaustive_search(pomdp, family, objective, horizon)?;
    let on_quotient = exhaustive_search(quotient, family, objective, horizon)?;
    let transfer = policy_value(pomdp, &family.members()[on_quotient.index], objective, horizon)?;
    Ok(PlanResult { regret: original.value - transfer, quotient_policy_on_original: transfer, original, quotient: on_quotient })
}

/// `max_π |E_M[G] − E_Q[G]|` over the family.
pub fn check_exact_sufficiency(pomdp: &Pomdp, quotient: &QuotientPomdp, family: &ProbeFamily, objective: &Objective, horizon: usize) -> Result<f64> {
    let a = family_values(pomdp, family, objective, horizon)?;
    let b = family_values(quotient, family, objective, horizon)?;
    Ok(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

/// Empirical value gap and regret against their bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueBoundReport {
    /// Merge threshold `ε`.
    pub eps: f64,
    /// `L_R`.
    pub reward_lipschitz: f64,
    /// `max_π |V_M − V_Q|`.
    pub gap: f64,
    /// `L_R · T · ε`.
    pub bound: f64,
    /// `L_R · T · ε (1 + 2T|S||O|)`.
    pub canonical_bound: f64,
    /// Regret of the quotient-optimal policy on the original.
    pub regret: f64,
    /// `2 · L_R · T · ε`.
    pub regret_bound: f64,
}

impl ValueBoundReport {
    /// Gap and regret within their bounds.
    pub fn holds(&self) -> bool {
        self.gap <= self.bound + VALUE_TOL && self.regret <= self.regret_bound + VALUE_TOL && self.regret >= -VALUE_TOL
    }
}

/// Evaluate every family member on the original and on an `ε`-quotient.
pub fn check_value_bound(
    pomdp: &Pomdp,
    quotient: &QuotientPomdp,
    family: &ProbeFamily,
    objective: &Objective,
    eps: f64,
    horizon: usize,
) -> Result<ValueBoundReport> {
    let a = family_values(pomdp, family, objective, horizon)?;
    let b = family_values(quotient, family, objective, horizon)?;
    let gap = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let (_, best) = argmax(&a);
    let (q_index, _) = argmax(&b);
    let t = horizon as f64;
    let l = objective.reward_lipschitz;
    let size = (pomdp.n_states() * pomdp.n_observations()) as f64;
    Ok(ValueBoundReport {
        eps,
        reward_lipschitz: l,
        gap,
        bound: l * t * eps,
        canonical_bound: l * t * eps * (1.0 + 2.0 * t * size),
        regret: best - a[q_index],
        regret_bound: 2.0 * l * t * eps,
    })
}
