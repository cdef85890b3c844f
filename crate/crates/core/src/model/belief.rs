//! Beliefs, the Bayes filter, and the effective-dimension diagnostic.

use serde::{Deserialize, Serialize};

use super::pomdp::{check_distribution, Pomdp};
use crate::error::{Error, Result};

/// A probability vector over states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Belief(Vec<f64>);

impl Belief {
    /// Validated belief.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        check_distribution(&weights, || "belief".to_string())?;
        Ok(Self(weights))
    }

    /// Uniform belief over `n` states.
    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    /// Point mass on state `k` of `n`.
    pub fn point(n: usize, k: usize) -> Self {
        let mut w = vec![0.0; n];
        w[k] = 1.0;
        Self(w)
    }

    /// Initial belief of a model.
    pub fn initial(pomdp: &Pomdp) -> Self {
        Self(pomdp.initial().to_vec())
    }

    /// Weights.
    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    /// Consume into the weight vector.
    pub fn into_weights(self) -> Vec<f64> {
        self.0
    }
}

/// Outcome of a Bayes filter step.
#[derive(Debug, Clone, PartialEq)]
pub enum BeliefUpdate {
    /// Normalized posterior and the pre-normalization observation probability.
    Posterior { belief: Belief, probability: f64 },
    /// The observation has zero probability under the belief and action.
    ZeroMass,
}

impl BeliefUpdate {
    /// Posterior belief, if any.
    pub fn belief(&self) -> Option<&Belief> {
        match self {
            Self::Posterior { belief, .. } => Some(belief),
            Self::ZeroMass => None,
        }
    }

    /// Observation probability (0 for a zero-mass update).
    pub fn probability(&self) -> f64 {
        match self {
            Self::Posterior { probability, .. } => *probability,
            Self::ZeroMass => 0.0,
        }
    }
}

/// Exact Bayes filter step `b ↦ b^{a,o}`.
pub fn belief_update(pomdp: &Pomdp, belief: &Belief, a: usize, o: usize) -> Result<BeliefUpdate> {
    if belief.0.len() != pomdp.n_states() {
        return Err(Error::DimensionMismatch(format!(
            "belief over {} states for |S|={}",
            belief.0.len(),
            pomdp.n_states()
        )));
    }
    if a >= pomdp.n_actions() || o >= pomdp.n_observations() {
        return Err(Error::DimensionMismatch(format!("action {a} / observation {o} out of range")));
    }
    let mut out = vec![0.0; pomdp.n_states()];
    let mass = pomdp.filter_unnormalized(&belief.0, a, o, &mut out);
    if mass <= 0.0 {
        return Ok(BeliefUpdate::ZeroMass);
    }
    out.iter_mut().for_each(|x| *x /= mass);
    Ok(BeliefUpdate::Posterior { belief: Belief(out), probability: mass })
}

/// `exp(H(b))` with natural-log entropy; lies in `[1, |S|]`.
pub fn effective_dimension(belief: &Belief) -> f64 {
    let h: f64 = belief.0.iter().filter(|&&w| w > 0.0).map(|&w| -w * w.ln()).sum();
    h.exp()
}
