//! Objectives and exact policy evaluation on the history tree.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Pomdp;
use crate::probes::{rollout, Fsc, ObservationModel};
use crate::transport::GroundMetric;

/// Weight of the observation term in the action+observation score.
pub const SCORE_OBS_WEIGHT: f64 = 0.5;
/// Weight of the productive-action term in the action+observation score.
pub const SCORE_ACTION_WEIGHT: f64 = 0.25;

/// What a policy is scored on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ObjectiveKind {
    /// `Σ_t R(s_t, a_t)`.
    Latent,
    /// `Σ_t g(o_t)`.
    ObservationScore {
        /// `g: O → [0, 1]`.
        g: Vec<f64>,
    },
    /// `Σ_t [w_o · g(o_t) + w_a · 1[a_t productive]]`.
    ActionObservationScore {
        /// `g: O → [0, 1]`.
        g: Vec<f64>,
        /// Productive-action indicator.
        productive: Vec<bool>,
        /// `w_o`.
        obs_weight: f64,
        /// `w_a`.
        action_weight: f64,
    },
}

/// An objective with its observation-Lipschitz constant `L_R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    /// Objective family.
    pub kind: ObjectiveKind,
    /// `L_R`.
    pub reward_lipschitz: f64,
}

/// `g` with value 1 on the first observation symbol.
pub fn first_symbol_score(n_obs: usize) -> Vec<f64> {
    (0..n_obs).map(|o| if o == 0 { 1.0 } else { 0.0 }).collect()
}

/// Productive actions: door openings and moves.
pub fn productive_actions(pomdp: &Pomdp) -> Vec<bool> {
    const MOVES: [&str; 8] = ["up", "down", "left", "right", "north", "south", "east", "west"];
    pomdp.action_names().iter().map(|a| a.starts_with("open") || MOVES.contains(&a.as_str())).collect()
}

fn score_lipschitz(g: &[f64], metric: &GroundMetric) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..g.len() {
        for j in i + 1..g.len() {
            let d = metric.d(i, j);
            if d > 0.0 {
                best = best.max((g[i] - g[j]).abs() / d);
            }
        }
    }
    best
}

impl Objective {
    /// Latent reward with `L_R` set to the reward range.
    pub fn latent(pomdp: &Pomdp) -> Self {
        Self { kind: ObjectiveKind::Latent, reward_lipschitz: pomdp.reward_range() }
    }

    /// Observation score `g` with `L_R = max |g(o) − g(o')| / d(o, o')`.
    pub fn observation_score(pomdp: &Pomdp, g: Vec<f64>) -> Result<Self> {
        check_score(&g, pomdp.n_observations())?;
        let reward_lipschitz = score_lipschitz(&g, pomdp.metric());
        Ok(Self { kind: ObjectiveKind::ObservationScore { g }, reward_lipschitz })
    }

    /// Default observation score: 1 on the first symbol.
    pub fn default_observation_score(pomdp: &Pomdp) -> Self {
        Self::observation_score(pomdp, first_symbol_score(pomdp.n_observations())).expect("valid score")
    }

    /// Default action+observation score with the benchmark's productive actions.
    pub fn default_action_observation_score(pomdp: &Pomdp) -> Self {
        let g = first_symbol_score(pomdp.n_observations());
        let reward_lipschitz = SCORE_OBS_WEIGHT * score_lipschitz(&g, pomdp.metric());
        Self {
            kind: ObjectiveKind::ActionObservationScore {
                g,
                productive: productive_actions(pomdp),
                obs_weight: SCORE_OBS_WEIGHT,
                action_weight: SCORE_ACTION_WEIGHT,
            },
            reward_lipschitz,
        }
    }

    /// Override `L_R`.
    pub fn with_lipschitz(mut self, reward_lipschitz: f64) -> Result<Self> {
        if reward_lipschitz.is_nan() || reward_lipschitz < 0.0 {
            return Err(Error::InvalidConfig(format!("L_R = {reward_lipschitz} must be ≥ 0")));
        }
        self.reward_lipschitz = reward_lipschitz;
        Ok(self)
    }

    /// Short identifier.
    pub fn id(&self) -> &'static str {
        match self.kind {
            ObjectiveKind::Latent => "latent",
            ObjectiveKind::ObservationScore { .. } => "obs-score",
            ObjectiveKind::ActionObservationScore { .. } => "action-obs-score",
        }
    }

    /// Measurable from the observation-action trajectory alone.
    pub fn is_agent_accessible(&self) -> bool {
        !matches!(self.kind, ObjectiveKind::Latent)
    }
}

fn check_score(g: &[f64], n_obs: usize) -> Result<()> {
    if g.len() != n_obs || g.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(Error::InvalidConfig(format!("score needs {n_obs} values in [0, 1]")));
    }
    Ok(())
}

/// Exact expected objective of `fsc` over `horizon` steps.
pub fn policy_value<M: ObservationModel>(model: &M, fsc: &Fsc, objective: &Objective, horizon: usize) -> Result<f64> {
    let r = rollout(model, fsc, horizon, &[])?;
    let no = model.n_observations();
    let obs_term = |g: &[f64]| -> Result<f64> {
        if g.len() != no {
            return Err(Error::DimensionMismatch(format!("score over {} symbols for |O|={no}", g.len())));
        }
        Ok(r.masses[1..].iter().map(|layer| layer.iter().enumerate().map(|(i, &p)| p * g[i % no]).sum::<f64>()).sum())
    };
    match &objective.kind {
        ObjectiveKind::Latent => Ok(r.latent_reward),
        ObjectiveKind::ObservationScore { g } => obs_term(g),
        ObjectiveKind::ActionObservationScore { g, productive, obs_weight, action_weight } => {
            if productive.len() != model.n_actions() {
                return Err(Error::DimensionMismatch("productive-action mask size".into()));
            }
            let acts: f64 = r.action_mass.iter().map(|m| m.iter().zip(productive).filter(|(_, &p)| p).map(|(w, _)| w).sum::<f64>()).sum();
            Ok(obs_weight * obs_term(g)? + action_weight * acts)
        }
    }
}
