//! Finite POMDP representation with validated kernels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transport::GroundMetric;

/// Tolerance on probability-vector sums.
pub const PROB_TOL: f64 = 1e-12;

/// Raw parts of a [`Pomdp`], validated by [`Pomdp::new`].
#[derive(Debug, Clone)]
pub struct PomdpParts {
    /// Model name used in artifacts.
    pub name: String,
    /// State labels; their count fixes `|S|`.
    pub states: Vec<String>,
    /// Action labels; their count fixes `|A|`.
    pub actions: Vec<String>,
    /// Observation labels; their count fixes `|O|`.
    pub observations: Vec<String>,
    /// `P(s' | s, a)` laid out as `[a][s][s']`.
    pub transition: Vec<f64>,
    /// `Z(o | s', a)` laid out as `[a][s'][o]`.
    pub observation: Vec<f64>,
    /// `R(s, a)` laid out as `[s][a]`.
    pub reward: Vec<f64>,
    /// Initial belief over states.
    pub initial: Vec<f64>,
    /// Ground metric on observations.
    pub metric: GroundMetric,
}

/// A finite POMDP `⟨S, A, O, P, Z, R, b0⟩` whose observation kernel depends on the
/// successor state and the action.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Pomdp {
    name: String,
    states: Vec<String>,
    actions: Vec<String>,
    observations: Vec<String>,
    transition: Vec<f64>,
    observation: Vec<f64>,
    reward: Vec<f64>,
    initial: Vec<f64>,
    metric: GroundMetric,
}

pub(crate) fn check_distribution(v: &[f64], context: impl Fn() -> String) -> Result<()> {
    let mut total = 0.0;
    for &x in v {
        if !x.is_finite() || x < 0.0 {
            return Err(Error::InvalidDistribution { context: context(), reason: format!("entry {x}") });
        }
        total += x;
    }
    if (total - 1.0).abs() > PROB_TOL {
        return Err(Error::InvalidDistribution { context: context(), reason: format!("sum {total}") });
    }
    Ok(())
}

impl Pomdp {
    /// Validate and assemble a model.
    pub fn new(parts: PomdpParts) -> Result<Self> {
        let (ns, na, no) = (parts.states.len(), parts.actions.len(), parts.observations.len());
        if ns == 0 || na == 0 || no == 0 {
            return Err(Error::DimensionMismatch(format!("|S|={ns}, |A|={na}, |O|={no} must all be ≥ 1")));
        }
        let expect = |what: &str, got: usize, want: usize| -> Result<()> {
            if got != want {
                return Err(Error::DimensionMismatch(format!("{what}: expected {want} entries, got {got}")));
            }
            Ok(())
        };
        expect("transition", parts.transition.len(), na * ns * ns)?;
        expect("observation", parts.observation.len(), na * ns * no)?;
        expect("reward", parts.reward.len(), ns * na)?;
        expect("initial belief", parts.initial.len(), ns)?;
        if parts.metric.size() != no {
            return Err(Error::DimensionMismatch(format!("metric over {} symbols for |O|={no}", parts.metric.size())));
        }
        for a in 0..na {
            for s in 0..ns {
                let row = &parts.transition[(a * ns + s) * ns..(a * ns + s + 1) * ns];
                check_distribution(row, || format!("{}: P(· | s={s}, a={a})", parts.name))?;
                let zrow = &parts.observation[(a * ns + s) * no..(a * ns + s + 1) * no];
                check_distribution(zrow, || format!("{}: Z(· | s'={s}, a={a})", parts.name))?;
            }
        }
        if let Some(r) = parts.reward.iter().find(|r| !r.is_finite()) {
            return Err(Error::InvalidDistribution { context: format!("{}: reward", parts.name), reason: format!("entry {r}") });
        }
        check_distribution(&parts.initial, || format!("{}: initial belief", parts.name))?;
        Ok(Self {
            name: parts.name,
            states: parts.states,
            actions: parts.actions,
            observations: parts.observations,
            transition: parts.transition,
            observation: parts.observation,
            reward: parts.reward,
            initial: parts.initial,
            metric: parts.metric,
        })
    }

    /// Decompose into raw parts (for derived models).
    pub fn to_parts(&self) -> PomdpParts {
        PomdpParts {
            name: self.name.clone(),
            states: self.states.clone(),
            actions: self.actions.clone(),
            observations: self.observations.clone(),
            transition: self.transition.clone(),
            observation: self.observation.clone(),
            reward: self.reward.clone(),
            initial: self.initial.clone(),
            metric: self.metric.clone(),
        }
    }

    /// Same dynamics with a different initial belief.
    pub fn with_initial(&self, initial: Vec<f64>) -> Result<Self> {
        let mut parts = self.to_parts();
        parts.initial = initial;
        Self::new(parts)
    }

    /// Same dynamics with a different reward table `[s][a]`.
    pub fn with_reward(&self, reward: Vec<f64>) -> Result<Self> {
        let mut parts = self.to_parts();
        parts.reward = reward;
        Self::new(parts)
    }

    /// Same dynamics with a different ground metric.
    pub fn with_metric(&self, metric: GroundMetric) -> Result<Self> {
        let mut parts = self.to_parts();
        parts.metric = metric;
        Self::new(parts)
    }

    /// Model name.
    pub fn name(&self) -> &str {
        &self.name
    }

    /// `|S|`.
    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    /// `|A|`.
    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }

    /// `|O|`.
    pub fn n_observations(&self) -> usize {
        self.observations.len()
    }

    /// State labels.
    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    /// Action labels.
    pub fn action_names(&self) -> &[String] {
        &self.actions
    }

    /// Observation labels.
    pub fn observation_names(&self) -> &[String] {
        &self.observations
    }

    /// Ground metric on observations.
    pub fn metric(&self) -> &GroundMetric {
        &self.metric
    }

    /// Initial belief.
    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    /// `P(s' | s, a)`.
    #[inline]
    pub fn p(&self, a: usize, s: usize, s2: usize) -> f64 {
        let ns = self.states.len();
        self.transition[(a * ns + s) * ns + s2]
    }

    /// Row `P(· | s, a)`.
    #[inline]
    pub fn transition_row(&self, a: usize, s: usize) -> &[f64] {
        let ns = self.states.len();
        &self.transition[(a * ns + s) * ns..(a * ns + s + 1) * ns]
    }

    /// `Z(o | s', a)`.
    #[inline]
    pub fn z(&self, a: usize, s2: usize, o: usize) -> f64 {
        let (ns, no) = (self.states.len(), self.observations.len());
        self.observation[(a * ns + s2) * no + o]
    }

    /// Row `Z(· | s', a)`.
    #[inline]
    pub fn observation_row(&self, a: usize, s2: usize) -> &[f64] {
        let (ns, no) = (self.states.len(), self.observations.len());
        &self.observation[(a * ns + s2) * no..(a * ns + s2 + 1) * no]
    }

    /// `R(s, a)`.
    #[inline]
    pub fn r(&self, s: usize, a: usize) -> f64 {
        self.reward[s * self.actions.len() + a]
    }

    /// Reward table `[s][a]`.
    pub fn reward_table(&self) -> &[f64] {
        &self.reward
    }

    /// `max R − min R`, the default observation-Lipschitz constant under a discrete metric.
    pub fn reward_range(&self) -> f64 {
        let max = self.reward.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = self.reward.iter().copied().fold(f64::INFINITY, f64::min);
        max - min
    }

    /// Predicted state distribution `b P_a` (unnormalized input allowed).
    pub fn predict(&self, belief: &[f64], a: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for (s, &w) in belief.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for (o, &p) in out.iter_mut().zip(self.transition_row(a, s)) {
                *o += w * p;
            }
        }
    }

    /// Unnormalized posterior `(b P_a) ⊙ Z(o | ·, a)` written to `out`; returns its mass.
    pub fn filter_unnormalized(&self, belief: &[f64], a: usize, o: usize, out: &mut [f64]) -> f64 {
        self.predict(belief, a, out);
        let mut mass = 0.0;
        for (s2, x) in out.iter_mut().enumerate() {
            *x *= self.z(a, s2, o);
            mass += *x;
        }
        mass
    }

    /// Next-observation distribution `P(o | b, a)` for a (possibly unnormalized) belief.
    pub fn observation_distribution(&self, belief: &[f64], a: usize) -> Vec<f64> {
        let mut pred = vec![0.0; self.n_states()];
        self.predict(belief, a, &mut pred);
        let mut out = vec![0.0; self.n_observations()];
        for (s2, &w) in pred.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for (o, z) in out.iter_mut().zip(self.observation_row(a, s2)) {
                *o += w * z;
            }
        }
        out
    }

    /// Expected immediate reward `Σ_s b(s) R(s, a)`.
    pub fn expected_reward(&self, belief: &[f64], a: usize) -> f64 {
        belief.iter().enumerate().map(|(s, &w)| w * self.r(s, a)).sum()
    }
}
