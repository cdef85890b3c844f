//! Closed-loop observation laws by exact forward expansion of the history tree.

use crate::error::{Error, Result};
use crate::model::Pomdp;
use crate::transport::DiscreteDistribution;

use super::fsc::Fsc;

/// A process that emits observations in response to actions.
///
/// `Info` is the sufficient statistic carried along one branch of the history tree
/// (a normalized belief for a [`Pomdp`]).
pub trait ObservationModel: Sync {
    /// Per-branch state.
    type Info: Clone + Send + Sync;

    /// `|A|`.
    fn n_actions(&self) -> usize;

    /// `|O|`.
    fn n_observations(&self) -> usize;

    /// State before any action.
    fn root(&self) -> Self::Info;

    /// For action `a`, the probability of each observation and the successor state
    /// (`None` when that probability is zero).
    fn step(&self, info: &Self::Info, a: usize) -> Vec<(f64, Option<Self::Info>)>;

    /// Observation probabilities only (used at the last stage).
    fn observation_probs(&self, info: &Self::Info, a: usize) -> Vec<f64> {
        self.step(info, a).into_iter().map(|(p, _)| p).collect()
    }

    /// Expected immediate latent reward.
    fn expected_reward(&self, info: &Self::Info, a: usize) -> f64;

    /// Combine two branches that reached the same controller node, if the model allows it.
    fn merge(&self, a: &Self::Info, wa: f64, b: &Self::Info, wb: f64) -> Option<Self::Info>;
}

impl ObservationModel for Pomdp {
    type Info = Vec<f64>;

    fn n_actions(&self) -> usize {
        Pomdp::n_actions(self)
    }

    fn n_observations(&self) -> usize {
        Pomdp::n_observations(self)
    }

    fn root(&self) -> Vec<f64> {
        self.initial().to_vec()
    }

    fn step(&self, info: &Vec<f64>, a: usize) -> Vec<(f64, Option<Vec<f64>>)> {
        let ns = self.n_states();
        let mut pred = vec![0.0; ns];
        self.predict(info, a, &mut pred);
        (0..self.n_observations())
            .map(|o| {
                let mut post: Vec<f64> = pred.iter().enumerate().map(|(s2, &w)| w * self.z(a, s2, o)).collect();
                let mass: f64 = post.iter().sum();
                if mass > 0.0 {
                    post.iter_mut().for_each(|x| *x /= mass);
                    (mass, Some(post))
                } else {
                    (0.0, None)
                }
            })
            .collect()
    }

    fn observation_probs(&self, info: &Vec<f64>, a: usize) -> Vec<f64> {
        self.observation_distribution(info, a)
    }

    fn expected_reward(&self, info: &Vec<f64>, a: usize) -> f64 {
        Pomdp::expected_reward(self, info, a)
    }

    fn merge(&self, a: &Vec<f64>, wa: f64, b: &Vec<f64>, wb: f64) -> Option<Vec<f64>> {
        let total = wa + wb;
        Some(a.iter().zip(b).map(|(x, y)| (wa * x + wb * y) / total).collect())
    }
}

/// One weighted branch: joint probability, controller node, model state.
#[derive(Debug, Clone)]
struct Branch<I> {
    weight: f64,
    node: usize,
    info: I,
}

fn push_branch<M: ObservationModel>(model: &M, list: &mut Vec<Branch<M::Info>>, b: Branch<M::Info>) {
    for existing in list.iter_mut().filter(|e| e.node == b.node) {
        if let Some(info) = model.merge(&existing.info, existing.weight, &b.info, b.weight) {
            existing.info = info;
            existing.weight += b.weight;
            return;
        }
    }
    list.push(b);
}

/// Result of a forward expansion, optionally conditioned on a history prefix.
///
/// `masses[d]` holds joint probabilities of depth-`d` histories: a single entry for
/// `d ≤ prefix.len()` and `|O|^{d−t}` entries below the prefix, indexed in base `|O|`
/// with the first post-prefix symbol most significant.
#[derive(Debug, Clone)]
pub struct Rollout {
    /// Horizon `T`.
    pub horizon: usize,
    /// `|O|`.
    pub n_obs: usize,
    /// Conditioning prefix.
    pub prefix: Vec<usize>,
    /// Joint masses per depth.
    pub masses: Vec<Vec<f64>>,
    /// `P(a_d = a)` per stage, joint with the prefix event for stages inside the prefix.
    pub action_mass: Vec<Vec<f64>>,
    /// `Σ_d E[R(s_d, a_d)]` (meaningful for an empty prefix).
    pub latent_reward: f64,
}

impl Rollout {
    /// Flat masses over all histories in [`crate::model::HistoryTree`] order (empty prefix only).
    pub fn flat_masses(&self) -> Vec<f64> {
        debug_assert!(self.prefix.is_empty());
        self.masses.iter().flatten().copied().collect()
    }

    /// Leaf masses at depth `T`.
    pub fn leaves(&self) -> &[f64] {
        &self.masses[self.horizon]
    }
}

/// Exact forward expansion of the closed-loop process to depth `horizon`.
///
/// For `d < prefix.len()` only the branch consistent with `prefix[d]` is followed.
pub fn rollout<M: ObservationModel>(model: &M, fsc: &Fsc, horizon: usize, prefix: &[usize]) -> Result<Rollout> {
    let (na, no) = (model.n_actions(), model.n_observations());
    fsc.check_compatible(na, no, horizon)?;
    if prefix.len() > horizon {
        return Err(Error::InvalidConfig(format!("history depth {} exceeds horizon {horizon}", prefix.len())));
    }
    if let Some(&o) = prefix.iter().find(|&&o| o >= no) {
        return Err(Error::DimensionMismatch(format!("observation {o} outside |O|={no}")));
    }
    let mut masses = Vec::with_capacity(horizon + 1);
    let mut action_mass = vec![vec![0.0; na]; horizon];
    let mut latent_reward = 0.0;
    let mut layer: Vec<Vec<Branch<M::Info>>> = vec![vec![Branch { weight: 1.0, node: 0, info: model.root() }]];
    masses.push(vec![1.0]);
    for d in 0..horizon {
        let restricted = d < prefix.len();
        let width = if restricted { 1 } else { layer.len() * no };
        let last = d + 1 == horizon;
        let mut next: Vec<Vec<Branch<M::Info>>> = (0..width).map(|_| Vec::new()).collect();
        let mut next_mass = vec![0.0; width];
        for (i, branches) in layer.iter().enumerate() {
            for b in branches {
                for (a, pa) in fsc.act(d, b.node).iter() {
                    let w = b.weight * pa;
                    action_mass[d][a] += w;
                    latent_reward += w * model.expected_reward(&b.info, a);
                    if last {
                        let probs = model.observation_probs(&b.info, a);
                        for (z, &pz) in probs.iter().enumerate() {
                            if restricted && z != prefix[d] {
                                continue;
                            }
                            let slot = if restricted { 0 } else { i * no + z };
                            next_mass[slot] += w * pz;
                        }
                        continue;
                    }
                    for (z, (pz, info)) in model.step(&b.info, a).into_iter().enumerate() {
                        if restricted && z != prefix[d] {
                            continue;
                        }
                        let Some(info) = info else { continue };
                        let wz = w * pz;
                        if wz == 0.0 {
                            continue;
                        }
                        let slot = if restricted { 0 } else { i * no + z };
                        next_mass[slot] += wz;
                        for (n2, pn) in fsc.next(d, b.node, z).iter() {
                            push_branch(model, &mut next[slot], Branch { weight: wz * pn, node: n2, info: info.clone() });
                        }
                    }
                }
            }
        }
        masses.push(next_mass);
        layer = next;
    }
    Ok(Rollout { horizon, n_obs: no, prefix: prefix.to_vec(), masses, action_mass, latent_reward })
}

/// Conditional suffix law with its reach probability.
#[derive(Debug, Clone, PartialEq)]
pub struct SuffixLaw {
    /// `P(O_{t+1:T} | h)`; `None` when the history is unreachable.
    pub law: Option<DiscreteDistribution>,
    /// `P(h)`.
    pub reach: f64,
}

/// Law over the leaves below one history, normalized; `None` if the block has no mass.
pub fn normalized_block(leaves: &[f64]) -> Option<DiscreteDistribution> {
    let total: f64 = leaves.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let entries = leaves.iter().enumerate().filter(|(_, &m)| m > 0.0).map(|(k, &m)| (k as u64, m / total)).collect();
    Some(DiscreteDistribution::new(entries).expect("normalized block"))
}

/// Exact `P^π(O_{t+1:T} | h)` and `P^π(h)` under a controller.
pub fn suffix_law<M: ObservationModel>(model: &M, fsc: &Fsc, history: &[usize], horizon: usize) -> Result<SuffixLaw> {
    let r = rollout(model, fsc, horizon, history)?;
    let reach = r.masses[history.len()][0];
    if reach <= 0.0 {
        return Ok(SuffixLaw { law: None, reach: 0.0 });
    }
    Ok(SuffixLaw { law: normalized_block(r.leaves()), reach })
}

/// Full-horizon observation law `P^π(O_{1:T})`.
pub fn observation_law<M: ObservationModel>(model: &M, fsc: &Fsc, horizon: usize) -> Result<DiscreteDistribution> {
    let r = rollout(model, fsc, horizon, &[])?;
    normalized_block(r.leaves()).ok_or_else(|| Error::InvalidDistribution { context: "observation law".into(), reason: "no mass".into() })
}
