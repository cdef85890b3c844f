//! Wrappers: an action remapping plus an observation channel.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_distribution, Pomdp, PomdpParts};
use crate::probes::ObservationModel;
use crate::transport::{w1_sequences, DiscreteDistribution, GroundMetric};

/// Action remap `g: A' → Δ(A)` and observation channel `C: O → Δ(O')`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wrapper {
    name: String,
    /// Actions of the wrapped model.
    actions: Vec<String>,
    /// Number of original actions.
    base_actions: usize,
    /// `g(a | a')` laid out as `[a'][a]`.
    remap: Vec<f64>,
    /// Observations of the wrapped model.
    observations: Vec<String>,
    /// Number of original observations.
    base_observations: usize,
    /// `C(o' | o)` laid out as `[o][o']`.
    channel: Vec<f64>,
    /// Ground metric on wrapped observations.
    metric: GroundMetric,
}

impl Wrapper {
    /// Validated wrapper.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        actions: Vec<String>,
        base_actions: usize,
        remap: Vec<f64>,
        observations: Vec<String>,
        base_observations: usize,
        channel: Vec<f64>,
        metric: GroundMetric,
    ) -> Result<Self> {
        if remap.len() != actions.len() * base_actions || channel.len() != base_observations * observations.len() {
            return Err(Error::DimensionMismatch("wrapper table sizes do not match its alphabets".into()));
        }
        if metric.size() != observations.len() {
            return Err(Error::DimensionMismatch(format!("wrapped metric over {} symbols for {} observations", metric.size(), observations.len())));
        }
        for (k, row) in remap.chunks(base_actions.max(1)).enumerate() {
            check_distribution(row, || format!("action remap row {k}"))?;
        }
        for (k, row) in channel.chunks(observations.len().max(1)).enumerate() {
            check_distribution(row, || format!("channel row {k}"))?;
        }
        Ok(Self { name: name.into(), actions, base_actions, remap, observations, base_observations, channel, metric })
    }

    /// Identity wrapper for `pomdp`.
    pub fn identity(pomdp: &Pomdp) -> Self {
        let (na, no) = (pomdp.n_actions(), pomdp.n_observations());
        Self::new(
            "identity",
            pomdp.action_names().to_vec(),
            na,
            identity_table(na),
            pomdp.observation_names().to_vec(),
            no,
            identity_table(no),
            pomdp.metric().clone(),
        )
        .expect("identity is valid")
    }

    /// Deterministic observation merge `o ↦ map[o]` with identity actions.
    pub fn observation_merge(pomdp: &Pomdp, map: &[usize], names: Vec<String>, metric: GroundMetric) -> Result<Self> {
        let (na, no, k) = (pomdp.n_actions(), pomdp.n_observations(), names.len());
        if map.len() != no || map.iter().any(|&m| m >= k) {
            return Err(Error::DimensionMismatch(format!("merge map must send {no} observations into {k}")));
        }
        let mut channel = vec![0.0; no * k];
        for (o, &m) in map.iter().enumerate() {
            channel[o * k + m] = 1.0;
        }
        Self::new(format!("merge{map:?}"), pomdp.action_names().to_vec(), na, identity_table(na), names, no, channel, metric)
    }

    /// Symmetric noisy channel keeping each observation with probability `1 − flip`.
    pub fn symmetric_noise(pomdp: &Pomdp, flip: f64) -> Result<Self> {
        let (na, no) = (pomdp.n_actions(), pomdp.n_observations());
        if !(0.0..=1.0).contains(&flip) || no < 2 {
            return Err(Error::InvalidConfig(format!("noise level {flip} needs |O| ≥ 2 and flip in [0, 1]")));
        }
        let off = flip / (no - 1) as f64;
        let channel = (0..no * no).map(|k| if k / no == k % no { 1.0 - flip } else { off }).collect();
        Self::new(
            format!("noise{flip}"),
            pomdp.action_names().to_vec(),
            na,
            identity_table(na),
            pomdp.observation_names().to_vec(),
            no,
            channel,
            pomdp.metric().clone(),
        )
    }

    /// Replace the action remap.
    pub fn with_remap(mut self, actions: Vec<String>, remap: Vec<f64>) -> Result<Self> {
        self.actions = actions;
        self.remap = remap;
        Self::new(self.name, self.actions, self.base_actions, self.remap, self.observations, self.base_observations, self.channel, self.metric)
    }

    /// Label.
    pub fn name(&self) -> &str {
        &self.name
    }

    /// `|A'|`.
    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }

    /// `|O'|`.
    pub fn n_observations(&self) -> usize {
        self.observations.len()
    }

    /// `g(a | a')`.
    pub fn remap(&self, wrapped: usize, a: usize) -> f64 {
        self.remap[wrapped * self.base_actions + a]
    }

    /// `C(o' | o)` row.
    pub fn channel_row(&self, o: usize) -> &[f64] {
        &self.channel[o * self.n_observations()..(o + 1) * self.n_observations()]
    }

    /// Channel table `[o][o']`.
    pub fn channel(&self) -> &[f64] {
        &self.channel
    }

    /// Metric on wrapped observations.
    pub fn metric(&self) -> &GroundMetric {
        &self.metric
    }

    /// True when every wrapped action maps to a single original action.
    pub fn deterministic_remap(&self) -> bool {
        self.remap.chunks(self.base_actions).all(|r| r.iter().filter(|&&x| x > 0.0).count() == 1)
    }

    /// `L_C` with respect to the original metric `d_O`.
    pub fn lipschitz(&self, d_in: &GroundMetric) -> Result<f64> {
        lipschitz_constant(&self.channel, self.base_observations, self.n_observations(), d_in, &self.metric)
    }

    fn check_base(&self, n_actions: usize, n_obs: usize) -> Result<()> {
        if n_actions != self.base_actions || n_obs != self.base_observations {
            return Err(Error::DimensionMismatch(format!(
                "wrapper expects |A|={}, |O|={}; model has |A|={n_actions}, |O|={n_obs}",
                self.base_actions, self.base_observations
            )));
        }
        Ok(())
    }
}

fn identity_table(n: usize) -> Vec<f64> {
    (0..n * n).map(|k| if k / n == k % n { 1.0 } else { 0.0 }).collect()
}

/// `max_{o ≠ o'} W1(C(o), C(o'); d_O') / d_O(o, o')` (0 for a single observation).
pub fn lipschitz_constant(channel: &[f64], n_in: usize, n_out: usize, d_in: &GroundMetric, d_out: &GroundMetric) -> Result<f64> {
    if channel.len() != n_in * n_out || d_in.size() != n_in || d_out.size() != n_out {
        return Err(Error::DimensionMismatch("channel and metrics disagree on alphabet sizes".into()));
    }
    let rows: Vec<DiscreteDistribution> = channel
        .chunks(n_out)
        .map(|r| DiscreteDistribution::new(r.iter().enumerate().map(|(k, &p)| (k as u64, p)).collect()))
        .collect::<Result<_>>()?;
    let mut best: f64 = 0.0;
    for i in 0..n_in {
        for j in i + 1..n_in {
            let d = d_in.d(i, j);
            if d > 0.0 {
                best = best.max(w1_sequences(&rows[i], &rows[j], 1, d_out)? / d);
            }
        }
    }
    Ok(best)
}

/// `W(M)`: kernels composed with the remap and channel.
///
/// With a deterministic remap the state space is unchanged. A stochastic remap makes the
/// emission depend on the sampled original action, so states become `(s, a_prev)`.
pub fn apply_wrapper(pomdp: &Pomdp, wrapper: &Wrapper) -> Result<Pomdp> {
    let (na, no, ns) = (pomdp.n_actions(), pomdp.n_observations(), pomdp.n_states());
    wrapper.check_base(na, no)?;
    let (wa, wo) = (wrapper.n_actions(), wrapper.n_observations());
    let emit = |a: usize, s2: usize, o2: usize| -> f64 { (0..no).map(|o| pomdp.z(a, s2, o) * wrapper.channel[o * wo + o2]).sum() };
    let name = format!("{}|{}", pomdp.name(), wrapper.name);
    if wrapper.deterministic_remap() {
        let pick: Vec<usize> = (0..wa).map(|x| (0..na).find(|&a| wrapper.remap(x, a) > 0.0).expect("row sums to one")).collect();
        let mut transition = Vec::with_capacity(wa * ns * ns);
        let mut observation = Vec::with_capacity(wa * ns * wo);
        for &a in &pick {
            for s in 0..ns {
                transition.extend_from_slice(pomdp.transition_row(a, s));
            }
            for s2 in 0..ns {
                observation.extend((0..wo).map(|o2| emit(a, s2, o2)));
            }
        }
        let reward = (0..ns).flat_map(|s| pick.iter().map(move |&a| pomdp.r(s, a))).collect();
        return Pomdp::new(PomdpParts {
            name,
            states: pomdp.state_names().to_vec(),
            actions: wrapper.actions.clone(),
            observations: wrapper.observations.clone(),
            transition,
            observation,
            reward,
            initial: pomdp.initial().to_vec(),
            metric: wrapper.metric.clone(),
        });
    }
    // Augmented states (s, a_prev) at index s·|A| + a_prev.
    let n2 = ns * na;
    let mut transition = vec![0.0; wa * n2 * n2];
    let mut observation = vec![0.0; wa * n2 * wo];
    let mut reward = vec![0.0; n2 * wa];
    for x in 0..wa {
        for s in 0..ns {
            let mut row = vec![0.0; n2];
            for a in 0..na {
                let g = wrapper.remap(x, a);
                for (s2, &p) in pomdp.transition_row(a, s).iter().enumerate() {
                    row[s2 * na + a] += g * p;
                }
            }
            let r: f64 = (0..na).map(|a| wrapper.remap(x, a) * pomdp.r(s, a)).sum();
            for prev in 0..na {
                let from = s * na + prev;
                transition[(x * n2 + from) * n2..(x * n2 + from + 1) * n2].copy_from_slice(&row);
                reward[from * wa + x] = r;
            }
        }
        for s2 in 0..ns {
            for a in 0..na {
                let to = s2 * na + a;
                for o2 in 0..wo {
                    observation[(x * n2 + to) * wo + o2] = emit(a, s2, o2);
                }
            }
        }
    }
    let mut initial = vec![0.0; n2];
    for (s, &b) in pomdp.initial().iter().enumerate() {
        initial[s * na] = b;
    }
    let states = pomdp.state_names().iter().flat_map(|s| pomdp.action_names().iter().map(move |a| format!("{s}/{a}"))).collect();
    Pomdp::new(PomdpParts {
        name,
        states,
        actions: wrapper.actions.clone(),
        observations: wrapper.observations.clone(),
        transition,
        observation,
        reward,
        initial,
        metric: wrapper.metric.clone(),
    })
}

/// `W(M)` for any observation model, carried as a mixture of base branches.
#[derive(Debug, Clone, Copy)]
pub struct Wrapped<'a, M> {
    base: &'a M,
    wrapper: &'a Wrapper,
}

impl<'a, M: ObservationModel> Wrapped<'a, M> {
    /// Wrap `base`; alphabets must match the wrapper's input side.
    pub fn new(base: &'a M, wrapper: &'a Wrapper) -> Result<Self> {
        wrapper.check_base(base.n_actions(), base.n_observations())?;
        Ok(Self { base, wrapper })
    }
}

impl<M: ObservationModel> ObservationModel for Wrapped<'_, M> {
    type Info = Vec<(f64, M::Info)>;

    fn n_actions(&self) -> usize {
        self.wrapper.n_actions()
    }

    fn n_observations(&self) -> usize {
        self.wrapper.n_observations()
    }

    fn root(&self) -> Self::Info {
        vec![(1.0, self.base.root())]
    }

    fn step(&self, info: &Self::Info, x: usize) -> Vec<(f64, Option<Self::Info>)> {
        let wo = self.wrapper.n_observations();
        let mut parts: Vec<Vec<(f64, M::Info)>> = vec![Vec::new(); wo];
        for (w, inner) in info {
            for a in 0..self.base.n_actions() {
                let g = self.wrapper.remap(x, a);
                if g == 0.0 {
                    continue;
                }
                for (o, (p, child)) in self.base.step(inner, a).into_iter().enumerate() {
                    let Some(child) = child else { continue };
                    for (o2, &c) in self.wrapper.channel_row(o).iter().enumerate() {
                        let m = w * g * p * c;
                        if m > 0.0 {
                            parts[o2].push((m, child.clone()));
                        }
                    }
                }
            }
        }
        parts
            .into_iter()
            .map(|mut mix| {
                let total: f64 = mix.iter().map(|(m, _)| m).sum();
                if total > 0.0 {
                    mix.iter_mut().for_each(|(m, _)| *m /= total);
                    (total, Some(mix))
                } else {
                    (0.0, None)
                }
            })
            .collect()
    }

    fn expected_reward(&self, info: &Self::Info, x: usize) -> f64 {
        info.iter()
            .map(|(w, inner)| w * (0..self.base.n_actions()).map(|a| self.wrapper.remap(x, a) * self.base.expected_reward(inner, a)).sum::<f64>())
            .sum()
    }

    fn merge(&self, _: &Self::Info, _: f64, _: &Self::Info, _: f64) -> Option<Self::Info> {
        None
    }
}
