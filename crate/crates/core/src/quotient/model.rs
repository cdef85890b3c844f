//! Quotient POMDPs over history classes with canonical (uniform-average) beliefs.

use serde::{Deserialize, Serialize};

use super::partition::Partition;
use crate::error::{Error, Result};
use crate::model::{Pomdp, PomdpParts};
use crate::probes::{Choice, ObservationModel, ProbeFamily};
use crate::pseudometric::model_distance_per_probe;
use crate::transport::LawDistance;

/// Cap on stored canonical-belief entries (`(class, context)` pairs times `|S|`).
pub const QUOTIENT_BELIEF_CAP: u128 = 50_000_000;

/// Quotient of a POMDP by a history partition.
///
/// Each class `c` at depth `d` carries, for every open-loop action context `ctx`
/// (the actions taken so far, in base `|A|`), the canonical belief `b̄(c, ctx)`: the
/// uniform average of the member beliefs filtered under `ctx`, over members with
/// positive probability. The quotient emits the next observation from `b̄` and moves to
/// the class of the extended history. When no member of the successor class has mass
/// under the context, the canonical belief falls back to the Bayes update of `b̄`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuotientPomdp {
    base: Pomdp,
    partition: Partition,
    /// `canonical[d][class * |A|^d + ctx]` for `d < T`.
    canonical: Vec<Vec<Option<Vec<f64>>>>,
}

/// Branch state of the quotient process.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientInfo {
    /// Depth.
    pub depth: usize,
    /// Index of the realized history within its depth layer.
    pub history: usize,
    /// Action context in base `|A|`.
    pub context: usize,
    /// Canonical belief in force.
    pub belief: Vec<f64>,
}

fn bayes(pomdp: &Pomdp, belief: &[f64], a: usize, o: usize) -> Option<Vec<f64>> {
    let mut out = vec![0.0; pomdp.n_states()];
    let mass = pomdp.filter_unnormalized(belief, a, o, &mut out);
    if mass <= 0.0 {
        return None;
    }
    out.iter_mut().for_each(|x| *x /= mass);
    Some(out)
}

impl QuotientPomdp {
    /// Build the quotient; the partition must cover `pomdp`'s history tree.
    pub fn build(pomdp: &Pomdp, partition: &Partition) -> Result<Self> {
        let tree = partition.tree();
        let (ns, na, no) = (pomdp.n_states(), pomdp.n_actions(), pomdp.n_observations());
        if tree.n_obs() != no {
            return Err(Error::DimensionMismatch(format!("partition over |O|={} for a model with |O|={no}", tree.n_obs())));
        }
        let horizon = tree.horizon();
        let mut entries: u128 = 0;
        let mut ctx_count: u128 = 1;
        for d in 0..horizon {
            entries += tree.layer_size(d) as u128 * ctx_count * ns as u128;
            ctx_count *= na as u128;
        }
        if entries > QUOTIENT_BELIEF_CAP {
            return Err(Error::SizeGuard {
                what: "quotient canonical beliefs".into(),
                requested: entries,
                cap: QUOTIENT_BELIEF_CAP,
                hint: "reduce T or use layered segments".into(),
            });
        }
        let mut canonical = Vec::with_capacity(horizon);
        // Member beliefs at the current depth, indexed `h * n_ctx + ctx`.
        let mut members: Vec<Option<Vec<f64>>> = vec![Some(pomdp.initial().to_vec())];
        let mut n_ctx = 1usize;
        for d in 0..horizon {
            let classes = partition.classes_at(d);
            let mut sums: Vec<Option<(Vec<f64>, usize)>> = vec![None; classes * n_ctx];
            for h in 0..tree.layer_size(d) {
                let c = partition.class_of(d, h);
                for ctx in 0..n_ctx {
                    if let Some(b) = &members[h * n_ctx + ctx] {
                        let slot = sums[c * n_ctx + ctx].get_or_insert_with(|| (vec![0.0; ns], 0));
                        slot.0.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                        slot.1 += 1;
                    }
                }
            }
            canonical.push(
                sums.into_iter()
                    .map(|s| {
                        s.map(|(mut v, k)| {
                            v.iter_mut().for_each(|x| *x /= k as f64);
                            v
                        })
                    })
                    .collect(),
            );
            if d + 1 == horizon {
                break;
            }
            let next_ctx = n_ctx * na;
            let mut next = vec![None; tree.layer_size(d + 1) * next_ctx];
            for h in 0..tree.layer_size(d) {
                for ctx in 0..n_ctx {
                    let Some(b) = &members[h * n_ctx + ctx] else { continue };
                    for a in 0..na {
                        for z in 0..no {
                            next[tree.child(h, z) * next_ctx + ctx * na + a] = bayes(pomdp, b, a, z);
                        }
                    }
                }
            }
            members = next;
            n_ctx = next_ctx;
        }
        Ok(Self { base: pomdp.clone(), partition: partition.clone(), canonical })
    }

    /// Underlying model.
    pub fn base(&self) -> &Pomdp {
        &self.base
    }

    /// Partition.
    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    /// Horizon.
    pub fn horizon(&self) -> usize {
        self.partition.horizon()
    }

    /// Number of classes (time-indexed quotient states), sinks included.
    pub fn n_classes(&self) -> usize {
        self.partition.class_count()
    }

    /// `b̄(c, ctx)` at depth `d < T`, if some member has mass under `ctx`.
    pub fn canonical_belief(&self, depth: usize, class: usize, context: usize) -> Option<&[f64]> {
        let n_ctx = self.base.n_actions().pow(depth as u32);
        self.canonical.get(depth)?.get(class * n_ctx + context)?.as_deref()
    }

    /// Canonical belief of the class of the empty history.
    pub fn initial_belief(&self) -> &[f64] {
        self.canonical_belief(0, self.partition.class_of(0, 0), 0).expect("root class has the initial belief")
    }

    /// Successor state after `(a, z)` from `info` (assumes `P(z | b̄, a) > 0`).
    fn successor(&self, info: &QuotientInfo, a: usize, z: usize) -> Option<QuotientInfo> {
        let na = self.base.n_actions();
        let depth = info.depth + 1;
        let history = self.partition.tree().child(info.history, z);
        let context = info.context * na + a;
        let belief = if depth < self.horizon() {
            let class = self.partition.class_of(depth, history);
            match self.canonical_belief(depth, class, context) {
                Some(b) => Some(b.to_vec()),
                None => bayes(&self.base, &info.belief, a, z),
            }
        } else {
            bayes(&self.base, &info.belief, a, z)
        };
        belief.map(|belief| QuotientInfo { depth, history, context, belief })
    }

    /// Rows `(depth, class, context, action, observation, next_class, probability)` of
    /// `P̄([h], a, [h·z])` evaluated at the first member history with a canonical belief.
    pub fn kernel_rows(&self) -> Vec<(usize, usize, usize, usize, usize, usize, f64)> {
        let (na, no) = (self.base.n_actions(), self.base.n_observations());
        let tree = self.partition.tree();
        let mut rows = Vec::new();
        let mut n_ctx = 1usize;
        for d in 0..self.horizon() {
            for (class, members) in self.partition.classes(d).iter().enumerate() {
                let h = members[0];
                for ctx in 0..n_ctx {
                    let Some(b) = self.canonical_belief(d, class, ctx) else { continue };
                    for a in 0..na {
                        let probs = self.base.observation_distribution(b, a);
                        for (z, &p) in probs.iter().enumerate().take(no) {
                            if p > 0.0 {
                                rows.push((d, class, ctx, a, z, self.partition.class_of(d + 1, tree.child(h, z)), p));
                            }
                        }
                    }
                }
            }
            n_ctx *= na;
        }
        rows
    }

    /// Flat POMDP over quotient process states `(d, h, ctx)` plus an absorbing terminal.
    ///
    /// Entering `(d+1, h·z, ctx·a)` emits `z` deterministically; rewards are `b̄·R(·, a)`.
    /// The result has the same observation law and latent value as the quotient under
    /// every controller, so point-based planners can run on it directly.
    pub fn materialize(&self, max_states: usize) -> Result<Pomdp> {
        let (na, no) = (self.base.n_actions(), self.base.n_observations());
        let horizon = self.horizon();
        // Forward enumeration of reachable process states.
        let root = QuotientInfo { depth: 0, history: 0, context: 0, belief: self.initial_belief().to_vec() };
        let mut states: Vec<QuotientInfo> = vec![root];
        let mut edges: Vec<(usize, usize, usize, f64)> = Vec::new(); // (from, a, to, p)
        let mut frontier = vec![0usize];
        for _ in 0..horizon {
            let mut next_frontier = Vec::new();
            for &s in &frontier {
                let info = states[s].clone();
                for a in 0..na {
                    let probs = self.base.observation_distribution(&info.belief, a);
                    for (z, &p) in probs.iter().enumerate() {
                        if p <= 0.0 {
                            continue;
                        }
                        let Some(child) = self.successor(&info, a, z) else { continue };
                        states.push(child);
                        if states.len() + 1 > max_states {
                            return Err(Error::SizeGuard {
                                what: "materialized quotient states".into(),
                                requested: (states.len() + 1) as u128,
                                cap: max_states as u128,
                                hint: "plan over a shorter horizon".into(),
                            });
                        }
                        let t = states.len() - 1;
                        edges.push((s, a, t, p));
                        next_frontier.push(t);
                    }
                }
            }
            frontier = next_frontier;
        }
        let terminal = states.len();
        let ns = terminal + 1;
        let mut transition = vec![0.0; na * ns * ns];
        let mut observation = vec![0.0; na * ns * no];
        let mut reward = vec![0.0; ns * na];
        for &(s, a, t, p) in &edges {
            transition[(a * ns + s) * ns + t] += p;
        }
        for a in 0..na {
            for s in 0..ns {
                let row = &mut transition[(a * ns + s) * ns..(a * ns + s + 1) * ns];
                let total: f64 = row.iter().sum();
                if total == 0.0 {
                    row[terminal] = 1.0;
                } else {
                    row.iter_mut().for_each(|x| *x /= total);
                }
            }
        }
        for (s, info) in states.iter().enumerate() {
            let z = if info.depth == 0 { 0 } else { self.partition.tree().decode(info.depth, info.history)[info.depth - 1] };
            for a in 0..na {
                observation[(a * ns + s) * no + z] = 1.0;
                if info.depth < horizon {
                    reward[s * na + a] = self.base.expected_reward(&info.belief, a);
                }
            }
        }
        for a in 0..na {
            observation[(a * ns + terminal) * no] = 1.0;
        }
        let mut initial = vec![0.0; ns];
        initial[0] = 1.0;
        Pomdp::new(PomdpParts {
            name: format!("{}/quotient", self.base.name()),
            states: (0..ns).map(|s| if s == terminal { "terminal".into() } else { format!("q{s}") }).collect(),
            actions: self.base.action_names().to_vec(),
            observations: self.base.observation_names().to_vec(),
            transition,
            observation,
            reward,
            initial,
            metric: self.base.metric().clone(),
        })
    }
}

impl ObservationModel for QuotientPomdp {
    type Info = QuotientInfo;

    fn n_actions(&self) -> usize {
        self.base.n_actions()
    }

    fn n_observations(&self) -> usize {
        self.base.n_observations()
    }

    fn root(&self) -> QuotientInfo {
        QuotientInfo { depth: 0, history: 0, context: 0, belief: self.initial_belief().to_vec() }
    }

    fn step(&self, info: &QuotientInfo, a: usize) -> Vec<(f64, Option<QuotientInfo>)> {
        let probs = self.base.observation_distribution(&info.belief, a);
        probs.into_iter().enumerate().map(|(z, p)| if p > 0.0 { (p, self.successor(info, a, z)) } else { (0.0, None) }).collect()
    }

    fn observation_probs(&self, info: &QuotientInfo, a: usize) -> Vec<f64> {
        self.base.observation_distribution(&info.belief, a)
    }

    fn expected_reward(&self, info: &QuotientInfo, a: usize) -> f64 {
        self.base.expected_reward(&info.belief, a)
    }

    fn merge(&self, a: &QuotientInfo, _wa: f64, b: &QuotientInfo, _wb: f64) -> Option<QuotientInfo> {
        (a.context == b.context && a.history == b.history && a.belief == b.belief).then(|| a.clone())
    }
}

/// Max over probes of the law distance between `P_M^π(O^T)` and `P_Q^π(O^T)`.
pub fn soundness_check(pomdp: &Pomdp, quotient: &QuotientPomdp, family: &ProbeFamily, distance: &LawDistance) -> Result<f64> {
    Ok(model_distance_per_probe(pomdp, quotient, family, quotient.horizon(), distance)?.into_iter().fold(0.0, f64::max))
}

/// Largest total-variation gap between a member's one-step predictive law and the
/// canonical one, over every history a deterministic probe reaches and the action it takes.
pub fn representative_deviation(quotient: &QuotientPomdp, family: &ProbeFamily) -> Result<f64> {
    let base = quotient.base();
    let (na, no) = (base.n_actions(), base.n_observations());
    let tree = quotient.partition().tree().clone();
    let horizon = quotient.horizon();
    let mut worst: f64 = 0.0;
    for fsc in family.members().iter().filter(|f| f.is_deterministic()) {
        fsc.check_compatible(na, no, horizon)?;
        // (history, node, context, belief) along every reachable branch.
        let mut layer: Vec<(usize, usize, usize, Vec<f64>)> = vec![(0, 0, 0, base.initial().to_vec())];
        for d in 0..horizon {
            let mut next = Vec::new();
            for (h, node, ctx, b) in &layer {
                let Choice::One(a) = fsc.act(d, *node) else { unreachable!("deterministic probe") };
                let class = quotient.partition().class_of(d, *h);
                let bar = quotient.canonical_belief(d, class, *ctx).ok_or_else(|| {
                    Error::InvalidConfig(format!("no canonical belief for reachable history at depth {d}"))
                })?;
                let p = base.observation_distribution(b, a);
                let q = base.observation_distribution(bar, a);
                let tv = 0.5 * p.iter().zip(&q).map(|(x, y)| (x - y).abs()).sum::<f64>();
                worst = worst.max(tv);
                if d + 1 == horizon {
                    continue;
                }
                for z in 0..no {
                    if let Some(b2) = bayes(base, b, a, z) {
                        let Choice::One(n2) = fsc.next(d, *node, z) else { unreachable!("deterministic probe") };
                        next.push((tree.child(*h, z), n2, ctx * na + a, b2));
                    }
                }
            }
            layer = next;
        }
    }
    Ok(worst)
}
