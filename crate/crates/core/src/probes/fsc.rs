//! Finite-state controllers: deterministic stationary, clock-aware, and stochastic.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::check_distribution;

/// Deterministic stationary controller with `m` nodes, start node 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StationaryFsc {
    nodes: usize,
    n_obs: usize,
    /// `α(n)`.
    alpha: Vec<usize>,
    /// `β(n, o)` laid out `[n][o]`.
    beta: Vec<usize>,
}

impl StationaryFsc {
    /// Validated controller.
    pub fn new(alpha: Vec<usize>, beta: Vec<usize>, n_actions: usize, n_obs: usize) -> Result<Self> {
        let nodes = alpha.len();
        if nodes == 0 || n_obs == 0 || beta.len() != nodes * n_obs {
            return Err(Error::DimensionMismatch(format!("stationary FSC: {nodes} nodes, β has {} entries", beta.len())));
        }
        if alpha.iter().any(|&a| a >= n_actions) || beta.iter().any(|&n| n >= nodes) {
            return Err(Error::DimensionMismatch("stationary FSC: map value out of range".into()));
        }
        Ok(Self { nodes, n_obs, alpha, beta })
    }

    /// One-node controller that always plays `a`.
    pub fn constant(a: usize, n_obs: usize) -> Self {
        Self { nodes: 1, n_obs, alpha: vec![a], beta: vec![0; n_obs] }
    }

    /// Node count.
    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// Action map.
    pub fn alpha(&self) -> &[usize] {
        &self.alpha
    }

    /// Transition map `[n][o]`.
    pub fn beta(&self) -> &[usize] {
        &self.beta
    }
}

/// Deterministic controller with stage-indexed maps `α_τ` (τ < T) and `β_τ` (τ < T−1).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClockAwareFsc {
    nodes: usize,
    n_obs: usize,
    horizon: usize,
    /// `α_τ(n)` laid out `[τ][n]`.
    alpha: Vec<usize>,
    /// `β_τ(n, o)` laid out `[τ][n][o]`.
    beta: Vec<usize>,
}

impl ClockAwareFsc {
    /// Validated controller.
    pub fn new(nodes: usize, horizon: usize, alpha: Vec<usize>, beta: Vec<usize>, n_actions: usize, n_obs: usize) -> Result<Self> {
        if nodes == 0 || horizon == 0 || n_obs == 0 {
            return Err(Error::DimensionMismatch("clock-aware FSC needs nodes, horizon, alphabet ≥ 1".into()));
        }
        if alpha.len() != horizon * nodes || beta.len() != (horizon - 1) * nodes * n_obs {
            return Err(Error::DimensionMismatch(format!(
                "clock-aware FSC: expected {} α and {} β entries",
                horizon * nodes,
                (horizon - 1) * nodes * n_obs
            )));
        }
        if alpha.iter().any(|&a| a >= n_actions) || beta.iter().any(|&n| n >= nodes) {
            return Err(Error::DimensionMismatch("clock-aware FSC: map value out of range".into()));
        }
        Ok(Self { nodes, n_obs, horizon, alpha, beta })
    }

    /// One-node open-loop controller playing `actions[τ]` at stage `τ`.
    pub fn open_loop(actions: Vec<usize>, n_obs: usize) -> Self {
        let horizon = actions.len();
        Self { nodes: 1, n_obs, horizon, alpha: actions, beta: vec![0; horizon.saturating_sub(1) * n_obs] }
    }

    /// Node count.
    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// Stage count.
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Stage action maps `[τ][n]`.
    pub fn alpha(&self) -> &[usize] {
        &self.alpha
    }

    /// Stage transition maps `[τ][n][o]`.
    pub fn beta(&self) -> &[usize] {
        &self.beta
    }
}

/// Stochastic stationary controller with start node 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StochasticFsc {
    nodes: usize,
    n_actions: usize,
    n_obs: usize,
    /// `ψ(a | n)` laid out `[n][a]`.
    action: Vec<f64>,
    /// `η(n' | n, o)` laid out `[n][o][n']`.
    transition: Vec<f64>,
}

impl StochasticFsc {
    /// Validated controller.
    pub fn new(nodes: usize, n_actions: usize, n_obs: usize, action: Vec<f64>, transition: Vec<f64>) -> Result<Self> {
        if nodes == 0 || n_actions == 0 || n_obs == 0 {
            return Err(Error::DimensionMismatch("stochastic FSC needs nodes and alphabets ≥ 1".into()));
        }
        if action.len() != nodes * n_actions || transition.len() != nodes * n_obs * nodes {
            return Err(Error::DimensionMismatch("stochastic FSC: table sizes".into()));
        }
        for row in action.chunks(n_actions) {
            check_distribution(row, || "stochastic FSC action row".into())?;
        }
        for row in transition.chunks(nodes) {
            check_distribution(row, || "stochastic FSC transition row".into())?;
        }
        Ok(Self { nodes, n_actions, n_obs, action, transition })
    }

    /// One-node controller choosing actions i.i.d. from `weights`.
    pub fn memoryless(weights: Vec<f64>, n_obs: usize) -> Result<Self> {
        let n_actions = weights.len();
        Self::new(1, n_actions, n_obs, weights, vec![1.0; n_obs])
    }

    /// Node count.
    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// Action table `[n][a]`.
    pub fn action_table(&self) -> &[f64] {
        &self.action
    }

    /// Transition table `[n][o][n']`.
    pub fn transition_table(&self) -> &[f64] {
        &self.transition
    }
}

/// Either a single deterministic choice or a distribution.
#[derive(Debug, Clone, Copy)]
pub enum Choice<'a> {
    /// Deterministic choice.
    One(usize),
    /// Probability vector over choices.
    Dist(&'a [f64]),
}

impl<'a> Choice<'a> {
    /// Nonzero `(choice, probability)` pairs.
    pub fn iter(self) -> impl Iterator<Item = (usize, f64)> + 'a {
        let (one, dist) = match self {
            Choice::One(k) => (Some((k, 1.0)), None),
            Choice::Dist(d) => (None, Some(d.iter().copied().enumerate().filter(|&(_, p)| p > 0.0))),
        };
        one.into_iter().chain(dist.into_iter().flatten())
    }
}

/// A probe controller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Fsc {
    /// Deterministic stationary.
    Stationary(StationaryFsc),
    /// Deterministic clock-aware.
    ClockAware(ClockAwareFsc),
    /// Stochastic stationary.
    Stochastic(StochasticFsc),
}

impl Fsc {
    /// Node count.
    pub fn nodes(&self) -> usize {
        match self {
            Self::Stationary(f) => f.nodes,
            Self::ClockAware(f) => f.nodes,
            Self::Stochastic(f) => f.nodes,
        }
    }

    /// Observation alphabet size the controller reads.
    pub fn n_obs(&self) -> usize {
        match self {
            Self::Stationary(f) => f.n_obs,
            Self::ClockAware(f) => f.n_obs,
            Self::Stochastic(f) => f.n_obs,
        }
    }

    /// Largest action index plus one that the controller may emit.
    pub fn max_action(&self) -> usize {
        match self {
            Self::Stationary(f) => f.alpha.iter().max().map_or(0, |a| a + 1),
            Self::ClockAware(f) => f.alpha.iter().max().map_or(0, |a| a + 1),
            Self::Stochastic(f) => f.n_actions,
        }
    }

    /// True for deterministic controllers.
    pub fn is_deterministic(&self) -> bool {
        !matches!(self, Self::Stochastic(_))
    }

    /// Stage count for clock-aware controllers.
    pub fn stage_count(&self) -> Option<usize> {
        match self {
            Self::ClockAware(f) => Some(f.horizon),
            _ => None,
        }
    }

    /// Action choice at stage `tau` in node `n`.
    #[inline]
    pub fn act(&self, tau: usize, n: usize) -> Choice<'_> {
        match self {
            Self::Stationary(f) => Choice::One(f.alpha[n]),
            Self::ClockAware(f) => Choice::One(f.alpha[tau * f.nodes + n]),
            Self::Stochastic(f) => Choice::Dist(&f.action[n * f.n_actions..(n + 1) * f.n_actions]),
        }
    }

    /// Successor node choice after observing `o` at stage `tau` in node `n`.
    #[inline]
    pub fn next(&self, tau: usize, n: usize, o: usize) -> Choice<'_> {
        match self {
            Self::Stationary(f) => Choice::One(f.beta[n * f.n_obs + o]),
            Self::ClockAware(f) => {
                if tau + 1 >= f.horizon {
                    Choice::One(n)
                } else {
                    Choice::One(f.beta[(tau * f.nodes + n) * f.n_obs + o])
                }
            }
            Self::Stochastic(f) => {
                let base = (n * f.n_obs + o) * f.nodes;
                Choice::Dist(&f.transition[base..base + f.nodes])
            }
        }
    }

    /// Controller on a finer alphabet that reads `quantize[o]` in place of `o`.
    pub fn pullback(&self, quantize: &[usize]) -> Result<Self> {
        let no = self.n_obs();
        if let Some(&q) = quantize.iter().find(|&&q| q >= no) {
            return Err(Error::DimensionMismatch(format!("quantized symbol {q} outside the controller's {no} observations")));
        }
        let fine = quantize.len();
        let remap = |beta: &[usize], rows: usize| -> Vec<usize> { (0..rows * fine).map(|k| beta[(k / fine) * no + quantize[k % fine]]).collect() };
        Ok(match self {
            Self::Stationary(f) => Self::Stationary(StationaryFsc { nodes: f.nodes, n_obs: fine, alpha: f.alpha.clone(), beta: remap(&f.beta, f.nodes) }),
            Self::ClockAware(f) => Self::ClockAware(ClockAwareFsc {
                nodes: f.nodes,
                n_obs: fine,
                horizon: f.horizon,
                alpha: f.alpha.clone(),
                beta: remap(&f.beta, f.beta.len() / no),
            }),
            Self::Stochastic(f) => {
                let n = f.nodes;
                let transition = (0..n * fine)
                    .flat_map(|k| {
                        let base = ((k / fine) * no + quantize[k % fine]) * n;
                        f.transition[base..base + n].to_vec()
                    })
                    .collect();
                Self::Stochastic(StochasticFsc { nodes: n, n_actions: f.n_actions, n_obs: fine, action: f.action.clone(), transition })
            }
        })
    }

    /// Check compatibility with a model's alphabets and a horizon.
    pub fn check_compatible(&self, n_actions: usize, n_obs: usize, horizon: usize) -> Result<()> {
        if self.n_obs() != n_obs {
            return Err(Error::DimensionMismatch(format!("controller reads {} observations, model has {n_obs}", self.n_obs())));
        }
        if self.max_action() > n_actions {
            return Err(Error::DimensionMismatch(format!("controller emits action {} ≥ |A|={n_actions}", self.max_action() - 1)));
        }
        if let Self::Stochastic(f) = self {
            if f.n_actions != n_actions {
                return Err(Error::DimensionMismatch(format!("stochastic controller over {} actions, model has {n_actions}", f.n_actions)));
            }
        }
        if let Some(stages) = self.stage_count() {
            if stages != horizon {
                return Err(Error::DimensionMismatch(format!("clock-aware controller has {stages} stages, horizon is {horizon}")));
            }
        }
        Ok(())
    }
}

fn join<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn rows<T: fmt::Display>(v: &[T], width: usize) -> String {
    v.chunks(width.max(1)).map(join).collect::<Vec<_>>().join(";")
}

/// Canonical text form.
///
/// `stat m=2 o=2 a=0,1 b=0,1;1,0`, `clk m=1 o=2 T=2 a=0|2 b=0,0`,
/// `sto m=1 A=2 o=5 a=0.5,0.5 b=1;1;1;1;1`. Stages are separated by `|`, rows by `;`.
impl fmt::Display for Fsc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Stationary(c) => write!(f, "stat m={} o={} a={} b={}", c.nodes, c.n_obs, join(&c.alpha), rows(&c.beta, c.n_obs)),
            Self::ClockAware(c) => {
                let a = c.alpha.chunks(c.nodes).map(join).collect::<Vec<_>>().join("|");
                let b = c.beta.chunks(c.nodes * c.n_obs).map(|s| rows(s, c.n_obs)).collect::<Vec<_>>().join("|");
                write!(f, "clk m={} o={} T={} a={} b={}", c.nodes, c.n_obs, c.horizon, a, b)
            }
            Self::Stochastic(c) => write!(
                f,
                "sto m={} A={} o={} a={} b={}",
                c.nodes,
                c.n_actions,
                c.n_obs,
                rows(&c.action, c.n_actions),
                rows(&c.transition, c.nodes)
            ),
        }
    }
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(['|', ';', ','])
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Error::Artifact(format!("bad controller entry `{t}`"))))
        .collect()
}

impl FromStr for Fsc {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split_whitespace();
        let kind = parts.next().ok_or_else(|| Error::Artifact("empty controller".into()))?;
        let mut fields = std::collections::BTreeMap::new();
        for p in parts {
            let (k, v) = p.split_once('=').ok_or_else(|| Error::Artifact(format!("bad controller field `{p}`")))?;
            fields.insert(k, v);
        }
        let get = |k: &str| fields.get(k).copied().ok_or_else(|| Error::Artifact(format!("controller missing `{k}`")));
        let num = |k: &str| -> Result<usize> { get(k)?.parse().map_err(|_| Error::Artifact(format!("bad `{k}`"))) };
        match kind {
            "stat" => {
                let alpha: Vec<usize> = parse_list(get("a")?)?;
                let beta: Vec<usize> = parse_list(get("b")?)?;
                let n_actions = alpha.iter().max().map_or(1, |a| a + 1);
                Ok(Self::Stationary(StationaryFsc::new(alpha, beta, n_actions, num("o")?)?))
            }
            "clk" => {
                let alpha: Vec<usize> = parse_list(get("a")?)?;
                let beta: Vec<usize> = parse_list(get("b")?)?;
                let n_actions = alpha.iter().max().map_or(1, |a| a + 1);
                Ok(Self::ClockAware(ClockAwareFsc::new(num("m")?, num("T")?, alpha, beta, n_actions, num("o")?)?))
            }
            "sto" => Ok(Self::Stochastic(StochasticFsc::new(
                num("m")?,
                num("A")?,
                num("o")?,
                parse_list(get("a")?)?,
                parse_list(get("b")?)?,
            )?)),
            other => Err(Error::Artifact(format!("unknown controller kind `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_roundtrip() {
        let fs = vec![
            Fsc::Stationary(StationaryFsc::new(vec![0, 1], vec![0, 1, 1, 0], 3, 2).unwrap()),
            Fsc::ClockAware(ClockAwareFsc::new(2, 2, vec![0, 1, 2, 2], vec![1, 0, 0, 1], 3, 2).unwrap()),
            Fsc::Stochastic(StochasticFsc::memoryless(vec![0.5, 0.5], 5).unwrap()),
        ];
        for f in fs {
            let text = f.to_string();
            assert_eq!(text.parse::<Fsc>().unwrap(), f, "{text}");
        }
    }

    #[test]
    fn clock_aware_last_stage_keeps_node() {
        let f = Fsc::ClockAware(ClockAwareFsc::open_loop(vec![1, 0], 2));
        assert!(matches!(f.next(1, 0, 1), Choice::One(0)));
    }
}
