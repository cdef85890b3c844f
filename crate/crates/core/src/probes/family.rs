//! Probe families and their deterministic enumeration.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::fsc::{ClockAwareFsc, Fsc, StationaryFsc, StochasticFsc};
use crate::error::{Error, Result};

/// Default cap on enumerated family size.
pub const DEFAULT_FAMILY_CAP: u128 = 10_000_000;

/// Kind of probe family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FamilyKind {
    /// Deterministic stationary controllers with at most `m` nodes.
    Stationary,
    /// Deterministic clock-aware controllers.
    ClockAware,
    /// Sampled stochastic controllers.
    Stochastic,
    /// Hand-assembled member list.
    Custom,
}

impl FamilyKind {
    /// Short identifier.
    pub fn id(self) -> &'static str {
        match self {
            Self::Stationary => "stat",
            Self::ClockAware => "clk",
            Self::Stochastic => "sto",
            Self::Custom => "custom",
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl std::str::FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stat" | "stationary" | "op" => Ok(Self::Stationary),
            "clk" | "clock" | "clock-aware" => Ok(Self::ClockAware),
            "sto" | "stochastic" => Ok(Self::Stochastic),
            "custom" => Ok(Self::Custom),
            other => Err(Error::InvalidConfig(format!("unknown family kind `{other}`"))),
        }
    }
}

/// An ordered list of probe controllers sharing `(m, T)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeFamily {
    kind: FamilyKind,
    memory: usize,
    horizon: usize,
    members: Vec<Fsc>,
}

impl ProbeFamily {
    /// Assemble a family from members; the list must be nonempty and respect `(m, T)`.
    pub fn from_members(kind: FamilyKind, memory: usize, horizon: usize, members: Vec<Fsc>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidConfig("probe family must be nonempty".into()));
        }
        for f in &members {
            if f.nodes() > memory {
                return Err(Error::InvalidConfig(format!("member with {} nodes exceeds m={memory}", f.nodes())));
            }
            if let Some(stages) = f.stage_count() {
                if stages != horizon {
                    return Err(Error::InvalidConfig(format!("member with {stages} stages in a T={horizon} family")));
                }
            }
        }
        Ok(Self { kind, memory, horizon, members })
    }

    /// Family kind.
    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    /// Memory bound `m`.
    pub fn memory(&self) -> usize {
        self.memory
    }

    /// Horizon `T`.
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Members in enumeration order.
    pub fn members(&self) -> &[Fsc] {
        &self.members
    }

    /// Member count.
    pub fn len(&self) -> usize {
        self.members.len()
    }

    /// Never true for a constructed family.
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Sub-family restricted to `indices` (kept in the given order).
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let members = indices
            .iter()
            .map(|&i| self.members.get(i).cloned().ok_or_else(|| Error::InvalidConfig(format!("probe index {i} out of range"))))
            .collect::<Result<Vec<_>>>()?;
        Self::from_members(self.kind, self.memory, self.horizon, members)
    }

    /// Same members re-labelled with a new horizon (stationary and stochastic only).
    pub fn with_horizon(&self, horizon: usize) -> Result<Self> {
        Self::from_members(self.kind, self.memory, horizon, self.members.clone())
    }

    /// Descriptor used in artifact headers, e.g. `stat:m=2:T=4:n=147`.
    pub fn descriptor(&self) -> String {
        format!("{}:m={}:T={}:n={}", self.kind, self.memory, self.horizon, self.members.len())
    }
}

fn checked_pow(base: u128, exp: usize) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// `Σ_{m'=1}^{m} |A|^{m'}·m'^{m'|O|}`, saturating at `u128::MAX`.
pub fn stationary_count(m: usize, n_actions: usize, n_obs: usize) -> u128 {
    let mut total: u128 = 0;
    for k in 1..=m {
        let term = checked_pow(n_actions as u128, k).and_then(|a| checked_pow(k as u128, k * n_obs).and_then(|b| a.checked_mul(b)));
        total = match term.and_then(|t| total.checked_add(t)) {
            Some(t) => t,
            None => return u128::MAX,
        };
    }
    total
}

/// Clock-aware family size: `|A|^T` for `m = 1`, else `|A|^{mT}·m^{m|O|(T−1)}`.
pub fn clock_aware_count(m: usize, horizon: usize, n_actions: usize, n_obs: usize) -> u128 {
    if m == 1 {
        return checked_pow(n_actions as u128, horizon).unwrap_or(u128::MAX);
    }
    checked_pow(n_actions as u128, m * horizon)
        .and_then(|a| checked_pow(m as u128, m * n_obs * (horizon - 1)).and_then(|b| a.checked_mul(b)))
        .unwrap_or(u128::MAX)
}

fn guard(what: &str, requested: u128, cap: u128) -> Result<()> {
    if requested > cap {
        return Err(Error::SizeGuard {
            what: what.into(),
            requested,
            cap,
            hint: "lower m or T, use greedy probe subsets, layered segments, or the stationary family".into(),
        });
    }
    Ok(())
}

/// Decode `index` into `digits` base-`radix` digits, most significant first.
fn digits(mut index: u128, radix: usize, len: usize, out: &mut [usize]) {
    for k in (0..len).rev() {
        out[k] = (index % radix as u128) as usize;
        index /= radix as u128;
    }
}

/// All deterministic stationary controllers with `m' ≤ m` nodes and start node 0.
///
/// Order: `m'` ascending, then `α` lexicographic, then `β` lexicographic (node-major).
pub fn enumerate_stationary(m: usize, n_actions: usize, n_obs: usize, horizon: usize, cap: u128) -> Result<ProbeFamily> {
    if m == 0 || n_actions == 0 || n_obs == 0 {
        return Err(Error::InvalidConfig("enumerate_stationary requires m, |A|, |O| ≥ 1".into()));
    }
    guard("stationary FSC family", stationary_count(m, n_actions, n_obs), cap)?;
    let mut members = Vec::new();
    for k in 1..=m {
        let alpha_space = checked_pow(n_actions as u128, k).expect("guarded");
        let beta_space = checked_pow(k as u128, k * n_obs).expect("guarded");
        let mut alpha = vec![0; k];
        let mut beta = vec![0; k * n_obs];
        for ai in 0..alpha_space {
            digits(ai, n_actions, k, &mut alpha);
            for bi in 0..beta_space {
                digits(bi, k, k * n_obs, &mut beta);
                members.push(Fsc::Stationary(StationaryFsc::new(alpha.clone(), beta.clone(), n_actions, n_obs)?));
            }
        }
    }
    ProbeFamily::from_members(FamilyKind::Stationary, m, horizon, members)
}

/// Deterministic clock-aware controllers over exactly `m` nodes (open-loop sequences for `m = 1`).
///
/// Order: stage action maps lexicographic (stage 0 most significant), then stage
/// transition maps lexicographic.
pub fn enumerate_clock_aware(m: usize, horizon: usize, n_actions: usize, n_obs: usize, cap: u128) -> Result<ProbeFamily> {
    if m == 0 || horizon == 0 || n_actions == 0 || n_obs == 0 {
        return Err(Error::InvalidConfig("enumerate_clock_aware requires m, T, |A|, |O| ≥ 1".into()));
    }
    let count = clock_aware_count(m, horizon, n_actions, n_obs);
    guard("clock-aware FSC family", count, cap)?;
    let mut members = Vec::with_capacity(count as usize);
    if m == 1 {
        let mut seq = vec![0; horizon];
        for i in 0..count {
            digits(i, n_actions, horizon, &mut seq);
            members.push(Fsc::ClockAware(ClockAwareFsc::open_loop(seq.clone(), n_obs)));
        }
    } else {
        let alpha_space = checked_pow(n_actions as u128, m * horizon).expect("guarded");
        let beta_space = checked_pow(m as u128, m * n_obs * (horizon - 1)).expect("guarded");
        let mut alpha = vec![0; m * horizon];
        let mut beta = vec![0; m * n_obs * (horizon - 1)];
        for ai in 0..alpha_space {
            digits(ai, n_actions, alpha.len(), &mut alpha);
            for bi in 0..beta_space {
                digits(bi, m, beta.len(), &mut beta);
                members.push(Fsc::ClockAware(ClockAwareFsc::new(m, horizon, alpha.clone(), beta.clone(), n_actions, n_obs)?));
            }
        }
    }
    ProbeFamily::from_members(FamilyKind::ClockAware, m, horizon, members)
}

/// Enumerate a deterministic family by kind (stationary or clock-aware).
pub fn enumerate_family(kind: FamilyKind, m: usize, n_actions: usize, n_obs: usize, horizon: usize, cap: u128) -> Result<ProbeFamily> {
    match kind {
        FamilyKind::Stationary => enumerate_stationary(m, n_actions, n_obs, horizon, cap),
        FamilyKind::ClockAware => enumerate_clock_aware(m, horizon, n_actions, n_obs, cap),
        other => Err(Error::InvalidConfig(format!("family kind `{}` cannot be enumerated", other.id()))),
    }
}

fn dirichlet_row(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let mut row: Vec<f64> = (0..len).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = row.iter().sum();
    row.iter_mut().for_each(|x| *x /= total);
    row
}

/// `count` stochastic `m`-node controllers with Dirichlet(1) action and transition rows.
pub fn sample_stochastic(m: usize, count: usize, seed: u64, n_actions: usize, n_obs: usize, horizon: usize) -> Result<ProbeFamily> {
    if count == 0 {
        return Err(Error::InvalidConfig("sample_stochastic: count must be ≥ 1".into()));
    }
    if m == 0 || n_actions == 0 || n_obs == 0 {
        return Err(Error::InvalidConfig("sample_stochastic requires m, |A|, |O| ≥ 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut members = Vec::with_capacity(count);
    for _ in 0..count {
        let action: Vec<f64> = (0..m).flat_map(|_| dirichlet_row(&mut rng, n_actions)).collect();
        let transition: Vec<f64> = (0..m * n_obs).flat_map(|_| dirichlet_row(&mut rng, m)).collect();
        members.push(Fsc::Stochastic(StochasticFsc::new(m, n_actions, n_obs, action, transition)?));
    }
    ProbeFamily::from_members(FamilyKind::Stochastic, m, horizon, members)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_counts() {
        assert_eq!(stationary_count(2, 3, 2), 147);
        assert_eq!(stationary_count(2, 5, 4), 6_405);
        assert_eq!(stationary_count(2, 5, 3), 1_605);
        assert_eq!(stationary_count(2, 10, 3), 6_410);
        assert_eq!(stationary_count(2, 9, 3), 5_193);
        assert_eq!(clock_aware_count(2, 2, 3, 2), 1_296);
    }

    #[test]
    fn enumeration_matches_count() {
        assert_eq!(enumerate_stationary(2, 3, 2, 4, DEFAULT_FAMILY_CAP).unwrap().len(), 147);
        assert_eq!(enumerate_clock_aware(2, 2, 3, 2, DEFAULT_FAMILY_CAP).unwrap().len(), 1_296);
        assert_eq!(enumerate_clock_aware(1, 4, 3, 2, DEFAULT_FAMILY_CAP).unwrap().len(), 81);
    }

    #[test]
    fn guard_refuses() {
        assert!(matches!(enumerate_clock_aware(2, 4, 3, 2, DEFAULT_FAMILY_CAP), Err(Error::SizeGuard { .. })));
    }

    #[test]
    fn stochastic_deterministic_per_seed() {
        let a = sample_stochastic(2, 40, 7, 3, 2, 2).unwrap();
        let b = sample_stochastic(2, 40, 7, 3, 2, 2).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 40);
        assert!(sample_stochastic(2, 0, 7, 3, 2, 2).is_err());
    }
}
