//! The distance tensor `D[(i, j), p]` over equal-depth history pairs and probes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::HistoryTree;
use crate::probes::{normalized_block, rollout, ObservationModel, ProbeFamily};
use crate::transport::{DiscreteDistribution, LawDistance};

/// Default cap on stored `(pair, probe)` entries.
pub const DEFAULT_PAIR_PROBE_CAP: u128 = 20_000_000;

/// Build options for distance caches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CacheOptions {
    /// Evaluate probes and pairs on the rayon pool.
    pub parallel: bool,
    /// Size guard on `(pair, probe)` entries.
    pub pair_probe_cap: u128,
}

impl Default for CacheOptions {
    fn default() -> Self {
        Self { parallel: true, pair_probe_cap: DEFAULT_PAIR_PROBE_CAP }
    }
}

impl CacheOptions {
    /// Single-threaded build.
    pub fn serial() -> Self {
        Self { parallel: false, ..Self::default() }
    }
}

/// Number of unordered pairs among `n` items.
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Index of pair `(i, j)`, `i < j`, among `n` items in row-major upper-triangular order.
#[inline]
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// Descriptive metadata carried by a cache and its artifacts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheMeta {
    /// Benchmark identifier.
    pub benchmark: String,
    /// Probe family descriptor.
    pub family: String,
    /// Law-distance identifier.
    pub metric: String,
}

/// Exact (or sampled) suffix-law distances for every equal-depth history pair and probe.
///
/// Depth-`T` suffixes are empty, so that layer is implicitly all-zero and not stored.
/// Entries whose pair is unreachable under the probe are `NaN` and skipped by queries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceCache {
    meta: CacheMeta,
    tree: HistoryTree,
    n_probes: usize,
    /// `reach[h * n_probes + p]` over flat history indices.
    reach: Vec<bool>,
    /// `blocks[d][pair * n_probes + p]` for `d < T`.
    blocks: Vec<Vec<f64>>,
}

/// Total `(pair, probe)` entries a cache over `tree` and `n_probes` would store.
pub fn cache_entries(tree: &HistoryTree, n_probes: usize) -> u128 {
    (0..tree.horizon()).map(|d| pair_count(tree.layer_size(d)) as u128).sum::<u128>() * n_probes as u128
}

pub(crate) fn check_guard(tree: &HistoryTree, n_probes: usize, cap: u128) -> Result<()> {
    let entries = cache_entries(tree, n_probes);
    if entries > cap {
        return Err(Error::SizeGuard {
            what: "distance cache (pairs × probes)".into(),
            requested: entries,
            cap,
            hint: "reduce T or m, select a probe subset, or use layered segments".into(),
        });
    }
    Ok(())
}

/// Per-probe laws below every history at depth `d < T`, from leaf masses.
fn depth_laws(leaves: &[f64], layer_size: usize) -> Vec<Option<DiscreteDistribution>> {
    let block = leaves.len() / layer_size;
    (0..layer_size).map(|i| normalized_block(&leaves[i * block..(i + 1) * block])).collect()
}

impl DistanceCache {
    /// Assemble from raw parts (used by sampled caches and artifact loading).
    pub fn from_parts(meta: CacheMeta, tree: HistoryTree, n_probes: usize, reach: Vec<bool>, blocks: Vec<Vec<f64>>) -> Result<Self> {
        if reach.len() != tree.total() * n_probes || blocks.len() != tree.horizon() {
            return Err(Error::Artifact("cache dimensions inconsistent with history tree".into()));
        }
        for (d, b) in blocks.iter().enumerate() {
            if b.len() != pair_count(tree.layer_size(d)) * n_probes {
                return Err(Error::Artifact(format!("depth {d} block has {} entries", b.len())));
            }
            if b.iter().any(|&x| x < 0.0) {
                return Err(Error::Artifact(format!("negative distance at depth {d}")));
            }
        }
        Ok(Self { meta, tree, n_probes, reach, blocks })
    }

    /// Metadata.
    pub fn meta(&self) -> &CacheMeta {
        &self.meta
    }

    /// History tree.
    pub fn tree(&self) -> &HistoryTree {
        &self.tree
    }

    /// Horizon `T`.
    pub fn horizon(&self) -> usize {
        self.tree.horizon()
    }

    /// Probe count.
    pub fn n_probes(&self) -> usize {
        self.n_probes
    }

    /// Raw block for depth `d < T`.
    pub fn block(&self, depth: usize) -> &[f64] {
        &self.blocks[depth]
    }

    /// Reach mask over flat history indices.
    pub fn reach_mask(&self) -> &[bool] {
        &self.reach
    }

    /// Is history `(d, i)` reachable under probe `p`?
    pub fn reachable(&self, depth: usize, i: usize, p: usize) -> bool {
        self.reach[(self.tree.offset(depth) + i) * self.n_probes + p]
    }

    /// Is history `(d, i)` reachable under some probe?
    pub fn reachable_any(&self, depth: usize, i: usize) -> bool {
        let base = (self.tree.offset(depth) + i) * self.n_probes;
        self.reach[base..base + self.n_probes].iter().any(|&r| r)
    }

    /// Stored distance, `None` when skipped.
    pub fn entry(&self, depth: usize, i: usize, j: usize, p: usize) -> Option<f64> {
        if i == j {
            return self.reachable(depth, i, p).then_some(0.0);
        }
        if depth == self.horizon() {
            return (self.reachable(depth, i, p) && self.reachable(depth, j, p)).then_some(0.0);
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        let v = self.blocks[depth][pair_index(self.tree.layer_size(depth), a, b) * self.n_probes + p];
        (!v.is_nan()).then_some(v)
    }

    /// Row of probe entries for one pair.
    pub fn pair_row(&self, depth: usize, pair: usize) -> &[f64] {
        &self.blocks[depth][pair * self.n_probes..(pair + 1) * self.n_probes]
    }

    /// `d^Π(h, h')`: max over probes under which both histories are reachable, else 0.
    pub fn history_distance(&self, depth: usize, i: usize, j: usize) -> f64 {
        if i == j || depth == self.horizon() {
            return 0.0;
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        max_defined(self.pair_row(depth, pair_index(self.tree.layer_size(depth), a, b)).iter().copied())
    }

    /// `d^S(h, h')` over a probe subset.
    pub fn history_distance_subset(&self, depth: usize, i: usize, j: usize, subset: &[usize]) -> f64 {
        if i == j || depth == self.horizon() {
            return 0.0;
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        let row = self.pair_row(depth, pair_index(self.tree.layer_size(depth), a, b));
        max_defined(subset.iter().map(|&p| row[p]))
    }

    /// Distance between two histories given as observation sequences.
    pub fn history_distance_of(&self, h: &[usize], h2: &[usize]) -> Result<f64> {
        if h.len() != h2.len() {
            return Err(Error::DimensionMismatch(format!("history depths {} and {} differ", h.len(), h2.len())));
        }
        if h.len() > self.horizon() {
            return Err(Error::DimensionMismatch("history deeper than the cache horizon".into()));
        }
        Ok(self.history_distance(h.len(), self.tree.index_of(h), self.tree.index_of(h2)))
    }

    /// Same cache restricted to a probe subset (indices in the given order).
    pub fn restrict(&self, subset: &[usize]) -> Result<Self> {
        if let Some(&p) = subset.iter().find(|&&p| p >= self.n_probes) {
            return Err(Error::InvalidConfig(format!("probe index {p} out of range")));
        }
        let k = subset.len();
        let reach = (0..self.tree.total()).flat_map(|h| subset.iter().map(move |&p| (h, p))).map(|(h, p)| self.reach[h * self.n_probes + p]).collect();
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let pairs = b.len() / self.n_probes.max(1);
                (0..pairs).flat_map(|q| subset.iter().map(move |&p| b[q * self.n_probes + p])).collect::<Vec<f64>>()
            })
            .collect();
        let meta = CacheMeta { family: format!("{}[subset:{k}]", self.meta.family), ..self.meta.clone() };
        Self::from_parts(meta, self.tree.clone(), k, reach, blocks)
    }
}

/// Max over non-NaN values; 0 if none.
#[inline]
pub(crate) fn max_defined(values: impl Iterator<Item = f64>) -> f64 {
    values.filter(|v| !v.is_nan()).fold(0.0, f64::max)
}

/// Per-probe leaf masses and reach flags over the flat tree.
fn probe_masses<M: ObservationModel>(model: &M, family: &ProbeFamily, horizon: usize, p: usize) -> Result<Vec<Vec<f64>>> {
    Ok(rollout(model, &family.members()[p], horizon, &[])?.masses)
}

/// Build the exact distance cache for `model` under every member of `family`.
pub fn build_cache<M: ObservationModel>(
    model: &M,
    benchmark: &str,
    family: &ProbeFamily,
    horizon: usize,
    distance: &LawDistance,
    options: CacheOptions,
) -> Result<DistanceCache> {
    if family.horizon() != horizon {
        return Err(Error::InvalidConfig(format!("family horizon {} differs from T={horizon}", family.horizon())));
    }
    if let Some(metric) = distance.metric() {
        if metric.size() != model.n_observations() {
            return Err(Error::DimensionMismatch(format!("metric over {} symbols for |O|={}", metric.size(), model.n_observations())));
        }
    }
    let tree = HistoryTree::new(model.n_observations(), horizon)?;
    let n_probes = family.len();
    check_guard(&tree, n_probes, options.pair_probe_cap)?;

    let masses: Vec<Vec<Vec<f64>>> = if options.parallel {
        (0..n_probes).into_par_iter().map(|p| probe_masses(model, family, horizon, p)).collect::<Result<_>>()?
    } else {
        (0..n_probes).map(|p| probe_masses(model, family, horizon, p)).collect::<Result<_>>()?
    };

    let mut reach = vec![false; tree.total() * n_probes];
    for (p, m) in masses.iter().enumerate() {
        for (d, layer) in m.iter().enumerate() {
            for (i, &w) in layer.iter().enumerate() {
                reach[(tree.offset(d) + i) * n_probes + p] = w > 0.0;
            }
        }
    }

    let mut blocks = Vec::with_capacity(horizon);
    for d in 0..horizon {
        let n = tree.layer_size(d);
        let len = horizon - d;
        let laws: Vec<Vec<Option<DiscreteDistribution>>> = masses.iter().map(|m| depth_laws(&m[horizon], n)).collect();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let row = |&(i, j): &(usize, usize)| -> Result<Vec<f64>> {
            laws.iter()
                .map(|l| match (&l[i], &l[j]) {
                    (Some(a), Some(b)) => distance.between(a, b, len),
                    _ => Ok(f64::NAN),
                })
                .collect()
        };
        let rows: Vec<Vec<f64>> =
            if options.parallel { pairs.par_iter().map(row).collect::<Result<_>>()? } else { pairs.iter().map(row).collect::<Result<_>>()? };
        blocks.push(rows.into_iter().flatten().collect());
    }
    let meta = CacheMeta { benchmark: benchmark.to_string(), family: family.descriptor(), metric: distance.id() };
    DistanceCache::from_parts(meta, tree, n_probes, reach, blocks)
}
