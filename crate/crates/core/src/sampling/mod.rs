//! Trajectory-based estimation of suffix laws and probe distances, bootstrap intervals
//! on the maximal distance, and the seed-stability, convergence and coverage protocols.
//!
//! Every `(history, probe)` cell draws from its own ChaCha stream of the master seed,
//! so parallel and serial runs produce identical samples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{HistoryTree, Pomdp};
use crate::probes::{rollout, Choice, Fsc, ProbeFamily};
use crate::pseudometric::{build_cache, check_guard, envelope, pair_count, CacheMeta, CacheOptions, DistanceCache};
use crate::quotient::{adjusted_rand_index, eps_partition};
use crate::transport::{DiscreteDistribution, LawDistance};

/// Default trajectories per `(history, probe)` cell.
pub const DEFAULT_TRAJECTORIES: usize = 500;
/// Default bootstrap resamples.
pub const DEFAULT_RESAMPLES: usize = 1000;
/// Trajectory counts of the convergence protocol.
pub const CONVERGENCE_SIZES: [usize; 5] = [50, 100, 250, 500, 1000];
/// Replications per size in the convergence protocol.
pub const CONVERGENCE_REPS: usize = 5;
/// `ε` values of the convergence protocol.
pub const CONVERGENCE_EPS: [f64; 3] = [0.0, 0.3, 0.5];

/// Sampling parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    /// Trajectories per `(history, probe)` cell.
    pub trajectories: usize,
    /// Bootstrap resamples.
    pub resamples: usize,
    /// Master seed.
    pub seed: u64,
    /// Seeds for stability runs.
    pub stability_seeds: Vec<u64>,
    /// Run cells on the rayon pool.
    pub parallel: bool,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self { trajectories: DEFAULT_TRAJECTORIES, resamples: DEFAULT_RESAMPLES, seed: 0, stability_seeds: (0..10).collect(), parallel: true }
    }
}

impl SamplingConfig {
    /// Reject zero counts.
    pub fn validate(&self) -> Result<()> {
        if self.trajectories == 0 || self.resamples == 0 {
            return Err(Error::InvalidConfig("trajectory and resample counts must be positive".into()));
        }
        Ok(())
    }
}

/// Generator for stream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derived seed for replication `index` of a protocol run.
fn derived_seed(seed: u64, index: u64) -> u64 {
    substream(seed ^ 0x5EED_5EED_5EED_5EED, index).random()
}

fn inverse_cdf(weights: &[f64], u: f64) -> usize {
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    let target = u * total;
    let mut last = 0;
    for (k, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last = k;
            if target < acc {
                return k;
            }
        }
    }
    last
}

fn draw(choice: Choice<'_>, rng: &mut ChaCha8Rng) -> usize {
    match choice {
        Choice::One(k) => k,
        Choice::Dist(w) => inverse_cdf(w, rng.random()),
    }
}

/// Joint posterior over `(controller node, state)` after `history`, or `None` when the
/// history has zero probability under `fsc`.
fn joint_filter(pomdp: &Pomdp, fsc: &Fsc, history: &[usize]) -> Option<Vec<f64>> {
    let ns = pomdp.n_states();
    let nodes = fsc.nodes();
    let mut w = vec![0.0; nodes * ns];
    w[..ns].copy_from_slice(pomdp.initial());
    for (t, &o) in history.iter().enumerate() {
        let mut next = vec![0.0; nodes * ns];
        for n in 0..nodes {
            for s in 0..ns {
                let ws = w[n * ns + s];
                if ws == 0.0 {
                    continue;
                }
                for (a, pa) in fsc.act(t, n).iter() {
                    for (s2, &p) in pomdp.transition_row(a, s).iter().enumerate() {
                        let m = ws * pa * p * pomdp.z(a, s2, o);
                        if m > 0.0 {
                            for (n2, pn) in fsc.next(t, n, o).iter() {
                                next[n2 * ns + s2] += m * pn;
                            }
                        }
                    }
                }
            }
        }
        let total: f64 = next.iter().sum();
        if total <= 0.0 {
            return None;
        }
        next.iter_mut().for_each(|x| *x /= total);
        w = next;
    }
    Some(w)
}

/// Draw `n` suffix indices below `history` (base `|O|`, first symbol most significant).
fn sample_suffixes(pomdp: &Pomdp, fsc: &Fsc, history: &[usize], horizon: usize, n: usize, rng: &mut ChaCha8Rng) -> Option<Vec<u64>> {
    let joint = joint_filter(pomdp, fsc, history)?;
    let ns = pomdp.n_states();
    let no = pomdp.n_observations() as u64;
    Some(
        (0..n)
            .map(|_| {
                let k = inverse_cdf(&joint, rng.random());
                let (mut node, mut s) = (k / ns, k % ns);
                let mut code = 0u64;
                for tau in history.len()..horizon {
                    let a = draw(fsc.act(tau, node), rng);
                    let s2 = inverse_cdf(pomdp.transition_row(a, s), rng.random());
                    let o = inverse_cdf(pomdp.observation_row(a, s2), rng.random());
                    code = code * no + o as u64;
                    node = draw(fsc.next(tau, node, o), rng);
                    s = s2;
                }
                code
            })
            .collect(),
    )
}

/// Empirical `P^π(O_{t+1:T} | h)` from `n` trajectories; `None` when `h` is unreachable.
pub fn empirical_suffix_law(pomdp: &Pomdp, fsc: &Fsc, history: &[usize], horizon: usize, n: usize, seed: u64) -> Result<Option<DiscreteDistribution>> {
    fsc.check_compatible(pomdp.n_actions(), pomdp.n_observations(), horizon)?;
    if history.len() >= horizon {
        return Err(Error::InvalidConfig(format!("history depth {} leaves no suffix before T={horizon}", history.len())));
    }
    if n == 0 {
        return Err(Error::InvalidConfig("trajectory count must be positive".into()));
    }
    let mut rng = substream(seed, 0);
    sample_suffixes(pomdp, fsc, history, horizon, n, &mut rng).map(|s| DiscreteDistribution::empirical(&s)).transpose()
}

/// Raw sampled suffix counts for every `(history, probe)` cell at depth `< T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledLaws {
    tree: HistoryTree,
    n_probes: usize,
    trajectories: usize,
    /// `(suffix, count)` lists at `(offset(d) + i)·P + p`; `None` when unreachable.
    counts: Vec<Option<Vec<(u64, u32)>>>,
    /// Exact reach flags over the full tree.
    reach: Vec<bool>,
    meta: CacheMeta,
}

fn tally(mut samples: Vec<u64>) -> Vec<(u64, u32)> {
    samples.sort_unstable();
    let mut out: Vec<(u64, u32)> = Vec::new();
    for s in samples {
        match out.last_mut() {
            Some((k, c)) if *k == s => *c += 1,
            _ => out.push((s, 1)),
        }
    }
    out
}

fn law_of(counts: &[(u64, u32)]) -> DiscreteDistribution {
    let total: u32 = counts.iter().map(|&(_, c)| c).sum();
    DiscreteDistribution::new(counts.iter().map(|&(k, c)| (k, c as f64 / total as f64)).collect()).expect("positive counts")
}

impl SampledLaws {
    /// Draw `config.trajectories` suffixes for every reachable `(history, probe)` cell.
    pub fn draw(pomdp: &Pomdp, family: &ProbeFamily, horizon: usize, config: &SamplingConfig) -> Result<Self> {
        config.validate()?;
        if family.horizon() != horizon {
            return Err(Error::InvalidConfig(format!("family horizon {} differs from T={horizon}", family.horizon())));
        }
        let tree = HistoryTree::new(pomdp.n_observations(), horizon)?;
        let np = family.len();
        check_guard(&tree, np, crate::pseudometric::DEFAULT_PAIR_PROBE_CAP)?;
        for f in family.members() {
            f.check_compatible(pomdp.n_actions(), pomdp.n_observations(), horizon)?;
        }
        let masses: Vec<Vec<f64>> = family.members().iter().map(|f| Ok(rollout(pomdp, f, horizon, &[])?.flat_masses())).collect::<Result<_>>()?;
        let mut reach = vec![false; tree.total() * np];
        for (p, m) in masses.iter().enumerate() {
            for (h, &w) in m.iter().enumerate() {
                reach[h * np + p] = w > 0.0;
            }
        }
        let inner = tree.offset(horizon);
        let cell = |k: usize| -> Option<Vec<(u64, u32)>> {
            let (h, p) = (k / np, k % np);
            if !reach[h * np + p] {
                return None;
            }
            let depth = (0..horizon).rev().find(|&d| tree.offset(d) <= h).expect("inner history");
            let history = tree.decode(depth, h - tree.offset(depth));
            let mut rng = substream(config.seed, k as u64);
            sample_suffixes(pomdp, &family.members()[p], &history, horizon, config.trajectories, &mut rng).map(tally)
        };
        let counts: Vec<Option<Vec<(u64, u32)>>> =
            if config.parallel { (0..inner * np).into_par_iter().map(cell).collect() } else { (0..inner * np).map(cell).collect() };
        let meta = CacheMeta {
            benchmark: pomdp.name().to_string(),
            family: family.descriptor(),
            metric: format!("sampled(n={},seed={})", config.trajectories, config.seed),
        };
        Ok(Self { tree, n_probes: np, trajectories: config.trajectories, counts, reach, meta })
    }

    /// History tree.
    pub fn tree(&self) -> &HistoryTree {
        &self.tree
    }

    /// Trajectories per cell.
    pub fn trajectories(&self) -> usize {
        self.trajectories
    }

    /// Suffix counts of history `i` at depth `d` under probe `p`.
    pub fn counts(&self, depth: usize, i: usize, p: usize) -> Option<&[(u64, u32)]> {
        self.counts[(self.tree.offset(depth) + i) * self.n_probes + p].as_deref()
    }

    /// Distance cache over the empirical laws.
    pub fn to_cache(&self, distance: &LawDistance, parallel: bool) -> Result<DistanceCache> {
        let laws: Vec<Option<DiscreteDistribution>> = self.counts.iter().map(|c| c.as_deref().map(law_of)).collect();
        let blocks = distance_blocks(&self.tree, self.n_probes, &laws, distance, parallel)?;
        let mut meta = self.meta.clone();
        meta.metric = format!("{}:{}", distance.id(), meta.metric);
        DistanceCache::from_parts(meta, self.tree.clone(), self.n_probes, self.reach.clone(), blocks)
    }

    /// Resample every cell with replacement (multinomial on its counts).
    pub fn resample(&self, rng: &mut ChaCha8Rng) -> Result<Vec<Option<DiscreteDistribution>>> {
        self.counts
            .iter()
            .map(|c| {
                let Some(c) = c else { return Ok(None) };
                let mut left = self.trajectories as u64;
                let mut rest: f64 = 1.0;
                let mut out = Vec::with_capacity(c.len());
                for (k, &(s, cnt)) in c.iter().enumerate() {
                    let p = cnt as f64 / self.trajectories as f64;
                    let x = if k + 1 == c.len() || left == 0 {
                        left
                    } else {
                        let q = (p / rest).clamp(0.0, 1.0);
                        Binomial::new(left, q).map_err(|e| Error::InvalidConfig(e.to_string()))?.sample(rng)
                    };
                    left -= x;
                    rest -= p;
                    if x > 0 {
                        out.push((s, x as f64 / self.trajectories as f64));
                    }
                }
                DiscreteDistribution::new(out).map(Some)
            })
            .collect()
    }
}

fn distance_blocks(tree: &HistoryTree, np: usize, laws: &[Option<DiscreteDistribution>], distance: &LawDistance, parallel: bool) -> Result<Vec<Vec<f64>>> {
    let horizon = tree.horizon();
    (0..horizon)
        .map(|d| {
            let n = tree.layer_size(d);
            let base = tree.offset(d);
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
            let row = |&(i, j): &(usize, usize)| -> Result<Vec<f64>> {
                (0..np)
                    .map(|p| match (&laws[(base + i) * np + p], &laws[(base + j) * np + p]) {
                        (Some(a), Some(b)) => distance.between(a, b, horizon - d),
                        _ => Ok(f64::NAN),
                    })
                    .collect()
            };
            let rows: Vec<Vec<f64>> = if parallel { pairs.par_iter().map(row).collect::<Result<_>>()? } else { pairs.iter().map(row).collect::<Result<_>>()? };
            debug_assert_eq!(rows.len(), pair_count(n));
            Ok(rows.into_iter().flatten().collect())
        })
        .collect()
}

/// Cache of exact `W1` between empirical suffix laws.
pub fn sampled_cache(pomdp: &Pomdp, family: &ProbeFamily, horizon: usize, distance: &LawDistance, config: &SamplingConfig) -> Result<DistanceCache> {
    SampledLaws::draw(pomdp, family, horizon, config)?.to_cache(distance, config.parallel)
}

/// Largest defined entry of a set of distance blocks.
fn max_entry(blocks: &[Vec<f64>]) -> f64 {
    blocks.iter().flatten().filter(|v| !v.is_nan()).fold(0.0, |a, &b| a.max(b))
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Percentile bootstrap interval on `max_{pairs, probes} W1`.
pub fn bootstrap_ci_max_w1(samples: &SampledLaws, distance: &LawDistance, resamples: usize, confidence: f64, seed: u64) -> Result<(f64, f64)> {
    if resamples == 0 || !(0.0 < confidence && confidence < 1.0) {
        return Err(Error::InvalidConfig(format!("bootstrap needs resamples > 0 and confidence in (0, 1), got {resamples}, {confidence}")));
    }
    let mut stats: Vec<f64> = (0..resamples)
        .map(|r| {
            let mut rng = substream(seed ^ 0xB007_57A9, r as u64);
            let laws = samples.resample(&mut rng)?;
            Ok(max_entry(&distance_blocks(&samples.tree, samples.n_probes, &laws, distance, false)?))
        })
        .collect::<Result<_>>()?;
    stats.sort_by(f64::total_cmp);
    let alpha = 1.0 - confidence;
    Ok((quantile(&stats, alpha / 2.0), quantile(&stats, 1.0 - alpha / 2.0)))
}

/// Class-count summary across seeds at one `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassCountStats {
    /// Merge threshold.
    pub eps: f64,
    /// Mean class count.
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    /// Smallest count.
    pub min: usize,
    /// Largest count.
    pub max: usize,
}

fn summarize(eps: f64, counts: &[usize]) -> ClassCountStats {
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<usize>() as f64 / n;
    let var = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / n;
    ClassCountStats {
        eps,
        mean,
        std: var.sqrt(),
        min: counts.iter().copied().min().unwrap_or(0),
        max: counts.iter().copied().max().unwrap_or(0),
    }
}

/// Class counts of sampled `ε`-partitions across `config.stability_seeds`.
pub fn seed_stability(
    pomdp: &Pomdp,
    family: &ProbeFamily,
    horizon: usize,
    distance: &LawDistance,
    config: &SamplingConfig,
    eps_list: &[f64],
) -> Result<Vec<ClassCountStats>> {
    if config.stability_seeds.is_empty() {
        return Err(Error::InvalidConfig("no stability seeds".into()));
    }
    let mut counts = vec![Vec::new(); eps_list.len()];
    for &seed in &config.stability_seeds {
        let cache = sampled_cache(pomdp, family, horizon, distance, &SamplingConfig { seed, ..config.clone() })?;
        for (k, &eps) in eps_list.iter().enumerate() {
            counts[k].push(eps_partition(&cache, eps)?.class_count());
        }
    }
    Ok(eps_list.iter().zip(&counts).map(|(&e, c)| summarize(e, c)).collect())
}

/// Class counts across seeds for a cache that does not depend on the seed.
pub fn cache_stability(cache: &DistanceCache, seeds: usize, eps_list: &[f64]) -> Result<Vec<ClassCountStats>> {
    eps_list.iter().map(|&e| Ok(summarize(e, &vec![eps_partition(cache, e)?.class_count(); seeds.max(1)]))).collect()
}

/// One row of the convergence protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    /// Trajectories per cell.
    pub n: usize,
    /// Merge threshold.
    pub eps: f64,
    /// Mean ARI against the exact partition.
    pub mean_ari: f64,
    /// Minimum ARI.
    pub min_ari: f64,
    /// Replications.
    pub reps: usize,
}

/// ARI of sampled against exact `ε`-partitions over trajectory counts and replications.
#[allow(clippy::too_many_arguments)]
pub fn convergence(
    pomdp: &Pomdp,
    family: &ProbeFamily,
    horizon: usize,
    distance: &LawDistance,
    sizes: &[usize],
    reps: usize,
    eps_list: &[f64],
    seed: u64,
) -> Result<Vec<ConvergenceRow>> {
    let exact = build_cache(pomdp, pomdp.name(), family, horizon, distance, CacheOptions::default())?;
    let references: Vec<_> = eps_list.iter().map(|&e| eps_partition(&exact, e)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (si, &n) in sizes.iter().enumerate() {
        let mut aris = vec![Vec::new(); eps_list.len()];
        for r in 0..reps {
            let config = SamplingConfig { trajectories: n, seed: derived_seed(seed, (si * reps + r) as u64), ..SamplingConfig::default() };
            let cache = sampled_cache(pomdp, family, horizon, distance, &config)?;
            for (k, &e) in eps_list.iter().enumerate() {
                aris[k].push(adjusted_rand_index(&references[k], &eps_partition(&cache, e)?)?);
            }
        }
        for (k, &eps) in eps_list.iter().enumerate() {
            let a = &aris[k];
            rows.push(ConvergenceRow {
                n,
                eps,
                mean_ari: a.iter().sum::<f64>() / a.len().max(1) as f64,
                min_ari: a.iter().copied().fold(f64::INFINITY, f64::min),
                reps,
            });
        }
    }
    Ok(rows)
}

/// Empirical coverage of the bootstrap interval for `max W1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    /// Trajectories per cell.
    pub n: usize,
    /// Replications.
    pub replications: usize,
    /// Fraction of intervals containing the exact value.
    pub coverage: f64,
    /// Mean interval width.
    pub mean_width: f64,
    /// Exact `max W1`.
    pub truth: f64,
}

/// Repeat sampling `replications` times and count how often the percentile interval
/// contains the exact maximal distance.
#[allow(clippy::too_many_arguments)]
pub fn bootstrap_coverage(
    pomdp: &Pomdp,
    family: &ProbeFamily,
    horizon: usize,
    distance: &LawDistance,
    n: usize,
    replications: usize,
    resamples: usize,
    confidence: f64,
    seed: u64,
) -> Result<CoverageReport> {
    if replications == 0 {
        return Err(Error::InvalidConfig("replications must be positive".into()));
    }
    let exact = build_cache(pomdp, pomdp.name(), family, horizon, distance, CacheOptions::default())?;
    let truth = envelope(&exact, None)?.max();
    let intervals: Vec<(f64, f64)> = (0..replications)
        .into_par_iter()
        .map(|r| {
            let rep_seed = derived_seed(seed, r as u64);
            let config = SamplingConfig { trajectories: n, seed: rep_seed, parallel: false, ..SamplingConfig::default() };
            let laws = SampledLaws::draw(pomdp, family, horizon, &config)?;
            bootstrap_ci_max_w1(&laws, distance, resamples, confidence, rep_seed)
        })
        .collect::<Result<_>>()?;
    let hits = intervals.iter().filter(|&&(lo, hi)| lo - 1e-12 <= truth && truth <= hi + 1e-12).count();
    Ok(CoverageReport {
        n,
        replications,
        coverage: hits as f64 / replications as f64,
        mean_width: intervals.iter().map(|(lo, hi)| hi - lo).sum::<f64>() / replications as f64,
        truth,
    })
}
