//! Cache, partition, quotient, selection and ledger artifacts.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::artifact::{fnum, Artifact};
use crate::error::{Error, Result};
use crate::layered::LayeredReport;
use crate::model::HistoryTree;
use crate::pseudometric::{pair_count, CacheMeta, DistanceCache};
use crate::quotient::{Partition, QuotientPomdp};
use crate::selection::SubsetSelection;

/// Version tag of the binary cache format.
pub const CACHE_FORMAT_VERSION: u32 = 1;
const CACHE_MAGIC: &[u8; 4] = b"BQC1";

#[derive(Serialize, Deserialize)]
struct CacheHeader {
    version: u32,
    meta: CacheMeta,
    n_obs: usize,
    horizon: usize,
    n_probes: usize,
}

/// File stem keyed by benchmark, family descriptor, horizon and metric.
pub fn cache_key(meta: &CacheMeta, horizon: usize) -> String {
    format!("{}_{}_T{horizon}_{}", meta.benchmark, meta.family, meta.metric)
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' || c == '_' { c } else { '-' })
        .collect()
}

/// Write `<dir>/<key>.cache.bin` and its CSV mirror `<key>.cache.csv`; returns the binary path.
pub fn save_cache(cache: &DistanceCache, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let key = cache_key(cache.meta(), cache.horizon());
    let header = CacheHeader {
        version: CACHE_FORMAT_VERSION,
        meta: cache.meta().clone(),
        n_obs: cache.tree().n_obs(),
        horizon: cache.horizon(),
        n_probes: cache.n_probes(),
    };
    let json = serde_json::to_vec(&header)?;
    let mut bytes = Vec::with_capacity(16 + json.len() + cache.reach_mask().len());
    bytes.extend_from_slice(CACHE_MAGIC);
    bytes.extend_from_slice(&(json.len() as u64).to_le_bytes());
    bytes.extend_from_slice(&json);
    bytes.extend(cache.reach_mask().iter().map(|&r| r as u8));
    for d in 0..cache.horizon() {
        for v in cache.block(d) {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    let bin = dir.join(format!("{key}.cache.bin"));
    fs::File::create(&bin)?.write_all(&bytes)?;
    fs::write(dir.join(format!("{key}.cache.csv")), cache_csv(cache)?)?;
    Ok(bin)
}

/// CSV mirror: header comments, then `depth,i,j,p,distance` for stored (reachable) entries.
pub fn cache_csv(cache: &DistanceCache) -> Result<String> {
    let meta = cache.meta();
    let mut out = format!(
        "# boundq cache version={CACHE_FORMAT_VERSION}\n# benchmark={} family={} T={} metric={} probes={}\n",
        meta.benchmark,
        meta.family,
        cache.horizon(),
        meta.metric,
        cache.n_probes()
    );
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["depth", "i", "j", "p", "distance"])?;
    for d in 0..cache.horizon() {
        let n = cache.tree().layer_size(d);
        let mut pair = 0;
        for i in 0..n {
            for j in i + 1..n {
                for (p, &v) in cache.pair_row(d, pair).iter().enumerate() {
                    if !v.is_nan() {
                        w.write_record([d.to_string(), i.to_string(), j.to_string(), p.to_string(), format!("{v:.12}")])?;
                    }
                }
                pair += 1;
            }
        }
    }
    out.push_str(&String::from_utf8(w.into_inner().map_err(|e| Error::Artifact(e.to_string()))?).map_err(|e| Error::Artifact(e.to_string()))?);
    Ok(out)
}

/// Load a binary cache written by [`save_cache`].
pub fn load_cache(path: &Path) -> Result<DistanceCache> {
    let mut bytes = Vec::new();
    fs::File::open(path).map_err(|e| Error::Artifact(format!("{}: {e}", path.display())))?.read_to_end(&mut bytes)?;
    let bad = |what: &str| Error::Artifact(format!("{}: {what}", path.display()));
    if bytes.len() < 12 || &bytes[..4] != CACHE_MAGIC {
        return Err(bad("not a boundq cache file"));
    }
    let len = u64::from_le_bytes(bytes[4..12].try_into().expect("8 bytes")) as usize;
    let json = bytes.get(12..12 + len).ok_or_else(|| bad("truncated header"))?;
    let header: CacheHeader = serde_json::from_slice(json)?;
    if header.version != CACHE_FORMAT_VERSION {
        return Err(bad(&format!("cache version {} unsupported", header.version)));
    }
    let tree = HistoryTree::new(header.n_obs, header.horizon)?;
    let mut at = 12 + len;
    let n_reach = tree.total() * header.n_probes;
    let reach = bytes.get(at..at + n_reach).ok_or_else(|| bad("truncated reach mask"))?.iter().map(|&b| b != 0).collect();
    at += n_reach;
    let mut blocks = Vec::with_capacity(header.horizon);
    for d in 0..header.horizon {
        let n = pair_count(tree.layer_size(d)) * header.n_probes;
        let raw = bytes.get(at..at + 8 * n).ok_or_else(|| bad("truncated distance block"))?;
        blocks.push(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect());
        at += 8 * n;
    }
    if at != bytes.len() {
        return Err(bad("trailing bytes"));
    }
    DistanceCache::from_parts(header.meta, tree, header.n_probes, reach, blocks)
}

/// Partition artifact: `depth, history, class_id, sink`.
pub fn partition_artifact(partition: &Partition, observation_names: &[String], config_hash: String) -> Result<Artifact> {
    let mut art = Artifact::new("partition", config_hash, &["depth", "history", "class_id", "sink"]);
    let tree = partition.tree();
    for d in 0..=partition.horizon() {
        for i in 0..tree.layer_size(d) {
            art.push(vec![
                d.to_string(),
                tree.history(d, i).label(observation_names),
                partition.class_of(d, i).to_string(),
                partition.is_sink(d, i).to_string(),
            ])?;
        }
    }
    Ok(art)
}

/// Quotient kernel dump: `depth, class, context, action, observation, next_class, probability`.
pub fn quotient_artifact(quotient: &QuotientPomdp, config_hash: String) -> Result<Artifact> {
    let mut art = Artifact::new("quotient", config_hash, &["depth", "class", "context", "action", "observation", "next_class", "probability"]);
    let actions = quotient.base().action_names();
    let observations = quotient.base().observation_names();
    for (d, class, ctx, a, z, next, p) in quotient.kernel_rows() {
        art.push(vec![d.to_string(), class.to_string(), ctx.to_string(), actions[a].clone(), observations[z].clone(), next.to_string(), fnum(p)])?;
    }
    Ok(art)
}

/// Selection trace: `step, probe_id, marginal_gain, coverage, delta_s_so_far`.
pub fn selection_artifact(selection: &SubsetSelection, config_hash: String) -> Result<Artifact> {
    let mut art = Artifact::new("selection", config_hash, &["step", "probe_id", "marginal_gain", "coverage", "delta_s_so_far"]);
    for (t, &p) in selection.chosen.iter().enumerate() {
        art.push(vec![(t + 1).to_string(), p.to_string(), fnum(selection.gains[t]), fnum(selection.coverage[t]), fnum(selection.delta_s[t])])?;
    }
    Ok(art)
}

/// Layered ledger: `layer, tau, lipschitz, residual, empirical, bound, step_bound, classes, histories_processed, runtime`.
///
/// `runtime` is left empty unless `timing` is set, keeping the file reproducible by default.
pub fn ledger_artifact(report: &LayeredReport, timing: bool, config_hash: String) -> Result<Artifact> {
    let mut art = Artifact::new(
        "layered_ledger",
        config_hash,
        &["layer", "tau", "lipschitz", "residual", "empirical", "bound", "step_bound", "classes", "histories_processed", "holds", "runtime"],
    );
    for r in &report.rows {
        art.push(vec![
            r.layer.to_string(),
            r.tau.to_string(),
            fnum(r.lipschitz),
            fnum(r.residual),
            fnum(r.empirical),
            fnum(r.bound),
            fnum(r.step_bound),
            r.classes.to_string(),
            r.histories.to_string(),
            r.holds().to_string(),
            if timing { format!("{:.6}", r.runtime) } else { String::new() },
        ])?;
    }
    Ok(art)
}
