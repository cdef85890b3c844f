//! Per-depth partitions of the history tree and their comparison.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::HistoryTree;
use crate::pseudometric::DistanceCache;

/// Distance at or below which two histories are identified at `ε = 0`.
pub const EXACT_TOL: f64 = 1e-9;
/// Slack added to `ε` when comparing linkage diameters.
pub const LINKAGE_SLACK: f64 = 1e-12;

/// Per-depth class assignment over a history tree.
///
/// Histories unreachable under every probe share one sink class per depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    tree: HistoryTree,
    /// `labels[d][i]` = class id, dense per depth.
    labels: Vec<Vec<usize>>,
    /// Sink class id per depth, if any history is unreachable.
    sinks: Vec<Option<usize>>,
    eps: f64,
    family: String,
}

impl Partition {
    /// Assemble from labels; class ids are re-densified in first-occurrence order.
    pub fn from_labels(tree: HistoryTree, labels: Vec<Vec<usize>>, sinks_mask: Vec<Vec<bool>>, eps: f64, family: String) -> Result<Self> {
        if labels.len() != tree.horizon() + 1 || sinks_mask.len() != labels.len() {
            return Err(Error::DimensionMismatch("partition depth count".into()));
        }
        let mut dense = Vec::with_capacity(labels.len());
        let mut sinks = Vec::with_capacity(labels.len());
        for (d, (layer, mask)) in labels.iter().zip(&sinks_mask).enumerate() {
            if layer.len() != tree.layer_size(d) || mask.len() != layer.len() {
                return Err(Error::DimensionMismatch(format!("partition layer {d} size")));
            }
            let mut map = std::collections::HashMap::new();
            let mut out = vec![0; layer.len()];
            let mut sink = None;
            for (i, (&l, &unreach)) in layer.iter().zip(mask).enumerate() {
                if unreach {
                    continue;
                }
                let next = map.len();
                out[i] = *map.entry(l).or_insert(next);
            }
            for (i, &unreach) in mask.iter().enumerate() {
                if unreach {
                    let id = *sink.get_or_insert(map.len());
                    out[i] = id;
                }
            }
            dense.push(out);
            sinks.push(sink);
        }
        Ok(Self { tree, labels: dense, sinks, eps, family })
    }

    /// History tree.
    pub fn tree(&self) -> &HistoryTree {
        &self.tree
    }

    /// Horizon.
    pub fn horizon(&self) -> usize {
        self.tree.horizon()
    }

    /// `ε` used.
    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Family descriptor.
    pub fn family(&self) -> &str {
        &self.family
    }

    /// Class of history `(d, i)`.
    #[inline]
    pub fn class_of(&self, depth: usize, i: usize) -> usize {
        self.labels[depth][i]
    }

    /// Labels of one depth.
    pub fn labels(&self, depth: usize) -> &[usize] {
        &self.labels[depth]
    }

    /// Sink class of a depth.
    pub fn sink(&self, depth: usize) -> Option<usize> {
        self.sinks[depth]
    }

    /// Is `(d, i)` in the sink class?
    pub fn is_sink(&self, depth: usize, i: usize) -> bool {
        self.sinks[depth] == Some(self.labels[depth][i])
    }

    /// Classes at a depth, including the sink.
    pub fn classes_at(&self, depth: usize) -> usize {
        self.labels[depth].iter().copied().max().map_or(0, |m| m + 1)
    }

    /// Total classes over all depths, including sinks.
    pub fn class_count(&self) -> usize {
        (0..=self.horizon()).map(|d| self.classes_at(d)).sum()
    }

    /// Total classes over all depths, excluding sinks.
    pub fn reachable_class_count(&self) -> usize {
        (0..=self.horizon()).map(|d| self.classes_at(d) - usize::from(self.sinks[d].is_some())).sum()
    }

    /// Member histories of a class in index order.
    pub fn members(&self, depth: usize, class: usize) -> Vec<usize> {
        self.labels[depth].iter().enumerate().filter(|(_, &c)| c == class).map(|(i, _)| i).collect()
    }

    /// Members of every class at a depth.
    pub fn classes(&self, depth: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.classes_at(depth)];
        for (i, &c) in self.labels[depth].iter().enumerate() {
            out[c].push(i);
        }
        out
    }

    /// Is every class of `self` contained in a class of `coarser`?
    pub fn refines(&self, coarser: &Partition) -> bool {
        if self.tree != coarser.tree {
            return false;
        }
        (0..=self.horizon()).all(|d| {
            let mut image: Vec<Option<usize>> = vec![None; self.classes_at(d)];
            self.labels[d].iter().zip(&coarser.labels[d]).all(|(&a, &b)| match image[a] {
                None => {
                    image[a] = Some(b);
                    true
                }
                Some(x) => x == b,
            })
        })
    }
}

fn sink_mask(cache: &DistanceCache, depth: usize) -> Vec<bool> {
    (0..cache.tree().layer_size(depth)).map(|i| !cache.reachable_any(depth, i)).collect()
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

/// Transitive closure of `d^Π ≤ 1e-9` per depth.
///
/// Skipping zero-reach probes can make the relation intransitive (two histories each
/// indistinguishable from a third under disjoint probe sets). A closure component whose
/// diameter exceeds the tolerance is therefore split by complete linkage at the tolerance.
pub fn exact_partition(cache: &DistanceCache) -> Result<Partition> {
    let tree = cache.tree().clone();
    let mut labels = Vec::new();
    let mut masks = Vec::new();
    for d in 0..=tree.horizon() {
        let n = tree.layer_size(d);
        let mask = sink_mask(cache, d);
        let live: Vec<usize> = (0..n).filter(|&i| !mask[i]).collect();
        let mut uf = UnionFind((0..n).collect());
        for (a, &i) in live.iter().enumerate() {
            for &j in &live[a + 1..] {
                if cache.history_distance(d, i, j) <= EXACT_TOL {
                    uf.union(i, j);
                }
            }
        }
        let mut layer: Vec<usize> = (0..n).map(|i| uf.find(i)).collect();
        let mut components: Vec<Vec<usize>> = Vec::new();
        for &i in &live {
            match components.iter_mut().find(|c| layer[c[0]] == layer[i]) {
                Some(c) => c.push(i),
                None => components.push(vec![i]),
            }
        }
        for comp in components.iter().filter(|c| c.len() > 2) {
            let spread = comp.iter().enumerate().any(|(a, &i)| comp[a + 1..].iter().any(|&j| cache.history_distance(d, i, j) > EXACT_TOL));
            if spread {
                let sub = complete_linkage(comp.len(), |a, b| cache.history_distance(d, comp[a], comp[b]), EXACT_TOL);
                // Sub-cluster labels are remapped to the smallest member, as union-find roots are.
                let mut root = vec![usize::MAX; comp.len()];
                for (k, &i) in comp.iter().enumerate() {
                    root[sub[k]] = root[sub[k]].min(i);
                }
                for (k, &i) in comp.iter().enumerate() {
                    layer[i] = root[sub[k]];
                }
            }
        }
        labels.push(layer);
        masks.push(mask);
    }
    Partition::from_labels(tree, labels, masks, 0.0, cache.meta().family.clone())
}

/// Complete-linkage agglomeration of `items` under `dist`, merging while the linkage is ≤ `eps`.
///
/// Clusters are kept ordered by smallest member; the closest pair is merged, ties going to
/// the lexicographically lowest cluster pair.
pub fn complete_linkage(n: usize, dist: impl Fn(usize, usize) -> f64, eps: f64) -> Vec<usize> {
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    // Linkage matrix between current clusters.
    let mut link: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { dist(i, j) }).collect()).collect();
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for (a, row) in link.iter().enumerate().take(clusters.len()) {
            for (b, &v) in row.iter().enumerate().take(clusters.len()).skip(a + 1) {
                if v <= eps + LINKAGE_SLACK && best.is_none_or(|(bv, _, _)| v < bv) {
                    best = Some((v, a, b));
                }
            }
        }
        let Some((_, a, b)) = best else { break };
        let moved = clusters.remove(b);
        clusters[a].extend(moved);
        clusters[a].sort_unstable();
        let row_b = link.remove(b);
        for row in link.iter_mut() {
            row.remove(b);
        }
        for (k, &vb) in row_b.iter().enumerate().filter(|&(k, _)| k != b) {
            let k2 = if k > b { k - 1 } else { k };
            if k2 != a {
                let v = link[a][k2].max(vb);
                link[a][k2] = v;
                link[k2][a] = v;
            }
        }
    }
    let mut labels = vec![0; n];
    for (c, members) in clusters.iter().enumerate() {
        for &i in members {
            labels[i] = c;
        }
    }
    labels
}

/// Per-depth complete-linkage partition at threshold `ε`; `ε = 0` uses [`exact_partition`].
pub fn eps_partition(cache: &DistanceCache, eps: f64) -> Result<Partition> {
    if eps.is_nan() || eps < 0.0 {
        return Err(Error::InvalidConfig(format!("ε must be ≥ 0, got {eps}")));
    }
    if eps == 0.0 {
        return exact_partition(cache);
    }
    let tree = cache.tree().clone();
    let mut labels = Vec::new();
    let mut masks = Vec::new();
    for d in 0..=tree.horizon() {
        let n = tree.layer_size(d);
        let mask = sink_mask(cache, d);
        let live: Vec<usize> = (0..n).filter(|&i| !mask[i]).collect();
        let sub = complete_linkage(live.len(), |a, b| cache.history_distance(d, live[a], live[b]), eps);
        let mut layer = vec![usize::MAX; n];
        for (k, &i) in live.iter().enumerate() {
            layer[i] = sub[k];
        }
        labels.push(layer);
        masks.push(mask);
    }
    Partition::from_labels(tree, labels, masks, eps, cache.meta().family.clone())
}

fn choose2(n: usize) -> f64 {
    let n = n as f64;
    n * (n - 1.0) / 2.0
}

/// A `(depth, class)` label.
pub type Label = (usize, usize);

/// Adjusted Rand index between two labelings of the same items.
pub fn ari_labels(a: &[Label], b: &[Label]) -> f64 {
    use std::collections::HashMap;
    let n = a.len();
    if n < 2 {
        return 1.0;
    }
    let mut joint: HashMap<(Label, Label), usize> = HashMap::new();
    let mut ca: HashMap<Label, usize> = HashMap::new();
    let mut cb: HashMap<Label, usize> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1;
        *ca.entry(x).or_default() += 1;
        *cb.entry(y).or_default() += 1;
    }
    let index: f64 = joint.values().map(|&v| choose2(v)).sum();
    let sa: f64 = ca.values().map(|&v| choose2(v)).sum();
    let sb: f64 = cb.values().map(|&v| choose2(v)).sum();
    let expected = sa * sb / choose2(n);
    let max = 0.5 * (sa + sb);
    if (max - expected).abs() < 1e-15 {
        return 1.0;
    }
    (index - expected) / (max - expected)
}

fn ari_items(p1: &Partition, p2: &Partition, depths: impl Iterator<Item = usize>) -> (Vec<Label>, Vec<Label>) {
    let mut a = Vec::new();
    let mut b = Vec::new();
    for d in depths {
        for i in 0..p1.tree.layer_size(d) {
            if p1.is_sink(d, i) || p2.is_sink(d, i) {
                continue;
            }
            a.push((d, p1.class_of(d, i)));
            b.push((d, p2.class_of(d, i)));
        }
    }
    (a, b)
}

/// ARI pooled across depths (classes are depth-tagged); sink members are excluded.
pub fn adjusted_rand_index(p1: &Partition, p2: &Partition) -> Result<f64> {
    if p1.tree != p2.tree {
        return Err(Error::DimensionMismatch("partitions over different history trees".into()));
    }
    let (a, b) = ari_items(p1, p2, 0..=p1.horizon());
    Ok(ari_labels(&a, &b))
}

/// ARI per depth.
pub fn adjusted_rand_index_per_depth(p1: &Partition, p2: &Partition) -> Result<Vec<f64>> {
    if p1.tree != p2.tree {
        return Err(Error::DimensionMismatch("partitions over different history trees".into()));
    }
    Ok((0..=p1.horizon())
        .map(|d| {
            let (a, b) = ari_items(p1, p2, std::iter::once(d));
            ari_labels(&a, &b)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ari_identity_and_disagreement() {
        let a: Vec<_> = (0..6).map(|i| (0, i / 2)).collect();
        assert!((ari_labels(&a, &a) - 1.0).abs() < 1e-12);
        let singletons: Vec<_> = (0..4).map(|i| (0, i)).collect();
        let merged: Vec<_> = (0..4).map(|_| (0, 0)).collect();
        assert!(ari_labels(&singletons, &merged) <= 0.0);
    }

    #[test]
    fn linkage_respects_diameter() {
        // Points at 0, 0.3, 0.6: single linkage would chain all three at 0.4.
        let x: [f64; 3] = [0.0, 0.3, 0.6];
        let labels = complete_linkage(3, |i, j| (x[i] - x[j]).abs(), 0.4);
        assert_eq!(labels[0], labels[1]);
        assert_ne!(labels[1], labels[2]);
    }
}
