//! Observation histories and the depth-indexed history tree.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An observation sequence; its length is its depth.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct History {
    observations: Vec<usize>,
}

impl History {
    /// History from an observation sequence.
    pub fn new(observations: Vec<usize>) -> Self {
        Self { observations }
    }

    /// The empty history.
    pub fn empty() -> Self {
        Self { observations: Vec::new() }
    }

    /// Observation sequence.
    pub fn observations(&self) -> &[usize] {
        &self.observations
    }

    /// Depth `t`.
    pub fn depth(&self) -> usize {
        self.observations.len()
    }

    /// Extension `h · z`.
    pub fn extend(&self, z: usize) -> Self {
        let mut observations = self.observations.clone();
        observations.push(z);
        Self { observations }
    }

    /// Human-readable label using observation names; the empty history renders as `()`.
    pub fn label(&self, names: &[String]) -> String {
        if self.observations.is_empty() {
            return "()".to_string();
        }
        self.observations.iter().map(|&o| names.get(o).map(String::as_str).unwrap_or("?")).collect::<Vec<_>>().join(" ")
    }
}

/// All histories of depth `0..=T` over an alphabet of size `|O|`.
///
/// Histories of depth `d` are indexed `0..|O|^d` in base `|O|` with the first
/// observation most significant, so children of index `i` are `i·|O| + z`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryTree {
    n_obs: usize,
    horizon: usize,
    offsets: Vec<usize>,
}

/// Cap on the number of histories in a tree.
pub const MAX_HISTORIES: u128 = 1 << 32;

impl HistoryTree {
    /// Tree of depth `horizon` over `n_obs` symbols.
    pub fn new(n_obs: usize, horizon: usize) -> Result<Self> {
        if n_obs == 0 {
            return Err(Error::InvalidConfig("observation alphabet must be nonempty".into()));
        }
        let mut offsets = Vec::with_capacity(horizon + 2);
        let mut total: u128 = 0;
        let mut layer: u128 = 1;
        for _ in 0..=horizon {
            offsets.push(total as usize);
            total += layer;
            if total > MAX_HISTORIES {
                return Err(Error::SizeGuard {
                    what: "history tree".into(),
                    requested: total,
                    cap: MAX_HISTORIES,
                    hint: "use a shorter horizon or layered segments".into(),
                });
            }
            layer *= n_obs as u128;
        }
        offsets.push(total as usize);
        Ok(Self { n_obs, horizon, offsets })
    }

    /// Alphabet size.
    pub fn n_obs(&self) -> usize {
        self.n_obs
    }

    /// Horizon `T`.
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// `|O|^d`.
    pub fn layer_size(&self, depth: usize) -> usize {
        self.offsets[depth + 1] - self.offsets[depth]
    }

    /// `Σ_{d ≤ T} |O|^d`.
    pub fn total(&self) -> usize {
        self.offsets[self.horizon + 1]
    }

    /// Flat index of the first history of depth `d`.
    pub fn offset(&self, depth: usize) -> usize {
        self.offsets[depth]
    }

    /// Index of a history within its depth layer.
    pub fn index_of(&self, observations: &[usize]) -> usize {
        observations.iter().fold(0, |acc, &o| acc * self.n_obs + o)
    }

    /// Observation sequence of history `index` at `depth`.
    pub fn decode(&self, depth: usize, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; depth];
        for k in (0..depth).rev() {
            out[k] = index % self.n_obs;
            index /= self.n_obs;
        }
        out
    }

    /// History value for `(depth, index)`.
    pub fn history(&self, depth: usize, index: usize) -> History {
        History::new(self.decode(depth, index))
    }

    /// Child index of `index` after observing `z`.
    #[inline]
    pub fn child(&self, index: usize, z: usize) -> usize {
        index * self.n_obs + z
    }

    /// All histories of one depth in index order.
    pub fn layer(&self, depth: usize) -> impl Iterator<Item = History> + '_ {
        (0..self.layer_size(depth)).map(move |i| self.history(depth, i))
    }
}

/// Depth-indexed history lists for a model's alphabet.
pub fn history_tree(n_obs: usize, horizon: usize) -> Result<HistoryTree> {
    if horizon == 0 {
        return Err(Error::InvalidConfig("horizon must be ≥ 1".into()));
    }
    HistoryTree::new(n_obs, horizon)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layer_sizes() {
        let t = history_tree(2, 2).unwrap();
        assert_eq!(t.total(), 7);
        assert_eq!(history_tree(4, 2).unwrap().total(), 21);
        assert_eq!(history_tree(3, 2).unwrap().total(), 13);
        assert_eq!(t.layer_size(2), 4);
    }

    #[test]
    fn encode_decode_roundtrip() {
        let t = history_tree(3, 4).unwrap();
        for d in 0..=4 {
            for i in 0..t.layer_size(d) {
                assert_eq!(t.index_of(&t.decode(d, i)), i);
            }
        }
    }
}
