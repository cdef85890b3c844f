//! Finite distributions over observation sequences and distances between them.

use serde::{Deserialize, Serialize};

use super::metric::GroundMetric;
use super::simplex::w1_exact;
use crate::error::{Error, Result};

/// Tolerance on total mass of a [`DiscreteDistribution`].
pub const MASS_TOL: f64 = 1e-10;

/// A finitely supported probability distribution over sequence indices.
///
/// Sequences of length `len` over an alphabet of size `|O|` are encoded in base `|O|`
/// with the first symbol most significant. The support is sorted and masses are positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDistribution {
    support: Vec<u64>,
    masses: Vec<f64>,
}

impl DiscreteDistribution {
    /// Build from `(index, mass)` pairs; zero masses are dropped, duplicates summed.
    pub fn new(mut entries: Vec<(u64, f64)>) -> Result<Self> {
        entries.retain(|&(_, m)| m != 0.0);
        entries.sort_by_key(|&(k, _)| k);
        let mut support: Vec<u64> = Vec::with_capacity(entries.len());
        let mut masses: Vec<f64> = Vec::with_capacity(entries.len());
        for (k, m) in entries {
            if !m.is_finite() || m < 0.0 {
                return Err(Error::InvalidDistribution { context: "discrete distribution".into(), reason: format!("mass {m}") });
            }
            if support.last() == Some(&k) {
                *masses.last_mut().expect("nonempty") += m;
            } else {
                support.push(k);
                masses.push(m);
            }
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidDistribution { context: "discrete distribution".into(), reason: format!("total mass {total}") });
        }
        Ok(Self { support, masses })
    }

    /// Empirical distribution of a sample of indices.
    pub fn empirical(samples: &[u64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidDistribution { context: "empirical distribution".into(), reason: "no samples".into() });
        }
        let mut sorted = samples.to_vec();
        sorted.sort_unstable();
        let w = 1.0 / samples.len() as f64;
        let mut support = Vec::new();
        let mut masses: Vec<f64> = Vec::new();
        for k in sorted {
            if support.last() == Some(&k) {
                *masses.last_mut().expect("nonempty") += w;
            } else {
                support.push(k);
                masses.push(w);
            }
        }
        Ok(Self { support, masses })
    }

    /// Point mass at `index`.
    pub fn point(index: u64) -> Self {
        Self { support: vec![index], masses: vec![1.0] }
    }

    /// Sorted support indices.
    pub fn support(&self) -> &[u64] {
        &self.support
    }

    /// Masses aligned with [`Self::support`].
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Mass at `index` (0 when outside the support).
    pub fn mass(&self, index: u64) -> f64 {
        self.support.binary_search(&index).map(|k| self.masses[k]).unwrap_or(0.0)
    }

    /// Number of support points.
    pub fn len(&self) -> usize {
        self.support.len()
    }

    /// True when the support is empty (never for a validated distribution).
    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }
}

/// Exact `W1` between two distributions over sequences of length `len`, with the
/// additive sequence cost induced by `metric`. The cost matrix is built only over the
/// two supports.
pub fn w1_sequences(p: &DiscreteDistribution, q: &DiscreteDistribution, len: usize, metric: &GroundMetric) -> Result<f64> {
    if p.is_empty() || q.is_empty() {
        return Err(Error::InvalidMarginals("empty support".into()));
    }
    if len == 0 || p == q {
        return Ok(0.0);
    }
    let n = p.len();
    let m = q.len();
    let mut cost = vec![0.0; n * m];
    for (i, &x) in p.support.iter().enumerate() {
        for (j, &y) in q.support.iter().enumerate() {
            cost[i * m + j] = metric.indexed_sequence_cost(x, y, len);
        }
    }
    w1_exact(&p.masses, &q.masses, &cost)
}

/// Total variation `½ Σ |p − q|` over the union of supports.
pub fn total_variation(p: &DiscreteDistribution, q: &DiscreteDistribution) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut acc = 0.0;
    while i < p.len() || j < q.len() {
        let a = p.support.get(i).copied();
        let b = q.support.get(j).copied();
        match (a, b) {
            (Some(x), Some(y)) if x == y => {
                acc += (p.masses[i] - q.masses[j]).abs();
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) if x < y => {
                acc += p.masses[i];
                i += 1;
            }
            (Some(_), None) => {
                acc += p.masses[i];
                i += 1;
            }
            _ => {
                acc += q.masses[j];
                j += 1;
            }
        }
    }
    0.5 * acc
}

/// Distance used between suffix laws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LawDistance {
    /// `W1` under the additive sequence extension of a ground metric.
    Wasserstein(GroundMetric),
    /// Total variation on whole sequences.
    TotalVariation,
}

impl LawDistance {
    /// Distance between two laws over sequences of length `len`.
    pub fn between(&self, p: &DiscreteDistribution, q: &DiscreteDistribution, len: usize) -> Result<f64> {
        match self {
            Self::Wasserstein(metric) => w1_sequences(p, q, len, metric),
            Self::TotalVariation => Ok(if len == 0 { 0.0 } else { total_variation(p, q) }),
        }
    }

    /// Identifier for artifact headers.
    pub fn id(&self) -> String {
        match self {
            Self::Wasserstein(metric) => format!("w1:{}", metric.id()),
            Self::TotalVariation => "tv".to_string(),
        }
    }

    /// Ground metric, when the distance is Wasserstein.
    pub fn metric(&self) -> Option<&GroundMetric> {
        match self {
            Self::Wasserstein(metric) => Some(metric),
            Self::TotalVariation => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn witness_laws_distance_quarter() {
        // Alphabet {L, R, U, X, Y}; UU = 2*5+2, UX = 2*5+3, UY = 2*5+4.
        let metric = GroundMetric::discrete(5);
        let p = DiscreteDistribution::new(vec![(12, 0.75), (13, 0.25)]).unwrap();
        let q = DiscreteDistribution::new(vec![(12, 0.75), (14, 0.25)]).unwrap();
        assert!((w1_sequences(&p, &q, 2, &metric).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn tv_of_one_step_tiger_laws() {
        let p = DiscreteDistribution::new(vec![(0, 0.745), (1, 0.255)]).unwrap();
        let q = DiscreteDistribution::new(vec![(0, 0.255), (1, 0.745)]).unwrap();
        assert!((total_variation(&p, &q) - 0.49).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_mass() {
        assert!(DiscreteDistribution::new(vec![(0, 0.5), (1, 0.4)]).is_err());
    }
}
