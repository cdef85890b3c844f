//! Probe envelopes, subset and cross-family certificates, and model-level distances.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cache::{max_defined, DistanceCache};
use crate::error::{Error, Result};
use crate::probes::{normalized_block, rollout, ObservationModel, ProbeFamily};
use crate::transport::LawDistance;

/// Per-pair maxima `d(u)` over a probe set, for depths `0..T` (depth `T` is identically 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeEnvelope {
    /// `values[d][pair]`.
    pub values: Vec<Vec<f64>>,
}

impl ProbeEnvelope {
    /// Largest pair value.
    pub fn max(&self) -> f64 {
        self.values.iter().flatten().copied().fold(0.0, f64::max)
    }

    /// Largest value per depth.
    pub fn max_per_depth(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.iter().copied().fold(0.0, f64::max)).collect()
    }

    /// `Σ_u d(u)`.
    pub fn sum(&self) -> f64 {
        self.values.iter().flatten().sum()
    }

    /// `‖self − other‖_∞` as a signed max of `self − other`.
    pub fn max_excess_over(&self, other: &Self) -> Result<f64> {
        if self.values.len() != other.values.len() || self.values.iter().zip(&other.values).any(|(a, b)| a.len() != b.len()) {
            return Err(Error::DimensionMismatch("envelopes over different history trees".into()));
        }
        Ok(self.values.iter().zip(&other.values).flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y)).fold(f64::NEG_INFINITY, f64::max))
    }
}

/// Rowwise maxima over `subset` (the full family when `None`).
pub fn envelope(cache: &DistanceCache, subset: Option<&[usize]>) -> Result<ProbeEnvelope> {
    let np = cache.n_probes();
    if let Some(s) = subset {
        if let Some(&p) = s.iter().find(|&&p| p >= np) {
            return Err(Error::InvalidConfig(format!("probe index {p} out of range (family size {np})")));
        }
    }
    let values = (0..cache.horizon())
        .map(|d| {
            let block = cache.block(d);
            let pairs = block.len().checked_div(np).unwrap_or(0);
            (0..pairs)
                .map(|q| {
                    let row = &block[q * np..(q + 1) * np];
                    match subset {
                        None => max_defined(row.iter().copied()),
                        Some(s) => max_defined(s.iter().map(|&p| row[p])),
                    }
                })
                .collect()
        })
        .collect();
    Ok(ProbeEnvelope { values })
}

/// `δ_S = ‖d − d_S‖_∞`.
pub fn delta_s(cache: &DistanceCache, subset: &[usize]) -> Result<f64> {
    let full = envelope(cache, None)?;
    let sub = envelope(cache, Some(subset))?;
    Ok(full.max_excess_over(&sub)?.max(0.0))
}

/// Cross-family gap with per-depth maxima.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossFamilyGap {
    /// Joint maximum over all equal-depth pairs of `d_rich − d_poor`, clamped at 0.
    pub delta: f64,
    /// Per-depth maxima (depth `T` omitted: identically 0).
    pub per_depth: Vec<f64>,
}

/// Negative gaps down to `−CROSS_FAMILY_TOL` are rounding and clamped to 0; larger ones
/// mean the families are not nested.
pub const CROSS_FAMILY_TOL: f64 = 1e-9;

/// `δ_{1,2} = max_u (d^{rich}(u) − d^{poor}(u))`.
pub fn delta_cross_family(cache_rich: &DistanceCache, cache_poor: &DistanceCache) -> Result<CrossFamilyGap> {
    if cache_rich.tree() != cache_poor.tree() {
        return Err(Error::DimensionMismatch("caches over different history trees".into()));
    }
    let rich = envelope(cache_rich, None)?;
    let poor = envelope(cache_poor, None)?;
    let per_depth: Vec<f64> = rich
        .values
        .iter()
        .zip(&poor.values)
        .map(|(r, p)| r.iter().zip(p).map(|(x, y)| x - y).fold(0.0, f64::max))
        .collect();
    let worst = rich.values.iter().zip(&poor.values).flat_map(|(r, p)| r.iter().zip(p).map(|(x, y)| x - y)).fold(0.0, f64::max);
    let most_negative = rich.values.iter().zip(&poor.values).flat_map(|(r, p)| r.iter().zip(p).map(|(x, y)| x - y)).fold(0.0, f64::min);
    if most_negative < -CROSS_FAMILY_TOL {
        return Err(Error::InvalidConfig(format!(
            "poorer family exceeds richer envelope by {:.3e}; families are not nested",
            -most_negative
        )));
    }
    Ok(CrossFamilyGap { delta: worst, per_depth })
}

/// `D_T^Π(M, N) = max_π W1(P_M^π, P_N^π)` over full-horizon observation laws.
pub fn model_distance<A: ObservationModel, B: ObservationModel>(
    a: &A,
    b: &B,
    family: &ProbeFamily,
    horizon: usize,
    distance: &LawDistance,
) -> Result<f64> {
    Ok(model_distance_per_probe(a, b, family, horizon, distance)?.into_iter().fold(0.0, f64::max))
}

/// `W1(P_M^π, P_N^π)` for every probe, in family order.
pub fn model_distance_per_probe<A: ObservationModel, B: ObservationModel>(
    a: &A,
    b: &B,
    family: &ProbeFamily,
    horizon: usize,
    distance: &LawDistance,
) -> Result<Vec<f64>> {
    if a.n_actions() != b.n_actions() || a.n_observations() != b.n_observations() {
        return Err(Error::DimensionMismatch(format!(
            "alphabets differ: |A| {} vs {}, |O| {} vs {}",
            a.n_actions(),
            b.n_actions(),
            a.n_observations(),
            b.n_observations()
        )));
    }
    family
        .members()
        .par_iter()
        .map(|fsc| {
            let la = rollout(a, fsc, horizon, &[])?;
            let lb = rollout(b, fsc, horizon, &[])?;
            match (normalized_block(la.leaves()), normalized_block(lb.leaves())) {
                (Some(p), Some(q)) => distance.between(&p, &q, horizon),
                _ => Err(Error::InvalidDistribution { context: "observation law".into(), reason: "no mass".into() }),
            }
        })
        .collect()
}
