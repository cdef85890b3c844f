//! Data-processing checks and layered horizon composition with its error ledger.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::wrapper::{apply_wrapper, Wrapped, Wrapper};
use crate::error::{Error, Result};
use crate::model::{HistoryTree, Pomdp};
use crate::probes::{enumerate_family, FamilyKind, ObservationModel, ProbeFamily, DEFAULT_FAMILY_CAP};
use crate::pseudometric::{build_cache, model_distance, CacheOptions};
use crate::quotient::{eps_partition, QuotientPomdp};
use crate::transport::{GroundMetric, LawDistance};

/// Slack on the checked inequalities.
pub const COMPOSITION_TOL: f64 = 1e-9;

/// Family over a model's alphabets.
fn family_for<M: ObservationModel>(model: &M, kind: FamilyKind, m: usize, horizon: usize) -> Result<ProbeFamily> {
    enumerate_family(kind, m, model.n_actions(), model.n_observations(), horizon, DEFAULT_FAMILY_CAP)
}

/// Family whose members read `quantize[o]` in place of `o`.
pub fn pullback_family(family: &ProbeFamily, quantize: &[usize]) -> Result<ProbeFamily> {
    let members = family.members().iter().map(|f| f.pullback(quantize)).collect::<Result<_>>()?;
    ProbeFamily::from_members(family.kind(), family.memory(), family.horizon(), members)
}

/// `lhs = D(W(A), W(B))` against `rhs = L_C · D(A, B)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataProcessingCheck {
    /// Distance after wrapping.
    pub lhs: f64,
    /// `L_C` times the distance before wrapping.
    pub rhs: f64,
    /// Distance before wrapping.
    pub before: f64,
    /// `L_C`.
    pub lipschitz: f64,
}

impl DataProcessingCheck {
    /// `lhs ≤ rhs` within [`COMPOSITION_TOL`].
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + COMPOSITION_TOL
    }
}

/// Compare model distances before and after a wrapper, each under the family of the given
/// kind and memory over that side's alphabets.
#[allow(clippy::too_many_arguments)]
pub fn check_data_processing<A: ObservationModel, B: ObservationModel>(
    a: &A,
    b: &B,
    metric: &GroundMetric,
    wrapper: &Wrapper,
    kind: FamilyKind,
    m: usize,
    horizon: usize,
) -> Result<DataProcessingCheck> {
    let lipschitz = wrapper.lipschitz(metric)?;
    let before = model_distance(a, b, &family_for(a, kind, m, horizon)?, horizon, &LawDistance::Wasserstein(metric.clone()))?;
    let (wa, wb) = (Wrapped::new(a, wrapper)?, Wrapped::new(b, wrapper)?);
    let lhs = model_distance(&wa, &wb, &family_for(&wa, kind, m, horizon)?, horizon, &LawDistance::Wasserstein(wrapper.metric().clone()))?;
    Ok(DataProcessingCheck { lhs, rhs: lipschitz * before, before, lipschitz })
}

/// Segmented construction: reference chain `M_{i+1} = W_i(M_i)`, approximate models
/// `M̃_i` built as `ε`-quotients of `M_i` over each segment horizon.
#[derive(Debug, Clone)]
pub struct LayeredPlan {
    /// `M_1`.
    pub base: Pomdp,
    /// Segment horizons `τ_i`.
    pub segments: Vec<usize>,
    /// `W_i` between segment `i` and `i + 1`.
    pub wrappers: Vec<Wrapper>,
    /// Merge threshold of every approximate model.
    pub eps: f64,
    /// Probe family kind.
    pub kind: FamilyKind,
    /// Probe memory.
    pub memory: usize,
}

impl LayeredPlan {
    /// `⌈T/τ⌉` segments of length `τ` (the last takes the remainder) joined by identity wrappers.
    pub fn uniform(base: Pomdp, horizon: usize, tau: usize, eps: f64, kind: FamilyKind, memory: usize) -> Result<Self> {
        if tau == 0 || horizon == 0 {
            return Err(Error::InvalidConfig("segment length and horizon must be ≥ 1".into()));
        }
        let mut segments = vec![tau; horizon / tau];
        if horizon % tau != 0 {
            segments.push(horizon % tau);
        }
        let wrappers = vec![Wrapper::identity(&base); segments.len() - 1];
        Ok(Self { base, segments, wrappers, eps, kind, memory })
    }

    /// Replace the wrappers (`L − 1` of them).
    pub fn with_wrappers(mut self, wrappers: Vec<Wrapper>) -> Result<Self> {
        if wrappers.len() + 1 != self.segments.len() {
            return Err(Error::ChainMismatch(format!("{} segments need {} wrappers, got {}", self.segments.len(), self.segments.len() - 1, wrappers.len())));
        }
        self.wrappers = wrappers;
        Ok(self)
    }

    /// End-to-end horizon `Σ τ_i`.
    pub fn horizon(&self) -> usize {
        self.segments.iter().sum()
    }

    /// Histories processed: `Σ_i Σ_{d ≤ τ_i} |O_i|^d`.
    pub fn histories_processed(&self) -> Result<u128> {
        let mut obs = self.base.n_observations();
        let mut total = 0u128;
        for (i, &tau) in self.segments.iter().enumerate() {
            total += HistoryTree::new(obs, tau)?.total() as u128;
            if let Some(w) = self.wrappers.get(i) {
                obs = w.n_observations();
            }
        }
        Ok(total)
    }
}

/// Histories of the monolithic tree `Σ_{d ≤ T} |O|^d`.
pub fn direct_histories(n_obs: usize, horizon: usize) -> u128 {
    (0..=horizon as u32).map(|d| (n_obs as u128).pow(d)).sum()
}

/// One ledger row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    /// 1-based layer.
    pub layer: usize,
    /// Segment horizon.
    pub tau: usize,
    /// `L_{i−1}` of the incoming wrapper (1 for the first layer).
    pub lipschitz: f64,
    /// Incoming residual `ε_{i−1} = D(W(M̃_{i−1}), M̃_i)` (0 for the first layer).
    pub residual: f64,
    /// Recursion bound on `Γ_i`.
    pub bound: f64,
    /// One-step bound `L·Γ_{i−1} + ε` from the measured previous distortion.
    pub step_bound: f64,
    /// Measured `Γ_i = D(M_i, M̃_i)`.
    pub empirical: f64,
    /// Quotient classes of `M̃_i`.
    pub classes: usize,
    /// Histories processed in this segment.
    pub histories: u128,
    /// Wall time of the segment in seconds.
    pub runtime: f64,
}

impl LedgerRow {
    /// Measured distortion within both bounds.
    pub fn holds(&self) -> bool {
        self.empirical <= self.bound + COMPOSITION_TOL && self.empirical <= self.step_bound + COMPOSITION_TOL
    }
}

/// Ledger of a layered run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayeredReport {
    /// Per-layer rows.
    pub rows: Vec<LedgerRow>,
    /// `Σ` histories over segments.
    pub histories_layered: u128,
    /// Monolithic history count.
    pub histories_direct: u128,
    /// `L_R · T · Γ_{L}` with the propagated bound.
    pub value_bound: f64,
    /// `L_R` used for the value bound.
    pub reward_lipschitz: f64,
}

impl LayeredReport {
    /// Every row within its bounds.
    pub fn holds(&self) -> bool {
        self.rows.iter().all(LedgerRow::holds)
    }
}

/// Execute a plan: build each segment's quotient, measure `Γ_i` and the residuals, and
/// propagate `Γ_{i+1} ≤ L_i Γ_i + ε_i`. Distances within segment `i` use horizon `τ_i`.
pub fn run_layered(plan: &LayeredPlan, reward_lipschitz: f64) -> Result<LayeredReport> {
    if plan.wrappers.len() + 1 != plan.segments.len() {
        return Err(Error::ChainMismatch("wrapper count must be one less than segment count".into()));
    }
    let mut rows: Vec<LedgerRow> = Vec::new();
    let mut reference = plan.base.clone();
    let mut previous: Option<QuotientPomdp> = None;
    for (i, &tau) in plan.segments.iter().enumerate() {
        let start = Instant::now();
        if i > 0 {
            reference = apply_wrapper(&reference, &plan.wrappers[i - 1])?;
        }
        let distance = LawDistance::Wasserstein(reference.metric().clone());
        let family = family_for(&reference, plan.kind, plan.memory, tau)?;
        let cache = build_cache(&reference, reference.name(), &family, tau, &distance, CacheOptions::default())?;
        let partition = eps_partition(&cache, plan.eps)?;
        let approx = QuotientPomdp::build(&reference, &partition)?;
        let empirical = model_distance(&reference, &approx, &family, tau, &distance)?;
        let (lipschitz, residual, bound, step_bound) = match (&previous, rows.last()) {
            (Some(prev), Some(last)) => {
                let w = &plan.wrappers[i - 1];
                let l = w.lipschitz(prev.base().metric())?;
                let eps_i = model_distance(&Wrapped::new(prev, w)?, &approx, &family, tau, &distance)?;
                (l, eps_i, l * last.bound + eps_i, l * last.empirical + eps_i)
            }
            _ => (1.0, 0.0, empirical, empirical),
        };
        rows.push(LedgerRow {
            layer: i + 1,
            tau,
            lipschitz,
            residual,
            bound,
            step_bound,
            empirical,
            classes: partition.class_count(),
            histories: cache.tree().total() as u128,
            runtime: start.elapsed().as_secs_f64(),
        });
        previous = Some(approx);
    }
    let last = rows.last().expect("at least one segment");
    Ok(LayeredReport {
        histories_layered: rows.iter().map(|r| r.histories).sum(),
        histories_direct: direct_histories(plan.base.n_observations(), plan.horizon()),
        value_bound: reward_lipschitz * plan.horizon() as f64 * last.bound,
        reward_lipschitz,
        rows,
    })
}
