//! Run configuration, evidence tiers, table identifiers and profiles.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BenchmarkSpec, Pomdp};
use crate::probes::{clock_aware_count, enumerate_family, FamilyKind, ProbeFamily, DEFAULT_FAMILY_CAP};
use crate::sampling::SamplingConfig;
use crate::transport::LawDistance;

/// Default master seed.
pub const DEFAULT_SEED: u64 = 7;
/// Largest horizon run by horizon sweeps unless raised.
pub const DEFAULT_MAX_HORIZON: usize = 6;
/// Largest clock-aware family accepted by the exact tier.
pub const CLOCK_AWARE_TIER_CAP: u128 = 100_000;
/// Environment variable overriding the output directory.
pub const OUTPUT_DIR_ENV: &str = "BOUNDQ_OUTPUT_DIR";

/// Law distance selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MetricChoice {
    /// `W1` under the benchmark's ground metric.
    Wasserstein,
    /// Total variation.
    TotalVariation,
}

impl MetricChoice {
    /// Law distance for a model.
    pub fn distance(self, pomdp: &Pomdp) -> LawDistance {
        match self {
            Self::Wasserstein => LawDistance::Wasserstein(pomdp.metric().clone()),
            Self::TotalVariation => LawDistance::TotalVariation,
        }
    }
}

impl FromStr for MetricChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "w1" | "wasserstein" => Ok(Self::Wasserstein),
            "tv" | "total-variation" => Ok(Self::TotalVariation),
            other => Err(Error::InvalidConfig(format!("unknown metric `{other}` (expected w1 or tv)"))),
        }
    }
}

/// Evidence tier of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tier {
    /// Exhaustive clock-aware enumeration.
    ExactClk,
    /// Exact distances over the full deterministic stationary family.
    OpExact,
    /// Sampled distances over the deterministic stationary family.
    OpSampling,
}

impl Tier {
    /// Identifier.
    pub fn id(self) -> &'static str {
        match self {
            Self::ExactClk => "exact-clk",
            Self::OpExact => "op-exact",
            Self::OpSampling => "op-sampling",
        }
    }

    /// Family kind the tier enumerates.
    pub fn family_kind(self) -> FamilyKind {
        match self {
            Self::ExactClk => FamilyKind::ClockAware,
            Self::OpExact | Self::OpSampling => FamilyKind::Stationary,
        }
    }

    /// Whether distances are sampled.
    pub fn sampled(self) -> bool {
        matches!(self, Self::OpSampling)
    }
}

impl FromStr for Tier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact-clk" => Ok(Self::ExactClk),
            "op-exact" => Ok(Self::OpExact),
            "op-sampling" => Ok(Self::OpSampling),
            other => Err(Error::InvalidConfig(format!("unknown tier `{other}` (expected exact-clk, op-exact or op-sampling)"))),
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// Everything that determines an experiment's output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Benchmark for single-benchmark commands and tables that accept one.
    pub benchmark: Option<BenchmarkSpec>,
    /// Probe family kind.
    pub family: FamilyKind,
    /// Controller memory `m`.
    pub memory: usize,
    /// Horizon `T`.
    pub horizon: usize,
    /// Merge thresholds; `None` uses each table's protocol list.
    pub eps: Option<Vec<f64>>,
    /// Law distance.
    pub metric: MetricChoice,
    /// Sampling parameters.
    pub sampling: SamplingConfig,
    /// Single-threaded execution; excluded from the config hash since it does not change results.
    #[serde(skip)]
    pub serial: bool,
    /// Fill runtime columns (otherwise left empty so outputs are reproducible byte for byte).
    pub timing: bool,
    /// Output directory.
    #[serde(skip)]
    pub output_dir: PathBuf,
    /// Master seed.
    pub seed: u64,
    /// Evidence tier.
    pub tier: Tier,
    /// Largest horizon of horizon sweeps.
    pub max_horizon: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            benchmark: None,
            family: FamilyKind::Stationary,
            memory: 1,
            horizon: 2,
            eps: None,
            metric: MetricChoice::Wasserstein,
            sampling: SamplingConfig { seed: DEFAULT_SEED, ..SamplingConfig::default() },
            serial: false,
            timing: false,
            output_dir: PathBuf::from("artifacts"),
            seed: DEFAULT_SEED,
            tier: Tier::OpExact,
            max_horizon: DEFAULT_MAX_HORIZON,
        }
    }
}

impl RunConfig {
    /// Threshold list: the configured one, else `default`.
    pub fn eps_or(&self, default: &[f64]) -> Vec<f64> {
        self.eps.clone().unwrap_or_else(|| default.to_vec())
    }

    /// Sampling configuration with the master seed and the serial flag applied.
    pub fn sampling(&self) -> SamplingConfig {
        SamplingConfig { seed: self.seed, parallel: !self.serial, ..self.sampling.clone() }
    }

    /// Reject inconsistent values.
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 || self.memory == 0 {
            return Err(Error::InvalidConfig("T and m must be ≥ 1".into()));
        }
        if let Some(eps) = &self.eps {
            if let Some(bad) = eps.iter().find(|e| e.is_nan() || **e < 0.0) {
                return Err(Error::InvalidConfig(format!("ε = {bad} must be ≥ 0")));
            }
        }
        if self.tier.family_kind() != self.family {
            return Err(Error::InvalidConfig(format!("tier {} requires the {} family, got {}", self.tier, self.tier.family_kind(), self.family)));
        }
        self.sampling.validate()
    }

    /// Enumerate the configured family for `pomdp`, enforcing the tier's size guard.
    pub fn tier_family(&self, pomdp: &Pomdp) -> Result<ProbeFamily> {
        self.validate()?;
        let (na, no) = (pomdp.n_actions(), pomdp.n_observations());
        if self.tier == Tier::ExactClk {
            let size = clock_aware_count(self.memory, self.horizon, na, no);
            if size > CLOCK_AWARE_TIER_CAP {
                return Err(Error::SizeGuard {
                    what: format!("exact clock-aware family (m={}, T={})", self.memory, self.horizon),
                    requested: size,
                    cap: CLOCK_AWARE_TIER_CAP,
                    hint: "use layered segments (`layered`), a greedy probe subset (`subset`), or the op-exact / op-sampling tiers".into(),
                });
            }
        }
        enumerate_family(self.family, self.memory, na, no, self.horizon, DEFAULT_FAMILY_CAP)
    }
}

/// Known table identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TableId {
    /// Clock-aware vs operational quotients.
    ProbeFamilyComparison,
    /// Observation objectives on clock-aware quotients.
    ObservationPlanning,
    /// Latent rewards on clock-aware quotients.
    LatentPlanning,
    /// Greedy subsets with `δ_S`.
    PartitionAgreement,
    /// Sampled medium-scale class counts.
    MediumScale,
    /// Value-function error bounds.
    ValueBounds,
    /// GridWorld observation merge.
    DataProcessing,
    /// Direct vs layered horizons.
    HierarchicalScaling,
    /// Class counts across sampling seeds.
    SamplingVariance,
    /// Bootstrap interval coverage.
    BootstrapCoverage,
    /// ARI against exact as trajectories grow.
    Convergence,
    /// Effective and Hankel ranks.
    LowRank,
    /// Partition stability under `b0` changes.
    BeliefSensitivity,
    /// PBVI on original vs quotient.
    PbviComparison,
}

impl TableId {
    /// Every table in emission order.
    pub const ALL: [TableId; 14] = [
        Self::ProbeFamilyComparison,
        Self::ObservationPlanning,
        Self::LatentPlanning,
        Self::PartitionAgreement,
        Self::MediumScale,
        Self::ValueBounds,
        Self::DataProcessing,
        Self::HierarchicalScaling,
        Self::SamplingVariance,
        Self::BootstrapCoverage,
        Self::Convergence,
        Self::LowRank,
        Self::BeliefSensitivity,
        Self::PbviComparison,
    ];

    /// File stem.
    pub fn name(self) -> &'static str {
        match self {
            Self::ProbeFamilyComparison => "probe_family_comparison",
            Self::ObservationPlanning => "observation_planning",
            Self::LatentPlanning => "latent_planning",
            Self::PartitionAgreement => "partition_agreement",
            Self::MediumScale => "medium_scale",
            Self::ValueBounds => "value_bounds",
            Self::DataProcessing => "data_processing",
            Self::HierarchicalScaling => "hierarchical_scaling",
            Self::SamplingVariance => "sampling_variance",
            Self::BootstrapCoverage => "bootstrap_coverage",
            Self::Convergence => "convergence",
            Self::LowRank => "low_rank",
            Self::BeliefSensitivity => "belief_sensitivity",
            Self::PbviComparison => "pbvi_comparison",
        }
    }

    /// Part of the quick profile.
    pub fn is_quick(self) -> bool {
        matches!(
            self,
            Self::ProbeFamilyComparison | Self::ObservationPlanning | Self::LatentPlanning | Self::PartitionAgreement | Self::MediumScale
        )
    }
}

impl FromStr for TableId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown table `{s}`; known: {}", Self::ALL.map(|t| t.name()).join(", "))))
    }
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Table selection for batch runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Profile {
    /// Tables through the medium-scale study.
    Quick,
    /// Every table.
    Full,
}

impl Profile {
    /// Tables in this profile.
    pub fn tables(self) -> Vec<TableId> {
        TableId::ALL.into_iter().filter(|t| self == Self::Full || t.is_quick()).collect()
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(Self::Quick),
            "full" => Ok(Self::Full),
            other => Err(Error::InvalidConfig(format!("unknown profile `{other}` (expected quick or full)"))),
        }
    }
}
