//! Experiment protocols, artifacts, persistence and the manifest verifier.

pub mod artifact;
pub mod config;
pub mod persist;
pub mod tables;

pub use artifact::{config_hash, fnum, verify_artifacts, Artifact, CheckOutcome, Manifest, ManifestCheck, VerifyReport, SCHEMA_VERSION};
pub use config::{MetricChoice, Profile, RunConfig, TableId, Tier, CLOCK_AWARE_TIER_CAP, DEFAULT_MAX_HORIZON, DEFAULT_SEED, OUTPUT_DIR_ENV};
pub use persist::{cache_csv, cache_key, ledger_artifact, load_cache, partition_artifact, quotient_artifact, save_cache, selection_artifact, CACHE_FORMAT_VERSION};
pub use tables::{belief_sensitivity, manifest_columns, manifest_for, north_south_merge, run_table, value_bound_sweep, write_table, BeliefSensitivityRow};
