//! Objectives, exact policy evaluation, exhaustive policy search on original and
//! quotient models, sufficiency and value-bound checks, and finite-horizon PBVI.

mod objective;
mod pbvi;
mod search;

pub use objective::{
    first_symbol_score, policy_value, productive_actions, Objective, ObjectiveKind, SCORE_ACTION_WEIGHT, SCORE_OBS_WEIGHT,
};
pub use pbvi::{observation_aligned, pbvi, pbvi_compare, PbviComparison, PbviResult, PBVI_BELIEF_POINTS, PBVI_MAX_STATES, PBVI_SEED};
pub use search::{
    check_exact_sufficiency, check_value_bound, exhaustive_search, family_values, plan_compare, PlanResult, SearchResult, ValueBoundReport,
    VALUE_TOL,
};
