//! Wrappers (action remap plus observation channel), their Lipschitz constants,
//! `δ_O`-coarsening, data-processing checks, and layered horizon composition.

mod coarsen;
mod compose;
mod wrapper;

pub use coarsen::{coarsen, coarsening_wrapper, covering, CoarseningSpec, EXHAUSTIVE_COVER_LIMIT};
pub use compose::{
    check_data_processing, direct_histories, pullback_family, run_layered, DataProcessingCheck, LayeredPlan, LayeredReport, LedgerRow,
    COMPOSITION_TOL,
};
pub use wrapper::{apply_wrapper, lipschitz_constant, Wrapped, Wrapper};
