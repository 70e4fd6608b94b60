//! States, measurements and assemblages.

mod assemblage;
mod measurement;
mod state;

pub use assemblage::{
    assemblage_from_operator, assemblage_from_state, assemblage_from_strategies,
    random_lhs_assemblage, strategy_outcome, validate_assemblage, Assemblage, ASSEMBLAGE_TOLERANCE,
};
pub use measurement::{mub_bases, MeasurementBasis, BASIS_TOLERANCE};
pub use state::{
    random_bipartite_pure_state, random_mixed_state, random_psd, random_pure_state,
    random_pure_vector, DensityOperator, STATE_TOLERANCE,
};
