//! Steering functionals, LHS membership, dual extraction and witnesses.

mod functional;
mod membership;
mod witness;

pub use functional::{evaluate, validate_functional, SteeringFunctional, TRACE_TOLERANCE};
pub use membership::{
    extract_inequality, extract_inequality_with, lhs_membership, lhs_membership_with,
    MembershipResult, DECISION_TOLERANCE, EXTRACTION_TOLERANCE,
};
pub use witness::{build_witness, min_over_ppt, min_over_ppt_with, PptMinimum, Witness};
