//! Certification of quantum steering for bound-entangled two-qutrit states.

pub mod error;
pub mod family;
pub mod linalg;
pub mod quantum;
pub mod report;
pub mod sdp;
pub mod seesaw;
pub mod steering;

pub use error::{Error, Result};
