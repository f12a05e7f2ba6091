//! Cooperative planning of trajectory ensembles.
//!
//! Every vehicle drives a fixed path; the planner samples velocity profiles
//! for all of them, rates every ensemble (one trajectory per vehicle) with a
//! cost functional covering comfort, right of way and the time of zone
//! clearance, and selects the cheapest ensemble whose ego trajectory keeps a
//! valid plan B against adversarial behavior of the others.

// `!(x > 0.0)` style checks are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cost;
pub mod error;
pub mod geometry;
pub mod kinematics;
pub mod oracle;
pub mod planner;
pub mod report;
pub mod safety;
pub mod scenario;

pub use error::{Error, Result};
