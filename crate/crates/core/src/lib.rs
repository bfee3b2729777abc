//! Learning to incentivize greedy and smooth agents that arrive in an
//! adversarial order.

// `!(x > 0.0)` is used on purpose: it rejects NaN along with the bad range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bandits;
pub mod cli;
pub mod document;
pub mod domain;
pub mod error;
pub mod general;
pub mod harness;
pub mod instances;
pub mod lp;
pub mod menu;
pub mod single_arm;
pub mod smooth;

pub use document::InstanceDocument;
pub use domain::{ChosenArm, GreedyInstance, IncentiveMode, IncentiveVector};
pub use error::{Error, Result};
pub use harness::Environment;
pub use menu::{Menu, MenuItem, Provenance};
