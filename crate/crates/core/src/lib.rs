//! Tabular multi-objective Q(λ) learning under thresholded lexicographic
//! ordering, the Space Traders benchmark family, an exact policy oracle and
//! a seeded multi-trial experiment harness.

pub mod agents;
pub mod envs;
pub mod error;
pub mod harness;
pub mod label;
pub mod oracle;
pub mod reward;
pub mod schedule;
pub mod tlo;

pub use error::{Error, Result};
pub use label::PolicyLabel;
pub use reward::RewardVector;
pub use rust_decimal::Decimal;
pub use schedule::Schedule;
pub use tlo::TloUtility;
