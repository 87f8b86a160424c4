//! Independent oracles and the acceptance criteria.

pub mod acceptance;
pub mod oracle;

pub use acceptance::{run_all, run_criterion, AcceptanceOptions, CriterionResult, Scale, CRITERIA};
