//! Plans and typed summaries for each registered scenario.

pub mod common;
pub mod optimality;
pub mod supplementary;
pub mod tradeoff;
pub mod training;
pub mod variants;

pub use common::{condition_metrics, Comparison, ConditionMetrics};
