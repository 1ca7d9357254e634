//! Summaries of trial records and Q-tables, plus the analytic reference
//! curves they are compared against.

pub mod closed_form;
pub mod psychometric;
pub mod smoothing;
pub mod stats;
pub mod terminal;
pub mod weibull;

pub use closed_form::{accuracy_closed_form, expected_reward, optimal_terminal_state, rt_closed_form, BGrid};
pub use psychometric::{
    learning_curves, psychometric_summary, signed_summary, LearningBin, PsychometricRow, PsychometricSummary, SignedRow,
};
pub use smoothing::{binned_means, moving_average};
pub use terminal::{
    empirical_terminal_state, qtable_terminal_estimate, qtable_terminal_states, EstimateUnavailable, TerminalMethod,
    TerminalStateEstimate,
};
pub use weibull::{weibull_accuracy, weibull_fit, weibull_fit_points, FitOutcome, WeibullFit};
