//! Oracle benchmark, regret curves and run diagnostics.

mod diag;
mod oracle;
mod phases;
mod regret;
mod replay;

pub use diag::{
    activated_level_counts, activation_notices, clup_threshold, dcza_threshold, level_bound_violations,
    suboptimal_sets, CellBox, LevelViolation, SuboptimalSets, GRID_PER_AXIS,
};
pub use oracle::OracleTable;
pub use phases::{phase_stats, BudgetViolation, PhaseBudget, PhaseCounter, PhaseStats};
pub use regret::{cumulative_regret, logged_regret, loglog_slope, RegretSeries};
pub use replay::{replay_statistics, state_mismatches, Replay};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum BenchError {
    #[error("bad fit window: {0}")]
    Window(String),
    #[error("regret {value} at t = {t} has no logarithm")]
    NonPositive { t: u64, value: f64 },
    #[error("replay failed at slot {slot}: {msg}")]
    Replay { slot: u64, msg: String },
}
