//! The synchronous slot engine and the inter-learner message vocabulary.

mod engine;
mod log;

pub use engine::{Engine, RunOutcome};
pub use log::{read_activations, read_slot_logs, ActivationWriter, LogReadError, SlotLogWriter};

use crate::env::{Choice, Context, EnvError};
use crate::learner::{ActivationNotice, LearnerError, Phase};
use crate::partition::Cell;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Message {
    Call {
        caller: usize,
        callee: usize,
        context: Context,
        cell: Cell,
    },
    /// The callee's answer: the arm it pulled, the cell it filed the
    /// observation under, and the shared reward.
    Reply {
        callee: usize,
        caller: usize,
        arm: usize,
        cell: Cell,
        reward: f64,
    },
    CounterQuery {
        asker: usize,
        target: usize,
        cell: Cell,
    },
    CounterReport {
        from: usize,
        to: usize,
        cell: Cell,
        count: u64,
    },
    Activate(ActivationNotice),
}

/// What one learner did in one slot.
#[derive(Clone, Debug, PartialEq)]
pub struct LearnerRecord {
    pub learner: usize,
    pub context: Option<Context>,
    pub phase: Phase,
    pub choice: Option<Choice>,
    /// Arm pulled on this learner's behalf when it called another learner.
    pub delegated_arm: Option<usize>,
    pub reward: Option<f64>,
    pub cost: f64,
    pub cell: Option<Cell>,
    /// Oracle net reward at this learner's context.
    pub oracle: Option<f64>,
}

impl LearnerRecord {
    pub fn idle(learner: usize) -> Self {
        Self {
            learner,
            context: None,
            phase: Phase::Idle,
            choice: None,
            delegated_arm: None,
            reward: None,
            cost: 0.0,
            cell: None,
            oracle: None,
        }
    }

    /// Oracle value minus realized net reward; zero when idle.
    pub fn regret(&self) -> f64 {
        match (self.oracle, self.reward) {
            (Some(o), Some(r)) => o - (r - self.cost),
            _ => 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlotLog {
    pub t: u64,
    pub records: Vec<LearnerRecord>,
    pub transcript: Vec<Message>,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("invalid engine setup: {0}")]
    Setup(String),
    #[error("slot {slot}, learner {learner}: {source}")]
    Learner {
        slot: u64,
        learner: usize,
        #[source]
        source: LearnerError,
    },
    #[error("slot {slot}: {source}")]
    Env {
        slot: u64,
        #[source]
        source: EnvError,
    },
    #[error("slot {slot}: protocol violation: {msg}")]
    Protocol { slot: u64, msg: String },
}
