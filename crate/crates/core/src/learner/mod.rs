//! Per-learner state machines for CLUP, DCZA and SSEE.

mod doubling;
mod state;

pub use doubling::{DoublingPhase, DoublingSchedule};
pub use state::{CellStats, Estimate, Learner, PartitionKind};

use crate::env::Choice;
use crate::partition::{Hypercube, PartitionError};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Algorithm {
    Clup,
    Dcza,
    Ssee,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Clup => "CLUP",
            Algorithm::Dcza => "DCZA",
            Algorithm::Ssee => "SSEE",
        })
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum LearnerError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("D2 is undefined for SSEE, which has no training phase")]
    NoTraining,
    #[error("control function for {algo} {needs} a hypercube level")]
    LevelMismatch { algo: Algorithm, needs: &'static str },
    #[error("exploitation reached with zero samples for {0}")]
    ZeroCount(Choice),
    #[error("learner {asker} got N_p = {reported} from learner {peer} for cell {cell}, below its own count {own}")]
    CounterConsistency {
        asker: usize,
        peer: usize,
        cell: String,
        reported: u64,
        own: u64,
    },
    #[error("reward {0} outside [0, 1]")]
    RewardRange(f64),
    #[error("activation notice from learner {origin} names unknown parent {parent}")]
    UnknownParent { origin: usize, parent: Hypercube },
    #[error("activation notice from learner {origin}: parent {parent} is not active for it")]
    StaleParent { origin: usize, parent: Hypercube },
    #[error("choice {0} is not available to this learner")]
    UnknownChoice(Choice),
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

/// Algorithm parameters for one learner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgoParams {
    pub algo: Algorithm,
    /// Exploration exponent (CLUP, SSEE).
    pub z: f64,
    /// Slices per axis of the uniform partition (CLUP, SSEE).
    pub m_t: u32,
    /// Split exponent (DCZA).
    pub rho: f64,
    /// Hölder exponent used by the DCZA control functions.
    pub alpha: f64,
    pub f_max: usize,
    /// Divides the SSEE exploration control.
    pub explore_divisor: f64,
    /// Restart with fresh theorem-1 parameters on phases of length `2^τ` (CLUP).
    pub doubling: bool,
    /// DCZA children inherit the parent's own-arm estimates.
    pub warm_start: bool,
}

impl AlgoParams {
    pub fn clup(z: f64, m_t: u32, f_max: usize) -> Self {
        Self {
            algo: Algorithm::Clup,
            z,
            m_t,
            rho: 1.0,
            alpha: 1.0,
            f_max,
            explore_divisor: 1.0,
            doubling: false,
            warm_start: false,
        }
    }

    pub fn ssee(z: f64, m_t: u32, f_max: usize, explore_divisor: f64) -> Self {
        Self {
            algo: Algorithm::Ssee,
            explore_divisor,
            ..Self::clup(z, m_t, f_max)
        }
    }

    pub fn dcza(rho: f64, alpha: f64, f_max: usize) -> Self {
        Self {
            algo: Algorithm::Dcza,
            z: 0.5,
            m_t: 1,
            rho,
            alpha,
            f_max,
            explore_divisor: 1.0,
            doubling: false,
            warm_start: false,
        }
    }

    pub fn validate(&self) -> Result<(), LearnerError> {
        let bad = |m: String| Err(LearnerError::InvalidParams(m));
        if !(self.z > 0.0 && self.z < 1.0) {
            return bad(format!("z = {} must lie in (0, 1)", self.z));
        }
        if self.m_t < 1 {
            return bad("m_T must be at least 1".into());
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return bad(format!("rho = {} must be positive", self.rho));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha = {} must be positive", self.alpha));
        }
        if self.f_max < 1 {
            return bad("F_max must be at least 1".into());
        }
        if !(self.explore_divisor >= 1.0 && self.explore_divisor.is_finite()) {
            return bad(format!("exploration divisor K = {} must be >= 1", self.explore_divisor));
        }
        if self.doubling && self.algo != Algorithm::Clup {
            return bad("the doubling schedule applies to CLUP only".into());
        }
        if self.warm_start && self.algo != Algorithm::Dcza {
            return bad("warm start applies to DCZA only".into());
        }
        Ok(())
    }
}

/// Parameters that give CLUP its sublinear regret guarantee for horizon `t_horizon`:
/// `z = 2α/(3α+D)` and `m_T = ⌈T^{1/(3α+D)}⌉`.
pub fn theorem1_params(alpha: f64, dim: usize, t_horizon: u64, f_max: usize) -> AlgoParams {
    let denom = 3.0 * alpha + dim as f64;
    let z = 2.0 * alpha / denom;
    let root = (t_horizon.max(1) as f64).powf(1.0 / denom);
    let nearest = root.round();
    let m_t = if (root - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        root.ceil()
    };
    AlgoParams {
        alpha,
        ..AlgoParams::clup(z, (m_t as u32).max(1), f_max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Control {
    D1,
    D2,
    D3,
}

/// Value of a control function at slot `t`; `level` is required for DCZA and only there.
pub fn control_value(which: Control, params: &AlgoParams, t: u64, level: Option<u8>) -> Result<f64, LearnerError> {
    let ln_t = (t.max(1) as f64).ln();
    match params.algo {
        Algorithm::Dcza => {
            let l = level.ok_or(LearnerError::LevelMismatch {
                algo: Algorithm::Dcza,
                needs: "requires",
            })?;
            let base = (2.0 * params.alpha * l as f64).exp2() * ln_t;
            Ok(match which {
                Control::D2 => params.f_max as f64 * base,
                _ => base,
            })
        }
        algo => {
            if level.is_some() {
                return Err(LearnerError::LevelMismatch {
                    algo,
                    needs: "does not take",
                });
            }
            let base = (t.max(1) as f64).powf(params.z) * ln_t;
            match (algo, which) {
                (Algorithm::Ssee, Control::D2) => Err(LearnerError::NoTraining),
                (Algorithm::Ssee, _) => Ok(base / params.explore_divisor),
                (_, Control::D2) => Ok(params.f_max as f64 * base),
                _ => Ok(base),
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Phase {
    ExploreOwnArm,
    Train,
    ExploreLearner,
    Exploit,
    Idle,
}

impl Phase {
    pub const ALL: [Phase; 5] = [
        Phase::ExploreOwnArm,
        Phase::Train,
        Phase::ExploreLearner,
        Phase::Exploit,
        Phase::Idle,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::ExploreOwnArm => "explore_arm",
            Phase::Train => "train",
            Phase::ExploreLearner => "explore_learner",
            Phase::Exploit => "exploit",
            Phase::Idle => "idle",
        }
    }

    pub fn is_exploration(&self) -> bool {
        matches!(self, Phase::ExploreOwnArm | Phase::ExploreLearner)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Phase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Phase::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown phase `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PhaseDecision {
    pub phase: Phase,
    pub choice: Option<Choice>,
    pub train: bool,
}

impl PhaseDecision {
    pub const IDLE: PhaseDecision = PhaseDecision {
        phase: Phase::Idle,
        choice: None,
        train: false,
    };

    fn pick(phase: Phase, choice: Choice) -> Self {
        Self {
            phase,
            choice: Some(choice),
            train: phase == Phase::Train,
        }
    }
}

/// A split announced to the other learners.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivationNotice {
    pub origin: usize,
    pub parent: Hypercube,
    pub slot: u64,
}
