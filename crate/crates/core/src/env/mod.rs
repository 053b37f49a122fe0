//! Ground-truth environment: contexts, reward fields, learner topology,
//! arrival processes and trace ingestion.
//!
//! Learners and arms are indexed from 0. Slots are indexed from 1.

mod arrival;
mod counterexample;
mod field;
mod trace;

pub use arrival::{ArrivalKind, ArrivalProcess, Region, Source};
pub use counterexample::{build_counterexample, Counterexample};
pub use field::{verify_holder, FieldKind, HolderReport, Noise, RewardField};
pub use trace::{load_trace, Trace, TraceError, TraceRecord};

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use std::fmt;
use std::sync::Arc;

/// Coordinates of a context point; `D` values in `[0, 1]`.
pub type Coords = SmallVec<[f64; 4]>;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("context has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("context coordinate {index} = {value} is outside [0, 1]")]
    CoordinateOutOfRange { index: usize, value: f64 },
    #[error("invalid reward field: {0}")]
    InvalidField(String),
    #[error("invalid topology: {0}")]
    InvalidTopology(String),
    #[error("invalid arrival process: {0}")]
    InvalidArrivals(String),
    #[error("arrival process needs a partition view")]
    MissingPartitionView,
    #[error("trace exhausted at slot {0}")]
    EndOfTrace(u64),
    #[error("counterexample infeasible: violates {0}")]
    Infeasible(String),
}

/// A point of the context space `[0,1]^D`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Context(Coords);

impl Context {
    pub fn new(coords: impl IntoIterator<Item = f64>) -> Result<Self, EnvError> {
        let coords: Coords = coords.into_iter().collect();
        for (index, &value) in coords.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(EnvError::CoordinateOutOfRange { index, value });
            }
        }
        Ok(Self(coords))
    }

    /// Builds a context without range checks. Callers guarantee `[0,1]`.
    pub(crate) fn from_coords_unchecked(coords: Coords) -> Self {
        Self(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn check_dim(&self, expected: usize) -> Result<(), EnvError> {
        if self.0.len() == expected {
            Ok(())
        } else {
            Err(EnvError::DimensionMismatch {
                expected,
                got: self.0.len(),
            })
        }
    }

    /// Euclidean distance.
    pub fn distance(&self, other: &Context) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// An element of a learner's choice set: one of its own arms or another learner.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Choice {
    Arm(usize),
    Learner(usize),
}

impl fmt::Display for Choice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Choice::Arm(a) => write!(f, "arm:{a}"),
            Choice::Learner(j) => write!(f, "learner:{j}"),
        }
    }
}

impl std::str::FromStr for Choice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, idx) = s.split_once(':').ok_or_else(|| format!("malformed choice `{s}`"))?;
        let idx: usize = idx.parse().map_err(|_| format!("malformed choice index in `{s}`"))?;
        match kind {
            "arm" => Ok(Choice::Arm(idx)),
            "learner" => Ok(Choice::Learner(idx)),
            _ => Err(format!("unknown choice kind in `{s}`")),
        }
    }
}

/// Learners, their arm counts and selection costs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    arms_per_learner: Vec<usize>,
    f_max: usize,
    /// `arm_costs[i][f]` is the cost learner `i` pays to use its own arm `f`.
    arm_costs: Vec<Vec<f64>>,
    /// `call_costs[i][j]` is the cost learner `i` pays to call learner `j`;
    /// the diagonal is unused.
    call_costs: Vec<Vec<f64>>,
}

impl Topology {
    pub fn new(
        arms_per_learner: Vec<usize>,
        f_max: usize,
        arm_costs: Vec<Vec<f64>>,
        call_costs: Vec<Vec<f64>>,
    ) -> Result<Self, EnvError> {
        let m = arms_per_learner.len();
        if m == 0 {
            return Err(EnvError::InvalidTopology("no learners".into()));
        }
        if let Some(i) = arms_per_learner.iter().position(|&f| f == 0) {
            return Err(EnvError::InvalidTopology(format!("learner {i} has no arms")));
        }
        let largest = *arms_per_learner.iter().max().unwrap();
        if f_max < largest {
            return Err(EnvError::InvalidTopology(format!(
                "f_max {f_max} is below the largest arm count {largest}"
            )));
        }
        if arm_costs.len() != m || call_costs.len() != m {
            return Err(EnvError::InvalidTopology(
                "cost tables must have one row per learner".into(),
            ));
        }
        for i in 0..m {
            if arm_costs[i].len() != arms_per_learner[i] {
                return Err(EnvError::InvalidTopology(format!(
                    "learner {i}: {} arm costs for {} arms",
                    arm_costs[i].len(),
                    arms_per_learner[i]
                )));
            }
            if call_costs[i].len() != m {
                return Err(EnvError::InvalidTopology(format!(
                    "learner {i}: call cost row must have {m} entries"
                )));
            }
            let all = arm_costs[i].iter().chain(
                call_costs[i]
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, c)| c),
            );
            for &c in all {
                if !(0.0..=1.0).contains(&c) {
                    return Err(EnvError::InvalidTopology(format!(
                        "learner {i}: cost {c} outside [0, 1]"
                    )));
                }
            }
        }
        Ok(Self {
            arms_per_learner,
            f_max,
            arm_costs,
            call_costs,
        })
    }

    /// All costs zero.
    pub fn free(arms_per_learner: Vec<usize>, f_max: usize) -> Result<Self, EnvError> {
        let m = arms_per_learner.len();
        let arm_costs = arms_per_learner.iter().map(|&f| vec![0.0; f]).collect();
        Self::new(arms_per_learner, f_max, arm_costs, vec![vec![0.0; m]; m])
    }

    pub fn learners(&self) -> usize {
        self.arms_per_learner.len()
    }

    pub fn arms(&self, learner: usize) -> usize {
        self.arms_per_learner[learner]
    }

    pub fn arms_per_learner(&self) -> &[usize] {
        &self.arms_per_learner
    }

    pub fn f_max(&self) -> usize {
        self.f_max
    }

    pub fn cost(&self, learner: usize, choice: Choice) -> f64 {
        match choice {
            Choice::Arm(f) => self.arm_costs[learner][f],
            Choice::Learner(j) => self.call_costs[learner][j],
        }
    }

    /// `K_i`: own arms in index order, then other learners ascending.
    pub fn choices(&self, learner: usize) -> Vec<Choice> {
        (0..self.arms(learner))
            .map(Choice::Arm)
            .chain((0..self.learners()).filter(|&j| j != learner).map(Choice::Learner))
            .collect()
    }
}

/// Where realized rewards come from.
#[derive(Clone, Debug)]
pub enum RewardModel {
    /// `fields[i][f]` is the reward field of learner `i`'s arm `f`.
    Fields(Vec<Vec<RewardField>>),
    /// Realized rewards replayed from a trace, looked up by slot.
    Trace(Arc<Trace>),
}

/// Everything the simulation treats as ground truth.
#[derive(Clone, Debug)]
pub struct Environment {
    dim: usize,
    topology: Topology,
    rewards: RewardModel,
    holder_l: f64,
    holder_alpha: f64,
}

impl Environment {
    pub fn with_fields(
        dim: usize,
        topology: Topology,
        fields: Vec<Vec<RewardField>>,
        holder_l: f64,
        holder_alpha: f64,
    ) -> Result<Self, EnvError> {
        if fields.len() != topology.learners() {
            return Err(EnvError::InvalidField(format!(
                "{} field rows for {} learners",
                fields.len(),
                topology.learners()
            )));
        }
        for (i, row) in fields.iter().enumerate() {
            if row.len() != topology.arms(i) {
                return Err(EnvError::InvalidField(format!(
                    "learner {i}: {} fields for {} arms",
                    row.len(),
                    topology.arms(i)
                )));
            }
            if let Some(f) = row.iter().position(|field| field.dim() != dim) {
                return Err(EnvError::InvalidField(format!(
                    "learner {i} arm {f}: field dimension {} differs from {dim}",
                    row[f].dim()
                )));
            }
        }
        Self::checked(dim, topology, RewardModel::Fields(fields), holder_l, holder_alpha)
    }

    pub fn with_trace(topology: Topology, trace: Arc<Trace>) -> Result<Self, EnvError> {
        if trace.arms_per_learner() != topology.arms_per_learner() {
            return Err(EnvError::InvalidTopology(format!(
                "trace reward columns cover arms {:?}, topology has {:?}",
                trace.arms_per_learner(),
                topology.arms_per_learner()
            )));
        }
        let dim = trace.dim();
        Self::checked(dim, topology, RewardModel::Trace(trace), 1.0, 1.0)
    }

    fn checked(
        dim: usize,
        topology: Topology,
        rewards: RewardModel,
        holder_l: f64,
        holder_alpha: f64,
    ) -> Result<Self, EnvError> {
        if dim == 0 {
            return Err(EnvError::InvalidField("dimension must be at least 1".into()));
        }
        if !(holder_l > 0.0 && holder_alpha > 0.0) {
            return Err(EnvError::InvalidField(
                "Hölder constants L and alpha must be positive".into(),
            ));
        }
        Ok(Self {
            dim,
            topology,
            rewards,
            holder_l,
            holder_alpha,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn rewards(&self) -> &RewardModel {
        &self.rewards
    }

    /// Declared Hölder constants `(L, alpha)`.
    pub fn holder(&self) -> (f64, f64) {
        (self.holder_l, self.holder_alpha)
    }

    pub fn fields(&self) -> Option<&[Vec<RewardField>]> {
        match &self.rewards {
            RewardModel::Fields(f) => Some(f),
            RewardModel::Trace(_) => None,
        }
    }

    pub fn field(&self, learner: usize, arm: usize) -> Option<&RewardField> {
        self.fields().map(|f| &f[learner][arm])
    }
}
