use crate::coord::SlotLog;
use crate::env::Choice;
use crate::learner::{control_value, AlgoParams, Algorithm, Control, DoublingSchedule, Phase};
use crate::partition::Cell;
use std::collections::BTreeMap;

/// Per-learner phase accounting over a run.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct PhaseStats {
    pub learner: usize,
    pub slots: u64,
    /// Slot counts by phase, in `Phase::ALL` order.
    pub counts: [u64; 5],
    pub regret_sum: f64,
    pub zero_rewards: u64,
    /// Every observed reward was 0 or 1.
    pub binary: bool,
}

fn phase_index(p: Phase) -> usize {
    Phase::ALL.iter().position(|&q| q == p).unwrap()
}

impl PhaseStats {
    fn new(learner: usize) -> Self {
        Self {
            learner,
            binary: true,
            ..Self::default()
        }
    }

    pub fn count(&self, p: Phase) -> u64 {
        self.counts[phase_index(p)]
    }

    pub fn active(&self) -> u64 {
        self.slots - self.count(Phase::Idle)
    }

    fn frac(&self, n: f64) -> Option<f64> {
        let a = self.active();
        (a > 0).then(|| n / a as f64)
    }

    /// Mean per-slot regret over active slots.
    pub fn loss(&self) -> Option<f64> {
        self.frac(self.regret_sum)
    }

    /// Share of active slots with reward 0, when rewards are binary.
    pub fn error_rate(&self) -> Option<f64> {
        if self.binary {
            self.frac(self.zero_rewards as f64)
        } else {
            None
        }
    }

    pub fn train_frac(&self) -> Option<f64> {
        self.frac(self.count(Phase::Train) as f64)
    }

    pub fn explore_frac(&self) -> Option<f64> {
        self.frac((self.count(Phase::ExploreOwnArm) + self.count(Phase::ExploreLearner)) as f64)
    }
}

/// Streaming phase accounting.
#[derive(Clone, Debug, Default)]
pub struct PhaseCounter {
    stats: Vec<PhaseStats>,
}

impl PhaseCounter {
    pub fn new(learners: usize) -> Self {
        Self {
            stats: (0..learners).map(PhaseStats::new).collect(),
        }
    }

    pub fn push(&mut self, log: &SlotLog) {
        for r in &log.records {
            let s = &mut self.stats[r.learner];
            s.slots += 1;
            s.counts[phase_index(r.phase)] += 1;
            s.regret_sum += r.regret();
            if let Some(x) = r.reward {
                if x == 0.0 {
                    s.zero_rewards += 1;
                } else if x != 1.0 {
                    s.binary = false;
                }
            }
        }
    }

    pub fn stats(&self) -> &[PhaseStats] {
        &self.stats
    }

    pub fn into_stats(self) -> Vec<PhaseStats> {
        self.stats
    }
}

pub fn phase_stats(logs: &[SlotLog]) -> Vec<PhaseStats> {
    let m = logs.first().map_or(0, |l| l.records.len());
    let mut c = PhaseCounter::new(m);
    for l in logs {
        c.push(l);
    }
    c.into_stats()
}

#[derive(Clone, Debug, PartialEq)]
pub struct BudgetViolation {
    pub learner: usize,
    pub cell: Cell,
    pub phase: Phase,
    pub choice: Choice,
    pub count: u64,
    pub bound: u64,
}

type BudgetKey = (usize, u32, Cell, Phase, Choice);

/// Counts exploration and training slots per learner, cell and choice so they
/// can be checked against `⌈D(T)⌉ + 1`.
#[derive(Clone, Debug, Default)]
pub struct PhaseBudget {
    counts: BTreeMap<BudgetKey, u64>,
    last_slot: u64,
}

impl PhaseBudget {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, log: &SlotLog, params: &[AlgoParams]) {
        self.last_slot = log.t;
        for r in &log.records {
            if !matches!(r.phase, Phase::ExploreOwnArm | Phase::Train | Phase::ExploreLearner) {
                continue;
            }
            let (Some(cell), Some(choice)) = (&r.cell, r.choice) else {
                continue;
            };
            let phase_idx = if params[r.learner].doubling {
                DoublingSchedule::phase_of(log.t).index
            } else {
                0
            };
            *self
                .counts
                .entry((r.learner, phase_idx, cell.clone(), r.phase, choice))
                .or_default() += 1;
        }
    }

    /// Violations of the budget with horizon `horizon` (or each doubling phase's length).
    pub fn violations(&self, params: &[AlgoParams], dim: usize, horizon: u64) -> Vec<BudgetViolation> {
        let mut out = Vec::new();
        for ((learner, phase_idx, cell, phase, choice), &count) in &self.counts {
            let base = &params[*learner];
            let (p, t_end) = if base.doubling {
                let ph = DoublingSchedule::phase(*phase_idx);
                let sched = DoublingSchedule::new(base.alpha, dim, base.f_max);
                (sched.params(&ph), ph.len)
            } else {
                (base.clone(), horizon)
            };
            let which = match phase {
                Phase::ExploreOwnArm => Control::D1,
                Phase::Train => Control::D2,
                _ => Control::D3,
            };
            let level = match (p.algo, cell) {
                (Algorithm::Dcza, Cell::Cube(h)) => Some(h.level()),
                _ => None,
            };
            let bound = match control_value(which, &p, t_end, level) {
                Ok(d) => d.ceil() as u64 + 1,
                Err(_) => 0,
            };
            if count > bound {
                out.push(BudgetViolation {
                    learner: *learner,
                    cell: cell.clone(),
                    phase: *phase,
                    choice: *choice,
                    count,
                    bound,
                });
            }
        }
        out
    }

    pub fn last_slot(&self) -> u64 {
        self.last_slot
    }
}
