use super::BenchError;
use crate::coord::{Message, SlotLog};
use crate::env::{Choice, Topology};
use crate::learner::{AlgoParams, DoublingSchedule, Learner, PartitionKind, Phase, PhaseDecision};
use crate::partition::Cell;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Rebuilds every learner's counters, sample means and partitions from slot
/// logs alone, applying updates in engine order.
///
/// Training counters are refreshed from the transcript's counter reports. Logs
/// read back from CSV carry no transcript; then only the trained peer's counter
/// is refreshed, from the replayed count.
#[derive(Clone, Debug)]
pub struct Replay {
    topology: Topology,
    params: Vec<AlgoParams>,
    dim: usize,
    learners: Vec<Learner>,
    phase: Option<u32>,
    last: u64,
}

fn err(slot: u64, msg: impl Into<String>) -> BenchError {
    BenchError::Replay { slot, msg: msg.into() }
}

impl Replay {
    pub fn new(topology: Topology, params: Vec<AlgoParams>, dim: usize) -> Result<Self, BenchError> {
        let mut r = Self {
            topology,
            params,
            dim,
            learners: Vec::new(),
            phase: None,
            last: 0,
        };
        r.learners = r.build(None)?;
        Ok(r)
    }

    fn build(&self, phase: Option<u32>) -> Result<Vec<Learner>, BenchError> {
        self.params
            .iter()
            .enumerate()
            .map(|(i, base)| {
                let p = match phase {
                    Some(idx) => {
                        DoublingSchedule::new(base.alpha, self.dim, base.f_max).params(&DoublingSchedule::phase(idx))
                    }
                    None => base.clone(),
                };
                // never drawn from: replay makes no random choices
                let rng = ChaCha8Rng::seed_from_u64(0);
                Learner::new(i, &self.topology, self.dim, p, rng).map_err(|e| err(self.last + 1, e.to_string()))
            })
            .collect()
    }

    pub fn learners(&self) -> &[Learner] {
        &self.learners
    }

    pub fn into_learners(self) -> Vec<Learner> {
        self.learners
    }

    pub fn push(&mut self, log: &SlotLog) -> Result<(), BenchError> {
        let t = log.t;
        let m = self.learners.len();
        if t != self.last + 1 {
            return Err(err(t, format!("expected slot {}", self.last + 1)));
        }
        if log.records.len() != m {
            return Err(err(t, format!("{} records for {m} learners", log.records.len())));
        }
        if self.params.first().is_some_and(|p| p.doubling) {
            let idx = DoublingSchedule::phase_of(t).index;
            if self.phase != Some(idx) {
                self.learners = self.build(Some(idx))?;
                self.phase = Some(idx);
            }
        }
        let lerr = |i: usize| move |e: crate::learner::LearnerError| err(t, format!("learner {i}: {e}"));

        // cells of active learners, checked against the replayed partitions
        let mut cells: Vec<Option<Cell>> = vec![None; m];
        for (i, r) in log.records.iter().enumerate() {
            if r.learner != i {
                return Err(err(t, format!("record {i} belongs to learner {}", r.learner)));
            }
            let Some(x) = &r.context else { continue };
            let cell = self.learners[i].locate(x).map_err(lerr(i))?;
            if r.cell.as_ref() != Some(&cell) {
                return Err(err(
                    t,
                    format!("learner {i} logged cell {:?}, replay locates {cell}", r.cell),
                ));
            }
            cells[i] = Some(cell);
        }

        // counter reports reflect the counts at the start of the slot
        let reports: Vec<_> = log
            .transcript
            .iter()
            .filter_map(|msg| match msg {
                Message::CounterReport { from, to, cell, count } => Some((*to, *from, cell.clone(), *count)),
                _ => None,
            })
            .collect();
        let mut refreshes = Vec::new();
        if log.transcript.is_empty() {
            for (i, r) in log.records.iter().enumerate() {
                if let (Phase::Train, Some(Choice::Learner(j)), Some(cell)) = (r.phase, r.choice, &cells[i]) {
                    refreshes.push((i, j, cell.clone(), self.learners[j].n_p(cell)));
                }
            }
        } else {
            for (to, from, cell, count) in reports {
                let actual = self.learners[from].n_p(&cell);
                if actual != count {
                    return Err(err(
                        t,
                        format!("learner {from} reported {count} for {cell}, replay has {actual}"),
                    ));
                }
                refreshes.push((to, from, cell, count));
            }
        }
        for (to, from, cell, count) in refreshes {
            self.learners[to]
                .refresh_training_counter(from, &cell, count)
                .map_err(lerr(to))?;
        }

        // served calls: the callee files the reward under its own view of the caller's cell
        let mut served: Vec<Vec<(Cell, usize, f64)>> = vec![Vec::new(); m];
        for (i, r) in log.records.iter().enumerate() {
            let Some(Choice::Learner(j)) = r.choice else { continue };
            if j >= m {
                return Err(err(t, format!("learner {i} called unknown learner {j}")));
            }
            let (Some(arm), Some(reward)) = (r.delegated_arm, r.reward) else {
                return Err(err(t, format!("call by learner {i} lacks an arm or reward")));
            };
            let x = r.context.as_ref().ok_or_else(|| err(t, "call without context"))?;
            let cell = match self.learners[j].partition() {
                PartitionKind::Uniform(_) => self.learners[j].locate(x).map_err(lerr(j))?,
                PartitionKind::Adaptive(_) => cells[i].clone().expect("callers have cells"),
            };
            served[j].push((cell, arm, reward));
        }

        for k in 0..m {
            let r = &log.records[k];
            if let (Some(cell), Some(reward)) = (&cells[k], r.reward) {
                let d = PhaseDecision {
                    phase: r.phase,
                    choice: r.choice,
                    train: r.phase == Phase::Train,
                };
                self.learners[k].record_own(cell, &d, reward).map_err(lerr(k))?;
            }
            for (cell, arm, reward) in &served[k] {
                self.learners[k].record_served(cell, *arm, *reward).map_err(lerr(k))?;
            }
        }

        let logged: Vec<_> = log
            .transcript
            .iter()
            .filter_map(|msg| match msg {
                Message::Activate(n) => Some(n),
                _ => None,
            })
            .collect();
        let mut produced = Vec::new();
        for i in 0..m {
            let Some(cell) = &cells[i] else { continue };
            if let Some(notice) = self.learners[i].advance_partition(cell, t).map_err(lerr(i))? {
                for j in (0..m).filter(|&j| j != i) {
                    self.learners[j].absorb_activation(&notice).map_err(lerr(j))?;
                }
                produced.push(notice);
            }
        }
        if !log.transcript.is_empty() && logged.len() != produced.len()
            || logged.iter().zip(&produced).any(|(a, b)| *a != b)
        {
            return Err(err(t, "activation broadcasts differ from the replayed splits"));
        }
        self.last = t;
        Ok(())
    }
}

/// Replays a whole run.
pub fn replay_statistics<'a>(
    topology: &Topology,
    params: &[AlgoParams],
    dim: usize,
    logs: impl IntoIterator<Item = &'a SlotLog>,
) -> Result<Vec<Learner>, BenchError> {
    let mut r = Replay::new(topology.clone(), params.to_vec(), dim)?;
    for log in logs {
        r.push(log)?;
    }
    Ok(r.into_learners())
}

/// Differences between two learner sets' statistics, partitions and union views.
pub fn state_mismatches(a: &[Learner], b: &[Learner]) -> Vec<String> {
    let mut out = Vec::new();
    if a.len() != b.len() {
        out.push(format!("{} learners vs {}", a.len(), b.len()));
        return out;
    }
    for (x, y) in a.iter().zip(b) {
        let i = x.id();
        for (cell, s) in x.stats() {
            match y.stats().get(cell) {
                Some(o) if o == s => {}
                Some(o) => out.push(format!("learner {i}, cell {cell}: {s:?} vs {o:?}")),
                None => out.push(format!("learner {i}, cell {cell}: missing on the right")),
            }
        }
        for cell in y.stats().keys().filter(|c| !x.stats().contains_key(*c)) {
            out.push(format!("learner {i}, cell {cell}: missing on the left"));
        }
        if x.partition() != y.partition() {
            out.push(format!("learner {i}: partitions differ"));
        }
        if x.union_view() != y.union_view() {
            out.push(format!("learner {i}: union views differ"));
        }
    }
    out
}
