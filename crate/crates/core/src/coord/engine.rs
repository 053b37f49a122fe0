use super::{EngineError, LearnerRecord, Message, SlotLog};
use crate::bench::OracleTable;
use crate::env::{ArrivalProcess, Choice, EnvError, Environment, RewardModel};
use crate::learner::{
    AlgoParams, Algorithm, DoublingPhase, DoublingSchedule, Learner, LearnerError, PartitionKind, PhaseDecision,
};
use crate::partition::Cell;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

const REWARD_STREAM: u64 = 0;
const ARRIVAL_STREAM: u64 = 1;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOutcome {
    pub slots: u64,
    /// The arrival trace ran out before the requested horizon.
    pub truncated: bool,
}

/// Runs all learners in lockstep, one slot at a time.
#[derive(Clone, Debug)]
pub struct Engine {
    env: Arc<Environment>,
    oracle: OracleTable,
    arrivals: ArrivalProcess,
    base_params: Vec<AlgoParams>,
    learners: Vec<Learner>,
    seed: u64,
    reward_rng: ChaCha8Rng,
    arrival_rng: ChaCha8Rng,
    t: u64,
    doubling: Option<DoublingPhase>,
}

impl Engine {
    pub fn new(
        env: Arc<Environment>,
        arrivals: ArrivalProcess,
        params: Vec<AlgoParams>,
        seed: u64,
    ) -> Result<Self, EngineError> {
        let m = env.topology().learners();
        let setup = |msg: String| Err(EngineError::Setup(msg));
        if params.len() != m {
            return setup(format!("{} parameter sets for {m} learners", params.len()));
        }
        if arrivals.learners() != m || arrivals.dim() != env.dim() {
            return setup(format!(
                "arrival process is for {} learners in dimension {}, environment has {m} in {}",
                arrivals.learners(),
                arrivals.dim(),
                env.dim()
            ));
        }
        let adaptive = params[0].algo == Algorithm::Dcza;
        if params.iter().any(|p| (p.algo == Algorithm::Dcza) != adaptive) {
            return setup("DCZA cannot be mixed with uniform-partition learners".into());
        }
        if !adaptive && params.iter().any(|p| p.m_t != params[0].m_t) {
            return setup("all uniform-partition learners must share m_T".into());
        }
        if params.iter().any(|p| p.doubling != params[0].doubling) {
            return setup("the doubling schedule must be enabled for all learners or none".into());
        }
        if arrivals.needs_partition_view() && !adaptive {
            return setup("worst-case arrivals need DCZA learners".into());
        }
        let doubling = params[0].doubling.then(|| DoublingSchedule::phase(1));
        let mut engine = Self {
            oracle: OracleTable::new(env.clone()),
            env,
            arrivals,
            base_params: params,
            learners: Vec::new(),
            seed,
            reward_rng: stream(seed, REWARD_STREAM),
            arrival_rng: stream(seed, ARRIVAL_STREAM),
            t: 0,
            doubling,
        };
        engine.learners = engine.build_learners(doubling)?;
        Ok(engine)
    }

    fn build_learners(&self, phase: Option<DoublingPhase>) -> Result<Vec<Learner>, EngineError> {
        let m = self.base_params.len();
        let dim = self.env.dim();
        (0..m)
            .map(|i| {
                let base = &self.base_params[i];
                let (params, offset) = match phase {
                    Some(ph) => (
                        DoublingSchedule::new(base.alpha, dim, base.f_max).params(&ph),
                        m as u64 * ph.index as u64,
                    ),
                    None => (base.clone(), 0),
                };
                let rng = stream(self.seed, 2 + i as u64 + offset);
                Learner::new(i, self.env.topology(), dim, params, rng).map_err(|source| EngineError::Learner {
                    slot: self.t + 1,
                    learner: i,
                    source,
                })
            })
            .collect()
    }

    pub fn env(&self) -> &Environment {
        &self.env
    }

    pub fn oracle(&self) -> &OracleTable {
        &self.oracle
    }

    pub fn learners(&self) -> &[Learner] {
        &self.learners
    }

    pub fn params(&self) -> &[AlgoParams] {
        &self.base_params
    }

    /// Last completed slot.
    pub fn slot(&self) -> u64 {
        self.t
    }

    pub fn run_slot(&mut self) -> Result<SlotLog, EngineError> {
        let t = self.t + 1;
        let m = self.learners.len();
        let lerr = |learner: usize| {
            move |source: LearnerError| EngineError::Learner {
                slot: t,
                learner,
                source,
            }
        };

        let local_t = match self.doubling {
            Some(phase) => {
                let current = if t > phase.end() {
                    let next = DoublingSchedule::phase(phase.index + 1);
                    self.learners = self.build_learners(Some(next))?;
                    self.doubling = Some(next);
                    next
                } else {
                    phase
                };
                current.local_slot(t)
            }
            None => t,
        };

        // (i) contexts
        let view = if self.arrivals.needs_partition_view() {
            let v = self.arrivals.view_learner();
            Some(
                self.learners[v]
                    .adaptive_partition()
                    .ok_or_else(|| EngineError::Setup("worst-case arrivals need an adaptive partition".into()))?,
            )
        } else {
            None
        };
        let contexts = self
            .arrivals
            .next_contexts(t, view, &mut self.arrival_rng)
            .map_err(|source| EngineError::Env { slot: t, source })?;

        // (ii) counter queries, phase decisions, calls
        let mut transcript = Vec::new();
        let mut cells: Vec<Option<Cell>> = vec![None; m];
        let mut decisions = vec![PhaseDecision::IDLE; m];
        for i in 0..m {
            let Some(x) = &contexts[i] else { continue };
            let (before, rest) = self.learners.split_at_mut(i);
            let (me, after) = rest.split_first_mut().expect("learner index in range");
            let cell = me.locate(x).map_err(lerr(i))?;
            let mut query = |j: usize, c: &Cell| {
                let peer = if j < i { &before[j] } else { &after[j - i - 1] };
                let count = peer.n_p(c);
                transcript.push(Message::CounterQuery {
                    asker: i,
                    target: j,
                    cell: c.clone(),
                });
                transcript.push(Message::CounterReport {
                    from: j,
                    to: i,
                    cell: c.clone(),
                    count,
                });
                count
            };
            let d = me.decide_phase(&cell, local_t, &mut query).map_err(lerr(i))?;
            if let Some(Choice::Learner(j)) = d.choice {
                transcript.push(Message::Call {
                    caller: i,
                    callee: j,
                    context: x.clone(),
                    cell: cell.clone(),
                });
            }
            cells[i] = Some(cell);
            decisions[i] = d;
        }

        // (iii) callees pick arms, callers ascending
        let mut delegated: Vec<Option<(usize, Cell)>> = vec![None; m];
        for j in 0..m {
            for i in 0..m {
                if decisions[i].choice != Some(Choice::Learner(j)) {
                    continue;
                }
                let x = contexts[i].as_ref().expect("callers have contexts");
                let callee = &mut self.learners[j];
                let cell = match callee.partition() {
                    PartitionKind::Uniform(_) => callee.locate(x).map_err(lerr(j))?,
                    PartitionKind::Adaptive(_) => cells[i].clone().expect("callers have cells"),
                };
                let arm = callee.cooperate_select(&cell, local_t).map_err(lerr(j))?;
                delegated[i] = Some((arm, cell));
            }
        }

        // (iv) one shared reward per selection
        let mut rewards: Vec<Option<f64>> = vec![None; m];
        for i in 0..m {
            let Some(choice) = decisions[i].choice else { continue };
            let x = contexts[i].as_ref().expect("active learners have contexts");
            let (owner, arm) = match choice {
                Choice::Arm(f) => (i, f),
                Choice::Learner(j) => (j, delegated[i].as_ref().expect("calls are served").0),
            };
            let r = match self.env.rewards() {
                RewardModel::Fields(fields) => {
                    let field = &fields[owner][arm];
                    field.noise().sample(field.eval(x.coords()), &mut self.reward_rng)
                }
                RewardModel::Trace(trace) => trace.reward(t, owner, arm).ok_or(EngineError::Env {
                    slot: t,
                    source: EnvError::EndOfTrace(t),
                })?,
            };
            rewards[i] = Some(r);
            if let Choice::Learner(j) = choice {
                let (arm, cell) = delegated[i].clone().expect("calls are served");
                transcript.push(Message::Reply {
                    callee: j,
                    caller: i,
                    arm,
                    cell,
                    reward: r,
                });
            }
        }

        // (v) outcomes: own selection first, then calls served
        for k in 0..m {
            if let (Some(cell), Some(r)) = (&cells[k], rewards[k]) {
                self.learners[k].record_own(cell, &decisions[k], r).map_err(lerr(k))?;
            }
            for i in 0..m {
                if decisions[i].choice == Some(Choice::Learner(k)) {
                    let (arm, cell) = delegated[i].as_ref().expect("calls are served");
                    let r = rewards[i].expect("served calls have rewards");
                    self.learners[k].record_served(cell, *arm, r).map_err(lerr(k))?;
                }
            }
        }

        // (vi) partition advancement and broadcast
        for i in 0..m {
            let Some(cell) = &cells[i] else { continue };
            let notice = self.learners[i].advance_partition(cell, t).map_err(lerr(i))?;
            if let Some(notice) = notice {
                for j in (0..m).filter(|&j| j != i) {
                    self.learners[j].absorb_activation(&notice).map_err(lerr(j))?;
                }
                transcript.push(Message::Activate(notice));
            }
        }

        let mut records = Vec::with_capacity(m);
        for i in 0..m {
            let Some(x) = contexts[i].clone() else {
                records.push(LearnerRecord::idle(i));
                continue;
            };
            let d = decisions[i];
            let choice = d.choice.expect("active learners choose");
            let (_, oracle) = self
                .oracle
                .oracle_choice(i, &x, t)
                .map_err(|source| EngineError::Env { slot: t, source })?;
            records.push(LearnerRecord {
                learner: i,
                context: Some(x),
                phase: d.phase,
                choice: Some(choice),
                delegated_arm: delegated[i].as_ref().map(|(a, _)| *a),
                reward: rewards[i],
                cost: self.env.topology().cost(i, choice),
                cell: cells[i].clone(),
                oracle: Some(oracle),
            });
        }
        self.t = t;
        Ok(SlotLog { t, records, transcript })
    }

    /// Runs slots until `horizon`, handing each log to `sink`. A trace that
    /// runs out early ends the run with `truncated` set.
    pub fn run_with<F>(&mut self, horizon: u64, mut sink: F) -> Result<RunOutcome, EngineError>
    where
        F: FnMut(SlotLog),
    {
        let start = self.t;
        while self.t < horizon {
            match self.run_slot() {
                Ok(log) => sink(log),
                Err(EngineError::Env {
                    source: EnvError::EndOfTrace(_),
                    ..
                }) => {
                    return Ok(RunOutcome {
                        slots: self.t - start,
                        truncated: true,
                    })
                }
                Err(e) => return Err(e),
            }
        }
        Ok(RunOutcome {
            slots: self.t - start,
            truncated: false,
        })
    }

    pub fn run_horizon(&mut self, horizon: u64) -> Result<(Vec<SlotLog>, RunOutcome), EngineError> {
        let mut logs = Vec::new();
        let outcome = self.run_with(horizon, |l| logs.push(l))?;
        Ok((logs, outcome))
    }
}
