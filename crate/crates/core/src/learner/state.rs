use super::{control_value, ActivationNotice, AlgoParams, Algorithm, Control, LearnerError, Phase, PhaseDecision};
use crate::env::{Choice, Context, Topology};
use crate::partition::{AdaptivePartition, Cell, Hypercube, UniformPartition};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;
use smallvec::SmallVec;
use std::collections::{BTreeMap, BTreeSet};

/// Running sample mean with its sample count.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Estimate {
    pub mean: f64,
    pub count: u64,
}

impl Estimate {
    pub fn push(&mut self, r: f64) {
        self.mean = (self.mean * self.count as f64 + r) / (self.count as f64 + 1.0);
        self.count += 1;
    }
}

/// Counters and estimates one learner keeps for one cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellStats {
    /// Non-training arrivals, own and served.
    pub n_p: u64,
    /// Own arrivals of any kind; drives DCZA splitting.
    pub arrivals: u64,
    /// Own-arm estimates; `count` is `N_arm`.
    pub arms: Vec<Estimate>,
    /// Estimates of other learners by peer position; `count` is `N_learner`.
    pub peers: Vec<Estimate>,
    /// Training counters `N_train` by peer position.
    pub trained: Vec<u64>,
}

impl CellStats {
    pub fn new(arms: usize, peers: usize) -> Self {
        Self {
            n_p: 0,
            arrivals: 0,
            arms: vec![Estimate::default(); arms],
            peers: vec![Estimate::default(); peers],
            trained: vec![0; peers],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PartitionKind {
    Uniform(UniformPartition),
    Adaptive(AdaptivePartition),
}

type Picks = SmallVec<[usize; 8]>;

/// One learner's full algorithm state.
#[derive(Clone, Debug)]
pub struct Learner {
    id: usize,
    learners: usize,
    arms: usize,
    params: AlgoParams,
    /// Cost by choice position (own arms, then peers ascending).
    costs: Vec<f64>,
    partition: PartitionKind,
    stats: FxHashMap<Cell, CellStats>,
    /// Union view of all learners' partitions: cell to the learners it is active for.
    union: BTreeMap<Hypercube, BTreeSet<usize>>,
    rng: ChaCha8Rng,
}

impl Learner {
    pub fn new(
        id: usize,
        topology: &Topology,
        dim: usize,
        params: AlgoParams,
        rng: ChaCha8Rng,
    ) -> Result<Self, LearnerError> {
        params.validate()?;
        let learners = topology.learners();
        if id >= learners {
            return Err(LearnerError::InvalidParams(format!(
                "learner {id} out of range for {learners} learners"
            )));
        }
        if params.f_max < topology.f_max() {
            return Err(LearnerError::InvalidParams(format!(
                "F_max {} below the topology bound {}",
                params.f_max,
                topology.f_max()
            )));
        }
        let costs = topology.choices(id).into_iter().map(|c| topology.cost(id, c)).collect();
        let (partition, union) = match params.algo {
            Algorithm::Dcza => (
                PartitionKind::Adaptive(AdaptivePartition::new(dim)),
                BTreeMap::from([(Hypercube::root(dim), (0..learners).collect())]),
            ),
            _ => (
                PartitionKind::Uniform(UniformPartition::new(params.m_t, dim)),
                BTreeMap::new(),
            ),
        };
        Ok(Self {
            id,
            learners,
            arms: topology.arms(id),
            params,
            costs,
            partition,
            stats: FxHashMap::default(),
            union,
            rng,
        })
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn params(&self) -> &AlgoParams {
        &self.params
    }

    pub fn partition(&self) -> &PartitionKind {
        &self.partition
    }

    pub fn adaptive_partition(&self) -> Option<&AdaptivePartition> {
        match &self.partition {
            PartitionKind::Adaptive(p) => Some(p),
            PartitionKind::Uniform(_) => None,
        }
    }

    pub fn stats(&self) -> &FxHashMap<Cell, CellStats> {
        &self.stats
    }

    pub fn cell_stats(&self, cell: &Cell) -> Option<&CellStats> {
        self.stats.get(cell)
    }

    pub fn union_view(&self) -> &BTreeMap<Hypercube, BTreeSet<usize>> {
        &self.union
    }

    /// `N_p` for `cell`, zero when untracked; the answer to a counter query.
    pub fn n_p(&self, cell: &Cell) -> u64 {
        self.stats.get(cell).map_or(0, |s| s.n_p)
    }

    pub fn peer_pos(&self, j: usize) -> usize {
        debug_assert!(j != self.id);
        if j < self.id {
            j
        } else {
            j - 1
        }
    }

    fn peer_at(&self, pos: usize) -> usize {
        if pos < self.id {
            pos
        } else {
            pos + 1
        }
    }

    fn choice_at(&self, pos: usize) -> Choice {
        if pos < self.arms {
            Choice::Arm(pos)
        } else {
            Choice::Learner(self.peer_at(pos - self.arms))
        }
    }

    pub fn cost(&self, choice: Choice) -> f64 {
        match choice {
            Choice::Arm(f) => self.costs[f],
            Choice::Learner(j) => self.costs[self.arms + self.peer_pos(j)],
        }
    }

    pub fn locate(&self, x: &Context) -> Result<Cell, LearnerError> {
        Ok(match &self.partition {
            PartitionKind::Uniform(u) => Cell::Uniform(u.uniform_cell(x.coords())),
            PartitionKind::Adaptive(a) => Cell::Cube(a.locate(x.coords())?),
        })
    }

    fn level_of(&self, cell: &Cell) -> Option<u8> {
        match (self.params.algo, cell) {
            (Algorithm::Dcza, Cell::Cube(h)) => Some(h.level()),
            (Algorithm::Dcza, Cell::Uniform(_)) => Some(0),
            _ => None,
        }
    }

    pub fn control(&self, which: Control, t: u64, cell: &Cell) -> Result<f64, LearnerError> {
        control_value(which, &self.params, t, self.level_of(cell))
    }

    fn entry(&mut self, cell: &Cell) -> &mut CellStats {
        if !self.stats.contains_key(cell) {
            self.stats
                .insert(cell.clone(), CellStats::new(self.arms, self.learners - 1));
        }
        self.stats.get_mut(cell).unwrap()
    }

    fn pick(&mut self, picks: &Picks) -> usize {
        if picks.len() == 1 {
            picks[0]
        } else {
            picks[self.rng.gen_range(0..picks.len())]
        }
    }

    /// Chooses this slot's phase and choice for an arrival in `cell`.
    ///
    /// `query(j, cell)` returns learner `j`'s `N_p` for `cell`; it is only
    /// called for training candidates.
    pub fn decide_phase(
        &mut self,
        cell: &Cell,
        t: u64,
        query: &mut dyn FnMut(usize, &Cell) -> u64,
    ) -> Result<PhaseDecision, LearnerError> {
        let d1 = self.control(Control::D1, t, cell)?;
        let d3 = self.control(Control::D3, t, cell)?;
        let d2 = match self.params.algo {
            Algorithm::Ssee => None,
            _ => Some(self.control(Control::D2, t, cell)?),
        };
        let stats = self.entry(cell);

        let under_explored: Picks = (0..stats.arms.len())
            .filter(|&f| stats.arms[f].count as f64 <= d1)
            .collect();
        if !under_explored.is_empty() {
            let f = self.pick(&under_explored);
            return Ok(PhaseDecision::pick(Phase::ExploreOwnArm, Choice::Arm(f)));
        }

        if let Some(d2) = d2 {
            let candidates: Picks = (0..stats.trained.len())
                .filter(|&p| stats.trained[p] as f64 <= d2)
                .collect();
            for &p in &candidates {
                let j = self.peer_at(p);
                let reported = query(j, cell);
                self.refresh_training_counter(j, cell, reported)?;
            }
            let stats = &self.stats[cell];
            let under_trained: Picks = candidates
                .into_iter()
                .filter(|&p| stats.trained[p] as f64 <= d2)
                .collect();
            if !under_trained.is_empty() {
                let p = self.pick(&under_trained);
                return Ok(PhaseDecision::pick(Phase::Train, Choice::Learner(self.peer_at(p))));
            }
        }

        let stats = &self.stats[cell];
        let unexplored_peers: Picks = (0..stats.peers.len())
            .filter(|&p| stats.peers[p].count as f64 <= d3)
            .collect();
        if !unexplored_peers.is_empty() {
            let p = self.pick(&unexplored_peers);
            return Ok(PhaseDecision::pick(
                Phase::ExploreLearner,
                Choice::Learner(self.peer_at(p)),
            ));
        }

        let k = self.select_exploit(cell)?;
        Ok(PhaseDecision::pick(Phase::Exploit, k))
    }

    /// Highest estimated net reward in `cell`, ties broken at random.
    pub fn select_exploit(&mut self, cell: &Cell) -> Result<Choice, LearnerError> {
        let n_choices = self.arms + self.learners - 1;
        let mut best = f64::NEG_INFINITY;
        let mut picks = Picks::new();
        {
            let stats = self.stats.get(cell);
            for pos in 0..n_choices {
                let est = stats.map(|s| {
                    if pos < self.arms {
                        s.arms[pos]
                    } else {
                        s.peers[pos - self.arms]
                    }
                });
                let est = match est {
                    Some(e) if e.count > 0 => e,
                    _ => return Err(LearnerError::ZeroCount(self.choice_at(pos))),
                };
                let net = est.mean - self.costs[pos];
                if net > best {
                    best = net;
                    picks.clear();
                    picks.push(pos);
                } else if net == best {
                    picks.push(pos);
                }
            }
        }
        let pos = self.pick(&picks);
        Ok(self.choice_at(pos))
    }

    /// The own arm this learner pulls for a caller whose context lies in `caller_cell`.
    pub fn cooperate_select(&mut self, caller_cell: &Cell, t: u64) -> Result<usize, LearnerError> {
        let d1 = self.control(Control::D1, t, caller_cell)?;
        let arms = match self.stats.get(caller_cell) {
            Some(s) => s.arms.clone(),
            None => vec![Estimate::default(); self.arms],
        };
        let under_explored: Picks = (0..arms.len()).filter(|&f| arms[f].count as f64 <= d1).collect();
        if !under_explored.is_empty() {
            return Ok(self.pick(&under_explored));
        }
        let best = arms.iter().map(|e| e.mean).fold(f64::NEG_INFINITY, f64::max);
        let picks: Picks = (0..arms.len()).filter(|&f| arms[f].mean == best).collect();
        Ok(self.pick(&picks))
    }

    /// `N_train[j] := reported − N_learner[j]` for `cell`.
    pub fn refresh_training_counter(&mut self, j: usize, cell: &Cell, reported: u64) -> Result<(), LearnerError> {
        let pos = self.peer_pos(j);
        let asker = self.id;
        let stats = self.entry(cell);
        let own = stats.peers[pos].count;
        if reported < own {
            return Err(LearnerError::CounterConsistency {
                asker,
                peer: j,
                cell: cell.to_string(),
                reported,
                own,
            });
        }
        stats.trained[pos] = reported - own;
        Ok(())
    }

    /// Updates counters and estimates after this learner's own selection.
    pub fn record_own(&mut self, cell: &Cell, decision: &PhaseDecision, reward: f64) -> Result<(), LearnerError> {
        if !(0.0..=1.0).contains(&reward) {
            return Err(LearnerError::RewardRange(reward));
        }
        let Some(choice) = decision.choice else {
            return Ok(());
        };
        if let Choice::Arm(f) = choice {
            if f >= self.arms {
                return Err(LearnerError::UnknownChoice(choice));
            }
        }
        let pos = match choice {
            Choice::Learner(j) if j == self.id || j >= self.learners => {
                return Err(LearnerError::UnknownChoice(choice))
            }
            Choice::Learner(j) => Some(self.peer_pos(j)),
            Choice::Arm(_) => None,
        };
        let stats = self.entry(cell);
        if decision.train {
            stats.trained[pos.expect("training targets a learner")] += 1;
            return Ok(());
        }
        match (choice, pos) {
            (Choice::Arm(f), _) => stats.arms[f].push(reward),
            (_, Some(p)) => stats.peers[p].push(reward),
            _ => unreachable!(),
        }
        stats.n_p += 1;
        Ok(())
    }

    /// Updates own-arm statistics after serving a caller.
    pub fn record_served(&mut self, caller_cell: &Cell, arm: usize, reward: f64) -> Result<(), LearnerError> {
        if !(0.0..=1.0).contains(&reward) {
            return Err(LearnerError::RewardRange(reward));
        }
        if arm >= self.arms {
            return Err(LearnerError::UnknownChoice(Choice::Arm(arm)));
        }
        let stats = self.entry(caller_cell);
        stats.arms[arm].push(reward);
        stats.n_p += 1;
        Ok(())
    }

    /// Counts an own arrival in `cell` and splits it once the count reaches `2^{ρl}`.
    pub fn advance_partition(&mut self, cell: &Cell, t: u64) -> Result<Option<ActivationNotice>, LearnerError> {
        let Cell::Cube(p) = cell else {
            return Ok(None);
        };
        if self.params.algo != Algorithm::Dcza {
            return Ok(None);
        }
        let threshold = (self.params.rho * p.level() as f64).exp2();
        let warm = self.params.warm_start;
        let stats = self.entry(cell);
        stats.arrivals += 1;
        if (stats.arrivals as f64) < threshold {
            return Ok(None);
        }
        let inherited = warm.then(|| stats.arms.clone());
        let PartitionKind::Adaptive(part) = &mut self.partition else {
            unreachable!("DCZA learners keep adaptive partitions");
        };
        let children = part.split(p, t)?;
        self.mark_split(self.id, p, &children);
        if let Some(arms) = inherited {
            for c in &children {
                self.entry(&Cell::Cube(c.clone())).arms = arms.clone();
            }
        }
        Ok(Some(ActivationNotice {
            origin: self.id,
            parent: p.clone(),
            slot: t,
        }))
    }

    fn mark_split(&mut self, origin: usize, parent: &Hypercube, children: &[Hypercube]) {
        if let Some(set) = self.union.get_mut(parent) {
            set.remove(&origin);
        }
        for c in children {
            self.union.entry(c.clone()).or_default().insert(origin);
        }
    }

    /// Merges another learner's split into the union view.
    pub fn absorb_activation(&mut self, notice: &ActivationNotice) -> Result<(), LearnerError> {
        if notice.origin == self.id {
            return Ok(());
        }
        let Some(holders) = self.union.get(&notice.parent) else {
            return Err(LearnerError::UnknownParent {
                origin: notice.origin,
                parent: notice.parent.clone(),
            });
        };
        let children = notice.parent.children()?;
        if !holders.contains(&notice.origin) {
            let seen = children
                .iter()
                .all(|c| self.union.get(c).is_some_and(|s| s.contains(&notice.origin)));
            if seen {
                return Ok(());
            }
            return Err(LearnerError::StaleParent {
                origin: notice.origin,
                parent: notice.parent.clone(),
            });
        }
        self.mark_split(notice.origin, &notice.parent, &children);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::Topology;
    use rand::SeedableRng;

    fn learner(id: usize, topo: &Topology, params: AlgoParams) -> Learner {
        Learner::new(id, topo, 1, params, ChaCha8Rng::seed_from_u64(id as u64 + 9)).unwrap()
    }

    fn cell0() -> Cell {
        Cell::Uniform(smallvec::smallvec![0])
    }

    fn no_query(_: usize, _: &Cell) -> u64 {
        panic!("no counter query expected")
    }

    #[test]
    fn fresh_state_explores_own_arm() {
        let topo = Topology::free(vec![2, 2], 2).unwrap();
        let mut l = learner(0, &topo, AlgoParams::clup(0.5, 1, 2));
        let d = l.decide_phase(&cell0(), 1, &mut no_query).unwrap();
        assert_eq!(d.phase, Phase::ExploreOwnArm);
        assert!(!d.train);
    }

    fn saturate(l: &mut Learner, cell: &Cell, arms: u64, peers: u64, trained: u64) {
        let s = l.entry(cell);
        for e in &mut s.arms {
            *e = Estimate { mean: 0.5, count: arms };
        }
        for e in &mut s.peers {
            *e = Estimate {
                mean: 0.5,
                count: peers,
            };
        }
        for n in &mut s.trained {
            *n = trained;
        }
    }

    #[test]
    fn under_trained_peer_is_trained() {
        let topo = Topology::free(vec![1, 1, 1], 1).unwrap();
        let mut l = learner(1, &topo, AlgoParams::clup(0.5, 1, 1));
        let cell = cell0();
        let t = 100;
        saturate(&mut l, &cell, 1000, 0, 0);
        // learner 0 reports a large count, learner 2 a small one
        let mut query = |j: usize, _: &Cell| if j == 0 { 10_000 } else { 3 };
        let d = l.decide_phase(&cell, t, &mut query).unwrap();
        assert_eq!(d.phase, Phase::Train);
        assert_eq!(d.choice, Some(Choice::Learner(2)));
        assert!(d.train);
        assert_eq!(l.cell_stats(&cell).unwrap().trained, vec![10_000, 3]);
    }

    #[test]
    fn saturated_counters_exploit() {
        let topo = Topology::free(vec![2, 2], 2).unwrap();
        let mut l = learner(0, &topo, AlgoParams::clup(0.5, 1, 2));
        let cell = cell0();
        saturate(&mut l, &cell, 1000, 1000, 1000);
        let d = l.decide_phase(&cell, 100, &mut no_query).unwrap();
        assert_eq!(d.phase, Phase::Exploit);
    }

    #[test]
    fn exploit_uses_net_reward() {
        let topo = Topology::new(
            vec![1, 1],
            1,
            vec![vec![0.1], vec![0.0]],
            vec![vec![0.0, 0.3], vec![0.0, 0.0]],
        )
        .unwrap();
        let mut l = learner(0, &topo, AlgoParams::clup(0.5, 1, 1));
        let cell = cell0();
        let s = l.entry(&cell);
        s.arms[0] = Estimate { mean: 0.6, count: 5 };
        s.peers[0] = Estimate { mean: 0.7, count: 5 };
        assert_eq!(l.select_exploit(&cell).unwrap(), Choice::Arm(0));
    }

    #[test]
    fn exploit_ties_split_evenly() {
        let topo = Topology::free(vec![1, 1], 1).unwrap();
        let mut l = learner(0, &topo, AlgoParams::clup(0.5, 1, 1));
        let cell = cell0();
        let s = l.entry(&cell);
        s.arms[0] = Estimate { mean: 0.5, count: 5 };
        s.peers[0] = Estimate { mean: 0.5, count: 5 };
        let own = (0..2000)
            .filter(|_| l.select_exploit(&cell).unwrap() == Choice::Arm(0))
            .count();
        assert!((900..=1100).contains(&own), "{own}");
    }

    #[test]
    fn exploit_with_zero_count_is_error() {
        let topo = Topology::free(vec![1, 1], 1).unwrap();
        let mut l = learner(0, &topo, AlgoParams::clup(0.5, 1, 1));
        let cell = cell0();
        l.entry(&cell).arms[0] = Estimate { mean: 0.5, count: 5 };
        assert_eq!(
            l.select_exploit(&cell),
            Err(LearnerError::ZeroCount(Choice::Learner(1)))
        );
    }

    #[test]
    fn single_choice_exploit() {
        let topo = Topology::free(vec![1], 1).unwrap();
        let mut l = learner(0, &topo, AlgoParams::clup(0.5, 1, 1));
        let cell = cell0();
        l.entry(&cell).arms[0] = Estimate { mean: 0.2, count: 1 };
        assert_eq!(l.select_exploit(&cell).unwrap(), Choice::Arm(0));
    }

    #[test]
    fn cooperation_rules() {
        let topo = Topology::new(vec![2, 1], 2, vec![vec![0.9, 0.0], vec![0.0]], vec![vec![0.0; 2]; 2]).unwrap();
        let mut l = learner(0, &topo, AlgoParams::clup(0.5, 1, 2));
        let cell = cell0();
        let t = 100;
        l.entry(&cell).arms = vec![Estimate { mean: 0.4, count: 1000 }, Estimate { mean: 0.9, count: 3 }];
        assert_eq!(l.cooperate_select(&cell, t).unwrap(), 1);
        l.entry(&cell).arms[1].count = 1000;
        assert_eq!(l.cooperate_select(&cell, t).unwrap(), 1);
        l.entry(&cell).arms = vec![Estimate { mean: 0.8, count: 1000 }, Estimate { mean: 0.5, count: 1000 }];
        assert_eq!(l.cooperate_select(&cell, t).unwrap(), 0);
    }

    #[test]
    fn refresh_rules() {
        let topo = Topology::free(vec![1, 1], 1).unwrap();
        let mut l = learner(0, &topo, AlgoParams::clup(0.5, 1, 1));
        let cell = cell0();
        l.entry(&cell).peers[0].count = 3;
        l.refresh_training_counter(1, &cell, 10).unwrap();
        assert_eq!(l.cell_stats(&cell).unwrap().trained[0], 7);
        l.entry(&cell).peers[0].count = 5;
        l.refresh_training_counter(1, &cell, 5).unwrap();
        assert_eq!(l.cell_stats(&cell).unwrap().trained[0], 0);
        assert!(matches!(
            l.refresh_training_counter(1, &cell, 2),
            Err(LearnerError::CounterConsistency {
                reported: 2,
                own: 5,
                ..
            })
        ));
    }

    #[test]
    fn outcome_recording() {
        let topo = Topology::free(vec![1, 1], 1).unwrap();
        let mut l = learner(0, &topo, AlgoParams::clup(0.5, 1, 1));
        let cell = cell0();
        l.entry(&cell).arms[0] = Estimate { mean: 0.5, count: 2 };
        let explore = PhaseDecision::pick(Phase::ExploreOwnArm, Choice::Arm(0));
        l.record_own(&cell, &explore, 1.0).unwrap();
        let s = l.cell_stats(&cell).unwrap();
        assert!((s.arms[0].mean - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!((s.arms[0].count, s.n_p), (3, 1));

        let train = PhaseDecision::pick(Phase::Train, Choice::Learner(1));
        l.record_own(&cell, &train, 0.3).unwrap();
        let s = l.cell_stats(&cell).unwrap();
        assert_eq!((s.trained[0], s.peers[0].count, s.n_p), (1, 0, 1));

        assert_eq!(l.record_own(&cell, &explore, 1.2), Err(LearnerError::RewardRange(1.2)));
    }

    #[test]
    fn served_call_into_empty_cell() {
        let topo = Topology::free(vec![1, 1], 1).unwrap();
        let mut l = learner(1, &topo, AlgoParams::clup(0.5, 1, 1));
        let cell = cell0();
        l.record_served(&cell, 0, 0.8).unwrap();
        let s = l.cell_stats(&cell).unwrap();
        assert_eq!((s.arms[0].mean, s.arms[0].count, s.n_p), (0.8, 1, 1));
    }

    fn root() -> Cell {
        Cell::Cube(Hypercube::root(1))
    }

    #[test]
    fn dcza_split_threshold() {
        let topo = Topology::free(vec![1, 1], 1).unwrap();
        let mut l = learner(0, &topo, AlgoParams::dcza(2.0, 1.0, 1));
        let n = l.advance_partition(&root(), 1).unwrap().unwrap();
        assert_eq!(n.parent, Hypercube::root(1));
        assert_eq!(l.adaptive_partition().unwrap().active_len(), 2);

        let right = Cell::Cube("1:1".parse().unwrap());
        for t in 2..5 {
            assert!(l.advance_partition(&right, t).unwrap().is_none());
        }
        assert!(l.advance_partition(&right, 5).unwrap().is_some());
    }

    #[test]
    fn clup_never_splits() {
        let topo = Topology::free(vec![1], 1).unwrap();
        let mut l = learner(0, &topo, AlgoParams::clup(0.5, 4, 1));
        assert!(l.advance_partition(&cell0(), 1).unwrap().is_none());
    }

    #[test]
    fn activation_merge() {
        let topo = Topology::free(vec![1, 1], 1).unwrap();
        let mut a = learner(0, &topo, AlgoParams::dcza(2.0, 1.0, 1));
        let mut b = learner(1, &topo, AlgoParams::dcza(2.0, 1.0, 1));
        let notice = a.advance_partition(&root(), 1).unwrap().unwrap();
        b.absorb_activation(&notice).unwrap();
        let view = b.union_view();
        assert_eq!(view.len(), 3);
        assert_eq!(view[&Hypercube::root(1)], BTreeSet::from([1]));
        assert_eq!(view[&"1:0".parse::<Hypercube>().unwrap()], BTreeSet::from([0]));
        assert_eq!(b.adaptive_partition().unwrap().active_len(), 1);

        let before = b.union_view().clone();
        b.absorb_activation(&notice).unwrap();
        assert_eq!(b.union_view(), &before);

        let bogus = ActivationNotice {
            origin: 0,
            parent: "3:1".parse().unwrap(),
            slot: 2,
        };
        assert!(matches!(
            b.absorb_activation(&bogus),
            Err(LearnerError::UnknownParent { .. })
        ));
    }

    #[test]
    fn warm_start_copies_arm_estimates() {
        let topo = Topology::free(vec![1, 1], 1).unwrap();
        let mut params = AlgoParams::dcza(2.0, 1.0, 1);
        params.warm_start = true;
        let mut l = learner(0, &topo, params);
        l.entry(&root()).arms[0] = Estimate { mean: 0.7, count: 4 };
        l.advance_partition(&root(), 1).unwrap();
        let child = Cell::Cube("1:0".parse().unwrap());
        let s = l.cell_stats(&child).unwrap();
        assert_eq!(s.arms[0], Estimate { mean: 0.7, count: 4 });
        assert_eq!(s.n_p, 0);
    }
}
