//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Every run executed here is also checked for phase budgets, the DCZA level
//! bound and exact counter replay (criteria 4, 7 and 10).

mod common;

use common::{bump, ramp};
use coopbandit::bench::{
    activated_level_counts, level_bound_violations, loglog_slope, state_mismatches, OracleTable, PhaseBudget,
    PhaseCounter, RegretSeries, Replay,
};
use coopbandit::coord::{ActivationWriter, Engine, Message, SlotLog, SlotLogWriter};
use coopbandit::env::{
    build_counterexample, ArrivalKind, ArrivalProcess, Choice, Context, Environment, FieldKind, Noise, Region,
    RewardField, Source, Topology,
};
use coopbandit::learner::{theorem1_params, ActivationNotice, AlgoParams, Algorithm, Phase};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use std::time::{Duration, Instant};

/// Suite-wide tallies for the per-run criteria.
#[derive(Default)]
struct Suite {
    runs: usize,
    dcza_runs: usize,
    dcza_rhos: Vec<f64>,
    level_violations: usize,
    budget_violations: Vec<String>,
    replay_failures: Vec<String>,
}

struct Run {
    env: Arc<Environment>,
    arrivals: ArrivalKind,
    params: Vec<AlgoParams>,
    seed: u64,
    horizon: u64,
}

struct Outcome {
    regret: RegretSeries,
    phases: PhaseCounter,
    notices: Vec<ActivationNotice>,
    engine: Engine,
}

impl Suite {
    /// Runs to the horizon, feeding every slot to `sink` and to the per-run checks.
    fn execute(&mut self, name: &str, run: &Run, mut sink: impl FnMut(&SlotLog)) -> Outcome {
        let m = run.env.topology().learners();
        let dim = run.env.dim();
        let arrivals = ArrivalProcess::new(run.arrivals.clone(), m, dim).unwrap();
        let mut engine = Engine::new(run.env.clone(), arrivals, run.params.clone(), run.seed).unwrap();
        let mut replay = Replay::new(run.env.topology().clone(), run.params.clone(), dim).unwrap();
        let mut budget = PhaseBudget::new();
        let mut regret = RegretSeries::new(m);
        let mut phases = PhaseCounter::new(m);
        let mut notices = Vec::new();
        let mut replay_err = None;
        engine
            .run_with(run.horizon, |log| {
                if replay_err.is_none() {
                    replay_err = replay.push(&log).err();
                }
                budget.push(&log, &run.params);
                regret.push(&log);
                phases.push(&log);
                notices.extend(log.transcript.iter().filter_map(|msg| match msg {
                    Message::Activate(n) => Some(n.clone()),
                    _ => None,
                }));
                sink(&log);
            })
            .unwrap();

        self.runs += 1;
        let tag = format!("{name} seed {}", run.seed);
        match replay_err {
            Some(e) => self.replay_failures.push(format!("{tag}: {e}")),
            None => {
                let diff = state_mismatches(replay.learners(), engine.learners());
                if let Some(first) = diff.first() {
                    self.replay_failures
                        .push(format!("{tag}: {} mismatches, first: {first}", diff.len()));
                }
            }
        }
        for v in budget.violations(&run.params, dim, run.horizon) {
            self.budget_violations.push(format!(
                "{tag}: learner {} cell {} {} {} count {} > {}",
                v.learner, v.cell, v.phase, v.choice, v.count, v.bound
            ));
        }
        if run.params[0].algo == Algorithm::Dcza {
            self.dcza_runs += 1;
            let rho = run.params[0].rho;
            if !self.dcza_rhos.contains(&rho) {
                self.dcza_rhos.push(rho);
            }
            self.level_violations += level_bound_violations(&notices, rho).len();
        }
        Outcome {
            regret,
            phases,
            notices,
            engine,
        }
    }

    /// Slot-log and activation CSV bytes of a run.
    fn log_bytes(&mut self, name: &str, run: &Run) -> Vec<u8> {
        let mut logs = SlotLogWriter::new(Vec::new(), run.env.dim()).unwrap();
        let mut acts = ActivationWriter::new(Vec::new()).unwrap();
        self.execute(name, run, |l| {
            logs.write(l).unwrap();
            acts.write(l).unwrap();
        });
        let mut bytes = logs.finish().unwrap();
        bytes.extend(acts.finish().unwrap());
        bytes
    }
}

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, id: &str, title: &str, pass: bool, detail: String) {
        if !pass {
            self.failures += 1;
        }
        println!(
            "criterion {id:<3} {}  {title}: {detail}",
            if pass { "PASS" } else { "FAIL" }
        );
    }

    fn info(&self, id: &str, title: &str, detail: String) {
        println!("criterion {id:<3} INFO  {title}: {detail}");
    }
}

fn within(elapsed: Duration, limit: Duration) -> bool {
    elapsed < limit
}

fn random_field<R: Rng>(dim: usize, rng: &mut R) -> RewardField {
    let kind = match rng.gen_range(0..3) {
        0 => FieldKind::Constant {
            value: rng.gen_range(0.0..1.0),
        },
        1 => FieldKind::LinearRamp {
            intercept: rng.gen_range(0.2..0.6),
            slopes: (0..dim).map(|_| rng.gen_range(-0.2..0.2)).collect(),
        },
        _ => FieldKind::Bump {
            center: (0..dim).map(|_| rng.gen_range(0.0..1.0)).collect(),
            base: rng.gen_range(0.0..0.4),
            peak: rng.gen_range(0.5..1.0),
            radius: rng.gen_range(0.6..1.0),
        },
    };
    RewardField::new(dim, kind, Noise::Bernoulli).unwrap()
}

/// Exhaustive scan over own arms and every (learner, arm) pair.
fn brute_force(env: &Environment, i: usize, x: &Context) -> (Choice, f64) {
    let topo = env.topology();
    let pi = |j: usize, f: usize| env.field(j, f).unwrap().expected_reward(x).unwrap();
    let mut best: Option<(usize, Choice, f64)> = None;
    let mut consider = |rank: usize, c: Choice, v: f64| match best {
        Some((r, _, b)) if v < b || (v == b && r <= rank) => {}
        _ => best = Some((rank, c, v)),
    };
    for f in 0..topo.arms(i) {
        consider(f, Choice::Arm(f), pi(i, f) - topo.cost(i, Choice::Arm(f)));
    }
    for (k, j) in (0..topo.learners()).filter(|&j| j != i).enumerate() {
        for f in 0..topo.arms(j) {
            consider(
                topo.arms(i) + k,
                Choice::Learner(j),
                pi(j, f) - topo.cost(i, Choice::Learner(j)),
            );
        }
    }
    let (_, c, v) = best.unwrap();
    (c, v)
}

fn criterion_1(report: &mut Report) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
    let mut checked = 0;
    let mut mismatches = 0;
    let shapes = [(1, 2), (2, 2), (1, 3), (2, 3), (2, 2)];
    for &(dim, m) in &shapes {
        let arms: Vec<usize> = (0..m).map(|_| rng.gen_range(1..4)).collect();
        let f_max = *arms.iter().max().unwrap();
        let arm_costs = arms
            .iter()
            .map(|&a| (0..a).map(|_| rng.gen_range(0.0..0.1)).collect())
            .collect();
        let call_costs = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| if i == j { 0.0 } else { rng.gen_range(0.0..0.2) })
                    .collect()
            })
            .collect();
        let topo = Topology::new(arms.clone(), f_max, arm_costs, call_costs).unwrap();
        let fields = arms
            .iter()
            .map(|&a| (0..a).map(|_| random_field(dim, &mut rng)).collect())
            .collect();
        let env = Arc::new(Environment::with_fields(dim, topo, fields, 2.0, 1.0).unwrap());
        let table = OracleTable::new(env.clone());
        for _ in 0..200 {
            let x = Context::new((0..dim).map(|_| rng.gen_range(0.0..=1.0))).unwrap();
            for i in 0..m {
                let got = table.oracle_choice(i, &x, 1).unwrap();
                if got != brute_force(&env, i, &x) {
                    mismatches += 1;
                }
            }
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    report.line(
        "1",
        "oracle equivalence",
        mismatches == 0 && checked == 1000 && within(elapsed, Duration::from_secs(5)),
        format!("{checked} contexts over 5 environments, {mismatches} mismatches, {elapsed:.2?} (limit 5 s)"),
    );
}

/// Two learners with two arms each; the best choice of both learners changes
/// inside `[7/18, 9/18]`.
fn regret_env() -> Arc<Environment> {
    let topo = Topology::new(
        vec![2, 2],
        2,
        vec![vec![0.0; 2]; 2],
        vec![vec![0.0, 0.02], vec![0.02, 0.0]],
    )
    .unwrap();
    let fields = vec![
        vec![ramp(0.3, 0.5), bump(0.39, 0.3, 0.6, 0.3)],
        vec![ramp(0.9, -0.9), bump(0.8, 0.2, 0.6, 0.4)],
    ];
    Arc::new(Environment::with_fields(1, topo, fields, 1.0, 1.0).unwrap())
}

fn regret_curve(suite: &mut Suite, region: Region, seeds: u64, horizon: u64) -> Vec<f64> {
    let env = regret_env();
    let params = theorem1_params(1.0, 1, horizon, 2);
    let mut mean = vec![0.0; horizon as usize];
    for seed in 0..seeds {
        let run = Run {
            env: env.clone(),
            arrivals: ArrivalKind::IidUniform { region: region.clone() },
            params: vec![params.clone(); 2],
            seed,
            horizon,
        };
        let out = suite.execute("regret order", &run, |_| {});
        for (m, r) in mean.iter_mut().zip(out.regret.total()) {
            *m += r / seeds as f64;
        }
    }
    mean
}

fn criterion_2(report: &mut Report, suite: &mut Suite) {
    const T: u64 = 100_000;
    let start = Instant::now();
    let lo = 7.0 / 18.0;
    let hi = 9.0 / 18.0;
    let table = OracleTable::new(regret_env());
    let ends = [lo, hi].map(|x| {
        let x = Context::new([x]).unwrap();
        [
            table.oracle_choice(0, &x, 1).unwrap().0,
            table.oracle_choice(1, &x, 1).unwrap().0,
        ]
    });
    let varies = ends[0][0] != ends[1][0] || ends[0][1] != ends[1][1];
    let region = Region {
        lo: vec![lo],
        hi: vec![hi],
    };
    let mean = regret_curve(suite, region, 30, T);
    let elapsed = start.elapsed();
    let slope = loglog_slope(&mean, (10_000, T)).unwrap();
    let early = mean[999] / 1e3;
    let late = mean[T as usize - 1] / T as f64;
    report.line(
        "2",
        "sublinear regret order",
        varies && slope <= 0.9 && late < 0.5 * early && within(elapsed, Duration::from_secs(600)),
        format!(
            "arrivals on [7/18, 9/18], learner 0's optimal choice {} at 7/18 and {} at 9/18; slope over [1e4, 1e5] = {slope:.4} (<= 0.9); \
             R(1e5)/1e5 = {late:.4} vs 0.5 x R(1e3)/1e3 = {:.4}; 30 seeds, {elapsed:.2?} (limit 10 min)",
            ends[0][0],
            ends[1][0],
            0.5 * early
        ),
    );

    let full = regret_curve(suite, Region::unit(1), 30, T);
    let slope = loglog_slope(&full, (10_000, T)).unwrap();
    report.info(
        "2",
        "same learners, arrivals on [0, 1]",
        format!(
            "slope = {slope:.4}, R(1e5)/1e5 = {:.4}, R(1e3)/1e3 = {:.4}",
            full[T as usize - 1] / T as f64,
            full[999] / 1e3
        ),
    );
}

fn criterion_3(report: &mut Report, suite: &mut Suite) {
    const T: u64 = 50_000;
    const SEEDS: u64 = 20;
    let start = Instant::now();
    let ce = build_counterexample(0.05, 1.0, 0.5).unwrap();
    let delta = ce.delta;
    let env = Arc::new(ce.environment());
    let arrivals = ce.arrivals.kind().clone();

    let ssee: Vec<AlgoParams> = ce
        .explore_divisors
        .iter()
        .map(|&k| AlgoParams::ssee(ce.z, 1, 2, k))
        .collect();
    let mut linear_seeds = 0;
    let mut own_share_sum = 0.0;
    let mut exploit_regret_sum = 0.0;
    for seed in 0..SEEDS {
        let run = Run {
            env: env.clone(),
            arrivals: arrivals.clone(),
            params: ssee.clone(),
            seed,
            horizon: T,
        };
        let (mut exploit, mut own, mut regret) = (0u64, 0u64, 0.0);
        suite.execute("counterexample SSEE", &run, |log| {
            let r = &log.records[0];
            if r.phase == Phase::Exploit {
                exploit += 1;
                regret += r.regret();
                if r.choice == Some(Choice::Arm(0)) {
                    own += 1;
                }
            }
        });
        let share = if exploit > 0 { own as f64 / exploit as f64 } else { 0.0 };
        let per_slot = if exploit > 0 { regret / exploit as f64 } else { 0.0 };
        own_share_sum += share;
        exploit_regret_sum += per_slot;
        if exploit > 0 && share >= 0.95 && per_slot >= delta / 2.0 {
            linear_seeds += 1;
        }
    }
    let ssee_elapsed = start.elapsed();
    report.line(
        "3a",
        "SSEE linear regret on the counterexample",
        2 * linear_seeds >= SEEDS && within(ssee_elapsed, Duration::from_secs(300)),
        format!(
            "learner 0 (the one receiving arrivals): {linear_seeds}/{SEEDS} seeds with own-arm share >= 0.95 and exploitation regret >= {:.3}; \
             mean share {:.4}, mean exploitation regret {:.4}; {ssee_elapsed:.2?}",
            delta / 2.0,
            own_share_sum / SEEDS as f64,
            exploit_regret_sum / SEEDS as f64
        ),
    );

    let clup_start = Instant::now();
    let clup = vec![AlgoParams::clup(ce.z, 1, 2); 2];
    let quarter = T - T / 4;
    let mut tail_sum = 0.0;
    let mut train_share = 0.0;
    for seed in 0..SEEDS {
        let run = Run {
            env: env.clone(),
            arrivals: arrivals.clone(),
            params: clup.clone(),
            seed,
            horizon: T,
        };
        let mut tail = 0.0;
        let out = suite.execute("counterexample CLUP", &run, |log| {
            if log.t > quarter {
                tail += log.records[0].regret();
            }
        });
        tail_sum += tail / (T - quarter) as f64;
        train_share += out.phases.stats()[0].train_frac().unwrap_or(0.0);
    }
    let elapsed = start.elapsed();
    let tail_mean = tail_sum / SEEDS as f64;
    report.line(
        "3b",
        "CLUP on the counterexample",
        tail_mean < delta / 10.0 && within(elapsed, Duration::from_secs(300)),
        format!(
            "seed-mean per-slot regret over the last quarter = {tail_mean:.5} (< {:.3}); mean train share {:.4}; \
             {:.2?}, both parts {elapsed:.2?} (limit 5 min)",
            delta / 10.0,
            train_share / SEEDS as f64,
            clup_start.elapsed()
        ),
    );
}

fn single_learner_env() -> Arc<Environment> {
    let topo = Topology::free(vec![2], 2).unwrap();
    let fields = vec![vec![ramp(0.3, 0.4), bump(0.5, 0.2, 0.7, 0.5)]];
    Arc::new(Environment::with_fields(1, topo, fields, 1.0, 1.0).unwrap())
}

/// Split slots of a DCZA learner whose every arrival hits the same cell chain.
fn single_context_splits(rho: f64, horizon: u64) -> Vec<u64> {
    let mut splits = Vec::new();
    let (mut level, mut count) = (0i32, 0u64);
    for t in 1..=horizon {
        count += 1;
        if count as f64 >= (rho * level as f64).exp2() {
            splits.push(t);
            level += 1;
            count = 0;
        }
    }
    splits
}

fn criterion_5(report: &mut Report, suite: &mut Suite) {
    const T: u64 = 100_000;
    let run = Run {
        env: single_learner_env(),
        arrivals: ArrivalKind::Identical {
            source: Source::Fixed(Context::new([0.3]).unwrap()),
        },
        params: vec![AlgoParams::dcza(3.0, 1.0, 2)],
        seed: 5,
        horizon: T,
    };
    let out = suite.execute("single context", &run, |_| {});
    let expected = single_context_splits(3.0, T);
    let got: Vec<u64> = out.notices.iter().map(|n| n.slot).collect();
    let cells: u64 = activated_level_counts(&out.notices, 1, 1)[0].values().sum();
    let active = out.engine.learners()[0].adaptive_partition().unwrap().active_len();
    let bound = 1.0 + (T as f64).log2() / 3.0;
    report.line(
        "5",
        "zooming memory, single context",
        got == expected && got.len() as f64 <= bound && cells == 1 + 2 * got.len() as u64 && cells <= 13,
        format!(
            "{} splits at {got:?} (independent count {}, bound {bound:.2}); {cells} activated cells (<= 13), {active} active",
            got.len(),
            expected.len()
        ),
    );
}

/// Round-robin over the lowest-level cells, each splitting after `2^{ρl}` arrivals.
fn worst_case_cells(rho: f64, horizon: u64) -> u64 {
    let mut level = 0u32;
    let mut cells = 1u64;
    let mut t = 0u64;
    loop {
        let per_cell = (rho * level as f64).exp2().ceil() as u64;
        let width = 1u64 << level;
        if t + per_cell * width > horizon {
            return cells;
        }
        t += per_cell * width;
        level += 1;
        cells += 1 << level;
    }
}

fn criterion_6(report: &mut Report, suite: &mut Suite) {
    const T: u64 = 10_000;
    let run = Run {
        env: single_learner_env(),
        arrivals: ArrivalKind::WorstCaseDcza { target: None },
        params: vec![AlgoParams::dcza(3.0, 1.0, 2)],
        seed: 6,
        horizon: T,
    };
    let out = suite.execute("worst-case arrivals", &run, |_| {});
    let counts = &activated_level_counts(&out.notices, 1, 1)[0];
    let cells: u64 = counts.values().sum();
    let l_max = *counts.keys().max().unwrap() as u32;
    let bound: u64 = (0..=l_max).map(|l| 1u64 << l).sum();
    let expected = worst_case_cells(3.0, T);
    let level_cap = 1.0 + (T as f64).log2() / 4.0;
    report.line(
        "6",
        "worst-case activation bound",
        cells == expected && cells <= bound && (l_max as f64) < level_cap,
        format!(
            "{cells} activated cells (independent count {expected}), l_max = {l_max} < {level_cap:.2}, bound {bound}"
        ),
    );
}

fn criterion_8(report: &mut Report, suite: &mut Suite) {
    const T: u64 = 10_000;
    let topo = Topology::free(vec![2, 2], 2).unwrap();
    let fields = vec![
        vec![ramp(0.2, 0.5), bump(0.6, 0.3, 0.8, 0.5)],
        vec![ramp(0.7, -0.4), bump(0.3, 0.1, 0.6, 0.5)],
    ];
    let env = Arc::new(Environment::with_fields(1, topo, fields, 1.0, 1.0).unwrap());
    let params = theorem1_params(1.0, 1, T, 2);
    let mut trains = Vec::new();
    for seed in 0..5 {
        let run = Run {
            env: env.clone(),
            arrivals: ArrivalKind::Identical {
                source: Source::Uniform(Region::unit(1)),
            },
            params: vec![params.clone(); 2],
            seed,
            horizon: T,
        };
        let out = suite.execute("identical arrivals", &run, |_| {});
        trains.extend(out.phases.stats().iter().map(|s| s.count(Phase::Train)));
    }
    report.line(
        "8",
        "identical-arrival training suppression",
        trains.iter().all(|&n| n == 0),
        format!("Train slots per learner over 5 seeds: {trains:?}"),
    );
}

fn dcza_suite(suite: &mut Suite) {
    let env = common::crossing_env(0.05);
    for rho in [2.0, 3.0] {
        for (seed, horizon) in [(0, 100_000), (1, 20_000), (2, 20_000)] {
            let mut p = AlgoParams::dcza(rho, 1.0, 2);
            p.warm_start = seed == 2;
            let run = Run {
                env: env.clone(),
                arrivals: common::iid(1),
                params: vec![p; 2],
                seed,
                horizon,
            };
            suite.execute("DCZA iid", &run, |_| {});
        }
    }
    let run = Run {
        env,
        arrivals: ArrivalKind::WorstCaseDcza { target: Some(1) },
        params: vec![AlgoParams::dcza(2.0, 1.0, 2); 2],
        seed: 3,
        horizon: 20_000,
    };
    suite.execute("DCZA worst-case", &run, |_| {});
}

fn other_algorithms_suite(suite: &mut Suite) {
    let env = common::crossing_env(0.05);
    let mut doubling = theorem1_params(1.0, 1, 2, 2);
    doubling.doubling = true;
    for (name, p) in [
        ("SSEE iid", AlgoParams::ssee(0.3, 4, 2, 2.0)),
        ("CLUP doubling", doubling),
        ("CLUP small z", AlgoParams::clup(0.2, 6, 2)),
    ] {
        let run = Run {
            env: env.clone(),
            arrivals: common::iid(1),
            params: vec![p; 2],
            seed: 9,
            horizon: 30_000,
        };
        suite.execute(name, &run, |_| {});
    }
}

fn criterion_9(report: &mut Report, suite: &mut Suite) {
    let ce = build_counterexample(0.05, 1.0, 0.5).unwrap();
    let runs = [
        (
            "CLUP iid",
            Run {
                env: regret_env(),
                arrivals: common::iid(1),
                params: vec![theorem1_params(1.0, 1, 20_000, 2); 2],
                seed: 42,
                horizon: 20_000,
            },
        ),
        (
            "DCZA worst-case",
            Run {
                env: common::crossing_env(0.05),
                arrivals: ArrivalKind::WorstCaseDcza { target: None },
                params: vec![AlgoParams::dcza(3.0, 1.0, 2); 2],
                seed: 42,
                horizon: 20_000,
            },
        ),
        (
            "SSEE counterexample",
            Run {
                env: Arc::new(ce.environment()),
                arrivals: ce.arrivals.kind().clone(),
                params: ce
                    .explore_divisors
                    .iter()
                    .map(|&k| AlgoParams::ssee(0.5, 1, 2, k))
                    .collect(),
                seed: 42,
                horizon: 20_000,
            },
        ),
    ];
    let mut identical = 0;
    let mut sizes = Vec::new();
    for (name, run) in &runs {
        let a = suite.log_bytes(name, run);
        let b = suite.log_bytes(name, run);
        let other = suite.log_bytes(
            name,
            &Run {
                seed: run.seed + 1,
                params: run.params.clone(),
                arrivals: run.arrivals.clone(),
                env: run.env.clone(),
                horizon: run.horizon,
            },
        );
        if a == b {
            identical += 1;
        }
        sizes.push(format!("{name}: {} bytes, other seed differs: {}", a.len(), a != other));
    }
    report.line(
        "9",
        "determinism",
        identical == runs.len(),
        format!(
            "{identical}/{} configs byte-identical on rerun ({})",
            runs.len(),
            sizes.join("; ")
        ),
    );
}

fn main() {
    let total = Instant::now();
    let mut report = Report { failures: 0 };
    let mut suite = Suite::default();

    criterion_1(&mut report);
    criterion_2(&mut report, &mut suite);
    criterion_3(&mut report, &mut suite);
    criterion_5(&mut report, &mut suite);
    criterion_6(&mut report, &mut suite);
    criterion_8(&mut report, &mut suite);
    criterion_9(&mut report, &mut suite);
    dcza_suite(&mut suite);
    other_algorithms_suite(&mut suite);

    let mut rhos = suite.dcza_rhos.clone();
    rhos.sort_by(f64::total_cmp);
    report.line(
        "4",
        "DCZA level bound",
        suite.level_violations == 0 && rhos == [2.0, 3.0],
        format!(
            "{} violations over {} DCZA runs (rho in {rhos:?}, T <= 1e5)",
            suite.level_violations, suite.dcza_runs
        ),
    );
    report.line(
        "7",
        "phase-budget bounds",
        suite.budget_violations.is_empty(),
        format!(
            "{} violations over {} runs{}",
            suite.budget_violations.len(),
            suite.runs,
            suite
                .budget_violations
                .first()
                .map(|v| format!(", first: {v}"))
                .unwrap_or_default()
        ),
    );
    report.line(
        "10",
        "counter-replay consistency",
        suite.replay_failures.is_empty(),
        format!(
            "{} failures over {} runs{}",
            suite.replay_failures.len(),
            suite.runs,
            suite
                .replay_failures
                .first()
                .map(|v| format!(", first: {v}"))
                .unwrap_or_default()
        ),
    );

    println!(
        "acceptance: {} failing criteria, {} runs, {:.2?}",
        report.failures,
        suite.runs,
        total.elapsed()
    );
    if report.failures > 0 {
        std::process::exit(1);
    }
}
