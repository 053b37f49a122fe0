#![allow(dead_code)]

use coopbandit::coord::{Engine, SlotLog};
use coopbandit::env::{ArrivalKind, ArrivalProcess, Environment, FieldKind, Noise, Region, RewardField, Topology};
use coopbandit::learner::AlgoParams;
use std::sync::Arc;

pub fn ramp(intercept: f64, slope: f64) -> RewardField {
    RewardField::new(
        1,
        FieldKind::LinearRamp {
            intercept,
            slopes: vec![slope],
        },
        Noise::Bernoulli,
    )
    .unwrap()
}

pub fn bump(center: f64, base: f64, peak: f64, radius: f64) -> RewardField {
    RewardField::new(
        1,
        FieldKind::Bump {
            center: vec![center],
            base,
            peak,
            radius,
        },
        Noise::Bernoulli,
    )
    .unwrap()
}

/// Two learners with two arms each on [0,1]; the optimal choice of both
/// learners changes with the context.
pub fn crossing_env(call_cost: f64) -> Arc<Environment> {
    let topo = Topology::new(
        vec![2, 2],
        2,
        vec![vec![0.0; 2]; 2],
        vec![vec![0.0, call_cost], vec![call_cost, 0.0]],
    )
    .unwrap();
    let fields = vec![
        vec![ramp(0.2, 0.6), bump(0.2, 0.3, 0.7, 0.3)],
        vec![ramp(0.9, -0.7), bump(0.8, 0.2, 0.6, 0.3)],
    ];
    Arc::new(Environment::with_fields(1, topo, fields, 1.0, 1.0).unwrap())
}

pub fn iid(dim: usize) -> ArrivalKind {
    ArrivalKind::IidUniform {
        region: Region::unit(dim),
    }
}

pub fn engine(env: Arc<Environment>, kind: ArrivalKind, params: AlgoParams, seed: u64) -> Engine {
    let m = env.topology().learners();
    let dim = env.dim();
    let arrivals = ArrivalProcess::new(kind, m, dim).unwrap();
    Engine::new(env, arrivals, vec![params; m], seed).unwrap()
}

pub fn run(
    env: Arc<Environment>,
    kind: ArrivalKind,
    params: AlgoParams,
    seed: u64,
    horizon: u64,
) -> (Engine, Vec<SlotLog>) {
    let mut e = engine(env, kind, params, seed);
    let (logs, _) = e.run_horizon(horizon).unwrap();
    (e, logs)
}
