use super::{ArrivalKind, ArrivalProcess, Context, EnvError, Environment, RewardField, Source, Topology};

/// The two-learner instance on which algorithms without a training phase
/// incur linear regret.
///
/// Learner 0 owns a single arm `m`; learner 1 owns arms `b` (index 0) and
/// `g` (index 1). Every arrival is the fixed context `x* = 0.5` at learner 0.
#[derive(Clone, Debug)]
pub struct Counterexample {
    pub delta: f64,
    pub k: f64,
    pub z: f64,
    pub c_k: f64,
    pub pi_b: f64,
    pub pi_m: f64,
    pub pi_g: f64,
    pub topology: Topology,
    /// `fields[i][f]`.
    pub fields: Vec<Vec<RewardField>>,
    pub arrivals: ArrivalProcess,
    /// Divisor applied to each learner's exploration control `t^z ln t`.
    pub explore_divisors: Vec<f64>,
}

pub const GAP_INEQUALITY: &str = "π_b + C_K·δ < π_m";
const GOOD_GAP_INEQUALITY: &str = "π_m < π_g − δ";
const GOOD_CAP_INEQUALITY: &str = "π_g − δ < π_m + δ";

impl Counterexample {
    pub fn environment(&self) -> Environment {
        Environment::with_fields(1, self.topology.clone(), self.fields.clone(), 1.0, 1.0)
            .expect("counterexample fields are valid")
    }

    /// Re-checks the defining inequalities and `C_K > 3K + 3`.
    pub fn check(&self) -> Result<(), EnvError> {
        let d = self.delta;
        if !(self.pi_b + self.c_k * d < self.pi_m) {
            return Err(EnvError::Infeasible(GAP_INEQUALITY.into()));
        }
        if !(self.pi_m < self.pi_g - d) {
            return Err(EnvError::Infeasible(GOOD_GAP_INEQUALITY.into()));
        }
        if !(self.pi_g - d < self.pi_m + d) {
            return Err(EnvError::Infeasible(GOOD_CAP_INEQUALITY.into()));
        }
        if !(self.c_k > 3.0 * self.k + 3.0) {
            return Err(EnvError::Infeasible("C_K > 3K + 3".into()));
        }
        for p in [self.pi_b, self.pi_m, self.pi_g] {
            if !(0.0..=1.0).contains(&p) {
                return Err(EnvError::Infeasible("expected rewards in [0, 1]".into()));
            }
        }
        Ok(())
    }
}

/// Builds the instance for gap `delta`, divisor `k` and exploration exponent `z`.
///
/// `π_m = 0.5` clamped into the feasible range, `π_g = π_m + 1.5δ`,
/// `π_b = π_m − (C_K + 1)δ` with `C_K = ⌊3K + 3⌋ + 1`.
pub fn build_counterexample(delta: f64, k: f64, z: f64) -> Result<Counterexample, EnvError> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(EnvError::Infeasible("δ > 0".into()));
    }
    if !(k >= 1.0 && k.is_finite()) {
        return Err(EnvError::Infeasible("K ≥ 1".into()));
    }
    if !(z > 0.0 && z < 1.0) {
        return Err(EnvError::Infeasible("0 < z < 1".into()));
    }
    let c_k = (3.0 * k + 3.0).floor() + 1.0;
    let lo = (c_k + 1.0) * delta + 0.01;
    let hi = 1.0 - 1.5 * delta;
    if lo > hi {
        return Err(EnvError::Infeasible(GAP_INEQUALITY.into()));
    }
    let pi_m = 0.5f64.clamp(lo, hi);
    let pi_g = pi_m + 1.5 * delta;
    let pi_b = pi_m - (c_k + 1.0) * delta;

    let topology = Topology::free(vec![1, 2], 2)?;
    let fields = vec![
        vec![RewardField::constant(1, pi_m)?],
        vec![RewardField::constant(1, pi_b)?, RewardField::constant(1, pi_g)?],
    ];
    let x_star = Context::new([0.5])?;
    let arrivals = ArrivalProcess::new(
        ArrivalKind::Solo {
            target: 0,
            source: Source::Fixed(x_star),
        },
        2,
        1,
    )?;
    let ce = Counterexample {
        delta,
        k,
        z,
        c_k,
        pi_b,
        pi_m,
        pi_g,
        topology,
        fields,
        arrivals,
        explore_divisors: vec![1.0, k],
    };
    ce.check()?;
    Ok(ce)
}
