use crate::env::{Choice, Context, EnvError, Environment, RewardModel};
use std::sync::Arc;

/// Complete-knowledge benchmark: `μ^i_k(x) = π_k(x) − d^i_k`, where a learner
/// choice is worth that learner's best arm.
///
/// For trace environments the expected rewards are unknown, so the benchmark
/// is the best realized net reward of the slot.
#[derive(Clone, Debug)]
pub struct OracleTable {
    env: Arc<Environment>,
}

impl OracleTable {
    pub fn new(env: Arc<Environment>) -> Self {
        Self { env }
    }

    pub fn env(&self) -> &Environment {
        &self.env
    }

    fn arm_value(&self, learner: usize, arm: usize, x: &[f64], t: u64) -> f64 {
        match self.env.rewards() {
            RewardModel::Fields(f) => f[learner][arm].eval(x),
            RewardModel::Trace(tr) => tr.reward(t, learner, arm).unwrap_or(0.0),
        }
    }

    /// `π_j(x)`: the best expected reward among learner `j`'s arms.
    pub fn learner_value(&self, j: usize, x: &[f64], t: u64) -> f64 {
        (0..self.env.topology().arms(j))
            .map(|f| self.arm_value(j, f, x, t))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `μ^i_k(x)`.
    pub fn net_value(&self, i: usize, k: Choice, x: &[f64], t: u64) -> f64 {
        let pi = match k {
            Choice::Arm(f) => self.arm_value(i, f, x, t),
            Choice::Learner(j) => self.learner_value(j, x, t),
        };
        pi - self.env.topology().cost(i, k)
    }

    /// `k*_i(x)` and its net value; lowest position in `K_i` wins ties.
    /// `t` only matters for trace environments.
    pub fn oracle_choice(&self, i: usize, x: &Context, t: u64) -> Result<(Choice, f64), EnvError> {
        x.check_dim(self.env.dim())?;
        let mut best: Option<(Choice, f64)> = None;
        for k in self.env.topology().choices(i) {
            let v = self.net_value(i, k, x.coords(), t);
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((k, v));
            }
        }
        Ok(best.expect("every learner has at least one arm"))
    }
}
