//! Hölder checks of configured reward fields.

use crate::config::{ExperimentConfig, Rewards};
use coopbandit::env::{verify_holder, HolderReport};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug, PartialEq)]
pub struct FieldCheck {
    pub learner: usize,
    pub arm: usize,
    pub report: HolderReport,
}

/// Samples `pairs` context pairs per field against the declared `(L, α)`.
/// Trace rewards have no closed form and yield no checks.
pub fn holder_checks(cfg: &ExperimentConfig, pairs: usize, seed: u64) -> Vec<FieldCheck> {
    let Rewards::Fields { fields } = &cfg.rewards else {
        return Vec::new();
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (learner, row) in fields.iter().enumerate() {
        for (arm, field) in row.iter().enumerate() {
            out.push(FieldCheck {
                learner,
                arm,
                report: verify_holder(field, cfg.lipschitz, cfg.alpha, pairs, &mut rng),
            });
        }
    }
    out
}
