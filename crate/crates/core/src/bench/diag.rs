use super::OracleTable;
use crate::coord::{Message, SlotLog};
use crate::env::Choice;
use crate::learner::ActivationNotice;
use crate::partition::{max_level_bound, Cell, Hypercube};
use std::collections::BTreeMap;

/// Grid points per axis used to approximate a cell's sup and inf.
pub const GRID_PER_AXIS: u32 = 1 << 10;

/// A closed axis-aligned cube `[lo, lo + edge]^D`.
#[derive(Clone, Debug, PartialEq)]
pub struct CellBox {
    pub lo: Vec<f64>,
    pub edge: f64,
}

impl CellBox {
    /// Box of a cell; uniform cells need the partition's `m_T`.
    pub fn of(cell: &Cell, m_t: u32) -> Self {
        match cell {
            Cell::Uniform(idx) => {
                let edge = 1.0 / m_t as f64;
                Self {
                    lo: idx.iter().map(|&k| k as f64 * edge).collect(),
                    edge,
                }
            }
            Cell::Cube(h) => Self::of_cube(h),
        }
    }

    pub fn of_cube(h: &Hypercube) -> Self {
        Self {
            lo: h.lower().to_vec(),
            edge: h.edge(),
        }
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().map(|l| l + self.edge / 2.0).collect()
    }

    fn for_each_grid_point(&self, mut f: impl FnMut(&[f64])) {
        let dim = self.lo.len();
        let n = GRID_PER_AXIS as u64 + 1;
        let total = n.pow(dim as u32);
        let mut x = vec![0.0; dim];
        for k in 0..total {
            let mut rest = k;
            for d in (0..dim).rev() {
                let idx = rest % n;
                rest /= n;
                x[d] = self.lo[d] + self.edge * idx as f64 / GRID_PER_AXIS as f64;
            }
            f(&x);
        }
    }
}

/// Suboptimal choices of one learner and suboptimal arms of every learner for one cell.
#[derive(Clone, Debug, PartialEq)]
pub struct SuboptimalSets {
    pub threshold: f64,
    pub choices: Vec<Choice>,
    /// `arms[j]`: learner `j`'s suboptimal arms.
    pub arms: Vec<Vec<usize>>,
}

/// `A t^θ` with `θ = −z/2` and `A = 2 L D^{α/2} + 4`.
pub fn clup_threshold(l: f64, alpha: f64, dim: usize, z: f64, t: u64) -> f64 {
    let a = 2.0 * l * (dim as f64).powf(alpha / 2.0) + 4.0;
    a * (t as f64).powf(-z / 2.0)
}

/// `A* L D^{α/2} 2^{−lα}` with `A* = 2 + 4/(L D^{α/2})`.
pub fn dcza_threshold(l: f64, alpha: f64, dim: usize, level: u8) -> f64 {
    let ld = l * (dim as f64).powf(alpha / 2.0);
    let a_star = 2.0 + 4.0 / ld;
    a_star * ld * (-(level as f64) * alpha).exp2()
}

fn argmax_lowest(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (k, v) in values.enumerate() {
        if v > best.1 {
            best = (k, v);
        }
    }
    best.0
}

/// Suboptimality sets of learner `i` for `cell` at gap `threshold`. Cell
/// extremes come from a `GRID_PER_AXIS`-per-axis grid; the optimal choice is
/// taken at the cell centre.
pub fn suboptimal_sets(table: &OracleTable, i: usize, cell: &CellBox, threshold: f64) -> SuboptimalSets {
    let topo = table.env().topology();
    let choices = topo.choices(i);
    let m = topo.learners();

    let mut arm_lo: Vec<Vec<f64>> = (0..m).map(|j| vec![f64::INFINITY; topo.arms(j)]).collect();
    let mut arm_hi: Vec<Vec<f64>> = (0..m).map(|j| vec![f64::NEG_INFINITY; topo.arms(j)]).collect();
    let mut mu_lo = vec![f64::INFINITY; choices.len()];
    let mut mu_hi = vec![f64::NEG_INFINITY; choices.len()];
    cell.for_each_grid_point(|x| {
        for j in 0..m {
            for f in 0..topo.arms(j) {
                let v = table.net_value(j, Choice::Arm(f), x, 0) + topo.cost(j, Choice::Arm(f));
                arm_lo[j][f] = arm_lo[j][f].min(v);
                arm_hi[j][f] = arm_hi[j][f].max(v);
            }
        }
        for (k, &c) in choices.iter().enumerate() {
            let v = table.net_value(i, c, x, 0);
            mu_lo[k] = mu_lo[k].min(v);
            mu_hi[k] = mu_hi[k].max(v);
        }
    });

    let centre = cell.center();
    let k_star = argmax_lowest(choices.iter().map(|&c| table.net_value(i, c, &centre, 0)));
    let subopt_choices = choices
        .iter()
        .enumerate()
        .filter(|&(k, _)| mu_lo[k_star] - mu_hi[k] > threshold)
        .map(|(_, &c)| c)
        .collect();
    let arms = (0..m)
        .map(|j| {
            let f_star = argmax_lowest(
                (0..topo.arms(j))
                    .map(|f| table.net_value(j, Choice::Arm(f), &centre, 0) + topo.cost(j, Choice::Arm(f))),
            );
            (0..topo.arms(j))
                .filter(|&f| arm_lo[j][f_star] - arm_hi[j][f] > threshold)
                .collect()
        })
        .collect();
    SuboptimalSets {
        threshold,
        choices: subopt_choices,
        arms,
    }
}

pub fn activation_notices<'a>(logs: impl IntoIterator<Item = &'a SlotLog>) -> Vec<ActivationNotice> {
    logs.into_iter()
        .flat_map(|l| l.transcript.iter())
        .filter_map(|m| match m {
            Message::Activate(n) => Some(n.clone()),
            _ => None,
        })
        .collect()
}

/// `K_{i,l}`: cells of each level activated by each learner, counting the root.
pub fn activated_level_counts<'a>(
    notices: impl IntoIterator<Item = &'a ActivationNotice>,
    learners: usize,
    dim: usize,
) -> Vec<BTreeMap<u8, u64>> {
    let mut out: Vec<BTreeMap<u8, u64>> = (0..learners).map(|_| BTreeMap::from([(0, 1)])).collect();
    for n in notices {
        *out[n.origin].entry(n.parent.level() + 1).or_default() += 1u64 << dim;
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelViolation {
    pub notice: ActivationNotice,
    pub level: u8,
    pub bound: f64,
}

/// Cells whose level exceeds `log2(t)/ρ + 1` at their activation slot `t`.
pub fn level_bound_violations<'a>(
    notices: impl IntoIterator<Item = &'a ActivationNotice>,
    rho: f64,
) -> Vec<LevelViolation> {
    notices
        .into_iter()
        .filter_map(|n| {
            let level = n.parent.level() + 1;
            let bound = max_level_bound(n.slot, rho);
            (level as f64 > bound + 1e-12).then(|| LevelViolation {
                notice: n.clone(),
                level,
                bound,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Environment, RewardField, Topology};
    use std::sync::Arc;

    fn constant_table(pis: Vec<Vec<f64>>) -> OracleTable {
        let arms = pis.iter().map(Vec::len).collect::<Vec<_>>();
        let f_max = *arms.iter().max().unwrap();
        let fields = pis
            .into_iter()
            .map(|r| r.into_iter().map(|p| RewardField::constant(1, p).unwrap()).collect())
            .collect();
        let env = Environment::with_fields(1, Topology::free(arms, f_max).unwrap(), fields, 1.0, 1.0).unwrap();
        OracleTable::new(Arc::new(env))
    }

    #[test]
    fn constant_gap_above_threshold() {
        let t = constant_table(vec![vec![0.8, 0.5]]);
        let cell = CellBox::of_cube(&Hypercube::root(1));
        let s = suboptimal_sets(&t, 0, &cell, 0.1);
        assert_eq!(s.choices, vec![Choice::Arm(1)]);
        assert_eq!(s.arms, vec![vec![1]]);
    }

    #[test]
    fn small_gap_empty() {
        let t = constant_table(vec![vec![0.55, 0.5]]);
        let cell = CellBox::of_cube(&Hypercube::root(1));
        assert!(suboptimal_sets(&t, 0, &cell, 0.1).choices.is_empty());
    }

    #[test]
    fn dcza_threshold_value() {
        let thr = dcza_threshold(1.0, 1.0, 1, 2);
        assert!((thr - 1.5).abs() < 1e-12);
        let t = constant_table(vec![vec![1.0, 0.0]]);
        let s = suboptimal_sets(&t, 0, &CellBox::of_cube(&"2:1".parse().unwrap()), thr);
        assert!(s.choices.is_empty());
    }

    #[test]
    fn level_counts() {
        let root = Hypercube::root(1);
        assert_eq!(activated_level_counts([], 1, 1)[0], BTreeMap::from([(0, 1)]));
        let n = ActivationNotice {
            origin: 0,
            parent: root,
            slot: 1,
        };
        assert_eq!(activated_level_counts([&n], 1, 1)[0], BTreeMap::from([(0, 1), (1, 2)]));
    }

    #[test]
    fn level_bound_check() {
        let n = ActivationNotice {
            origin: 0,
            parent: "1:0".parse().unwrap(),
            slot: 3,
        };
        // level 2 at slot 3 with rho = 3 exceeds log2(3)/3 + 1
        assert_eq!(level_bound_violations([&n], 3.0).len(), 1);
        let ok = ActivationNotice { slot: 8, ..n };
        assert!(level_bound_violations([&ok], 3.0).is_empty());
    }
}
