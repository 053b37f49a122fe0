use super::{BenchError, OracleTable};
use crate::coord::SlotLog;

/// Cumulative regret per learner; `learner(i)[t - 1]` is `R_i(t)`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct RegretSeries {
    series: Vec<Vec<f64>>,
}

impl RegretSeries {
    pub fn new(learners: usize) -> Self {
        Self {
            series: vec![Vec::new(); learners],
        }
    }

    pub fn learners(&self) -> usize {
        self.series.len()
    }

    pub fn len(&self) -> usize {
        self.series.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn learner(&self, i: usize) -> &[f64] {
        &self.series[i]
    }

    /// `Σ_i R_i(t)`.
    pub fn total(&self) -> Vec<f64> {
        (0..self.len())
            .map(|t| self.series.iter().map(|s| s[t]).sum())
            .collect()
    }

    fn append(&mut self, increments: impl Iterator<Item = f64>) {
        for (s, inc) in self.series.iter_mut().zip(increments) {
            let prev = s.last().copied().unwrap_or(0.0);
            s.push(prev + inc);
        }
    }

    /// Adds one slot using the oracle values recorded in the log.
    pub fn push(&mut self, log: &SlotLog) {
        self.append(log.records.iter().map(|r| r.regret()));
    }

    /// Adds one slot, re-deriving the oracle value from `table`.
    pub fn push_with(&mut self, log: &SlotLog, table: &OracleTable) {
        let inc = log.records.iter().map(|r| match (&r.context, r.reward) {
            (Some(x), Some(reward)) => {
                let (_, best) = table
                    .oracle_choice(r.learner, x, log.t)
                    .expect("logged contexts match the environment");
                best - (reward - r.cost)
            }
            _ => 0.0,
        });
        self.append(inc);
    }
}

/// Regret of every learner against `table`; idle slots add nothing.
pub fn cumulative_regret(logs: &[SlotLog], table: &OracleTable) -> RegretSeries {
    let m = logs.first().map_or(0, |l| l.records.len());
    let mut s = RegretSeries::new(m);
    for log in logs {
        s.push_with(log, table);
    }
    s
}

/// Regret from the oracle values stored in the logs.
pub fn logged_regret(logs: &[SlotLog]) -> RegretSeries {
    let m = logs.first().map_or(0, |l| l.records.len());
    let mut s = RegretSeries::new(m);
    for log in logs {
        s.push(log);
    }
    s
}

/// Least-squares slope of `ln R(t)` against `ln t` over every integer `t` in
/// `[lo, hi]`; `series[t - 1]` is `R(t)`.
pub fn loglog_slope(series: &[f64], window: (u64, u64)) -> Result<f64, BenchError> {
    let (lo, hi) = window;
    if lo < 1 || hi <= lo || hi as usize > series.len() {
        return Err(BenchError::Window(format!(
            "window [{lo}, {hi}] needs 1 <= lo < hi <= {}",
            series.len()
        )));
    }
    let n = (hi - lo + 1) as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for t in lo..=hi {
        let r = series[t as usize - 1];
        if !(r > 0.0) {
            return Err(BenchError::NonPositive { t, value: r });
        }
        let (x, y) = ((t as f64).ln(), r.ln());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    Ok((n * sxy - sx * sy) / (n * sxx - sx * sx))
}
