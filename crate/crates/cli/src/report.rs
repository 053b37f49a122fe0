//! Per-seed accumulation and the aggregate report files.

use crate::config::ExperimentConfig;
use anyhow::{Context as _, Result};
use coopbandit::bench::{
    activated_level_counts, level_bound_violations, loglog_slope, PhaseBudget, PhaseCounter, PhaseStats,
};
use coopbandit::coord::{Message, SlotLog};
use coopbandit::learner::{ActivationNotice, AlgoParams, Algorithm, Phase};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

pub const REGRET_FILE: &str = "regret.csv";
pub const PHASES_FILE: &str = "phases.csv";
pub const LEVELS_FILE: &str = "levels.csv";
pub const SUMMARY_FILE: &str = "summary.json";

/// Everything the report needs from one seed of one variant.
#[derive(Clone, Debug, PartialEq)]
pub struct SeedResult {
    pub seed: u64,
    pub slots: u64,
    /// `regret[t - 1]`: cumulative regret summed over learners.
    pub regret: Vec<f64>,
    pub stats: Vec<PhaseStats>,
    pub budget_violations: usize,
    pub notices: Vec<ActivationNotice>,
}

/// Streams slot logs into a [`SeedResult`].
#[derive(Clone, Debug)]
pub struct Accumulator {
    params: Vec<AlgoParams>,
    regret: Vec<f64>,
    phases: PhaseCounter,
    budget: PhaseBudget,
    notices: Vec<ActivationNotice>,
}

impl Accumulator {
    pub fn new(params: Vec<AlgoParams>) -> Self {
        Self {
            phases: PhaseCounter::new(params.len()),
            params,
            regret: Vec::new(),
            budget: PhaseBudget::new(),
            notices: Vec::new(),
        }
    }

    pub fn push(&mut self, log: &SlotLog) {
        let inc: f64 = log.records.iter().map(|r| r.regret()).sum();
        let prev = self.regret.last().copied().unwrap_or(0.0);
        self.regret.push(prev + inc);
        self.phases.push(log);
        self.budget.push(log, &self.params);
        self.notices.extend(log.transcript.iter().filter_map(|m| match m {
            Message::Activate(n) => Some(n.clone()),
            _ => None,
        }));
    }

    /// Activation notices that did not come through a transcript.
    pub fn add_notices(&mut self, notices: impl IntoIterator<Item = ActivationNotice>) {
        self.notices.extend(notices);
    }

    pub fn finish(self, seed: u64, dim: usize) -> SeedResult {
        let slots = self.regret.len() as u64;
        SeedResult {
            seed,
            slots,
            budget_violations: self.budget.violations(&self.params, dim, slots.max(1)).len(),
            regret: self.regret,
            stats: self.phases.into_stats(),
            notices: self.notices,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Sample standard deviation; zero for a single value.
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, std }
    }
}

#[derive(Debug, Serialize)]
struct Summary<'a> {
    version: &'static str,
    horizon: u64,
    seeds: &'a [u64],
    learners: usize,
    variants: Vec<VariantSummary>,
}

#[derive(Debug, Serialize)]
struct VariantSummary {
    name: String,
    algorithms: Vec<String>,
    slots: u64,
    truncated: bool,
    final_regret: MeanStd,
    regret_per_slot: f64,
    loglog_slope: Option<f64>,
    slope_window: Option<[u64; 2]>,
    phase_shares: BTreeMap<&'static str, f64>,
    loss: Option<f64>,
    error_rate: Option<f64>,
    budget_violations: usize,
    level_violations: usize,
    activated_cells: Option<MeanStd>,
}

/// Slots at which regret curves are sampled: `points` log-spaced values in
/// `[1, t_max]`, always including both ends. `points = 0` keeps every slot.
pub fn curve_slots(t_max: u64, points: usize) -> Vec<u64> {
    if t_max == 0 {
        return Vec::new();
    }
    if points == 0 || points as u64 >= t_max {
        return (1..=t_max).collect();
    }
    let ln = (t_max as f64).ln();
    let mut out: Vec<u64> = (0..points)
        .map(|k| {
            let frac = if points == 1 {
                1.0
            } else {
                k as f64 / (points - 1) as f64
            };
            ((ln * frac).exp().round() as u64).clamp(1, t_max)
        })
        .collect();
    out.push(t_max);
    out.sort_unstable();
    out.dedup();
    out
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file))
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

fn uses_dcza(params: &[AlgoParams]) -> bool {
    params.iter().any(|p| p.algo == Algorithm::Dcza)
}

fn level_violations(params: &[AlgoParams], notices: &[ActivationNotice]) -> usize {
    notices
        .iter()
        .filter(|n| params[n.origin].algo == Algorithm::Dcza)
        .map(|n| level_bound_violations([n], params[n.origin].rho).len())
        .sum()
}

fn activated_cells(r: &SeedResult, learners: usize, dim: usize) -> f64 {
    activated_level_counts(&r.notices, learners, dim)
        .iter()
        .flat_map(|m| m.values())
        .sum::<u64>() as f64
}

/// Writes the regret, phase, level and summary files for `results[v]`, one
/// entry per variant of `cfg` in seed order.
pub fn write_reports(dir: &Path, cfg: &ExperimentConfig, results: &[Vec<SeedResult>]) -> Result<()> {
    let m = cfg.learners();

    let mut w = csv_writer(&dir.join(REGRET_FILE))?;
    w.write_record(["variant", "t", "mean", "std"])?;
    for (v, runs) in cfg.variants.iter().zip(results) {
        let t_max = runs.iter().map(|r| r.slots).min().unwrap_or(0);
        for t in curve_slots(t_max, cfg.report.curve_points) {
            let values: Vec<f64> = runs.iter().map(|r| r.regret[t as usize - 1]).collect();
            let s = MeanStd::of(&values);
            w.write_record([v.name.clone(), t.to_string(), s.mean.to_string(), s.std.to_string()])?;
        }
    }
    w.flush()?;

    let mut w = csv_writer(&dir.join(PHASES_FILE))?;
    let mut header = vec!["variant", "seed", "learner", "slots"];
    header.extend(Phase::ALL.iter().map(Phase::as_str));
    header.extend(["regret", "loss", "error_rate"]);
    w.write_record(&header)?;
    for (v, runs) in cfg.variants.iter().zip(results) {
        for r in runs {
            for s in &r.stats {
                let mut row = vec![
                    v.name.clone(),
                    r.seed.to_string(),
                    s.learner.to_string(),
                    s.slots.to_string(),
                ];
                row.extend(s.counts.iter().map(u64::to_string));
                row.extend([s.regret_sum.to_string(), opt(s.loss()), opt(s.error_rate())]);
                w.write_record(&row)?;
            }
        }
    }
    w.flush()?;

    let mut w = csv_writer(&dir.join(LEVELS_FILE))?;
    w.write_record(["variant", "seed", "learner", "level", "cells"])?;
    for (v, runs) in cfg.variants.iter().zip(results) {
        if !uses_dcza(&v.params) {
            continue;
        }
        for r in runs {
            for (i, levels) in activated_level_counts(&r.notices, m, cfg.dim).iter().enumerate() {
                for (level, cells) in levels {
                    w.write_record([
                        v.name.clone(),
                        r.seed.to_string(),
                        i.to_string(),
                        level.to_string(),
                        cells.to_string(),
                    ])?;
                }
            }
        }
    }
    w.flush()?;

    let variants = cfg
        .variants
        .iter()
        .zip(results)
        .map(|(v, runs)| variant_summary(cfg, &v.name, &v.params, runs))
        .collect();
    let summary = Summary {
        version: coopbandit::VERSION,
        horizon: cfg.horizon,
        seeds: &cfg.seeds,
        learners: m,
        variants,
    };
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    fs::write(dir.join(SUMMARY_FILE), text)?;
    Ok(())
}

fn variant_summary(cfg: &ExperimentConfig, name: &str, params: &[AlgoParams], runs: &[SeedResult]) -> VariantSummary {
    let m = cfg.learners();
    let slots = runs.iter().map(|r| r.slots).min().unwrap_or(0);
    let finals: Vec<f64> = runs
        .iter()
        .map(|r| if slots == 0 { 0.0 } else { r.regret[slots as usize - 1] })
        .collect();
    let final_regret = MeanStd::of(&finals);

    let mut mean_curve = vec![0.0; slots as usize];
    for r in runs {
        for (acc, v) in mean_curve.iter_mut().zip(&r.regret) {
            *acc += v;
        }
    }
    mean_curve.iter_mut().for_each(|v| *v /= runs.len() as f64);
    let window = (slots >= 10).then(|| [slots.div_ceil(10), slots]);
    let slope = window.and_then(|[lo, hi]| loglog_slope(&mean_curve, (lo, hi)).ok());

    let mut counts = [0u64; 5];
    let mut active = 0u64;
    let mut regret = 0.0;
    let mut zeros = 0u64;
    let mut binary = true;
    for s in runs.iter().flat_map(|r| &r.stats) {
        for (c, k) in counts.iter_mut().zip(s.counts) {
            *c += k;
        }
        active += s.active();
        regret += s.regret_sum;
        zeros += s.zero_rewards;
        binary &= s.binary;
    }
    let share = |n: f64| (active > 0).then(|| n / active as f64);
    let phase_shares = Phase::ALL
        .iter()
        .zip(counts)
        .filter(|(p, _)| **p != Phase::Idle)
        .map(|(p, c)| (p.as_str(), share(c as f64).unwrap_or(0.0)))
        .collect();

    let mut algorithms: Vec<String> = params.iter().map(|p| p.algo.to_string()).collect();
    algorithms.dedup();
    VariantSummary {
        name: name.to_string(),
        algorithms,
        slots,
        truncated: slots < cfg.horizon,
        final_regret,
        regret_per_slot: if slots == 0 {
            0.0
        } else {
            final_regret.mean / slots as f64
        },
        loglog_slope: slope,
        slope_window: window.filter(|_| slope.is_some()),
        phase_shares,
        loss: share(regret),
        error_rate: if binary { share(zeros as f64) } else { None },
        budget_violations: runs.iter().map(|r| r.budget_violations).sum(),
        level_violations: runs.iter().map(|r| level_violations(params, &r.notices)).sum(),
        activated_cells: uses_dcza(params)
            .then(|| MeanStd::of(&runs.iter().map(|r| activated_cells(r, m, cfg.dim)).collect::<Vec<_>>())),
    }
}
