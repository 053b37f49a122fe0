//! Executing an experiment, recomputing its report from logs, and the manifest.

use crate::config::{ExperimentConfig, Prepared};
use crate::report::{write_reports, Accumulator, SeedResult, LEVELS_FILE, PHASES_FILE, REGRET_FILE, SUMMARY_FILE};
use anyhow::{bail, ensure, Context as _, Result};
use coopbandit::bench::{state_mismatches, Replay};
use coopbandit::coord::{read_activations, read_slot_logs, ActivationWriter, EngineError, SlotLogWriter};
use coopbandit::env::EnvError;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

pub const RESOLVED_FILE: &str = "resolved.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const LOG_DIR: &str = "logs";

pub fn slot_log_path(dir: &Path, variant: &str, seed: u64) -> PathBuf {
    dir.join(LOG_DIR).join(variant).join(format!("seed-{seed}.csv"))
}

pub fn activation_log_path(dir: &Path, variant: &str, seed: u64) -> PathBuf {
    dir.join(LOG_DIR)
        .join(variant)
        .join(format!("seed-{seed}.activations.csv"))
}

/// The canonical resolved-config bytes; their hash identifies the experiment.
pub fn resolved_json(cfg: &ExperimentConfig) -> Result<String> {
    let mut s = serde_json::to_string_pretty(cfg)?;
    s.push('\n');
    Ok(s)
}

/// Clears a previous run's outputs so the directory holds exactly one run.
/// Directories without a manifest are left alone unless empty.
fn prepare_dir(dir: &Path) -> Result<()> {
    if dir.exists() {
        let empty = fs::read_dir(dir)?.next().is_none();
        if !empty {
            ensure!(
                dir.join(MANIFEST_FILE).exists(),
                "{} is not empty and holds no previous run; refusing to write there",
                dir.display()
            );
            if dir.join(LOG_DIR).exists() {
                fs::remove_dir_all(dir.join(LOG_DIR))?;
            }
            for f in [
                RESOLVED_FILE,
                MANIFEST_FILE,
                REGRET_FILE,
                PHASES_FILE,
                LEVELS_FILE,
                SUMMARY_FILE,
            ] {
                let p = dir.join(f);
                if p.exists() {
                    fs::remove_file(p)?;
                }
            }
        }
    }
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

struct Logs {
    slots: SlotLogWriter<BufWriter<File>>,
    activations: ActivationWriter<BufWriter<File>>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn run_seed(cfg: &ExperimentConfig, prepared: &Prepared, variant: usize, seed: u64, dir: &Path) -> Result<SeedResult> {
    let v = &cfg.variants[variant];
    let mut engine = prepared.engine(cfg, v, seed)?;
    let mut acc = Accumulator::new(v.params.clone());
    let mut replay = if cfg.verify {
        Some(Replay::new(cfg.topology.clone(), v.params.clone(), cfg.dim)?)
    } else {
        None
    };
    let mut logs = if cfg.report.logs {
        Some(Logs {
            slots: SlotLogWriter::new(create(&slot_log_path(dir, &v.name, seed))?, cfg.dim)?,
            activations: ActivationWriter::new(create(&activation_log_path(dir, &v.name, seed))?)?,
        })
    } else {
        None
    };

    while engine.slot() < cfg.horizon {
        let log = match engine.run_slot() {
            Ok(log) => log,
            Err(EngineError::Env {
                source: EnvError::EndOfTrace(_),
                ..
            }) => break,
            Err(e) => return Err(e.into()),
        };
        if let Some(l) = &mut logs {
            l.slots.write(&log)?;
            l.activations.write(&log)?;
        }
        if let Some(r) = &mut replay {
            r.push(&log)?;
        }
        acc.push(&log);
    }
    if let Some(l) = logs {
        l.slots.finish()?;
        l.activations.finish()?;
    }
    if let Some(r) = replay {
        let diffs = state_mismatches(r.learners(), engine.learners());
        if !diffs.is_empty() {
            bail!(
                "slot {}: state replayed from the log differs from the engine ({} differences; first: {})",
                engine.slot(),
                diffs.len(),
                diffs[0]
            );
        }
    }
    Ok(acc.finish(seed, cfg.dim))
}

/// Runs every variant on every seed with `threads` workers and writes logs,
/// reports and the manifest into `dir`.
pub fn run_experiment(cfg: &ExperimentConfig, dir: &Path, threads: usize) -> Result<Vec<Vec<SeedResult>>> {
    prepare_dir(dir)?;
    let resolved = resolved_json(cfg)?;
    fs::write(dir.join(RESOLVED_FILE), &resolved)?;
    if cfg.report.logs {
        for v in &cfg.variants {
            fs::create_dir_all(dir.join(LOG_DIR).join(&v.name))?;
        }
    }
    let prepared = cfg.prepare()?;

    let jobs: Vec<(usize, u64)> = (0..cfg.variants.len())
        .flat_map(|v| cfg.seeds.iter().map(move |&s| (v, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build()?;
    let outcomes: Vec<Result<SeedResult>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(v, seed)| {
                run_seed(cfg, &prepared, v, seed, dir)
                    .with_context(|| format!("variant {}, seed {seed}", cfg.variants[v].name))
            })
            .collect()
    });

    let mut results: Vec<Vec<SeedResult>> = vec![Vec::new(); cfg.variants.len()];
    for ((v, _), outcome) in jobs.iter().zip(outcomes) {
        results[*v].push(outcome?);
    }
    write_reports(dir, cfg, &results)?;
    write_manifest(dir, &resolved)?;
    Ok(results)
}

/// Rebuilds the report of the run in `run_dir` from its logs alone and writes
/// it, with a fresh manifest, into `out`.
pub fn report_from_logs(run_dir: &Path, out: &Path) -> Result<Vec<Vec<SeedResult>>> {
    let resolved = fs::read_to_string(run_dir.join(RESOLVED_FILE))
        .with_context(|| format!("reading {}", run_dir.join(RESOLVED_FILE).display()))?;
    let cfg: ExperimentConfig = serde_json::from_str(&resolved).context("parsing the resolved config")?;
    ensure!(
        cfg.report.logs,
        "the run was made with `report.logs = false`; there are no logs to read"
    );

    let mut results = Vec::new();
    for v in &cfg.variants {
        let mut runs = Vec::new();
        for &seed in &cfg.seeds {
            let path = slot_log_path(run_dir, &v.name, seed);
            let file = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
            let logs = read_slot_logs(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))?;
            let path = activation_log_path(run_dir, &v.name, seed);
            let file = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
            let notices =
                read_activations(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))?;
            let mut acc = Accumulator::new(v.params.clone());
            for log in &logs {
                ensure!(
                    log.records.len() == cfg.learners(),
                    "{}: slot {} has {} records for {} learners",
                    path.display(),
                    log.t,
                    log.records.len(),
                    cfg.learners()
                );
                acc.push(log);
            }
            acc.add_notices(notices);
            runs.push(acc.finish(seed, cfg.dim));
        }
        results.push(runs);
    }

    fs::create_dir_all(out)?;
    if !same_dir(run_dir, out) {
        fs::write(out.join(RESOLVED_FILE), &resolved)?;
    }
    write_reports(out, &cfg, &results)?;
    write_manifest(out, &resolved)?;
    Ok(results)
}

fn same_dir(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(a), Ok(b)) => a == b,
        _ => a == b,
    }
}

#[derive(Debug, Serialize)]
struct Manifest {
    library: &'static str,
    version: &'static str,
    config_sha256: String,
    files: Vec<FileEntry>,
}

#[derive(Debug, Serialize)]
struct FileEntry {
    path: String,
    bytes: u64,
    sha256: String,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn collect_files(root: &Path, dir: &Path, out: &mut Vec<FileEntry>) -> Result<()> {
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect_files(root, &path, out)?;
            continue;
        }
        let rel = path.strip_prefix(root)?;
        if rel == Path::new(MANIFEST_FILE) {
            continue;
        }
        let bytes = fs::read(&path)?;
        out.push(FileEntry {
            path: rel
                .components()
                .map(|c| c.as_os_str().to_string_lossy())
                .collect::<Vec<_>>()
                .join("/"),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(&bytes),
        });
    }
    Ok(())
}

/// Lists every file under `dir` with its size and SHA-256.
pub fn write_manifest(dir: &Path, resolved: &str) -> Result<()> {
    let mut files = Vec::new();
    collect_files(dir, dir, &mut files)?;
    files.sort_by(|a, b| a.path.cmp(&b.path));
    let manifest = Manifest {
        library: "coopbandit",
        version: coopbandit::VERSION,
        config_sha256: sha256_hex(resolved.as_bytes()),
        files,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(dir.join(MANIFEST_FILE), text)?;
    Ok(())
}
