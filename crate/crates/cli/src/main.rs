use anyhow::{Context as _, Result};
use clap::{Parser, Subcommand};
use coopbandit_cli::report::SeedResult;
use coopbandit_cli::validate::holder_checks;
use coopbandit_cli::{load_config, parse_seeds, report_from_logs, run_experiment, ExperimentConfig};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Environment variable naming the root under which runs land by default.
const OUT_ROOT_VAR: &str = "COOPBANDIT_OUT";

#[derive(Parser)]
#[command(
    name = "coopbandit",
    version,
    about = "Run cooperative contextual bandit experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write logs, reports and a manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to `[run].out`, then `$COOPBANDIT_OUT/<name>`, then `runs/<name>`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// A seed count (`5` means 0..5) or a comma-separated list.
        #[arg(long)]
        seeds: Option<String>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Recompute a run's reports from its slot logs.
    Report {
        run_dir: PathBuf,
        /// Where to write the reports; defaults to the run directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config and the Hölder condition of its reward fields.
    Validate {
        #[arg(long)]
        config: PathBuf,
        /// Context pairs sampled per field.
        #[arg(long, default_value_t = 10_000)]
        pairs: usize,
    },
}

fn output_dir(flag: Option<PathBuf>, cfg: &ExperimentConfig, config: &Path) -> PathBuf {
    let stem = config.file_stem().map_or_else(|| "run".into(), |s| s.to_os_string());
    flag.or_else(|| cfg.out.clone())
        .or_else(|| std::env::var_os(OUT_ROOT_VAR).map(|root| PathBuf::from(root).join(&stem)))
        .unwrap_or_else(|| Path::new("runs").join(&stem))
}

fn print_results(cfg: &ExperimentConfig, results: &[Vec<SeedResult>]) {
    for (v, runs) in cfg.variants.iter().zip(results) {
        let slots = runs.iter().map(|r| r.slots).min().unwrap_or(0);
        let finals: Vec<f64> = runs.iter().map(|r| r.regret.last().copied().unwrap_or(0.0)).collect();
        let mean = finals.iter().sum::<f64>() / finals.len().max(1) as f64;
        println!(
            "{}: {} seeds, {} slots, mean final regret {:.3}",
            v.name,
            runs.len(),
            slots,
            mean
        );
    }
}

fn main() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Run {
            config,
            out,
            seeds,
            threads,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(s) = seeds {
                cfg.seeds = parse_seeds(&s)?;
            }
            let dir = output_dir(out, &cfg, &config);
            let threads = threads
                .or(cfg.threads)
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let results = run_experiment(&cfg, &dir, threads).with_context(|| format!("run into {}", dir.display()))?;
            print_results(&cfg, &results);
            println!("wrote {}", dir.display());
        }
        Command::Report { run_dir, out } => {
            let out = out.unwrap_or_else(|| run_dir.clone());
            report_from_logs(&run_dir, &out)?;
            println!("wrote {}", out.display());
        }
        Command::Validate { config, pairs } => {
            let cfg = load_config(&config)?;
            println!("{}", serde_json::to_string_pretty(&cfg)?);
            let checks = holder_checks(&cfg, pairs, 0);
            let mut failed = false;
            for c in &checks {
                let verdict = if c.report.passed { "ok" } else { "FAIL" };
                eprintln!(
                    "learner {} arm {}: worst |Δπ|/(L‖Δx‖^α) = {:.4} {verdict}",
                    c.learner, c.arm, c.report.worst_ratio
                );
                if let Some((a, b)) = &c.report.witness {
                    eprintln!("  violated between {a} and {b}");
                }
                failed |= !c.report.passed;
            }
            if checks.is_empty() {
                eprintln!("rewards come from a trace; no Hölder check");
            }
            if failed {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
