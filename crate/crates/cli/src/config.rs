//! Experiment configuration: the TOML schema, parameter presets and resolution
//! into a fully specified [`ExperimentConfig`].

use coopbandit::env::{
    build_counterexample, load_trace, ArrivalKind, ArrivalProcess, Context, Environment, FieldKind, Noise, Region,
    RewardField, Source, Topology, Trace,
};
use coopbandit::learner::{theorem1_params, AlgoParams, Algorithm};
use coopbandit::Engine;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// A configuration problem and the dotted path of the key it concerns.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub msg: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            f.write_str(&self.msg)
        } else {
            write!(f, "`{}`: {}", self.path, self.msg)
        }
    }
}

impl std::error::Error for ConfigError {}

fn at(path: impl Into<String>, msg: impl fmt::Display) -> ConfigError {
    ConfigError {
        path: path.into(),
        msg: msg.to_string(),
    }
}

fn unit() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    environment: RawEnvironment,
    topology: Option<RawTopology>,
    #[serde(default)]
    learner: Vec<RawLearner>,
    run: RawRun,
    #[serde(default)]
    report: ReportOptions,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnvironment {
    dim: Option<usize>,
    #[serde(default = "unit")]
    lipschitz: f64,
    #[serde(default = "unit")]
    alpha: f64,
    scenario: Option<ScenarioName>,
    delta: Option<f64>,
    k: Option<f64>,
    z: Option<f64>,
    trace: Option<PathBuf>,
    arrivals: Option<RawArrivals>,
    #[serde(default)]
    arm: Vec<RawArm>,
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ScenarioName {
    Theorem3,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum RawArrivals {
    IidUniform {
        lo: Option<Vec<f64>>,
        hi: Option<Vec<f64>>,
    },
    Identical {
        context: Option<Vec<f64>>,
        lo: Option<Vec<f64>>,
        hi: Option<Vec<f64>>,
    },
    Solo {
        target: usize,
        context: Option<Vec<f64>>,
        lo: Option<Vec<f64>>,
        hi: Option<Vec<f64>>,
    },
    WorstCaseDcza {
        target: Option<usize>,
    },
    Trace {
        target: Option<usize>,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawArm {
    learner: usize,
    field: FieldKind,
    #[serde(default)]
    noise: Noise,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTopology {
    f_max: Option<usize>,
    call_cost: Option<f64>,
    call_costs: Option<Vec<Vec<f64>>>,
    arm_costs: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
enum Preset {
    #[serde(rename = "theorem1")]
    Theorem1,
    C1,
    C2,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLearner {
    algo: Algorithm,
    params: Option<Preset>,
    z: Option<f64>,
    m_t: Option<u32>,
    rho: Option<f64>,
    explore_divisor: Option<f64>,
    doubling: Option<bool>,
    warm_start: Option<bool>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SeedSpec {
    Count(u64),
    List(Vec<u64>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    horizon: Option<u64>,
    seeds: Option<SeedSpec>,
    out: Option<PathBuf>,
    threads: Option<usize>,
    #[serde(default = "yes")]
    verify: bool,
}

/// What the aggregate report contains.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportOptions {
    /// Write per-seed slot and activation logs.
    #[serde(default = "yes")]
    pub logs: bool,
    /// Log-spaced points per regret curve; 0 writes every slot.
    #[serde(default = "default_curve_points")]
    pub curve_points: usize,
}

fn default_curve_points() -> usize {
    200
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            logs: true,
            curve_points: default_curve_points(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Rewards {
    Fields { fields: Vec<Vec<RewardField>> },
    Trace { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Arrivals {
    IidUniform { region: Region },
    Identical { source: Source },
    Solo { target: usize, source: Source },
    WorstCaseDcza { target: Option<usize> },
    Trace { target: Option<usize> },
}

/// The counterexample instance behind `scenario = "theorem3"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioEcho {
    pub name: String,
    pub delta: f64,
    pub k: f64,
    pub z: f64,
    pub c_k: f64,
    pub pi_b: f64,
    pub pi_m: f64,
    pub pi_g: f64,
}

/// One algorithm assignment, run on every seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variant {
    pub name: String,
    pub params: Vec<AlgoParams>,
}

/// A fully resolved experiment. Serializes to the `resolved.json` echo.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub lipschitz: f64,
    pub alpha: f64,
    pub topology: Topology,
    pub rewards: Rewards,
    pub arrivals: Arrivals,
    pub scenario: Option<ScenarioEcho>,
    pub variants: Vec<Variant>,
    pub horizon: u64,
    pub seeds: Vec<u64>,
    /// Replay every seed from its log and compare with the engine.
    pub verify: bool,
    pub report: ReportOptions,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub threads: Option<usize>,
}

/// Environment and trace shared by every run of an experiment.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub env: Arc<Environment>,
    pub trace: Option<Arc<Trace>>,
}

impl ExperimentConfig {
    pub fn learners(&self) -> usize {
        self.topology.learners()
    }

    pub fn prepare(&self) -> Result<Prepared, ConfigError> {
        match &self.rewards {
            Rewards::Fields { fields } => {
                let env = Environment::with_fields(
                    self.dim,
                    self.topology.clone(),
                    fields.clone(),
                    self.lipschitz,
                    self.alpha,
                )
                .map_err(|e| at("environment", e))?;
                Ok(Prepared {
                    env: Arc::new(env),
                    trace: None,
                })
            }
            Rewards::Trace { path } => {
                let trace = Arc::new(read_trace(path)?);
                let env = Environment::with_trace(self.topology.clone(), trace.clone())
                    .map_err(|e| at("environment.trace", e))?;
                Ok(Prepared {
                    env: Arc::new(env),
                    trace: Some(trace),
                })
            }
        }
    }
}

impl Prepared {
    pub fn arrivals(&self, cfg: &ExperimentConfig) -> Result<ArrivalProcess, ConfigError> {
        let kind = match &cfg.arrivals {
            Arrivals::IidUniform { region } => ArrivalKind::IidUniform { region: region.clone() },
            Arrivals::Identical { source } => ArrivalKind::Identical { source: source.clone() },
            Arrivals::Solo { target, source } => ArrivalKind::Solo {
                target: *target,
                source: source.clone(),
            },
            Arrivals::WorstCaseDcza { target } => ArrivalKind::WorstCaseDcza { target: *target },
            Arrivals::Trace { target } => ArrivalKind::FixedTrace {
                trace: self
                    .trace
                    .clone()
                    .ok_or_else(|| at("environment.arrivals", "trace arrivals need `environment.trace`"))?,
                target: *target,
            },
        };
        ArrivalProcess::new(kind, cfg.learners(), cfg.dim).map_err(|e| at("environment.arrivals", e))
    }

    pub fn engine(&self, cfg: &ExperimentConfig, variant: &Variant, seed: u64) -> Result<Engine, ConfigError> {
        Engine::new(self.env.clone(), self.arrivals(cfg)?, variant.params.clone(), seed).map_err(|e| at("learner", e))
    }
}

fn read_trace(path: &Path) -> Result<Trace, ConfigError> {
    let file = std::fs::File::open(path).map_err(|e| at("environment.trace", format!("{}: {e}", path.display())))?;
    load_trace(std::io::BufReader::new(file)).map_err(|e| at("environment.trace", format!("{}: {e}", path.display())))
}

/// Parses and resolves a configuration; relative paths are taken from the
/// working directory.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    parse_config_in(text, Path::new("."))
}

/// Reads a configuration file; relative paths inside it are taken from its directory.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| at("", format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config_in(&text, base)
}

pub fn parse_config_in(text: &str, base: &Path) -> Result<ExperimentConfig, ConfigError> {
    let de = toml::de::Deserializer::parse(text).map_err(|e| at("", e))?;
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        at(if path == "." { String::new() } else { path }, e.inner())
    })?;
    resolve(raw, base)
}

/// `"4"` means seeds `0..4`; a comma-separated list names the seeds.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>, ConfigError> {
    let bad = |_| at("seeds", format!("`{s}` is neither a count nor a comma-separated list"));
    let seeds = if s.contains(',') {
        s.split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(|p| p.parse::<u64>().map_err(bad))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        (0..s.trim().parse::<u64>().map_err(bad)?).collect()
    };
    check_seeds(seeds, "seeds")
}

fn check_seeds(seeds: Vec<u64>, path: &str) -> Result<Vec<u64>, ConfigError> {
    if seeds.is_empty() {
        return Err(at(path, "need at least one seed"));
    }
    let mut sorted = seeds.clone();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(at(path, format!("seed {} appears twice", w[0])));
    }
    Ok(seeds)
}

fn resolve(raw: RawConfig, base: &Path) -> Result<ExperimentConfig, ConfigError> {
    let env = &raw.environment;
    if !(env.lipschitz > 0.0 && env.lipschitz.is_finite()) {
        return Err(at(
            "environment.lipschitz",
            format!("must be positive, got {}", env.lipschitz),
        ));
    }
    if !(env.alpha > 0.0 && env.alpha.is_finite()) {
        return Err(at("environment.alpha", format!("must be positive, got {}", env.alpha)));
    }
    if env.scenario.is_none() {
        for (key, set) in [
            ("delta", env.delta.is_some()),
            ("k", env.k.is_some()),
            ("z", env.z.is_some()),
        ] {
            if set {
                return Err(at(format!("environment.{key}"), "only used with `scenario`"));
            }
        }
    }
    let seeds = match &raw.run.seeds {
        None => vec![0],
        Some(SeedSpec::Count(n)) => (0..*n).collect(),
        Some(SeedSpec::List(v)) => v.clone(),
    };
    let seeds = check_seeds(seeds, "run.seeds")?;
    if raw.run.threads == Some(0) {
        return Err(at("run.threads", "must be at least 1"));
    }
    let out = raw.run.out.as_ref().map(|p| base.join(p));

    let mut cfg = match env.scenario {
        Some(ScenarioName::Theorem3) => resolve_theorem3(&raw)?,
        None => resolve_general(&raw, base)?,
    };
    cfg.seeds = seeds;
    cfg.verify = raw.run.verify;
    cfg.report = raw.report.clone();
    cfg.out = out;
    cfg.threads = raw.run.threads;

    let prepared = cfg.prepare()?;
    for v in &cfg.variants {
        prepared.engine(&cfg, v, 0)?;
    }
    Ok(cfg)
}

fn horizon(raw: &RawConfig, fallback: Option<u64>) -> Result<u64, ConfigError> {
    match raw.run.horizon.or(fallback) {
        Some(0) => Err(at("run.horizon", "must be at least 1")),
        Some(t) => Ok(t),
        None => Err(at("run.horizon", "missing")),
    }
}

fn resolve_theorem3(raw: &RawConfig) -> Result<ExperimentConfig, ConfigError> {
    let env = &raw.environment;
    let not_here = |path: &str| Err(at(path, "not allowed with `scenario = \"theorem3\"`"));
    if env.trace.is_some() {
        return not_here("environment.trace");
    }
    if env.arrivals.is_some() {
        return not_here("environment.arrivals");
    }
    if !env.arm.is_empty() {
        return not_here("environment.arm");
    }
    if raw.topology.is_some() {
        return not_here("topology");
    }
    if !raw.learner.is_empty() {
        return not_here("learner");
    }
    if env.dim.is_some_and(|d| d != 1) {
        return Err(at("environment.dim", "the theorem3 scenario is one-dimensional"));
    }
    let delta = env.delta.ok_or_else(|| at("environment.delta", "missing"))?;
    let k = env.k.unwrap_or(1.0);
    let z = env.z.unwrap_or(0.5);
    if !(z > 0.0 && z < 1.0) {
        return Err(at("environment.z", format!("must lie in (0, 1), got {z}")));
    }
    if !(k >= 1.0 && k.is_finite()) {
        return Err(at("environment.k", format!("must be at least 1, got {k}")));
    }
    let ce = build_counterexample(delta, k, z).map_err(|e| at("environment.delta", e))?;
    let f_max = ce.topology.f_max();
    let ssee = ce
        .explore_divisors
        .iter()
        .map(|&d| AlgoParams::ssee(z, 1, f_max, d))
        .collect();
    let clup = vec![AlgoParams::clup(z, 1, f_max); 2];
    Ok(ExperimentConfig {
        dim: 1,
        lipschitz: env.lipschitz,
        alpha: env.alpha,
        topology: ce.topology.clone(),
        rewards: Rewards::Fields {
            fields: ce.fields.clone(),
        },
        arrivals: Arrivals::Solo {
            target: 0,
            source: Source::Fixed(Context::new([0.5]).expect("0.5 is in range")),
        },
        scenario: Some(ScenarioEcho {
            name: "theorem3".into(),
            delta,
            k,
            z,
            c_k: ce.c_k,
            pi_b: ce.pi_b,
            pi_m: ce.pi_m,
            pi_g: ce.pi_g,
        }),
        variants: vec![
            Variant {
                name: "ssee".into(),
                params: ssee,
            },
            Variant {
                name: "clup".into(),
                params: clup,
            },
        ],
        horizon: horizon(raw, None)?,
        seeds: Vec::new(),
        verify: true,
        report: ReportOptions::default(),
        out: None,
        threads: None,
    })
}

fn region(lo: &Option<Vec<f64>>, hi: &Option<Vec<f64>>, dim: usize) -> Region {
    let unit = Region::unit(dim);
    Region {
        lo: lo.clone().unwrap_or(unit.lo),
        hi: hi.clone().unwrap_or(unit.hi),
    }
}

fn source(
    context: &Option<Vec<f64>>,
    lo: &Option<Vec<f64>>,
    hi: &Option<Vec<f64>>,
    dim: usize,
) -> Result<Source, ConfigError> {
    match context {
        Some(c) => {
            if lo.is_some() || hi.is_some() {
                return Err(at(
                    "environment.arrivals",
                    "give either `context` or `lo`/`hi`, not both",
                ));
            }
            Context::new(c.iter().copied())
                .map(Source::Fixed)
                .map_err(|e| at("environment.arrivals.context", e))
        }
        None => Ok(Source::Uniform(region(lo, hi, dim))),
    }
}

fn resolve_general(raw: &RawConfig, base: &Path) -> Result<ExperimentConfig, ConfigError> {
    let env = &raw.environment;
    let topo = raw
        .topology
        .as_ref()
        .map_or_else(RawTopology::default, |t| RawTopology {
            f_max: t.f_max,
            call_cost: t.call_cost,
            call_costs: t.call_costs.clone(),
            arm_costs: t.arm_costs.clone(),
        });

    let (dim, arms, rewards, trace_len) = match &env.trace {
        Some(p) => {
            if !env.arm.is_empty() {
                return Err(at(
                    "environment.arm",
                    "rewards come from the trace; drop the arm tables",
                ));
            }
            let path = base.join(p);
            let trace = read_trace(&path)?;
            if env.dim.is_some_and(|d| d != trace.dim()) {
                return Err(at(
                    "environment.dim",
                    format!("the trace has {} context columns", trace.dim()),
                ));
            }
            (
                trace.dim(),
                trace.arms_per_learner().to_vec(),
                Rewards::Trace { path },
                Some(trace.last_slot()),
            )
        }
        None => {
            let dim = env.dim.unwrap_or(1);
            if dim == 0 {
                return Err(at("environment.dim", "must be at least 1"));
            }
            if env.arm.is_empty() {
                return Err(at("environment.arm", "define at least one arm"));
            }
            let m = env.arm.iter().map(|a| a.learner).max().unwrap() + 1;
            let mut fields: Vec<Vec<RewardField>> = vec![Vec::new(); m];
            for (k, a) in env.arm.iter().enumerate() {
                let f = RewardField::new(dim, a.field.clone(), a.noise)
                    .map_err(|e| at(format!("environment.arm[{k}].field"), e))?;
                fields[a.learner].push(f);
            }
            if let Some(i) = fields.iter().position(Vec::is_empty) {
                return Err(at("environment.arm", format!("learner {i} has no arms")));
            }
            let arms = fields.iter().map(Vec::len).collect();
            (dim, arms, Rewards::Fields { fields }, None)
        }
    };

    let m = arms.len();
    let f_max = topo.f_max.unwrap_or_else(|| *arms.iter().max().unwrap());
    let call_costs = match (topo.call_cost, topo.call_costs) {
        (Some(_), Some(_)) => return Err(at("topology", "give `call_cost` or `call_costs`, not both")),
        (Some(c), None) => vec![vec![c; m]; m],
        (None, Some(rows)) => rows,
        (None, None) => vec![vec![0.0; m]; m],
    };
    let arm_costs = topo
        .arm_costs
        .unwrap_or_else(|| arms.iter().map(|&f| vec![0.0; f]).collect());
    let topology = Topology::new(arms, f_max, arm_costs, call_costs).map_err(|e| at("topology", e))?;

    let arrivals = match &env.arrivals {
        None if env.trace.is_some() => Arrivals::Trace { target: None },
        None => Arrivals::IidUniform {
            region: Region::unit(dim),
        },
        Some(RawArrivals::IidUniform { lo, hi }) => Arrivals::IidUniform {
            region: region(lo, hi, dim),
        },
        Some(RawArrivals::Identical { context, lo, hi }) => Arrivals::Identical {
            source: source(context, lo, hi, dim)?,
        },
        Some(RawArrivals::Solo {
            target,
            context,
            lo,
            hi,
        }) => Arrivals::Solo {
            target: *target,
            source: source(context, lo, hi, dim)?,
        },
        Some(RawArrivals::WorstCaseDcza { target }) => Arrivals::WorstCaseDcza { target: *target },
        Some(RawArrivals::Trace { target }) => {
            if env.trace.is_none() {
                return Err(at("environment.arrivals", "trace arrivals need `environment.trace`"));
            }
            Arrivals::Trace { target: *target }
        }
    };

    let horizon = horizon(raw, trace_len)?;
    let params = match raw.learner.len() {
        0 => return Err(at("learner", "define at least one [[learner]]")),
        1 => {
            let p = learner_params(&raw.learner[0], 0, dim, env.alpha, horizon, f_max)?;
            vec![p; m]
        }
        n if n == m => raw
            .learner
            .iter()
            .enumerate()
            .map(|(i, l)| learner_params(l, i, dim, env.alpha, horizon, f_max))
            .collect::<Result<_, _>>()?,
        n => {
            return Err(at(
                "learner",
                format!("{n} entries for {m} learners; give one shared entry or one per learner"),
            ))
        }
    };
    let name = if params.iter().all(|p| p.algo == params[0].algo) {
        params[0].algo.to_string().to_lowercase()
    } else {
        "mixed".to_string()
    };

    Ok(ExperimentConfig {
        dim,
        lipschitz: env.lipschitz,
        alpha: env.alpha,
        topology,
        rewards,
        arrivals,
        scenario: None,
        variants: vec![Variant { name, params }],
        horizon,
        seeds: Vec::new(),
        verify: true,
        report: ReportOptions::default(),
        out: None,
        threads: None,
    })
}

/// `ρ` of the C2 preset for DCZA.
pub fn c2_rho() -> f64 {
    (3.0 + 17f64.sqrt()) / 2.0
}

fn learner_params(
    raw: &RawLearner,
    i: usize,
    dim: usize,
    alpha: f64,
    horizon: u64,
    f_max: usize,
) -> Result<AlgoParams, ConfigError> {
    let key = |k: &str| format!("learner[{i}].{k}");
    let preset = raw.params.unwrap_or(Preset::Theorem1);
    let mut p = match (raw.algo, preset) {
        (Algorithm::Dcza, Preset::Theorem1) => AlgoParams::dcza(3.0 * alpha, alpha, f_max),
        (Algorithm::Dcza, Preset::C1) => AlgoParams::dcza(4.0, alpha, f_max),
        (Algorithm::Dcza, Preset::C2) => AlgoParams::dcza(c2_rho(), alpha, f_max),
        (_, Preset::Theorem1) => theorem1_params(alpha, dim, horizon, f_max),
        (_, Preset::C1) => AlgoParams {
            z: 1.0 / 8.0,
            // ⌈T^{1/4}⌉
            m_t: theorem1_params(1.0, 1, horizon, f_max).m_t,
            ..AlgoParams::clup(0.5, 1, f_max)
        },
        (_, Preset::C2) => theorem1_params(1.0, dim, horizon, f_max),
    };
    p.algo = raw.algo;

    let uniform = raw.algo != Algorithm::Dcza;
    let unused = |k: &str| Err(at(key(k), format!("not used by {}", raw.algo)));
    if let Some(z) = raw.z {
        if !uniform {
            return unused("z");
        }
        if !(z > 0.0 && z < 1.0) {
            return Err(at(key("z"), format!("must lie in (0, 1), got {z}")));
        }
        p.z = z;
    }
    if let Some(m_t) = raw.m_t {
        if !uniform {
            return unused("m_t");
        }
        if m_t == 0 {
            return Err(at(key("m_t"), "must be at least 1"));
        }
        p.m_t = m_t;
    }
    if let Some(rho) = raw.rho {
        if uniform {
            return unused("rho");
        }
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(at(key("rho"), format!("must be positive, got {rho}")));
        }
        p.rho = rho;
    }
    if let Some(k) = raw.explore_divisor {
        if raw.algo != Algorithm::Ssee {
            return unused("explore_divisor");
        }
        if !(k >= 1.0 && k.is_finite()) {
            return Err(at(key("explore_divisor"), format!("must be at least 1, got {k}")));
        }
        p.explore_divisor = k;
    }
    if let Some(d) = raw.doubling {
        if d && raw.algo != Algorithm::Clup {
            return unused("doubling");
        }
        p.doubling = d;
    }
    if let Some(w) = raw.warm_start {
        if w && raw.algo != Algorithm::Dcza {
            return unused("warm_start");
        }
        p.warm_start = w;
    }
    p.validate().map_err(|e| at(format!("learner[{i}]"), e))?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[environment]
[[environment.arm]]
learner = 0
field = { kind = "constant", value = 0.5 }

[[learner]]
algo = "CLUP"

[run]
horizon = 100
"#;

    #[test]
    fn minimal_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.dim, 1);
        assert_eq!((c.lipschitz, c.alpha), (1.0, 1.0));
        assert_eq!(c.seeds, vec![0]);
        assert!(c.verify && c.report.logs);
        assert_eq!(
            c.arrivals,
            Arrivals::IidUniform {
                region: Region::unit(1)
            }
        );
        assert_eq!(c.variants.len(), 1);
        assert_eq!(c.variants[0].name, "clup");
        assert_eq!(c.variants[0].params, vec![theorem1_params(1.0, 1, 100, 1)]);
    }

    #[test]
    fn z_out_of_range() {
        let text = MINIMAL.replace("algo = \"CLUP\"", "algo = \"CLUP\"\nz = 1.5");
        let e = parse_config(&text).unwrap_err();
        assert_eq!(e.path, "learner[0].z");
        assert!(e.msg.contains("(0, 1)"), "{e}");
    }

    #[test]
    fn theorem1_expansion() {
        let text = MINIMAL
            .replace("algo = \"CLUP\"", "algo = \"CLUP\"\nparams = \"theorem1\"")
            .replace("horizon = 100", "horizon = 10000");
        let p = &parse_config(&text).unwrap().variants[0].params[0];
        assert_eq!(p.z, 0.5);
        assert_eq!(p.m_t, 10);
    }

    #[test]
    fn unknown_key_has_path() {
        let text = MINIMAL.replace("horizon = 100", "horizon = 100\nhorizn = 3");
        let e = parse_config(&text).unwrap_err();
        assert_eq!(e.path, "run.horizn");
        assert!(e.msg.contains("horizn"), "{e}");
        let text = MINIMAL.replace("value = 0.5", "value = 0.5, slope = 1");
        let e = parse_config(&text).unwrap_err();
        assert!(e.path.starts_with("environment.arm"), "{e}");
    }

    #[test]
    fn presets() {
        let with = |algo: &str, preset: &str| {
            let text = MINIMAL
                .replace("algo = \"CLUP\"", &format!("algo = \"{algo}\"\nparams = \"{preset}\""))
                .replace("horizon = 100", "horizon = 65536");
            parse_config(&text).unwrap().variants[0].params[0].clone()
        };
        let c1 = with("CLUP", "C1");
        assert_eq!((c1.z, c1.m_t), (0.125, 16));
        let c2 = with("CLUP", "C2");
        assert_eq!((c2.z, c2.m_t), (0.5, 16));
        assert_eq!(with("DCZA", "C1").rho, 4.0);
        assert!((with("DCZA", "C2").rho - 3.5615528128088303).abs() < 1e-12);
        assert_eq!(with("DCZA", "theorem1").rho, 3.0);
    }

    #[test]
    fn parameter_for_wrong_algorithm() {
        let text = MINIMAL.replace("algo = \"CLUP\"", "algo = \"CLUP\"\nrho = 2.0");
        assert_eq!(parse_config(&text).unwrap_err().path, "learner[0].rho");
    }

    #[test]
    fn theorem3_scenario() {
        let text = "[environment]\nscenario = \"theorem3\"\ndelta = 0.05\n[run]\nhorizon = 10\nseeds = [3, 1]\n";
        let c = parse_config(text).unwrap();
        let names: Vec<_> = c.variants.iter().map(|v| v.name.as_str()).collect();
        assert_eq!(names, ["ssee", "clup"]);
        assert!(c
            .variants
            .iter()
            .all(|v| v.params.iter().all(|p| p.m_t == 1 && p.z == 0.5)));
        assert_eq!(c.seeds, vec![3, 1]);
        let s = c.scenario.unwrap();
        assert!(s.pi_b + s.c_k * s.delta < s.pi_m);
    }

    #[test]
    fn seeds() {
        assert_eq!(parse_seeds("3").unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_seeds("7, 2").unwrap(), vec![7, 2]);
        assert_eq!(parse_seeds("5,").unwrap(), vec![5]);
        assert!(parse_seeds("0").is_err());
        assert!(parse_seeds("1,1").is_err());
        assert!(parse_seeds("x").is_err());
    }

    #[test]
    fn resolved_round_trip() {
        let c = parse_config(MINIMAL).unwrap();
        let json = serde_json::to_string(&c).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
    }
}
