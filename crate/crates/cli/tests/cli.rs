use coopbandit_cli::config::Rewards;
use coopbandit_cli::{load_config, parse_config, report_from_logs, run_experiment};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

const SMALL: &str = r#"
[environment]
[[environment.arm]]
learner = 0
field = { kind = "linear-ramp", intercept = 0.2, slopes = [0.6] }
[[environment.arm]]
learner = 0
field = { kind = "bump", center = [0.2], base = 0.3, peak = 0.7, radius = 0.4 }
[[environment.arm]]
learner = 1
field = { kind = "linear-ramp", intercept = 0.9, slopes = [-0.7] }

[topology]
call_cost = 0.01

[[learner]]
algo = "CLUP"
z = 0.2
m_t = 4

[run]
horizon = 3000
seeds = 3
"#;

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coopbandit"))
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("exp.toml");
    fs::write(&p, text).unwrap();
    p
}

/// Relative path to bytes for every file under `dir`.
fn tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for e in fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
                out.insert(rel, fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

#[test]
fn shipped_configs_parse() {
    let mut n = 0;
    for e in fs::read_dir(configs_dir()).unwrap() {
        let p = e.unwrap().path();
        if p.extension().is_some_and(|x| x == "toml") {
            load_config(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            n += 1;
        }
    }
    assert!(n >= 3);
}

#[test]
fn three_seeds_three_logs_one_report() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = parse_config(SMALL).unwrap();
    let out = tmp.path().join("run");
    run_experiment(&cfg, &out, 2).unwrap();
    let files = tree(&out);
    let slot_logs: Vec<_> = files
        .keys()
        .filter(|k| k.starts_with("logs/") && !k.ends_with(".activations.csv"))
        .collect();
    assert_eq!(
        slot_logs,
        ["logs/clup/seed-0.csv", "logs/clup/seed-1.csv", "logs/clup/seed-2.csv"]
    );
    for f in [
        "regret.csv",
        "phases.csv",
        "levels.csv",
        "summary.json",
        "resolved.json",
        "manifest.json",
    ] {
        assert!(files.contains_key(f), "{f} missing");
    }
    let regret = String::from_utf8(files["regret.csv"].clone()).unwrap();
    assert!(regret.lines().skip(1).all(|l| l.starts_with("clup,")));
    assert!(regret.lines().last().unwrap().starts_with("clup,3000,"));
    // 3 seeds x 2 learners
    assert_eq!(
        String::from_utf8(files["phases.csv"].clone()).unwrap().lines().count(),
        7
    );
}

#[test]
fn manifest_lists_every_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = parse_config(SMALL).unwrap();
    let out = tmp.path().join("run");
    run_experiment(&cfg, &out, 1).unwrap();
    let files = tree(&out);
    let manifest: serde_json::Value = serde_json::from_slice(&files["manifest.json"]).unwrap();
    assert_eq!(manifest["version"], coopbandit::VERSION);
    let resolved_hash = hex::encode(Sha256::digest(&files["resolved.json"]));
    assert_eq!(manifest["config_sha256"], resolved_hash);
    let listed: BTreeMap<String, (u64, String)> = manifest["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| {
            (
                f["path"].as_str().unwrap().to_string(),
                (f["bytes"].as_u64().unwrap(), f["sha256"].as_str().unwrap().to_string()),
            )
        })
        .collect();
    let expected: BTreeMap<String, (u64, String)> = files
        .iter()
        .filter(|(k, _)| *k != "manifest.json")
        .map(|(k, v)| (k.clone(), (v.len() as u64, hex::encode(Sha256::digest(v)))))
        .collect();
    assert_eq!(listed, expected);
}

#[test]
fn rerun_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = parse_config(SMALL).unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_experiment(&cfg, &a, 1).unwrap();
    run_experiment(&cfg, &b, 3).unwrap();
    assert_eq!(tree(&a), tree(&b));
    // rerunning into the same directory replaces the previous run
    run_experiment(&cfg, &a, 2).unwrap();
    assert_eq!(tree(&a), tree(&b));
}

#[test]
fn report_from_logs_matches_run() {
    let tmp = tempfile::tempdir().unwrap();
    let text = SMALL.replace("algo = \"CLUP\"\nz = 0.2\nm_t = 4", "algo = \"DCZA\"\nrho = 2.0");
    let cfg = parse_config(&text).unwrap();
    let run = tmp.path().join("run");
    let rep = tmp.path().join("rep");
    run_experiment(&cfg, &run, 1).unwrap();
    report_from_logs(&run, &rep).unwrap();
    let (a, b) = (tree(&run), tree(&rep));
    for f in [
        "regret.csv",
        "phases.csv",
        "levels.csv",
        "summary.json",
        "resolved.json",
    ] {
        assert_eq!(a[f], b[f], "{f} differs");
    }
    assert!(String::from_utf8(b["levels.csv"].clone()).unwrap().lines().count() > 1);

    // in place: the manifest comes out unchanged
    report_from_logs(&run, &run).unwrap();
    assert_eq!(tree(&run), a);
}

#[test]
fn theorem3_preset_gives_two_curves() {
    let tmp = tempfile::tempdir().unwrap();
    let text = "[environment]\nscenario = \"theorem3\"\ndelta = 0.05\n[run]\nhorizon = 2000\nseeds = 2\n";
    let cfg = parse_config(text).unwrap();
    let out = tmp.path().join("run");
    run_experiment(&cfg, &out, 1).unwrap();
    let regret = fs::read_to_string(out.join("regret.csv")).unwrap();
    let names: std::collections::BTreeSet<&str> =
        regret.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(names.into_iter().collect::<Vec<_>>(), ["clup", "ssee"]);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    let v = summary["variants"].as_array().unwrap();
    assert_eq!(
        (v[0]["name"].as_str(), v[1]["name"].as_str()),
        (Some("ssee"), Some("clup"))
    );
    assert_eq!(v[0]["phase_shares"]["train"], 0.0);
}

#[test]
fn trace_rewards_and_horizon() {
    let tmp = tempfile::tempdir().unwrap();
    let mut trace = String::from("t,x_1,r_0_0,r_0_1,r_1_0\n");
    for t in 1..=50 {
        let x = (t % 10) as f64 / 10.0;
        trace.push_str(&format!("{t},{x},{},{},1\n", t % 2, (t + 1) % 2));
    }
    fs::write(tmp.path().join("trace.csv"), trace).unwrap();
    let text = "[environment]\ntrace = \"trace.csv\"\n[[learner]]\nalgo = \"CLUP\"\nz = 0.3\nm_t = 2\n[run]\n";
    let cfg_path = write_config(tmp.path(), text);
    let cfg = load_config(&cfg_path).unwrap();
    assert_eq!(cfg.horizon, 50);
    assert!(matches!(cfg.rewards, Rewards::Trace { .. }));
    let out = tmp.path().join("run");
    let results = run_experiment(&cfg, &out, 1).unwrap();
    assert_eq!(results[0][0].slots, 50);

    // a longer horizon stops at the end of the trace
    let cfg = load_config(&write_config(tmp.path(), &format!("{text}horizon = 80\n"))).unwrap();
    run_experiment(&cfg, &out, 1).unwrap();
    let summary = fs::read_to_string(out.join("summary.json")).unwrap();
    assert!(summary.contains("\"truncated\": true"), "{summary}");
}

#[test]
fn binary_run_and_validate() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("out");
    let st = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(["--seeds", "4,9", "--threads", "2"])
        .output()
        .unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    assert!(out.join("logs/clup/seed-4.csv").exists());
    assert!(out.join("logs/clup/seed-9.csv").exists());
    assert!(!out.join("logs/clup/seed-0.csv").exists());

    let st = bin().arg("report").arg(&out).output().unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));

    let st = bin().args(["validate", "--config"]).arg(&cfg).output().unwrap();
    assert!(st.status.success());
    let echoed: serde_json::Value = serde_json::from_slice(&st.stdout).unwrap();
    assert_eq!(echoed["variants"][0]["params"][0]["z"], 0.2);

    // slopes up to 1 break L = 0.5
    let steep = write_config(
        tmp.path(),
        &SMALL.replace("[environment]", "[environment]\nlipschitz = 0.5"),
    );
    let st = bin().args(["validate", "--config"]).arg(&steep).output().unwrap();
    assert!(!st.status.success());
    assert!(String::from_utf8_lossy(&st.stderr).contains("FAIL"));
}

#[test]
fn default_output_root_from_env() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &SMALL.replace("horizon = 3000", "horizon = 100"));
    let st = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .env("COOPBANDIT_OUT", tmp.path().join("root"))
        .output()
        .unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    assert!(tmp.path().join("root/exp/manifest.json").exists());
}

#[test]
fn rejections_name_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    for (text, key) in [
        (SMALL.replace("seeds = 3", "seeds = 3\nseed = 1"), "run.seed"),
        (SMALL.replace("z = 0.2", "z = 1.5"), "learner[0].z"),
        (SMALL.replace("call_cost = 0.01", "call_cost = 2.0"), "topology"),
        (SMALL.replace("seeds = 3", "seeds = []"), "run.seeds"),
        (SMALL.replace("horizon = 3000", "horizon = 0"), "run.horizon"),
    ] {
        let cfg = write_config(tmp.path(), &text);
        let st = bin()
            .args(["run", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(tmp.path().join("x"))
            .output()
            .unwrap();
        assert!(!st.status.success());
        let err = String::from_utf8_lossy(&st.stderr);
        assert!(err.contains(&format!("`{key}`")), "{key}: {err}");
    }
    let cfg = write_config(tmp.path(), &SMALL.replace("z = 0.2", "z = 1.5"));
    let st = bin().args(["validate", "--config"]).arg(&cfg).output().unwrap();
    assert!(String::from_utf8_lossy(&st.stderr).contains("(0, 1)"));
}

#[test]
fn refuses_foreign_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("busy");
    fs::create_dir_all(&out).unwrap();
    fs::write(out.join("notes.txt"), "keep").unwrap();
    let cfg = parse_config(SMALL).unwrap();
    assert!(run_experiment(&cfg, &out, 1).is_err());
    assert_eq!(fs::read_to_string(out.join("notes.txt")).unwrap(), "keep");
}
