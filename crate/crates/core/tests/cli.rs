use std::path::Path;
use std::process::Command;

use pwt_lab::attractor::Status;
use pwt_lab::cli::{run, run_sweep, ExperimentConfig, Mode};

const LINE: &str = r#"
[map]
kind = "interval"
lo = "0"
hi = "1"
cuts = ["3/5"]
vectors = ["3/10", "-3/5"]

[run]
n_max = 100
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pwt-lab"))
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let p = dir.join("config.toml");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn alpha_mode_prints_weights() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), LINE);
    let out = bin()
        .args(["alpha", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("out"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let a = &report["alphas"]["alphas"];
    assert!((a[0].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);
    assert!((a[1].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
    assert_eq!(report["exact_alphas"], serde_json::json!(["2/3", "1/3"]));
}

#[test]
fn iterate_mode_on_the_line_example() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), LINE);
    let dir = tmp.path().join("out");
    let status = bin()
        .args(["iterate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["stabilized_at"], 1);
    assert_eq!(report["attractor_intervals"], serde_json::json!([["0", "9/10"]]));
    let trace = std::fs::read_to_string(dir.join("trace.csv")).unwrap();
    assert!(trace.starts_with("n,measure,occupied,changed\n0,1,1,0\n1,9/10,1,"));
}

#[test]
fn malformed_config_fails_without_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &LINE.replace("n_max = 100", "h = -0.5"));
    let dir = tmp.path().join("out");
    let out = bin()
        .args(["iterate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["code"], "cli.config_error");
    assert!(!dir.exists());

    let cfg = write_config(tmp.path(), &format!("{LINE}\nsurprise = 1\n"));
    let out = bin().args(["iterate", "--config"]).arg(&cfg).arg("--out").arg(&dir).output().unwrap();
    assert!(!out.status.success());
    assert!(!dir.exists());
}

#[test]
fn domain_errors_carry_module_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &LINE.replace(r#"["3/10", "-3/5"]"#, r#"["1/2", "-3/5"]"#));
    let out = bin().args(["iterate", "--config"]).arg(&cfg).arg("--out").arg(tmp.path().join("o")).output().unwrap();
    assert!(!out.status.success());
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"]["code"].as_str().unwrap().starts_with("pwt_core."));
}

#[test]
fn single_node_sweep_matches_iterate() {
    let text = format!("{LINE}\n[sweep]\naxes = [{{ vector = 0, lo = \"3/10\", hi = \"3/10\", steps = 1 }}]\n");
    let cfg = ExperimentConfig::parse(&text).unwrap();
    cfg.validate(Mode::Sweep).unwrap();
    let sweep = run_sweep(&cfg).unwrap();
    assert_eq!(sweep.records.len(), 1);
    let it = run(&cfg, Mode::Iterate).unwrap();
    let r = &sweep.records[0];
    assert_eq!(r.stabilized_at.map(|n| n as u64), it.report["stabilized_at"].as_u64());
    assert_eq!(r.final_measure, it.report["final_measure"].as_f64());
}

#[test]
fn rational_line_sweep_always_stabilizes() {
    let text = format!(
        "{LINE}\n[sweep]\naxes = [{{ vector = 0, lo = \"1/64\", hi = \"2/5\", steps = 7 }}, {{ vector = 1, lo = \"-3/5\", hi = \"-1/7\", steps = 5 }}]\n"
    );
    let cfg = ExperimentConfig::parse(&text).unwrap();
    cfg.validate(Mode::Sweep).unwrap();
    let s = run_sweep(&cfg).unwrap();
    assert_eq!(s.records.len(), 35);
    assert!(s.records.iter().all(|r| r.status == Some(Status::Stabilized)), "{:?}", s.records);
    let csv = String::from_utf8(s.to_csv().unwrap()).unwrap();
    assert_eq!(csv.lines().count(), 36);
}

#[test]
fn torus_gamma2_sweep_shows_both_regimes() {
    let text = r#"
[map]
kind = "torus_double_rotation"
corner = [0.15779609702061936, 0.1679893627721013]
size = [0.48171045121458256, 0.49069651868530595]
gamma1 = [0.6012590152842842, 0.35936436890879253]
gamma2 = [0.08305952680344475, 0.8492898576091045]

[run]
h = 0.00390625
n_max = 2000

[sweep]
axes = [
    { vector = 0, component = 0, lo = "0.05", hi = "0.45", steps = 6 },
    { vector = 0, component = 1, lo = "0.05", hi = "0.95", steps = 6 },
]
"#;
    let cfg = ExperimentConfig::parse(text).unwrap();
    cfg.validate(Mode::Sweep).unwrap();
    let s = run_sweep(&cfg).unwrap();
    assert_eq!(s.records.len(), 36);
    assert!(s.stabilized() > 0 && s.max_iter_reached() > 0);
}

#[test]
fn sweep_records_node_errors() {
    // v_0 = 9/10 pushes [0, 3/5) out of the domain
    let text = format!("{LINE}\n[sweep]\naxes = [{{ vector = 0, lo = \"1/10\", hi = \"9/10\", steps = 3 }}]\n");
    let cfg = ExperimentConfig::parse(&text).unwrap();
    let s = run_sweep(&cfg).unwrap();
    assert_eq!(s.records.len(), 3);
    assert!(s.records[0].error.is_none());
    assert_eq!(s.records[2].error.as_ref().unwrap().code, "pwt_core.maps_outside");
}

#[test]
fn artifacts_do_not_depend_on_thread_count() {
    let text = r#"
seed = 5

[map]
kind = "torus_double_rotation"
corner = [0.1, 0.2]
size = [0.3, 0.45]
gamma1 = [0.61, 0.36]
gamma2 = [0.083, 0.85]

[run]
h = 0.0078125
n_max = 500
snapshots = [1, 3]

[circle]
alpha = "381966/1000003"
beta = "61803/1000003"
delta = "1/2"
n = 300
runs = 6

[sweep]
axes = [{ vector = 0, component = 0, lo = "0.05", hi = "0.4", steps = 5 }]
"#;
    let cfg = ExperimentConfig::parse(text).unwrap();
    for mode in [Mode::Iterate, Mode::RandomDr, Mode::Sweep, Mode::Render] {
        let pool = |n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
        let a = pool(1).install(|| run(&cfg, mode)).unwrap();
        let b = pool(4).install(|| run(&cfg, mode)).unwrap();
        assert_eq!(a.artifacts, b.artifacts, "{mode:?}");
    }
}

#[test]
fn presets_are_listed_and_printable() {
    let out = bin().args(["preset", "--list"]).output().unwrap();
    let names = String::from_utf8(out.stdout).unwrap();
    assert_eq!(names.lines().count(), 3);
    for n in names.lines() {
        let out = bin().args(["preset", n]).output().unwrap();
        let cfg = ExperimentConfig::parse(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
        assert_eq!(ExperimentConfig::parse(&cfg.to_toml().unwrap()).unwrap(), cfg);
    }
}
