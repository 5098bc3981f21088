use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_zeno-steer"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn measure_bound_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let scenario = scenarios().join("qubit-pi-rotation.json");
    let o = run(&["steer-measure", "--scenario", scenario.to_str().unwrap(), "--steps", "100", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("N,p_all,p_final,epsilon,bound,mc_estimate,mc_stderr,seed\n"));
    let a = std::f64::consts::FRAC_PI_2;
    let eps = 4.0 * a * a / 100.0 * (2.0 * a / 100.0).exp();
    let bound = column(&csv, "bound")[0];
    assert!((bound - (1.0 - eps * eps.exp())).abs() < 1e-12);
    assert!((bound - 0.88723).abs() < 5e-6, "{bound}");
    let p_all = column(&csv, "p_all")[0];
    assert!((p_all - (a / 100.0).cos().powi(200)).abs() < 1e-9);
}

#[test]
fn missing_scenario_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let o = run(&["steer-measure", "--scenario", "/nonexistent/x.json", "--steps", "4", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/nonexistent/x.json"));
}

#[test]
fn invalid_payload_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"schema_version":1,"mode":"measure","sys_qubits":1,"tau":1.0,
            "schedule":{"kind":"constant","op":[[[0,0],[1,0]],[[0,0],[0,0]]]}}"#,
    );
    let out = dir.path().join("run.csv");
    let o = run(&["steer-measure", "--scenario", bad.to_str().unwrap(), "--steps", "4", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("schedule.op"), "{}", stderr(&o));
}

#[test]
fn same_seed_gives_identical_csv_and_manifest_digests() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = scenarios().join("corpus/measure-s1-b1-g0.2-tau1.json");
    let mut bodies = Vec::new();
    for (i, threads) in ["1", "4"].iter().enumerate() {
        let out = dir.path().join(format!("run{i}.csv"));
        let o = bin()
            .env("ZENO_STEER_THREADS", threads)
            .args(["steer-measure", "--scenario", scenario.to_str().unwrap(), "--steps", "4,8,16", "--traj", "2000", "--seed", "11", "--out", out.to_str().unwrap()])
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
        let body = std::fs::read(&out).unwrap();
        let manifest: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join(format!("run{i}.csv.manifest.json"))).unwrap()).unwrap();
        let input = std::fs::read(&scenario).unwrap();
        assert_eq!(manifest["scenario_sha256"], hex::encode(Sha256::digest(&input)));
        assert_eq!(manifest["output_sha256"], hex::encode(Sha256::digest(&body)));
        assert_eq!(manifest["seed"], 11);
        assert_eq!(manifest["schema_version"], 1);
        assert!(manifest["timestamp"].as_str().is_some_and(|t| !t.is_empty()));
        assert!(manifest["command_line"].as_array().unwrap().iter().any(|a| a == "steer-measure"));
        bodies.push(body);
    }
    assert_eq!(bodies[0], bodies[1]);
    let csv = String::from_utf8(bodies.pop().unwrap()).unwrap();
    for (p, (mc, se)) in column(&csv, "p_final").iter().zip(column(&csv, "mc_estimate").iter().zip(column(&csv, "mc_stderr"))) {
        assert!((p - mc).abs() <= 4.0 * se + 1e-12);
    }
}

#[test]
fn noiseless_pulse_study_converges_at_inverse_n() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pulse.csv");
    let scenario = scenarios().join("qubit-pulse.json");
    let steps = "16,32,64,128,256,512,1024,2048,4096";
    let o = run(&["steer-pulse", "--scenario", scenario.to_str().unwrap(), "--steps", steps, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("N,weight,one_minus_weight,residual_norm,m,min_phase_gap\n"));
    let fit = csv.lines().find(|l| l.starts_with("# fit one_minus_weight")).unwrap();
    let slope: f64 = fit
        .split_once("slope=")
        .and_then(|(_, r)| r.split(',').next())
        .and_then(|s| s.parse().ok())
        .unwrap_or_else(|| panic!("no slope in {fit:?}"));
    assert!((-1.2..=-0.8).contains(&slope), "{fit}");
}

#[test]
fn pulse_without_drive_keeps_full_weight() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(
        dir.path(),
        "idle.json",
        r#"{"schema_version":1,"mode":"pulse","sys_qubits":1,"tau":1.0,
            "schedule":{"kind":"constant","op":"0*Z"},
            "pulse":{"unitary":"Z","nu":0}}"#,
    );
    let out = dir.path().join("pulse.csv");
    let o = run(&["steer-pulse", "--scenario", scenario.to_str().unwrap(), "--steps", "4,8,16", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(column(&csv, "weight").iter().all(|w| *w == 1.0), "{csv}");
    assert!(dir.path().join("pulse.csv.manifest.json").is_file());
}

#[test]
fn pulse_precondition_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(
        dir.path(),
        "outside.json",
        r#"{"schema_version":1,"mode":"pulse","sys_qubits":1,"tau":1.0,
            "schedule":{"kind":"constant","op":"Y"},
            "initial":{"state":{"basis":1}},
            "pulse":{"unitary":"Z","nu":0}}"#,
    );
    let out = dir.path().join("pulse.csv");
    let o = run(&["steer-pulse", "--scenario", scenario.to_str().unwrap(), "--steps", "4", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("P_nu"), "{}", stderr(&o));
}

#[test]
fn bounds_examples() {
    let o = run(&["bounds", "--delta", "0.1", "--k-norm", "1", "--h-norm", "0", "--tau", "1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lambda: f64 = text.lines().find_map(|l| l.strip_prefix("lambda = ")).unwrap().parse().unwrap();
    assert!((lambda - 45.8).abs() < 0.05, "{text}");
    assert!(text.contains("round trip") && text.contains("<= delta"));

    let o = run(&["bounds", "--delta", "1.5", "--k-norm", "1", "--h-norm", "0", "--tau", "1"]);
    assert_eq!(o.status.code(), Some(1));

    let o = run(&["bounds", "--delta", "0.1", "--k-norm", "0", "--h-norm", "0", "--tau", "1"]);
    assert!(stdout(&o).lines().any(|l| l == "lambda = 0"));
}

#[test]
fn ergodic_alternating_sum() {
    let o = run(&["ergodic", "--phi", "3.141592653589793", "--k", "1", "--steps", "2,10,1024"]);
    assert!(o.status.success());
    let csv = stdout(&o);
    assert!(csv.starts_with("k_or_fn,phi,N,re,im,magnitude,predicted_limit\n"));
    for m in column(&csv, "magnitude") {
        assert!((m - 0.5).abs() < 1e-12);
    }
    let o = run(&["ergodic", "--phi", "1", "--fn", "cosh", "--steps", "8"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_passes_on_pristine_build() {
    let o = run(&["verify"]);
    println!("{}", stdout(&o));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn verify_rejects_mutated_bound_formula() {
    let o = run(&["verify", "--epsilon-prefactor", "3.9"]);
    let text = stdout(&o);
    assert_ne!(o.status.code(), Some(0));
    let line = |id: &str| text.lines().find(|l| l.split_whitespace().nth(1) == Some(id)).unwrap().to_string();
    assert!(line("1").starts_with("PASS"), "{text}");
    assert!(line("4").starts_with("FAIL"), "{text}");
}

#[test]
fn verify_checks_corpus_digests() {
    let dir = tempfile::tempdir().unwrap();
    for entry in std::fs::read_dir(scenarios().join("corpus")).unwrap() {
        let p = entry.unwrap().path();
        std::fs::copy(&p, dir.path().join(p.file_name().unwrap())).unwrap();
    }
    let victim = dir.path().join("measure-s1-b2-g0.2-tau1.json");
    let text = std::fs::read_to_string(&victim).unwrap().replace("\"tau\": 1.0", "\"tau\": 1.5");
    std::fs::write(&victim, text).unwrap();
    let o = run(&["verify", "--corpus", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("digest"), "{}", stderr(&o));

    std::fs::remove_file(dir.path().join("SHA256SUMS")).unwrap();
    std::fs::write(&victim, "{ not json").unwrap();
    let o = run(&["verify", "--corpus", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_accepts_checked_in_corpus() {
    let o = run(&["verify", "--corpus", scenarios().join("corpus").to_str().unwrap()]);
    let text = stdout(&o);
    assert!(text.contains("corpus: 36 scenarios"), "{text}{}", stderr(&o));
    assert_ne!(o.status.code(), Some(1), "{}", stderr(&o));
}
