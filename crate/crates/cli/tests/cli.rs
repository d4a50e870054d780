use std::path::PathBuf;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tropical-lyapunov"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tropical-lyapunov-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

fn json(o: &Output) -> serde_json::Value {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn lambda_of(v: &serde_json::Value, method: &str) -> f64 {
    v["estimates"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["method"] == method)
        .unwrap_or_else(|| panic!("no {method} estimate"))["lambda"]
        .as_f64()
        .unwrap()
}

const FAST: [&str; 6] = ["--k", "2000", "--reps", "4", "--esamples", "20000"];

#[test]
fn same_seed_gives_identical_output() {
    let args = |seed: &'static str| {
        let mut a = vec!["run", "--preset", "closed_tandem", "--format", "csv", "--seed", seed];
        a.extend(FAST);
        a
    };
    let a = bin(&args("7"));
    let b = bin(&args("7"));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, bin(&args("8")).stdout);
}

#[test]
fn csv_header() {
    let mut args = vec!["run", "--preset", "open_tandem", "--method", "mc", "--format", "csv"];
    args.extend(FAST);
    let text = stdout(&bin(&args));
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# config: "));
    assert_eq!(lines[1], "method,lambda,stderr,ci_lo,ci_hi,k,reps,seed");
    assert!(lines[2].starts_with("monte_carlo,"));
    assert!(lines[2].ends_with(",2000,4,42"));
}

#[test]
fn exit_codes() {
    // clap usage errors
    assert_eq!(bin(&["run"]).status.code(), Some(2));
    assert_eq!(bin(&["run", "--preset", "open_tandem", "--matrix", "x"]).status.code(), Some(2));
    assert_eq!(bin(&["run", "--preset", "nope"]).status.code(), Some(2));
    let m = temp_file("bad.txt", "1 2 x\n3 4 5\n");
    assert_eq!(bin(&["run", "--matrix", m.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(
        bin(&["run", "--preset", "closed_tandem", "--customers", "1"]).status.code(),
        Some(3)
    );
    let cyclic = temp_file(
        "cyclic.json",
        r#"{"nodes": [{"id": 1, "c": 0, "service": "exp(1)"}, {"id": 2, "c": 0, "service": "exp(1)"}],
            "arcs": [[1, 2], [2, 1]]}"#,
    );
    assert_eq!(bin(&["run", "--spec", cyclic.to_str().unwrap()]).status.code(), Some(3));
    // no cycle: the mean matrix has no finite spectral radius
    let nilpotent = temp_file("nilpotent.txt", "-inf 1\n-inf -inf\n");
    let o = bin(&["run", "--matrix", nilpotent.to_str().unwrap(), "--method", "mc"]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn matrix_input_and_spectral_radius() {
    let m = temp_file("m.txt", "[[1,3],[0,2]]");
    let v = json(&bin(&[
        "run",
        "--matrix",
        m.to_str().unwrap(),
        "--method",
        "spectral-radius",
        "--format",
        "json",
    ]));
    assert_eq!(lambda_of(&v, "spectral_radius"), 2.0);
}

#[test]
fn convergence_drift_shrinks() {
    let m = temp_file("conv.txt", "[[1,3],[0,2]]");
    let v = json(&bin(&[
        "convergence",
        "--matrix",
        m.to_str().unwrap(),
        "--ks",
        "10,100,1000,10000",
        "--format",
        "json",
    ]));
    let drifts: Vec<f64> = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["drift"].as_f64().unwrap().abs())
        .collect();
    assert_eq!(drifts.len(), 4);
    assert!(drifts.windows(2).all(|w| w[0] > w[1]), "{drifts:?}");
    assert_eq!(drifts[3], 0.0);
    assert_eq!(bin(&["convergence", "--matrix", m.to_str().unwrap(), "--ks", "100,10"]).status.code(), Some(2));
}

#[test]
fn preset_closed_forms() {
    let v = json(&bin(&["run", "--preset", "open_tandem", "--method", "closed", "--format", "json"]));
    assert_eq!(lambda_of(&v, "triangular"), 1.0);

    let mut args = vec!["run", "--preset", "fork_join_5", "--format", "json"];
    args.extend(FAST);
    let v = json(&bin(&args));
    assert_eq!(lambda_of(&v, "backward_skeleton"), 5.0);
    assert!((lambda_of(&v, "monte_carlo") - 5.0).abs() < 5e-3);

    let v = json(&bin(&[
        "run",
        "--preset",
        "round_robin",
        "--services",
        "exp(0.25)",
        "exp(1)",
        "--arrival",
        "exp(1)",
        "--method",
        "decomp",
        "--format",
        "json",
    ]));
    assert_eq!(lambda_of(&v, "backward_skeleton"), 4.0);
}

#[test]
fn writes_to_out_file() {
    let out = std::env::temp_dir().join(format!("tropical-lyapunov-out-{}.json", std::process::id()));
    let o = bin(&[
        "run",
        "--preset",
        "closed_tandem",
        "--method",
        "closed",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(lambda_of(&v, "similarity"), 1.5);
    std::fs::remove_file(out).unwrap();
}
