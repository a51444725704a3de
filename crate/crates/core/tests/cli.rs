use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const E1_MTX: &str = "%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1\n2 1 1\n2 2 1\n";
const E1_RHS: &str = "%%MatrixMarket matrix array real general\n2 1\n1\n2\n";
const E1_SOL: &str = "%%MatrixMarket matrix array real general\n2 1\n1\n1\n";

fn apc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_apc"))
        .args(args)
        .env_remove("APC_FIXTURES")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn e1_files(dir: &Path) -> (String, String, String) {
    let a = dir.join("e1.mtx");
    let b = dir.join("e1_b.mtx");
    let x = dir.join("e1_x.mtx");
    fs::write(&a, E1_MTX).unwrap();
    fs::write(&b, E1_RHS).unwrap();
    fs::write(&x, E1_SOL).unwrap();
    let s = |p: &Path| p.to_str().unwrap().to_string();
    (s(&a), s(&b), s(&x))
}

#[test]
fn gen_is_deterministic() {
    let d = TempDir::new().unwrap();
    let one = d.path().join("one");
    let two = d.path().join("two");
    for out in [&one, &two] {
        let o = apc(&["gen", "6", "12", "0.5", "42", "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["A.mtx", "x_star.mtx", "manifest.json"] {
        assert_eq!(fs::read(one.join(f)).unwrap(), fs::read(two.join(f)).unwrap(), "{f}");
    }
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(one.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["seed"], 42);
}

#[test]
fn gen_rejects_short_systems() {
    let d = TempDir::new().unwrap();
    let o = apc(&["gen", "5", "3", "0", "1", "--out", d.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn gen_then_solve_round_trips() {
    let d = TempDir::new().unwrap();
    let g = d.path().to_str().unwrap();
    assert_eq!(code(&apc(&["gen", "8", "16", "0", "3", "--out", g])), 0);
    let a = d.path().join("A.mtx");
    let x = d.path().join("x_star.mtx");
    let from_files = apc(&[
        "solve",
        "--input",
        a.to_str().unwrap(),
        "--solution",
        x.to_str().unwrap(),
        "--m",
        "4",
    ]);
    let from_synth = apc(&["solve", "--synth", "8,16,0,3", "--m", "4"]);
    assert_eq!(code(&from_files), 0);
    assert_eq!(stdout(&from_files), stdout(&from_synth));
}

#[test]
fn analyze_e1() {
    let d = TempDir::new().unwrap();
    let (a, b, _) = e1_files(d.path());
    let o = apc(&["analyze", "--input", &a, "--rhs", &b, "--m", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["summary"]["kappa_X"].as_f64().unwrap() - 5.828427).abs() < 1e-6);
    assert!((v["methods"]["apc"]["rho"].as_f64().unwrap() - 0.414214).abs() < 1e-6);
    assert_eq!(v["config"]["m"], 2);
}

#[test]
fn analyze_one_row_per_block() {
    let d = TempDir::new().unwrap();
    let (a, b, _) = e1_files(d.path());
    let o = apc(&["analyze", "--input", &a, "--rhs", &b, "--m", "2"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["p"], 1);
}

#[test]
fn indivisible_rows_is_data_error() {
    let d = TempDir::new().unwrap();
    let (a, b, _) = e1_files(d.path());
    assert_eq!(code(&apc(&["analyze", "--input", &a, "--rhs", &b, "--m", "3"])), 2);
}

#[test]
fn missing_input_is_data_error() {
    assert_eq!(code(&apc(&["analyze", "--input", "/nonexistent/a.mtx", "--m", "1"])), 2);
}

#[test]
fn solve_e1_converges_and_simulation_matches() {
    let d = TempDir::new().unwrap();
    let (a, _, x) = e1_files(d.path());
    let seq = apc(&["solve", "--input", &a, "--solution", &x, "--m", "2", "--method", "apc"]);
    assert_eq!(code(&seq), 0);
    let csv = stdout(&seq);
    let last = csv.lines().last().unwrap();
    let fields: Vec<&str> = last.split(',').collect();
    assert!(fields[0].parse::<usize>().unwrap() <= 60);
    assert!(fields[1].parse::<f64>().unwrap() <= 1e-10);
    let sim = apc(&[
        "solve",
        "--input",
        &a,
        "--solution",
        &x,
        "--m",
        "2",
        "--method",
        "apc",
        "--simulate",
    ]);
    assert_eq!(stdout(&sim), csv);
}

#[test]
fn solve_outputs_are_byte_identical() {
    let d = TempDir::new().unwrap();
    let run = |sub: &str| {
        let out = d.path().join(sub);
        let o = apc(&[
            "solve",
            "--synth",
            "10,20,0,5",
            "--m",
            "2",
            "--method",
            "dhbm",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0);
        fs::read(out.join("trace.csv")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn bad_method_is_usage_error() {
    assert_eq!(
        code(&apc(&["solve", "--synth", "4,8,0,1", "--m", "2", "--method", "sgd"])),
        1
    );
}

#[test]
fn unknown_flag_is_usage_error() {
    assert_eq!(code(&apc(&["solve", "--bogus"])), 1);
    assert_eq!(code(&apc(&["--help"])), 0);
}

#[test]
fn divergence_exits_numerical_with_trace() {
    let d = TempDir::new().unwrap();
    let (a, _, x) = e1_files(d.path());
    let out = d.path().join("run");
    let o = apc(&[
        "solve",
        "--input",
        &a,
        "--solution",
        &x,
        "--m",
        "2",
        "--gamma",
        "1",
        "--eta",
        "30",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3);
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert!(trace.lines().count() > 2);
}

#[test]
fn explicit_and_optimal_conflict() {
    let o = apc(&[
        "solve",
        "--synth",
        "4,8,0,1",
        "--m",
        "2",
        "--optimal",
        "--gamma",
        "1",
        "--eta",
        "1",
    ]);
    assert_eq!(code(&o), 1);
}

#[test]
fn bench_e1_flags_apc() {
    let d = TempDir::new().unwrap();
    let (a, _, x) = e1_files(d.path());
    let out = d.path().join("bench");
    let o = apc(&[
        "bench",
        "--input",
        &a,
        "--solution",
        &x,
        "--m",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table: serde_json::Value = serde_json::from_slice(&fs::read(out.join("m2/comparison.json")).unwrap()).unwrap();
    let minimal: Vec<&str> = table["rows"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["minimal"] == true)
        .map(|r| r["method"].as_str().unwrap())
        .collect();
    assert!(minimal.contains(&"apc"));
    assert!(out.join("m2/traces/apc.csv").exists());
    let csv = fs::read_to_string(out.join("m2/comparison.csv")).unwrap();
    assert!(csv.starts_with("method,rho,T_predicted,T_empirical,iters\n"));
}

#[test]
fn bench_empty_method_set_is_usage_error() {
    assert_eq!(
        code(&apc(&["bench", "--synth", "4,8,0,1", "--m", "2", "--method", ""])),
        1
    );
}

#[test]
fn bench_sweep_skips_non_divisors() {
    let o = apc(&[
        "bench",
        "--synth",
        "6,12,0,2",
        "--m-sweep",
        "2,5,3",
        "--method",
        "apc,cimmino",
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("# m=2 ") && text.contains("# m=3 "));
    assert!(!text.contains("# m=5 "));
    assert!(String::from_utf8_lossy(&o.stderr).contains("skipped m=5"));
}

#[test]
fn gaussian_ordering_holds() {
    let o = apc(&[
        "bench",
        "--synth",
        "100,100,0,11",
        "--m",
        "10",
        "--method",
        "dgd,dnag,dhbm,cimmino,apc",
        "--max-iters",
        "1",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let t = |m: &str| -> f64 {
        stdout(&o)
            .lines()
            .find(|l| l.starts_with(&format!("{m},")))
            .unwrap()
            .split(',')
            .nth(2)
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!(t("apc") < t("cimmino"));
    assert!(t("dhbm") < t("dnag") && t("dnag") < t("dgd"));
}

#[test]
fn message_log_has_two_lines_per_worker_round() {
    let d = TempDir::new().unwrap();
    let out = d.path().join("sim");
    let o = apc(&[
        "solve",
        "--synth",
        "6,12,0,4",
        "--m",
        "3",
        "--max-iters",
        "5",
        "--tol",
        "0",
        "--log-messages",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let log = fs::read_to_string(out.join("messages.jsonl")).unwrap();
    assert_eq!(log.lines().count(), 5 * 2 * 3);
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["simulate"], true);
    assert_eq!(manifest["messages"]["messages"], 30);
}

#[test]
fn flags_override_config_file() {
    let d = TempDir::new().unwrap();
    let cfg = d.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"synth": {"n": 4, "rows": 8, "mean": 0.0, "seed": 1}, "m": 4, "methods": ["cimmino"]}"#,
    )
    .unwrap();
    let out = d.path().join("o");
    let o = apc(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--m",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["m"], 2);
    assert_eq!(manifest["config"]["methods"][0], "cimmino");
    assert_eq!(manifest["params"]["method"], "cimmino");
}

#[test]
fn unknown_config_key_is_usage_error() {
    let d = TempDir::new().unwrap();
    let cfg = d.path().join("cfg.json");
    fs::write(&cfg, r#"{"workers": 3}"#).unwrap();
    assert_eq!(code(&apc(&["analyze", "--config", cfg.to_str().unwrap()])), 1);
}

#[test]
fn fixture_without_env_is_usage_error() {
    assert_eq!(code(&apc(&["analyze", "--fixture", "ash608", "--m", "4"])), 1);
}
