use std::path::Path;
use std::process::{Command, Output};

fn muskat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_muskat")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

#[test]
fn gamma_check_single_tuple() {
    let o = muskat(&["gamma", "check", "--k", "1", "--a", "1,2,-3"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    let g = v["closed_form"].as_f64().unwrap();
    let want = -16.0 * std::f64::consts::PI.powi(3);
    assert!((g - want).abs() <= 1e-12 * want.abs());
    assert!((g - v["oracle"].as_f64().unwrap()).abs() <= 1e-8 * g.abs());
}

#[test]
fn gamma_check_random_is_seeded() {
    let a = muskat(&["gamma", "check", "--k", "2", "--random", "10", "--seed", "7"]);
    let b = muskat(&["gamma", "check", "--k", "2", "--random", "10", "--seed", "7"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn gamma_check_needs_input() {
    assert_eq!(code(&muskat(&["gamma", "check"])), 1);
}

#[test]
fn sequence_gen_validates() {
    let o = muskat(&["sequence", "gen", "--N", "4"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["family"]["k0"], "128");
    assert_eq!(v["validation"]["b"], true);
    assert_eq!(v["family_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn capacity_exit_code() {
    let o = muskat(&["sequence", "gen", "--N", "80"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("capacity"));
}

#[test]
fn norm_eval_identity() {
    let v = stdout_json(&muskat(&["norm", "eval", "--N", "8"]));
    let a = v["size_sum"].as_f64().unwrap();
    let b = v["size_identity"].as_f64().unwrap();
    assert!((a / b - 1.0).abs() < 1e-14);
}

#[test]
fn iterate_assemble_counts() {
    let o = muskat(&["iterate", "assemble", "--N", "4", "--k", "1"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    let c = &v["counts"];
    let total = c["same_sign"].as_u64().unwrap() + c["underflow"].as_u64().unwrap() + c["kept"].as_u64().unwrap();
    assert!(total <= c["multisets"].as_u64().unwrap());
    assert!(v["norms"]["j_norm"].as_f64().unwrap() > 0.0);
    assert_eq!(v["window_ok"], true);
}

#[test]
fn oracle_compare_small_grid() {
    let o = muskat(&["oracle", "compare", "--samples", "4", "--half-width", "12"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout_json(&o)["rel_diff"].as_f64().unwrap() < 1e-4);
}

fn run_ledger(dir: &Path, threads: &str, sweep: &str) -> Output {
    muskat(&["--threads", threads, "--out", dir.to_str().unwrap(), "ledger", "run", "--sweep", sweep])
}

#[test]
fn ledger_outputs_are_thread_independent() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(code(&run_ledger(a.path(), "1", "4,8")), 0);
    assert_eq!(code(&run_ledger(b.path(), "3", "4,8")), 0);
    for f in ["ledger.csv", "ledger.json"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert_eq!(x, y, "{f}");
    }
    let csv = std::fs::read_to_string(a.path().join("ledger.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 3);
}

#[test]
fn trend_failure_exit_code() {
    // I_1 over [1, 2] and [2, 4] is not increasing
    let d = tempfile::tempdir().unwrap();
    let o = run_ledger(d.path(), "1", "1,2");
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("I1 increasing"));
    assert!(d.path().join("ledger.csv").exists());
}

#[test]
fn inflate_demo_with_config() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("experiment.json");
    std::fs::write(
        &cfg,
        r#"{"family":{"ell":1,"p":1.0,"q":4.0,"epsilon":0.1,"delta":1.0,"M":5},
            "sweep":[4],"times":{"kind":"absolute","values":[0.05]},"stem":"abs"}"#,
    )
    .unwrap();
    let o = muskat(&["--config", cfg.to_str().unwrap(), "--out", d.path().to_str().unwrap(), "inflate", "demo", "--r-target", "2", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["inflation"]["claim"], "Achieved");
    assert!(d.path().join("abs.csv").exists());
    assert!(!d.path().join("abs.json").exists());
}

#[test]
fn bad_config_is_an_error() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("c.json");
    std::fs::write(&cfg, "{\"sweep\": []}").unwrap();
    assert_eq!(code(&muskat(&["--config", cfg.to_str().unwrap(), "ledger", "run"])), 1);
}
