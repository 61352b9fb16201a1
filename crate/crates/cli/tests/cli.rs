use serde_json::Value;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mubkit")).args(args).env_remove("MUBKIT_SEED").output().expect("binary runs")
}

fn run_seeded(args: &[&str], seed: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mubkit")).args(args).env("MUBKIT_SEED", seed).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf8")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json output")
}

#[test]
fn verify_reports_pass() {
    let o = run(&["verify", "--p", "3", "--m", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("all N+1 bases pairwise MU: PASS\n"));
}

#[test]
fn mub_export_is_exact_and_deterministic() {
    let a = run(&["mub", "--p", "2", "--m", "2", "--export"]);
    let b = run(&["mub", "--p", "2", "--m", "2", "--export"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    let hs = v["hadamards"].as_array().unwrap();
    assert_eq!(hs.len(), 4);
    for h in hs {
        assert_eq!(h["repr"], "exact");
        assert_eq!(h["order"], 4);
        assert_eq!(h["scaleRat"], "1/2");
        assert_eq!(h["scalePow"], 0);
    }
}

#[test]
fn meanking_grids() {
    let o = run(&["meanking", "--n", "4", "--grids"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("i = 0\n3 3 3 3\n2 2 2 2\n1 1 1 1\n0 0 0 0\n"));
    assert!(text.contains("i = 4\n0 1 2 3\n0 1 2 3\n0 1 2 3\n0 1 2 3\n"));
    let v = json(&run(&["meanking", "--n", "4", "--grids", "--format", "json"]));
    assert_eq!(v["grids"][2][2][1], 2);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["mub", "--p", "6"]).status.code(), Some(2));
    assert_eq!(run(&["nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["hadamard", "build", "nosuch:1"]).status.code(), Some(2));
    assert_eq!(run(&["hadamard", "muhm", "--n", "9"]).status.code(), Some(1));
    assert_eq!(run(&["hadamard", "muhm", "--n", "7"]).status.code(), Some(0));
}

#[test]
fn seed_controls_stochastic_output() {
    let a = run_seeded(&["teleport", "--p", "3"], "5");
    let b = run_seeded(&["teleport", "--p", "3"], "5");
    let c = run_seeded(&["teleport", "--p", "3"], "6");
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let d = run_seeded(&["teleport", "--p", "3", "--seed", "6"], "5");
    assert_eq!(d.stdout, c.stdout);
}

#[test]
fn reports_carry_tolerances() {
    for args in [
        &["bell", "--p", "2", "--m", "2"][..],
        &["clone", "--p", "3"],
        &["swap", "--p", "5", "--bm", "1", "--bn", "2"],
        &["tomo", "--p", "3", "--samples", "5"],
        &["wigner", "--p", "3"],
        &["hadamard", "check", "F6:0.1,0.2"],
        &["hadamard", "defect", "fourier:4"],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}");
        assert!(!json(&o)["tol"].is_null(), "{args:?}");
    }
    assert_eq!(json(&run(&["hadamard", "defect", "fourier:4"]))["defect"], 1);
}

#[test]
fn hadamard_file_round_trip() {
    let path = std::env::temp_dir().join(format!("mubkit-cli-test-{}.json", std::process::id()));
    let p = path.to_str().unwrap();
    assert_eq!(run(&["hadamard", "build", "dita:0.05", "--out", p]).status.code(), Some(0));
    let o = run(&["hadamard", "check", p]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["hadamard"], true);
    let eq = json(&run(&["hadamard", "equiv", p, "dita:0.05"]));
    assert_eq!(eq["verdict"], "equivalent");
    std::fs::remove_file(path).ok();
}

#[test]
fn search_and_gnum() {
    let v = json(&run(&["search", "unbiased", "--family", "fourier", "--params", "3"]));
    assert_eq!(v["Nv"], 6);
    assert_eq!(v["Nt"], 2);
    let g = run(&["gnum", "--max", "100", "--csv"]);
    assert!(stdout(&g).starts_with("N,g,g_over_N_minus_1,prime\n2,"));
    let v = json(&run(&["gnum", "--max", "1000"]));
    assert_eq!(v["negativeCount"], 92);
}

#[test]
fn selftests_pass() {
    for cmd in ["field", "mub", "bell", "meanking", "wigner", "tomo", "hadamard", "search", "gnum", "export"] {
        let o = run(&[cmd, "--selftest"]);
        assert_eq!(o.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(json(&o)["pass"], true);
    }
}
