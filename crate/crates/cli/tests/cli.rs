use std::process::{Command, Output};

use serde_json::Value;

fn a2zeta(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_a2zeta"))
        .args(args)
        .env_remove("A2ZETA_BUDGET")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn funeq_passes_and_negative_control_fails() {
    for algebra in ["sl3", "su3"] {
        let out = a2zeta(&["funeq", "--algebra", algebra]);
        assert_eq!(out.status.code(), Some(0));
        assert!(stderr(&out).contains("identity: PASS, factor q^8"));
        let out = a2zeta(&["funeq", "--algebra", algebra, "--perturb"]);
        assert_eq!(out.status.code(), Some(1));
        assert_eq!(json(&out)["result"]["pass"], false);
    }
}

#[test]
fn enumerate_rejects_char_three_unless_allowed() {
    let out = a2zeta(&["enumerate", "--algebra", "sl3", "--p", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("p = 3 unsupported"));
    let out = a2zeta(&["enumerate", "--algebra", "sl3", "--p", "3", "--allow-char3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["result"]["exploratory"].is_string());
}

#[test]
fn enumerate_su3_level_one_irregular_count() {
    let out = a2zeta(&["enumerate", "--algebra", "su3", "--p", "7", "--levels", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["summary"][0]["irregular"], "14706");
}

#[test]
fn enumerate_honours_budget_env() {
    let out = Command::new(env!("CARGO_BIN_EXE_a2zeta"))
        .args(["enumerate", "--algebra", "sl3", "--p", "2", "--levels", "2"])
        .env("A2ZETA_BUDGET", "1000")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("exceeds budget"));
}

#[test]
fn verify_refuses_non_permissible_level() {
    let out = a2zeta(&["verify", "--algebra", "sl3", "--p", "2", "--m", "1", "--kmax", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("not permissible"));
}

#[test]
fn verify_from_census_file() {
    let dir = std::env::temp_dir().join(format!("a2zeta-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("census.json");
    let path_str = path.to_str().unwrap();
    let out = a2zeta(&["enumerate", "--algebra", "sl3", "--p", "2", "--levels", "2", "--out", path_str]);
    assert_eq!(out.status.code(), Some(0));
    let out = a2zeta(&["verify", "--algebra", "sl3", "--p", "2", "--m", "2", "--kmax", "5", "--census", path_str]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["result"]["checks"][2]["census"], "200704");
    let hashes = v["manifest"]["input_hashes"].as_object().unwrap();
    assert_eq!(hashes.values().next().unwrap().as_str().unwrap().len(), 64);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn verify_su3_level_one() {
    let out = a2zeta(&["verify", "--algebra", "su3", "--p", "5", "--m", "1", "--kmax", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stderr(&out).matches("PASS").count(), 3);
}

#[test]
fn orbits_csv_matches_tables() {
    let out = a2zeta(&["orbits", "--algebra", "sl3", "--q", "5", "--emit", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "type,regularity,orbits,orbit_size,total,centraliser");
    assert_eq!(rows[2], "1,regular,1,14880,14880,25");
    assert_eq!(rows[8], "5,regular,4,18600,74400,20");
}

#[test]
fn finite_zeta_su3_q2() {
    let out = a2zeta(&["finite-zeta", "--group", "su3", "--q", "2", "--bruteforce"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["characters"], "16");
    assert_eq!(v["result"]["report"]["checks"]["order"], 216);
    assert_eq!(v["result"]["report"]["checks"]["classes_bruteforce"], 16);
}

#[test]
fn psi_flags_divergent_region() {
    let out = a2zeta(&["psi", "--variant", "inner", "--tag", "2a", "--s", "0.9", "--primes-up-to", "1000"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["sum"]["expected_divergent"], true);
    let out = a2zeta(&["psi", "--variant", "outer", "--tag", "4a", "--s", "1", "--q", "5"]);
    assert!((json(&out)["result"]["value"].as_f64().unwrap() - 1.6).abs() < 1e-12);
}

#[test]
fn euler_estimate() {
    let out = a2zeta(&["euler", "--family", "sl3", "--primes-up-to", "1000", "--cap", "1000000", "--expect", "1.0", "--tolerance", "0.2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let out = a2zeta(&["euler", "--family", "sl3", "--primes-up-to", "1000", "--cap", "1000000", "--expect", "2.0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn link_check_passes() {
    let out = a2zeta(&["link", "--p", "5", "--n-max", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["reports"].as_array().unwrap().len(), 3);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(a2zeta(&["orbits"]).status.code(), Some(2));
    assert_eq!(a2zeta(&["psi", "--variant", "sideways", "--tag", "4a", "--s", "1"]).status.code(), Some(2));
}

#[test]
fn outputs_are_deterministic() {
    let strip = |mut v: Value| {
        v["manifest"]["wall_time"] = Value::Null;
        if let Some(meta) = v.pointer_mut("/result/census/meta") {
            meta["wall_time"] = Value::Null;
        }
        v
    };
    for args in [
        &["enumerate", "--algebra", "sl3", "--p", "2", "--levels", "1"][..],
        &["finite-zeta", "--group", "heisenberg", "--q", "3", "--bruteforce"][..],
        &["orbits", "--algebra", "su3", "--q", "5", "--census"][..],
    ] {
        let a = strip(json(&a2zeta(args)));
        let b = strip(json(&a2zeta(args)));
        assert_eq!(a, b, "{args:?}");
    }
}
