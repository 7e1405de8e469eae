use std::process::{Command, Output};

use serde_json::Value;

fn enriq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_enriq"))
        .args(args)
        .env_remove("ENRIQ_CACHE")
        .output()
        .unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn error_kind(o: &Output) -> String {
    let v: Value = serde_json::from_slice(&o.stderr).unwrap();
    v["error"]["kind"].as_str().unwrap().to_string()
}

#[test]
fn construct_pair_k1() {
    let o = enriq(&["construct-pair", "--k", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["D1"]["pretty"], "-Delta+2E1+E2+E3+E4");
    assert_eq!(v["D2"]["pretty"], "Delta+E1-E5-E6-E7-E8-E9-E10");
    let neg = enriq(&["construct-pair", "--k", "-3"]);
    assert_eq!(neg.status.code(), Some(0));
}

#[test]
fn conjecture_nonpositive_h() {
    let o = enriq(&["conjecture", "--h", "E1-E2", "--bound", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["status"], "witness");
    assert_eq!(v["complete"], false);
    assert_eq!(v["D1"]["pretty"], "3E1+2E2-2E3-2E4-2E5-2E6-2E7-2E8+E9");
}

#[test]
fn conjecture_positive_h_is_complete() {
    let v = json(&enriq(&["conjecture", "--h", "2E1+E2+E3+E4"]));
    assert_eq!(v["status"], "witness");
    assert_eq!(v["complete"], true);
}

#[test]
fn ulrich_lines_shape() {
    let o = enriq(&["ulrich-lines", "--h", "Delta"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["solutions"].as_array().unwrap().len(), 1680);
    let counts: Vec<u64> = v["orbits"].as_array().unwrap().iter().map(|o| o["count"].as_u64().unwrap()).collect();
    assert_eq!(counts, [840, 840]);
    let first = &v["solutions"][0];
    for key in ["D", "D1", "D2"] {
        assert!(first[key]["t"].is_array(), "{key}");
    }
}

#[test]
fn cache_hit_matches_cold_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let cold = enriq(&["ulrich-lines", "--h", "2E1+E2+E3+E4"]);
    let miss = enriq(&["--cache-dir", d, "ulrich-lines", "--h", "2E1+E2+E3+E4"]);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    let hit = enriq(&["--cache-dir", d, "ulrich-lines", "--h", "2E1+E2+E3+E4"]);
    assert_eq!(cold.stdout, miss.stdout);
    assert_eq!(cold.stdout, hit.stdout);
}

#[test]
fn cache_env_overrides_flag() {
    let flag = tempfile::tempdir().unwrap();
    let env = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_enriq"))
        .args(["--cache-dir", flag.path().to_str().unwrap(), "ulrich-lines", "--h", "Delta"])
        .env("ENRIQ_CACHE", env.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_dir(flag.path()).unwrap().count(), 0);
    assert_eq!(std::fs::read_dir(env.path()).unwrap().count(), 1);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["ulrich-lines", "--h", "E1+"][..],
        &["ulrich-lines", "--h", "E11"],
        &["moduli-dim", "--r", "0", "--d", "E1"],
        &["no-such-command"],
        &["--workers", "0", "cotangent-check"],
        &["--format", "csv", "moduli-dim", "--r", "1", "--d", "E1"],
    ] {
        let o = enriq(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn domain_errors_exit_1() {
    let cases: [(&[&str], &str); 4] = [
        (&["ulrich-lines", "--h", "E1-E2"], "nonpositive-square"),
        (&["chain", "--r", "1", "--d", "E1"], "not-ulrich"),
        (&["toric", "scan", "--q", "4"], "invalid-modulus"),
        (&["chain", "--r", "2", "--d", "2E1+E2+E3+E4", "--d", "E1+2E2+E3+E4"], "chain-stuck"),
    ];
    for (args, kind) in cases {
        let o = enriq(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert_eq!(error_kind(&o), kind, "{args:?}");
    }
}

#[test]
fn help_and_version_exit_0() {
    assert_eq!(enriq(&["--help"]).status.code(), Some(0));
    assert_eq!(enriq(&["--version"]).status.code(), Some(0));
}

#[test]
fn csv_and_text_formats() {
    let o = enriq(&["--format", "csv", "cotangent-check"]);
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "class,square,mirror_square");
    assert_eq!(lines.len(), 5);
    assert!(lines[1..].iter().all(|l| l.ends_with(",-2,-2")));

    let o = enriq(&["--format", "csv", "ulrich-lines", "--h", "Delta"]);
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 1681);

    let o = enriq(&["--format", "text", "wild", "--r", "3"]);
    assert_eq!(String::from_utf8(o.stdout).unwrap().trim(), "r = 3: c1 = E1+E2+E3+E4+E5+E6+2E7+2E8+2E9+3E10, dim = 28");
}

#[test]
fn stability_scan_is_deterministic_without_timings() {
    let a = enriq(&["stability-scan", "--bound", "1"]);
    let b = enriq(&["stability-scan", "--bound", "1"]);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert!(v.get("elapsed_ms").is_none());
    assert_eq!(v["violations"].as_array().unwrap().len(), 0);
    let t = json(&enriq(&["stability-scan", "--bound", "1", "--timings"]));
    assert!(t["elapsed_ms"].is_u64());
}

#[test]
fn toric_sextic_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    std::fs::write(&path, r#"{"0,0,0": 1, "2,0,2": -3}"#).unwrap();
    let arg = format!("@{}", path.display());
    let o = enriq(&["toric", "sextic", "--poly", &arg]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let bad = enriq(&["toric", "sextic", "--poly", r#"{"1,0,0": 1}"#]);
    assert_ne!(bad.status.code(), Some(0));
}
