use std::path::Path;
use std::process::{Command, Output};

use wprec::arith::parse_rational;

fn wprec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wprec"))
        .args(args)
        .env_remove("WPREC_CACHE")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = wprec(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn compute_examples() {
    assert_eq!(stdout(&["compute", "-g", "1", "--kappa", "1:1", "--psi", "0"]), "1/24\n");
    assert_eq!(stdout(&["compute", "-g", "0", "--psi", "0,0,0"]), "1\n");
    assert_eq!(stdout(&["compute", "-g", "2", "--kappa", "1:3"]), "43/2880\n");
    assert_eq!(stdout(&["compute", "-g", "2", "--psi", "4"]), "1/1152\n");
}

#[test]
fn off_dimension_prints_zero_and_strict_flags_it() {
    assert_eq!(stdout(&["compute", "-g", "1", "--kappa", "1:1", "--psi", "1"]), "0\n");
    let strict = wprec(&["--strict", "compute", "-g", "1", "--kappa", "1:1", "--psi", "1"]);
    assert_eq!(strict.status.code(), Some(3));
    assert_eq!(String::from_utf8_lossy(&strict.stdout), "0\n");
    assert!(String::from_utf8_lossy(&strict.stderr).contains("off dimension"));
}

#[test]
fn parse_failures_exit_nonzero() {
    for args in [
        &["compute", "-g", "1", "--kappa", "1:x", "--psi", "0"][..],
        &["compute", "-g", "1", "--psi", "0,-1"],
        &["hodge", "-g", "1", "--pairing", "lambda_7", "--psi", "0"],
    ] {
        let out = wprec(args);
        assert!(!out.status.success(), "{args:?}");
        assert!(out.stdout.is_empty());
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn volume_examples() {
    assert_eq!(stdout(&["volume", "-g", "0", "-n", "4", "--kappa", "1:1"]), "1\n");
    assert_eq!(stdout(&["volume", "-g", "1", "-n", "1", "--kappa", "1:1"]), "1/24\n");
    assert_eq!(stdout(&["volume", "-g", "2", "-n", "0", "--kappa", "1:3"]), "43/2880\n");
}

#[test]
fn hodge_examples() {
    assert_eq!(stdout(&["hodge", "-g", "1", "--psi", "0"]), "1/24\n");
    assert_eq!(stdout(&["hodge", "-g", "2", "--psi", "2"]), "7/5760\n");
    assert_eq!(stdout(&["hodge", "-g", "2", "--kappa", "1:1", "--psi", "1"]), "7/1920\n");
    assert_eq!(
        stdout(&["hodge", "-g", "2", "--kappa", "1:1", "--psi", "1", "--expanded"]),
        "7/1920\n"
    );
    assert_eq!(stdout(&["hodge", "-g", "2", "--pairing", "lambda_g_lambda_gm1", "--psi", "1"]), "1/2880\n");
}

#[test]
fn provider_file_rescales() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("provider.txt");
    std::fs::write(&path, "# one-point values\n1,lambda_g,1/12\n2,lambda_g,7/2880\n").unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(stdout(&["hodge", "-g", "1", "--psi", "0", "--provider", p]), "1/12\n");
    assert_eq!(
        stdout(&["hodge", "-g", "2", "--kappa", "1:1", "--psi", "1", "--provider", p]),
        "7/960\n"
    );
}

#[test]
fn json_round_trips() {
    let text = stdout(&["--json", "compute", "-g", "2", "--kappa", "1:1,2:1", "--psi", "2,0"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["genus"], 2);
    assert_eq!(v["kappa"], "1:1,2:1");
    assert_eq!(v["psi"], serde_json::json!([2, 0]));
    let value = parse_rational(v["value"].as_str().unwrap()).unwrap();
    let plain = stdout(&["compute", "-g", "2", "--kappa", "1:1,2:1", "--psi", "2,0"]);
    assert_eq!(value, parse_rational(plain.trim()).unwrap());

    let table = stdout(&["--json", "table", "--constants", "gamma_odd", "--max-weight", "3"]);
    let rows: Vec<serde_json::Value> = serde_json::from_str(&table).unwrap();
    assert!(rows.len() >= 7);
    for row in rows {
        parse_rational(row["value"].as_str().unwrap()).unwrap();
    }
}

#[test]
fn decimal_is_extra() {
    assert_eq!(
        stdout(&["--decimal", "4", "compute", "-g", "1", "--kappa", "1:1", "--psi", "0"]),
        "1/24 ~ 0.0416\n"
    );
    let v: serde_json::Value =
        serde_json::from_str(&stdout(&["--json", "--decimal", "3", "volume", "-g", "1", "-n", "1", "--kappa", "1:1"]))
            .unwrap();
    assert_eq!(v["value"], "1/24");
    assert_eq!(v["value_decimal"], "0.041");
}

#[test]
fn tables() {
    let alpha = stdout(&["table", "--constants", "alpha", "--max-weight", "4"]);
    assert!(alpha.lines().any(|l| l == "1:1, 1/3"), "{alpha}");
    let csv = stdout(&["--csv", "table", "--constants", "alpha", "--max-weight", "2"]);
    assert_eq!(csv, "index,value\n0,1\n1:1,1/3\n1:2,7/45\n2:1,1/15\n");
    let vols = stdout(&["--csv", "table", "--volumes", "--max-genus", "1", "--max-points", "2"]);
    assert!(vols.starts_with("genus,points,kappa,value\n"));
    assert!(vols.contains("1,2,1:2,1/8\n"), "{vols}");
    assert!(!wprec(&["table"]).status.success());
}

#[test]
fn verify_reports() {
    let text = stdout(&["verify", "--suite", "oracle", "--max-dim", "5"]);
    assert!(text.starts_with("oracle: PASS ("), "{text}");
    assert!(text.trim_end().ends_with("cases)"));
    assert!(stdout(&["verify", "--shift", "--cutoff", "3"]).contains("PASS"));
    assert!(stdout(&["verify", "--oracle", "--max-dim", "3"]).contains("PASS"));
    for suite in ["kappa-subtracted", "pivot", "string", "dilaton", "kdv", "volumes", "constants"] {
        assert!(stdout(&["verify", "--suite", suite, "--max-dim", "4"]).contains("PASS"), "{suite}");
    }
    let v: serde_json::Value =
        serde_json::from_str(&stdout(&["--json", "verify", "--suite", "hodge", "--max-genus", "2"])).unwrap();
    assert_eq!(v["passed"], true);
    assert!(v["cases"].as_i64().unwrap() > 0);
    assert_eq!(wprec(&["verify", "--suite", "bogus"]).status.code(), Some(2));
}

fn cache_lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().map(str::to_string).collect()
}

#[test]
fn cache_is_deterministic_and_checkable() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("values.cache");
    let c = cache.to_str().unwrap();
    let runs: [&[&str]; 4] = [
        &["compute", "-g", "2", "--kappa", "1:2", "--psi", "3,0"],
        &["volume", "-g", "1", "-n", "3", "--kappa", "1:3"],
        &["hodge", "-g", "2", "--kappa", "1:1", "--psi", "1"],
        &["--json", "table", "--volumes", "--max-genus", "1", "--max-points", "3"],
    ];
    for args in runs {
        let mut with_cache = vec!["--cache", c];
        with_cache.extend_from_slice(args);
        let cold = wprec(&with_cache);
        let warm = wprec(&with_cache);
        assert!(cold.status.success() && warm.status.success());
        assert_eq!(cold.stdout, warm.stdout, "{args:?}");
        assert_eq!(cold.stdout, wprec(args).stdout, "{args:?}");
    }
    let lines = cache_lines(&cache);
    assert_eq!(lines[0], "wprec-cache v1");
    assert!(lines.iter().any(|l| l.starts_with("corr/2/1:2/3,0\t")));
    assert!(lines.iter().any(|l| l == "vol/1/3/1:3\t7/6"), "{lines:?}");
    assert!(lines.iter().any(|l| l == "hodge/lambda_g/2/1:1/1\t7/1920"));
    let mut keys: Vec<&str> = lines[1..].iter().map(|l| l.split('\t').next().unwrap()).collect();
    let total = keys.len();
    keys.sort();
    keys.dedup();
    assert_eq!(keys.len(), total, "one record per key");

    let check = stdout(&["--cache", c, "verify", "--suite", "cache"]);
    assert!(check.starts_with("cache: PASS"), "{check}");

    // the environment variable is the default location
    let out = Command::new(env!("CARGO_BIN_EXE_wprec"))
        .args(["compute", "-g", "3", "--psi", "7"])
        .env("WPREC_CACHE", c)
        .output()
        .unwrap();
    assert_eq!(String::from_utf8_lossy(&out.stdout), "1/82944\n");
    assert!(cache_lines(&cache).iter().any(|l| l == "corr/3//7\t1/82944"));

    // a tampered record is caught by the self-check
    let text = std::fs::read_to_string(&cache).unwrap().replace("vol/1/3/1:3\t7/6", "vol/1/3/1:3\t7/5");
    std::fs::write(&cache, text).unwrap();
    let bad = wprec(&["--cache", c, "verify", "--suite", "cache"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stdout).contains("vol/1/3/1:3"));
}

#[test]
fn bad_cache_header_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("other.cache");
    std::fs::write(&cache, "not a cache\n").unwrap();
    let out = wprec(&["--cache", cache.to_str().unwrap(), "compute", "-g", "0", "--psi", "0,0,0"]);
    assert!(!out.status.success());
}
