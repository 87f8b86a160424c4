use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn peeling(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_peeling"))
        .args(args)
        .env("PEELING_OUT_DIR", out_dir)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn cascade_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = peeling(
        &[
            "cascade",
            "--d",
            "5",
            "--nu",
            "4",
            "--mode",
            "generic",
            "--seed",
            "7",
            "--out",
            "report.json",
        ],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = json(&dir.path().join("report.json"));
    assert_eq!(v["all_pass"], true);
    for (name, c) in v["components"].as_object().unwrap() {
        assert_eq!(c["pass"], true, "{name}");
    }
    assert!(v["metadata"]["timestamp"].is_string());
    assert_eq!(v["config"]["seed"], 7);
}

#[test]
fn reports_are_byte_identical_without_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.json", "b.json"] {
        let out = peeling(
            &[
                "cascade",
                "--d",
                "6",
                "--nu",
                "5",
                "--seed",
                "4",
                "--no-timestamp",
                "--out",
                name,
            ],
            dir.path(),
        );
        assert_eq!(out.status.code(), Some(0));
    }
    let a = fs::read(dir.path().join("a.json")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.json")).unwrap());
    assert!(!String::from_utf8(a).unwrap().contains("timestamp"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "d = 6\nnu = 5\nmode = \"fully_decoupled\"\nseed = 3\n\n[tolerances]\nrtol = 1e-9\n",
    )
    .unwrap();
    let out = peeling(
        &[
            "cascade",
            "--config",
            cfg.to_str().unwrap(),
            "--nu",
            "6",
            "--out",
            "r.json",
        ],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = json(&dir.path().join("r.json"));
    assert_eq!(
        (v["d"].as_u64(), v["nu"].as_u64(), v["mode"].as_str()),
        (Some(6), Some(6), Some("fully_decoupled"))
    );
    assert_eq!(v["config"]["tolerances"]["rtol"], 1e-9);
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "d = 6\ncolour = 2\n").unwrap();
    let out = peeling(&["cascade", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("colour") && err.contains("line 2"), "{err}");
}

#[test]
fn invalid_values_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["cascade", "--d", "3"][..],
        &["cascade", "--mode", "sideways"],
        &["cascade", "--r-max", "-1"],
        &["selftest", "--exponent-tol", "-0.1"],
    ] {
        assert_eq!(peeling(args, dir.path()).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn csv_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = peeling(
        &[
            "cascade",
            "--d",
            "5",
            "--format",
            "both",
            "--out",
            "r.json",
            "--no-timestamp",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = dir.path().join("cascade_csv");
    for f in [
        "stage_plus1.csv",
        "stage_zero.csv",
        "stage_minus1.csv",
        "stage_minus2.csv",
        "sachs.csv",
        "exponents.csv",
    ] {
        assert!(csv.join(f).is_file(), "{f}");
    }
    let only_csv = peeling(
        &[
            "cascade",
            "--d",
            "5",
            "--format",
            "csv",
            "--csv-dir",
            "only",
        ],
        dir.path(),
    );
    assert_eq!(only_csv.status.code(), Some(0));
    assert!(only_csv.stdout.is_empty());
    assert!(dir.path().join("only/exponents.csv").is_file());
}

#[test]
fn decompose_zero_tensor() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("weyl.json"),
        r#"{"d": 5, "components": []}"#,
    )
    .unwrap();
    let input = dir.path().join("weyl.json");
    let out = peeling(
        &[
            "decompose",
            "--in",
            input.to_str().unwrap(),
            "--out",
            "parts.json",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let v = json(&dir.path().join("parts.json"));
    assert_eq!(v["d"], 5);
    fn all_zero(v: &Value) -> bool {
        match v {
            Value::Array(a) => a.iter().all(all_zero),
            Value::Object(o) => o.values().all(all_zero),
            Value::Number(n) => n.as_f64() == Some(0.0) || n.as_u64().is_some(),
            _ => true,
        }
    }
    assert!(all_zero(&v));
}

#[test]
fn decompose_rejects_a_non_weyl_tensor() {
    let dir = tempfile::tempdir().unwrap();
    // C_0101 alone has a nonzero trace
    let input = dir.path().join("bad.json");
    fs::write(
        &input,
        r#"{"d": 5, "components": [{"idx": [0, 1, 0, 1], "val": 1.0}]}"#,
    )
    .unwrap();
    let out = peeling(&["decompose", "--in", input.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn prop1_random_system_is_bounded() {
    let dir = tempfile::tempdir().unwrap();
    let out = peeling(&["prop1", "--n", "4", "--seed", "3"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["bounded"], true);
    assert_eq!(v["n"], 4);
}

#[test]
fn prop1_system_file() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    fs::write(
        &good,
        r#"{"a": [[-1, 0.5], [0, 0]], "b": [1, 1], "y0": [0.2, -0.3]}"#,
    )
    .unwrap();
    let out = peeling(&["prop1", "--system", good.to_str().unwrap()], dir.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"a": [[0.5]], "y0": [1]}"#).unwrap();
    assert_eq!(
        peeling(&["prop1", "--system", bad.to_str().unwrap()], dir.path())
            .status
            .code(),
        Some(2)
    );
    // the Jordan block at 0 satisfies the hypothesis but grows like ln r
    let jordan = dir.path().join("jordan.json");
    fs::write(&jordan, r#"{"a": [[0, 1], [0, 0]], "y0": [0, 1]}"#).unwrap();
    assert_eq!(
        peeling(&["prop1", "--system", jordan.to_str().unwrap()], dir.path())
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn selftest_catches_injected_fault() {
    let dir = tempfile::tempdir().unwrap();
    let out = peeling(
        &["selftest", "--inject-fault", "checkv-sign", "--json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let rows: Value = serde_json::from_slice(&out.stdout).unwrap();
    let failed: Vec<u64> = rows
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["pass"] == false)
        .map(|r| r["id"].as_u64().unwrap())
        .collect();
    assert!(failed.contains(&6) && !failed.contains(&1), "{failed:?}");
    let row6 = &rows[5]["detail"];
    assert!(row6.as_str().unwrap().contains("checkv -"), "{row6}");
}

#[test]
fn selftest_tight_tolerance_fails_bias_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = peeling(
        &["selftest", "--exponent-tol", "0.001", "--json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let rows: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows[8]["pass"], false);
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = peeling(&["selftest"], dir.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("9/9 criteria passed"));
}
