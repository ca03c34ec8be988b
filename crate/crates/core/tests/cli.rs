use std::fs;
use std::path::Path;
use std::process::Command;

use fluxlat::cli::{parse_and_dispatch, EXIT_CAPACITY, EXIT_IO, EXIT_OK, EXIT_VALIDATION};

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = parse_and_dispatch(
        std::iter::once("fluxlat").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn configs() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs"))
}

fn config(name: &str) -> String {
    configs().join(name).display().to_string()
}

#[test]
fn shipped_configs_validate() {
    for name in [
        "ft.json",
        "flux_tube.json",
        "effective_compare.json",
        "stagger_check.json",
        "sector_count.json",
    ] {
        let (code, out, err) = call(&["validate", "--config", &config(name)]);
        assert_eq!(code, EXIT_OK, "{name}: {err}");
        assert!(out.starts_with("ok: "), "{out}");
    }
}

#[test]
fn odd_separation_config_is_rejected() {
    let (code, _, err) = call(&["validate", "--config", &config("charges_odd.json")]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(err.contains("only even R"), "{err}");
}

#[test]
fn sector_count_config() {
    let (code, out, _) = call(&["sector-count", "--config", &config("sector_count.json")]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().next(), Some("7"));
    assert!(out.contains("(match)"));
}

#[test]
fn potential_writes_table_and_record() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let (code, out, err) = call(&[
        "potential",
        "--lx",
        "5",
        "--ly",
        "3",
        "--trunc",
        "1",
        "--g2",
        "10",
        "--r-list",
        "2,4",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("slope:"));
    let csv = fs::read_to_string(out_dir.join("potential.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some(fluxlat::observables::POTENTIAL_HEADER));
    assert_eq!(csv.lines().count(), 3);
    let record: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("run.json")).unwrap()).unwrap();
    assert_eq!(record["kind"], "potential");
    assert!(record["basis_sizes"]["vacuum"].as_u64().unwrap() > 0);
}

#[test]
fn repeated_runs_write_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for i in 0..2 {
        let out_dir = dir.path().join(format!("run{i}"));
        let (code, _, err) = call(&[
            "ground-state",
            "--config",
            &config("flux_tube.json"),
            "--trunc",
            "1",
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_OK, "{err}");
        files.push(fs::read(out_dir.join("field_map.csv")).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn exit_codes() {
    assert_eq!(call(&["potential", "--g2", "10", "--r-list", "3"]).0, EXIT_VALIDATION);
    assert_eq!(call(&["potential", "--g2", "-1"]).0, EXIT_VALIDATION);
    assert_eq!(call(&["validate", "--config", "/nonexistent/run.json"]).0, EXIT_IO);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"lattice\": {\"lx\": 3, \"colour\": 1}}").unwrap();
    let (code, _, err) = call(&["validate", "--config", bad.to_str().unwrap()]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(err.contains("line 1"), "{err}");

    let cfg = dir.path().join("big.json");
    fs::write(
        &cfg,
        r#"{"lattice": {"lx": 6, "ly": 6, "trunc": 3}, "coupling": {"g2": 1.0}, "solver": {"max_states": 1000}}"#,
    )
    .unwrap();
    assert_eq!(
        call(&["ground-state", "--config", cfg.to_str().unwrap()]).0,
        EXIT_CAPACITY
    );
}

#[test]
fn binary_runs() {
    let out = Command::new(env!("CARGO_BIN_EXE_fluxlat"))
        .args(["sector-count", "--lx", "2", "--ly", "2", "--trunc", "1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().next(), Some("3"));

    let out = Command::new(env!("CARGO_BIN_EXE_fluxlat"))
        .args(["bogus"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_VALIDATION));
}
