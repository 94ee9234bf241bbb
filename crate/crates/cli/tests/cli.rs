use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use serde_json::Value;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_teukolsky")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str], cache: &Path) -> Output {
    Command::new(bin()).args(args).env("TEUKOLSKY_CACHE_DIR", cache).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_slice(&fs::read(dir.join("manifest.json")).unwrap()).unwrap()
}

fn listed(m: &Value) -> BTreeSet<String> {
    m["files"].as_array().unwrap().iter().map(|f| f["name"].as_str().unwrap().to_string()).collect()
}

fn on_disk(dir: &Path) -> BTreeSet<String> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n != "manifest.json")
        .collect()
}

#[test]
fn schwarzschild_scalar_evolution_runs_with_both_methods() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("ev");
    let cfg = configs().join("evolve_schwarzschild.json");
    let o = run(&["evolve", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--method", "both"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    assert_eq!(listed(&m), on_disk(&out), "every output is in the manifest");
    assert!(listed(&m).contains("discrepancy.csv"));
    assert!(m["summary"]["max_discrepancy"].as_f64().unwrap() < 1e-2);
    assert_eq!(m["config"]["contour"]["p"], 4, "defaults are recorded");
    let snap = fs::read(out.join("timedomain_001.bin")).unwrap();
    let s = teukolsky::snapshot::Snapshot::read_binary(&snap[..]).unwrap();
    assert_eq!(s.t, -2.0);
}

#[test]
fn unknown_key_is_a_config_error_with_its_path() {
    let tmp = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(configs().join("evolve_schwarzschild.json")).unwrap();
    let bad = text.replace("\"du\": 0.1", "\"du\": 0.1, \"bogus\": 3");
    let cfg = write_config(tmp.path(), "bad.json", &bad);
    let o = run(&["evolve", &cfg, "--out", tmp.path().join("o").to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("grid") && err.contains("bogus"), "{err}");

    let wrong = text.replace("\"schema\": 1", "\"schema\": 7");
    let cfg = write_config(tmp.path(), "wrong.json", &wrong);
    let o = run(&["evolve", &cfg], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("schema"));

    let extreme = text.replace("\"a\": 0.0", "\"a\": 1.0");
    let cfg = write_config(tmp.path(), "extreme.json", &extreme);
    assert_eq!(run(&["evolve", &cfg], tmp.path()).status.code(), Some(2));
}

#[test]
fn computation_failure_exits_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "tail.json",
        r#"{
          "schema": 1,
          "black_hole": { "a": 0.3 },
          "mode": { "s": 0, "k": 0 },
          "grid": { "u_min": -12.0, "u_max": 12.0, "du": 0.2, "angular_size": 4 },
          "initial": { "center": 0.0, "width": 1.0, "amplitude": [1.0, 0.0], "angular": [1.0] },
          "times": [-1.0],
          "contour": { "omega_max": 2.0, "n_max": 1, "tail_budget": 1e-30 }
        }"#,
    );
    let o = run(&["evolve", &cfg, "--out", tmp.path().join("o").to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("tail"));
}

#[test]
fn region_report_has_one_row_per_sweep_point() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "regions.json",
        r#"{ "schema": 1, "black_hole": { "a": 0.6 }, "mode": { "s": 2, "k": 2 },
             "sweep": [[10.0, 200.0], [-10.0, 2000.0], [30.0, 2000.0]] }"#,
    );
    let out = tmp.path().join("r");
    let o = run(&["regions", &cfg, "--out", out.to_str().unwrap(), "--no-cache"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("regions.csv")).unwrap();
    assert_eq!(csv.lines().count() - 1, 3);
    assert_eq!(manifest(&out)["cache"], "off");
}

#[test]
fn angular_report_includes_the_bound_constant() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("a");
    let cfg = configs().join("angular.json");
    let o = run(&["angular", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let bounds: Value = serde_json::from_slice(&fs::read(out.join("bounds.json")).unwrap()).unwrap();
    let c = bounds["c"].as_f64().unwrap();
    assert!(c.is_finite() && c >= 1.0);
    assert_eq!(manifest(&out)["summary"]["bound_constant"].as_f64(), Some(c));
}

#[test]
fn repeated_scan_is_served_from_the_cache() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "scan.json",
        r#"{ "schema": 1, "black_hole": { "a": 0.6 }, "mode": { "s": 2, "k": 2 },
             "n_re": 16, "n_im": 4, "n_max": 2 }"#,
    );
    let cache = tmp.path().join("cache");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let t = Instant::now();
    assert!(run(&["scan-wronskian", &cfg, "--out", a.to_str().unwrap()], &cache).status.success());
    let first = t.elapsed();
    let t = Instant::now();
    assert!(run(&["scan-wronskian", &cfg, "--out", b.to_str().unwrap()], &cache).status.success());
    let second = t.elapsed();
    let (ma, mb) = (manifest(&a), manifest(&b));
    assert_eq!((ma["cache"].as_str(), mb["cache"].as_str()), (Some("miss"), Some("hit")));
    assert_eq!(ma["files"], mb["files"], "cached outputs are bit-identical");
    let (wa, wb) = (ma["wall_clock_seconds"].as_f64().unwrap(), mb["wall_clock_seconds"].as_f64().unwrap());
    assert!(wa >= 10.0 * wb, "compute {wa} s, cached {wb} s (process {first:?} / {second:?})");

    // an entry written by another cache format is discarded and recomputed
    let entry = fs::read_dir(&cache).unwrap().map(|e| e.unwrap().path()).find(|p| p.is_dir()).unwrap();
    let meta = entry.join("entry.json");
    let mut v: Value = serde_json::from_slice(&fs::read(&meta).unwrap()).unwrap();
    v["cache_format"] = Value::from(0);
    fs::write(&meta, serde_json::to_vec(&v).unwrap()).unwrap();
    let c = tmp.path().join("c");
    assert!(run(&["scan-wronskian", &cfg, "--out", c.to_str().unwrap()], &cache).status.success());
    assert_eq!(manifest(&c)["cache"], "miss");
    assert_eq!(manifest(&c)["files"], ma["files"]);
}

#[test]
fn identical_configs_give_identical_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let mut hashes = vec![];
    for (i, cmd) in ["jost", "green"].iter().enumerate() {
        for rep in 0..2 {
            let out = tmp.path().join(format!("{i}-{rep}"));
            let cfg = configs().join(format!("{cmd}.json"));
            let o = run(&[cmd, cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--no-cache"], tmp.path());
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
            let m = manifest(&out);
            assert_eq!(listed(&m), on_disk(&out));
            hashes.push((m["config_hash"].clone(), m["files"].clone()));
        }
        assert_eq!(hashes[2 * i], hashes[2 * i + 1]);
    }
}
