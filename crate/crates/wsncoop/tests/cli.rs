use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const HEADER: &str = "t,network_id,level,t_alpha_s,n_active,Q,energy_cum,queries_sent,updates_rx";

fn wsncoop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wsncoop")).args(args).output().unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Run {
    _dir: tempfile::TempDir,
    csv: PathBuf,
    summary: PathBuf,
    trace: PathBuf,
}

fn simulate(scenario: &str, mode: &str, seed: &str) -> Run {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("metrics.csv");
    let summary = dir.path().join("summary.json");
    let trace = dir.path().join("trace.csv");
    let out = wsncoop(&[
        "simulate",
        "--scenario",
        scenario,
        "--mode",
        mode,
        "--seed",
        seed,
        "--out",
        path_str(&csv),
        "--summary",
        path_str(&summary),
        "--trace",
        path_str(&trace),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    Run { _dir: dir, csv, summary, trace }
}

fn rows(path: &Path) -> Vec<BTreeMap<String, String>> {
    let mut reader = csv::Reader::from_path(path).unwrap();
    reader.deserialize().map(|r| r.unwrap()).collect()
}

fn num(row: &BTreeMap<String, String>, key: &str) -> f64 {
    row[key].parse().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn metrics_header_is_exact() {
    let run = simulate("traffic-pollution-v1", "cooperative", "1");
    let text = std::fs::read_to_string(&run.csv).unwrap();
    assert_eq!(text.lines().next(), Some(HEADER));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = simulate("forest-fire-v1", "cooperative", "7");
    let b = simulate("forest-fire-v1", "cooperative", "7");
    for (x, y) in [(&a.csv, &b.csv), (&a.summary, &b.summary), (&a.trace, &b.trace)] {
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
    }
}

#[test]
fn rows_are_time_ordered_per_network() {
    let run = simulate("traffic-pollution-v1", "isolated", "3");
    let mut last: BTreeMap<String, f64> = BTreeMap::new();
    for row in rows(&run.csv) {
        let t = num(&row, "t");
        let prev = last.insert(row["network_id"].clone(), t);
        assert!(prev.is_none_or(|p| p < t), "{row:?}");
    }
    assert_eq!(last.len(), 2);
    assert!(last.values().all(|&t| t == 86400.0));
}

#[test]
fn summary_matches_metrics_csv() {
    let run = simulate("traffic-pollution-v1", "cooperative", "1");
    let summary = json(&run.summary);
    let metrics = rows(&run.csv);
    let criticality: BTreeMap<u64, BTreeMap<String, String>> =
        rows(&run.trace).into_iter().map(|r| (num(&r, "t") as u64, r)).collect();
    let category = BTreeMap::from([("4248C4", "Traffic"), ("CF32A1", "Pollution")]);

    let mut total_energy = 0.0;
    for net in summary["networks"].as_array().unwrap() {
        let id = net["network_id"].as_str().unwrap();
        let mine: Vec<_> = metrics.iter().filter(|r| r["network_id"] == id).collect();
        let last = mine.last().unwrap();
        let energy = net["energy_total"].as_f64().unwrap();
        assert!((energy - num(last, "energy_cum")).abs() < 1e-6);
        total_energy += energy;
        assert_eq!(net["query_count"].as_f64().unwrap(), num(last, "queries_sent"));
        assert_eq!(net["updates_rx"].as_f64().unwrap(), num(last, "updates_rx"));

        let mean_q = mine.iter().map(|r| num(r, "Q")).sum::<f64>() / mine.len() as f64;
        assert!((net["mean_Q"].as_f64().unwrap() - mean_q).abs() < 1e-9);

        let key = format!("{}_criticality", category[id]);
        let critical: Vec<f64> =
            mine.iter().filter(|r| criticality[&(num(r, "t") as u64)][&key] == "High").map(|r| num(r, "Q")).collect();
        match net["mean_Q_during_critical"].as_f64() {
            Some(q) => assert!((q - critical.iter().sum::<f64>() / critical.len() as f64).abs() < 1e-9),
            None => assert!(critical.is_empty()),
        }
    }
    assert!((summary["totals"]["energy_total"].as_f64().unwrap() - total_energy).abs() < 1e-6);
    let pollution = &summary["networks"][1];
    assert_eq!(pollution["mean_Q_during_critical"].as_f64(), Some(1.0));
}

#[test]
fn bad_mode_is_a_usage_error() {
    let out = wsncoop(&[
        "simulate",
        "--scenario",
        "traffic-pollution-v1",
        "--mode",
        "bogus",
        "--seed",
        "1",
        "--out",
        "x.csv",
    ]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_scenario_exits_2_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let mut v: Value = serde_json::from_str(include_str!("../scenarios/traffic-pollution-v1.json")).unwrap();
    v["networks"][0]["level_map"]["high"]["t_alpha_s"] = serde_json::json!(7200);
    let scenario = dir.path().join("bad.json");
    std::fs::write(&scenario, v.to_string()).unwrap();
    let out = wsncoop(&[
        "simulate",
        "--scenario",
        path_str(&scenario),
        "--mode",
        "cooperative",
        "--seed",
        "1",
        "--out",
        path_str(&dir.path().join("m.csv")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("$.networks[0].level_map"));
    assert!(!dir.path().join("m.csv").exists());
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("missing-dir").join("m.csv");
    let out = wsncoop(&[
        "simulate",
        "--scenario",
        "traffic-pollution-v1",
        "--mode",
        "cooperative",
        "--seed",
        "1",
        "--out",
        path_str(&out_path),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn compare_reports_ratios_and_lags() {
    let out =
        wsncoop(&["compare", "--scenario", "traffic-pollution-v1", "--seed", "1", "--baseline", "static:Moderate"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["baseline"], "static:Moderate");
    let pollution = v["networks"].as_array().unwrap().iter().find(|n| n["name"] == "pollution").unwrap();
    assert!(pollution["energy_ratio"].as_f64().unwrap() < 1.0);
    assert!(pollution["critical_mean_Q_ratio"].as_f64().unwrap() >= 1.0);
    assert!(pollution["detection_lag"]["cooperative"].is_array());
    assert!(v["cooperative"]["networks"].is_array() && v["baseline_run"]["networks"].is_array());
}

#[test]
fn compare_single_network_ratios_are_one() {
    let dir = tempfile::tempdir().unwrap();
    let mut v: Value = serde_json::from_str(include_str!("../scenarios/traffic-pollution-v1.json")).unwrap();
    let nets = v["networks"].as_array_mut().unwrap();
    nets.remove(0);
    nets[0]["policy"]["compatible_categories"] = serde_json::json!([]);
    v["overlay"]["bootstrap"] = serde_json::json!("pollution");
    let scenario = dir.path().join("single.json");
    std::fs::write(&scenario, v.to_string()).unwrap();
    let out_path = dir.path().join("cmp.json");
    let out = wsncoop(&["compare", "--scenario", path_str(&scenario), "--seed", "2", "--out", path_str(&out_path)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out_path);
    let net = &v["networks"][0];
    assert_eq!(net["energy_ratio"].as_f64(), Some(1.0));
    assert_eq!(net["mean_Q_ratio"].as_f64(), Some(1.0));
}
