//! CSV and JSON renderings of run results, and atomic file writes.

use std::io::{self, Write};
use std::path::Path;

use serde_json::{json, Value};
use wsncoop_core::engine::{DetectionLag, Mode, NetworkComparison, NetworkSummary, RunOutput};
use wsncoop_core::geo::format_dms;

pub const METRICS_HEADER: [&str; 9] =
    ["t", "network_id", "level", "t_alpha_s", "n_active", "Q", "energy_cum", "queries_sent", "updates_rx"];

/// Writes via a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn mode_name(mode: Mode) -> String {
    match mode {
        Mode::Cooperative => "cooperative".into(),
        Mode::Isolated => "isolated".into(),
        Mode::Static(level) => format!("static:{level}"),
    }
}

pub fn metrics_csv(out: &RunOutput) -> Vec<u8> {
    let rows = out.metrics.iter().map(|r| {
        vec![
            r.t.as_secs().to_string(),
            r.network_id.to_string(),
            r.level.to_string(),
            r.t_alpha_s.to_string(),
            r.n_active.to_string(),
            r.q.to_string(),
            r.energy_cum.to_string(),
            r.queries_sent.to_string(),
            r.updates_rx.to_string(),
        ]
    });
    csv_bytes(&METRICS_HEADER, rows)
}

fn network_summary_json(n: &NetworkSummary) -> Value {
    json!({
        "network_id": n.network_id.to_string(),
        "name": n.name,
        "energy_total": n.energy_total,
        "mean_Q": n.mean_q,
        "mean_Q_during_critical": n.mean_q_during_critical,
        "query_count": n.query_count,
        "updates_rx": n.updates_rx,
    })
}

fn summary_value(scenario: &str, out: &RunOutput) -> Value {
    let m = out.messages;
    json!({
        "scenario": scenario,
        "mode": mode_name(out.mode),
        "seed": out.seed,
        "horizon_s": out.horizon.as_secs(),
        "networks": out.summary.networks.iter().map(network_summary_json).collect::<Vec<_>>(),
        "totals": {
            "energy_total": out.summary.energy_total,
            "query_count": out.summary.query_count,
            "updates_rx": out.summary.updates_rx,
        },
        "messages": {
            "updates_sent": m.updates_sent,
            "updates_delivered": m.updates_delivered,
            "updates_suppressed": m.updates_suppressed,
            "updates_dropped": m.updates_dropped,
            "updates_in_flight": m.updates_in_flight,
            "sink_updates": m.sink_updates,
            "queries": m.queries,
            "overlay_messages": m.overlay_messages,
            "subscriptions": m.subscriptions,
        },
        "join_failures": out.join_failures.iter().map(|(id, o)| json!({
            "node_id": id.to_string(),
            "outcome": format!("{o:?}"),
        })).collect::<Vec<_>>(),
    })
}

fn pretty(v: &Value) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(v).expect("json values serialize");
    bytes.push(b'\n');
    bytes
}

pub fn summary_json(scenario: &str, out: &RunOutput) -> Vec<u8> {
    pretty(&summary_value(scenario, out))
}

fn lags_json(lags: &[DetectionLag]) -> Value {
    lags.iter()
        .map(|l| json!({ "transition_at_s": l.transition_at.as_secs(), "to": l.to.as_str(), "lag_s": l.lag_s }))
        .collect()
}

pub fn compare_json(scenario: &str, coop: &RunOutput, baseline: &RunOutput, rows: &[NetworkComparison]) -> Vec<u8> {
    let networks: Vec<Value> = rows
        .iter()
        .map(|c| {
            json!({
                "network_id": c.network_id.to_string(),
                "name": c.name,
                "energy_ratio": c.energy_ratio,
                "mean_Q_ratio": c.mean_q_ratio,
                "critical_mean_Q_ratio": c.critical_mean_q_ratio,
                "detection_lag": {
                    "cooperative": lags_json(&c.lags_cooperative),
                    "baseline": lags_json(&c.lags_baseline),
                },
            })
        })
        .collect();
    pretty(&json!({
        "scenario": scenario,
        "seed": coop.seed,
        "baseline": mode_name(baseline.mode),
        "networks": networks,
        "cooperative": summary_value(scenario, coop),
        "baseline_run": summary_value(scenario, baseline),
    }))
}

/// Global lookup table as seen by the first joined gateway.
pub fn glt_csv(out: &RunOutput) -> Vec<u8> {
    let rows = out.glts.first().into_iter().flat_map(|(_, glt)| {
        glt.iter().map(|e| vec![e.node_id.to_string(), e.address.clone(), format_dms(e.center), e.category.to_string()])
    });
    csv_bytes(&["node_id", "address", "coordinate", "category"], rows.collect::<Vec<_>>())
}

pub fn cnt_csv(out: &RunOutput) -> Vec<u8> {
    let opt = |v: Option<f64>| v.map_or_else(String::new, |v| v.to_string());
    let rows = out.cnts.iter().flat_map(|(owner, entries)| {
        entries.iter().map(move |e| {
            vec![
                owner.to_string(),
                e.node_id.to_string(),
                e.trust.to_string(),
                opt(e.update_interval_s),
                opt(e.latest_value),
                opt(e.last_update_time.map(|t| t.as_secs())),
            ]
        })
    });
    csv_bytes(&["owner", "node", "trust", "interval_s", "latest_value", "timestamp_s"], rows.collect::<Vec<_>>())
}

/// True values and criticality per category at trace resolution.
pub fn trace_csv(out: &RunOutput) -> Vec<u8> {
    let trace = &out.trace;
    let categories: Vec<_> = trace.categories().cloned().collect();
    let mut header = vec!["t".to_string()];
    for c in &categories {
        header.push(c.to_string());
        header.push(format!("{c}_criticality"));
    }
    let rows = (0..trace.len()).map(|i| {
        let mut row = vec![(i as f64 * trace.step_s()).to_string()];
        for c in &categories {
            let v = trace.series(c).expect("listed category")[i];
            row.push(v.to_string());
            row.push(trace.thresholds(c).map_or_else(String::new, |th| th.classify(v).to_string()));
        }
        row
    });
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    csv_bytes(&header, rows.collect::<Vec<_>>())
}
