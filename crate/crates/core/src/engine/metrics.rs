//! Per-run records, their summary, and cooperative-vs-baseline comparison.

use alloc::string::String;
use alloc::vec::Vec;

use crate::environment::EnvironmentTrace;
use crate::overlay::{NetworkCategory, NodeId};
use crate::reasoning::OperationLevel;
use crate::time::SimTime;

/// One sample of one network's state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRecord {
    pub t: SimTime,
    pub network_id: NodeId,
    pub level: OperationLevel,
    pub t_alpha_s: f64,
    pub n_active: usize,
    pub q: f64,
    pub energy_cum: f64,
    pub queries_sent: u64,
    pub updates_rx: u64,
    /// True criticality the sample was scored against.
    pub criticality: OperationLevel,
}

/// A reasoning decision that moved a network to another level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelChange {
    pub t: SimTime,
    pub network_id: NodeId,
    pub from: OperationLevel,
    pub to: OperationLevel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkInfo {
    pub name: String,
    pub network_id: NodeId,
    pub category: NetworkCategory,
    pub address: String,
    pub initial_level: OperationLevel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSummary {
    pub network_id: NodeId,
    pub name: String,
    pub energy_total: f64,
    pub mean_q: f64,
    /// `None` when the network never saw High criticality.
    pub mean_q_during_critical: Option<f64>,
    pub query_count: u64,
    pub updates_rx: u64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Summary {
    pub networks: Vec<NetworkSummary>,
    pub energy_total: f64,
    pub query_count: u64,
    pub updates_rx: u64,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Aggregates records per network. Totals come from each network's last
/// sample, since the counters in a record are cumulative.
pub fn summarize(networks: &[NetworkInfo], records: &[MetricsRecord]) -> Summary {
    let mut summary = Summary::default();
    for info in networks {
        let own = || records.iter().filter(|r| r.network_id == info.network_id);
        let last = own().next_back();
        let ns = NetworkSummary {
            network_id: info.network_id,
            name: info.name.clone(),
            energy_total: last.map_or(0.0, |r| r.energy_cum),
            mean_q: mean(own().map(|r| r.q)).unwrap_or(0.0),
            mean_q_during_critical: mean(own().filter(|r| r.criticality == OperationLevel::High).map(|r| r.q)),
            query_count: last.map_or(0, |r| r.queries_sent),
            updates_rx: last.map_or(0, |r| r.updates_rx),
            samples: own().count(),
        };
        summary.energy_total += ns.energy_total;
        summary.query_count += ns.query_count;
        summary.updates_rx += ns.updates_rx;
        summary.networks.push(ns);
    }
    summary
}

/// Level in effect at `t` given the starting level and time-ordered changes.
pub fn level_at(initial: OperationLevel, changes: &[LevelChange], network_id: NodeId, t: SimTime) -> OperationLevel {
    changes.iter().rfind(|c| c.network_id == network_id && c.t <= t).map_or(initial, |c| c.to)
}

/// Instants where the true criticality of `category` changes, with the new level.
pub fn criticality_transitions(trace: &EnvironmentTrace, category: &NetworkCategory) -> Vec<(SimTime, OperationLevel)> {
    let (Some(values), Some(th)) = (trace.series(category), trace.thresholds(category)) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let mut current = values.first().map(|&v| th.classify(v));
    for (i, &v) in values.iter().enumerate().skip(1) {
        let level = th.classify(v);
        if Some(level) != current {
            out.push((SimTime::from_secs(i as f64 * trace.step_s()), level));
            current = Some(level);
        }
    }
    out
}

/// How quickly a network matched one true criticality transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionLag {
    pub transition_at: SimTime,
    pub to: OperationLevel,
    /// Seconds from the transition until the network's level matched it.
    /// Negative when the network got there first; `None` when it never did
    /// before the next transition.
    pub lag_s: Option<f64>,
}

/// Matches each true transition with the network's level timeline. The
/// response is the start of the matching level run that covers the
/// transition, or the first switch to it before the next transition.
pub fn detection_lags(
    transitions: &[(SimTime, OperationLevel)],
    initial: OperationLevel,
    changes: &[LevelChange],
    network_id: NodeId,
    horizon: SimTime,
) -> Vec<DetectionLag> {
    let own: Vec<&LevelChange> = changes.iter().filter(|c| c.network_id == network_id).collect();
    let mut out = Vec::with_capacity(transitions.len());
    for (k, &(t0, to)) in transitions.iter().enumerate() {
        let window_end = transitions.get(k + 1).map_or(horizon, |&(t, _)| t);
        let run_start = if level_at(initial, changes, network_id, t0) == to {
            Some(own.iter().rfind(|c| c.t <= t0).map_or(SimTime::ZERO, |c| c.t))
        } else {
            own.iter().find(|c| c.t > t0 && c.t < window_end && c.to == to).map(|c| c.t)
        };
        out.push(DetectionLag { transition_at: t0, to, lag_s: run_start.map(|t| t.as_secs() - t0.as_secs()) });
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkComparison {
    pub network_id: NodeId,
    pub name: String,
    /// Cooperative over baseline; `None` when the baseline value is zero
    /// and the cooperative one is not.
    pub energy_ratio: Option<f64>,
    pub mean_q_ratio: Option<f64>,
    pub critical_mean_q_ratio: Option<f64>,
    pub lags_cooperative: Vec<DetectionLag>,
    pub lags_baseline: Vec<DetectionLag>,
}

pub(crate) fn ratio(num: f64, den: f64) -> Option<f64> {
    if den == 0.0 {
        (num == 0.0).then_some(1.0)
    } else {
        Some(num / den)
    }
}
