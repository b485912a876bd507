//! Deterministic discrete-event run of a scenario.

pub mod metrics;
pub mod presets;
pub mod queue;
pub mod scenario;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cooperation::CntEntry;
use crate::environment::EnvironmentTrace;
use crate::overlay::{
    generate_node_id, GlobalLookupTable, GltEntry, JoinOutcome, NodeId, OverlayMember, OverlayMessage,
};
use crate::reasoning::{level_to_config, EgReasoner, OperationLevel, ReasonerConfig, UpdateSource};
use crate::time::{SimDuration, SimTime};
use crate::wsn::{sensing_quality, NetworkConfig, Query, SensorNetwork};

pub use metrics::{
    criticality_transitions, detection_lags, level_at, summarize, DetectionLag, LevelChange, MetricsRecord,
    NetworkComparison, NetworkInfo, NetworkSummary, Summary,
};
pub use queue::{Event, EventQueue, ScheduleError};
pub use scenario::{message_delay, Link, LinkDelays, NetworkSpec, OverlaySpec, Scenario, ValidationIssue};

/// How gateways behave during a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Gateways exchange updates and reason over fused inputs.
    Cooperative,
    /// Gateway-to-gateway updates are suppressed; each network adapts on
    /// its own measurements.
    Isolated,
    /// No exchange and no adaptation: every network stays at the level.
    Static(OperationLevel),
}

/// Message accounting. Every sent update ends up delivered, dropped
/// (addressee unknown) or still in flight at the horizon; suppressed
/// updates were never sent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MessageCounts {
    pub updates_sent: u64,
    pub updates_delivered: u64,
    pub updates_suppressed: u64,
    pub updates_dropped: u64,
    pub updates_in_flight: u64,
    pub sink_updates: u64,
    pub queries: u64,
    pub overlay_messages: u64,
    pub subscriptions: u64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub mode: Mode,
    pub seed: u64,
    pub horizon: SimTime,
    pub networks: Vec<NetworkInfo>,
    pub metrics: Vec<MetricsRecord>,
    pub level_changes: Vec<LevelChange>,
    pub summary: Summary,
    /// Final table at each joined gateway.
    pub glts: Vec<(NodeId, GlobalLookupTable)>,
    pub cnts: Vec<(NodeId, Vec<CntEntry>)>,
    pub join_failures: Vec<(NodeId, JoinOutcome)>,
    pub messages: MessageCounts,
    pub trace: EnvironmentTrace,
}

impl RunOutput {
    pub fn network(&self, name: &str) -> Option<&NetworkInfo> {
        self.networks.iter().find(|n| n.name == name)
    }

    pub fn records_for(&self, id: NodeId) -> impl Iterator<Item = &MetricsRecord> {
        self.metrics.iter().filter(move |r| r.network_id == id)
    }

    pub fn changes_for(&self, id: NodeId) -> impl Iterator<Item = &LevelChange> {
        self.level_changes.iter().filter(move |c| c.network_id == id)
    }
}

#[derive(Debug, Clone)]
enum EventKind {
    OverlayJoin { net: usize },
    Overlay { from: NodeId, to: NodeId, message: OverlayMessage },
    Subscribe { from: usize, to: usize },
    SensorReportRound { net: usize, generation: u64 },
    SinkToEgUpdate { net: usize, value: f64 },
    Publish { net: usize },
    EgToEgUpdate { from: usize, to: NodeId, value: f64, interval_s: f64 },
    QueryDelivery { net: usize, config: NetworkConfig },
    MetricsSample,
}

struct Gateway {
    member: Option<OverlayMember>,
    reasoner: EgReasoner,
    subscribers: BTreeSet<usize>,
    last_publish: Option<SimTime>,
    trailing_publish: bool,
    latest_local: Option<f64>,
    queries_sent: u64,
    updates_rx: u64,
}

struct Node {
    spec_index: usize,
    info: NetworkInfo,
    entry: GltEntry,
    sensors: SensorNetwork,
    gateway: Gateway,
    generation: u64,
}

struct Sim<'a> {
    scenario: &'a Scenario,
    mode: Mode,
    seed: u64,
    horizon: SimTime,
    rng: ChaCha8Rng,
    trace: EnvironmentTrace,
    queue: EventQueue<EventKind>,
    nodes: Vec<Node>,
    by_id: BTreeMap<NodeId, usize>,
    outcomes: BTreeMap<NodeId, JoinOutcome>,
    metrics: Vec<MetricsRecord>,
    level_changes: Vec<LevelChange>,
    counts: MessageCounts,
}

/// Runs `scenario` to its horizon. Identical inputs give identical output.
pub fn run(scenario: &Scenario, seed: u64, mode: Mode) -> Result<RunOutput, Vec<ValidationIssue>> {
    let issues = scenario.validate();
    if !issues.is_empty() {
        return Err(issues);
    }
    let mut sim = Sim::new(scenario, seed, mode)?;
    sim.start();
    sim.run_to_horizon();
    Ok(sim.finish())
}

fn secs(s: f64) -> SimDuration {
    SimDuration::from_secs(s)
}

impl<'a> Sim<'a> {
    fn new(scenario: &'a Scenario, seed: u64, mode: Mode) -> Result<Self, Vec<ValidationIssue>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let trace = scenario
            .environment
            .generate(scenario.horizon_s, &mut rng)
            .map_err(|e| alloc::vec![ValidationIssue::new("environment", format!("{e}"))])?;

        let mut taken: BTreeSet<NodeId> = scenario.networks.iter().filter_map(|n| n.node_id).collect();
        let mut nodes = Vec::with_capacity(scenario.networks.len());
        let mut by_id = BTreeMap::new();
        for (i, spec) in scenario.networks.iter().enumerate() {
            let node_id = spec.node_id.unwrap_or_else(|| {
                let id = generate_node_id(&mut rng, &taken);
                taken.insert(id);
                id
            });
            let address = spec
                .address
                .clone()
                .unwrap_or_else(|| format!("10.{}.{}.{}", (i >> 16) & 0xff, (i >> 8) & 0xff, (i & 0xff) + 1));
            let entry =
                GltEntry { node_id, address: address.clone(), center: spec.center, category: spec.category.clone() };
            let initial_level = match mode {
                Mode::Static(level) => level,
                _ => spec.initial_level,
            };
            let config = level_to_config(&spec.level_map, initial_level, spec.n_sensors);
            let path = |field: &str| format!("networks[{i}].{field}");
            let sensors = SensorNetwork::new(
                node_id,
                spec.category.clone(),
                spec.center,
                spec.n_sensors,
                spec.noise_stddev,
                spec.energy,
                config,
            )
            .map_err(|e| alloc::vec![ValidationIssue::new(path("n_sensors"), format!("{e}"))])?;
            let reasoner = EgReasoner::new(
                entry.clone(),
                ReasonerConfig {
                    policy: spec.policy.clone(),
                    fusion: spec.fusion,
                    rules: spec.rules.clone(),
                    local_rules: spec.local_rules.clone(),
                    level_map: spec.level_map.clone(),
                    n_total: spec.n_sensors,
                },
                initial_level,
            );
            by_id.insert(node_id, i);
            nodes.push(Node {
                spec_index: i,
                info: NetworkInfo {
                    name: spec.name.clone(),
                    network_id: node_id,
                    category: spec.category.clone(),
                    address,
                    initial_level,
                },
                entry,
                sensors,
                gateway: Gateway {
                    member: None,
                    reasoner,
                    subscribers: BTreeSet::new(),
                    last_publish: None,
                    trailing_publish: false,
                    latest_local: None,
                    queries_sent: 0,
                    updates_rx: 0,
                },
                generation: 0,
            });
        }
        Ok(Self {
            scenario,
            mode,
            seed,
            horizon: SimTime::from_secs(scenario.horizon_s),
            rng,
            trace,
            queue: EventQueue::new(),
            nodes,
            by_id,
            outcomes: BTreeMap::new(),
            metrics: Vec::new(),
            level_changes: Vec::new(),
            counts: MessageCounts::default(),
        })
    }

    fn at(&mut self, t: SimTime, kind: EventKind) {
        self.queue.schedule(t, kind).expect("engine never schedules into the past");
    }

    fn after(&mut self, delay_s: f64, kind: EventKind) {
        self.queue.schedule_after(secs(delay_s), kind);
    }

    fn start(&mut self) {
        self.at(SimTime::ZERO, EventKind::MetricsSample);
        if self.nodes.is_empty() {
            return;
        }
        let spacing = self.scenario.overlay.join_spacing_s;
        self.at(SimTime::ZERO, EventKind::OverlayJoin { net: self.scenario.overlay.bootstrap });
        for (k, net) in self.scenario.join_sequence().into_iter().enumerate() {
            self.at(SimTime::from_secs(k as f64 * spacing), EventKind::OverlayJoin { net });
        }
        for net in 0..self.nodes.len() {
            self.at(SimTime::ZERO, EventKind::SensorReportRound { net, generation: 0 });
        }
    }

    fn run_to_horizon(&mut self) {
        while self.queue.peek_time().is_some_and(|t| t <= self.horizon) {
            let event = self.queue.pop().expect("peeked");
            self.dispatch(event.payload);
        }
        for event in core::iter::from_fn(|| self.queue.pop()) {
            if matches!(event.payload, EventKind::EgToEgUpdate { .. }) {
                self.counts.updates_in_flight += 1;
            }
        }
    }

    fn now(&self) -> SimTime {
        self.queue.now()
    }

    fn dispatch(&mut self, kind: EventKind) {
        match kind {
            EventKind::OverlayJoin { net } => self.on_join(net),
            EventKind::Overlay { from, to, message } => self.on_overlay(from, to, message),
            EventKind::Subscribe { from, to } => {
                self.nodes[to].gateway.subscribers.insert(from);
            }
            EventKind::SensorReportRound { net, generation } => self.on_report_round(net, generation),
            EventKind::SinkToEgUpdate { net, value } => self.on_local_update(net, value),
            EventKind::Publish { net } => {
                self.nodes[net].gateway.trailing_publish = false;
                self.publish(net);
            }
            EventKind::EgToEgUpdate { from, to, value, interval_s } => {
                self.on_remote_update(from, to, value, interval_s)
            }
            EventKind::QueryDelivery { net, config } => self.on_query(net, config),
            EventKind::MetricsSample => self.on_metrics(),
        }
    }

    fn on_join(&mut self, net: usize) {
        let entry = self.nodes[net].entry.clone();
        let id = entry.node_id;
        if net == self.scenario.overlay.bootstrap {
            let member = OverlayMember::founder(entry);
            self.outcomes.insert(id, JoinOutcome::Joined(member.glt().clone()));
            self.nodes[net].gateway.member = Some(member);
            return;
        }
        let bootstrap = self.nodes[self.scenario.overlay.bootstrap].entry.node_id;
        let (member, request) = OverlayMember::joining(entry);
        self.nodes[net].gateway.member = Some(member);
        self.outcomes.insert(id, JoinOutcome::Pending);
        self.send_overlay(id, bootstrap, request);
    }

    fn send_overlay(&mut self, from: NodeId, to: NodeId, message: OverlayMessage) {
        self.counts.overlay_messages += 1;
        self.after(self.scenario.delays.eg_to_eg_s, EventKind::Overlay { from, to, message });
    }

    fn on_overlay(&mut self, from: NodeId, to: NodeId, message: OverlayMessage) {
        let Some(&net) = self.by_id.get(&to) else {
            return;
        };
        let Some(member) = self.nodes[net].gateway.member.as_mut() else {
            if let OverlayMessage::AttachRequest(joiner) = message {
                self.outcomes.insert(joiner.node_id, JoinOutcome::UnknownBootstrap(to));
            }
            return;
        };
        let handled = member.handle(from, message);
        if let Some(result) = handled.join_result {
            let outcome = match result {
                Ok(()) => JoinOutcome::Joined(member.glt().clone()),
                Err(reason) => JoinOutcome::Rejected(reason),
            };
            self.outcomes.insert(to, outcome);
        }
        let joined = member.is_joined();
        let glt = member.glt().clone();
        for (dest, msg) in handled.outgoing {
            self.send_overlay(to, dest, msg);
        }
        if joined && !handled.learned.is_empty() {
            let added = self.nodes[net].gateway.reasoner.refresh_cnt(&glt);
            for partner in added {
                if let Some(&p) = self.by_id.get(&partner) {
                    self.counts.subscriptions += 1;
                    self.after(self.scenario.delays.eg_to_eg_s, EventKind::Subscribe { from: net, to: p });
                }
            }
        }
    }

    fn on_report_round(&mut self, net: usize, generation: u64) {
        let now = self.now();
        let node = &mut self.nodes[net];
        if generation != node.generation {
            return;
        }
        let truth =
            self.trace.value_at(&node.info.category, now).expect("validated: every network category has a signal");
        let aggregate = node.sensors.sample_and_report(truth, now, &mut self.rng);
        let period = node.sensors.config().t_alpha_s;
        self.counts.sink_updates += 1;
        self.after(self.scenario.delays.sink_to_eg_s, EventKind::SinkToEgUpdate { net, value: aggregate.value });
        self.after(period, EventKind::SensorReportRound { net, generation });
    }

    fn on_local_update(&mut self, net: usize, value: f64) {
        let now = self.now();
        self.nodes[net].gateway.latest_local = Some(value);
        if !matches!(self.mode, Mode::Static(_)) {
            let decision = self.nodes[net].gateway.reasoner.process_update(UpdateSource::LocalSink, value, now);
            if let Some(d) = decision {
                self.issue_query(net, d.previous, d.level, d.config);
            }
        }
        let interval = self.scenario.networks[self.nodes[net].spec_index].update_interval_s;
        let gw = &mut self.nodes[net].gateway;
        match gw.last_publish {
            Some(last) if now.secs_since(last) < interval => {
                if !gw.trailing_publish {
                    gw.trailing_publish = true;
                    let due = last + secs(interval);
                    self.at(due, EventKind::Publish { net });
                }
            }
            _ => self.publish(net),
        }
    }

    /// Sends the latest local aggregate to every subscriber.
    fn publish(&mut self, net: usize) {
        let now = self.now();
        let interval_s = self.scenario.networks[self.nodes[net].spec_index].update_interval_s;
        let gw = &mut self.nodes[net].gateway;
        let Some(value) = gw.latest_local else { return };
        gw.last_publish = Some(now);
        let subscribers: Vec<usize> = gw.subscribers.iter().copied().collect();
        for s in subscribers {
            if self.mode == Mode::Cooperative {
                self.counts.updates_sent += 1;
                let to = self.nodes[s].entry.node_id;
                self.after(
                    self.scenario.delays.eg_to_eg_s,
                    EventKind::EgToEgUpdate { from: net, to, value, interval_s },
                );
            } else {
                self.counts.updates_suppressed += 1;
            }
        }
    }

    fn on_remote_update(&mut self, from: usize, to: NodeId, value: f64, interval_s: f64) {
        let Some(&net) = self.by_id.get(&to) else {
            self.counts.updates_dropped += 1;
            return;
        };
        self.counts.updates_delivered += 1;
        let now = self.now();
        let source =
            UpdateSource::Remote { from: self.nodes[from].entry.node_id, declared_interval_s: Some(interval_s) };
        let gw = &mut self.nodes[net].gateway;
        gw.updates_rx += 1;
        if let Some(d) = gw.reasoner.process_update(source, value, now) {
            self.issue_query(net, d.previous, d.level, d.config);
        }
    }

    fn issue_query(&mut self, net: usize, from: OperationLevel, to: OperationLevel, config: NetworkConfig) {
        let now = self.now();
        self.nodes[net].gateway.queries_sent += 1;
        self.counts.queries += 1;
        if from != to {
            self.level_changes.push(LevelChange { t: now, network_id: self.nodes[net].entry.node_id, from, to });
        }
        self.after(self.scenario.delays.sink_to_eg_s, EventKind::QueryDelivery { net, config });
    }

    fn on_query(&mut self, net: usize, config: NetworkConfig) {
        let now = self.now();
        let node = &mut self.nodes[net];
        let next = node
            .sensors
            .apply_query(&Query { issued_at: now, new_config: config })
            .expect("level map configs fit the network");
        node.generation += 1;
        let generation = node.generation;
        self.at(next, EventKind::SensorReportRound { net, generation });
    }

    /// Samples every network once all other events at this instant are done.
    fn on_metrics(&mut self) {
        let now = self.now();
        if self.queue.peek_time() == Some(now) {
            self.at(now, EventKind::MetricsSample);
            return;
        }
        for node in &mut self.nodes {
            node.sensors.advance_to(now);
            let spec = &self.scenario.networks[node.spec_index];
            let criticality = self
                .trace
                .criticality(&node.info.category, now)
                .expect("validated: every network category has thresholds");
            let config = node.sensors.config();
            self.metrics.push(MetricsRecord {
                t: now,
                network_id: node.entry.node_id,
                level: node.gateway.reasoner.level(),
                t_alpha_s: config.t_alpha_s,
                n_active: config.n_active,
                q: sensing_quality(&config, &spec.quality.at(criticality)),
                energy_cum: node.sensors.energy_cum(),
                queries_sent: node.gateway.queries_sent,
                updates_rx: node.gateway.updates_rx,
                criticality,
            });
        }
        if now < self.horizon {
            let next = now + secs(self.scenario.metrics_interval_s);
            self.at(next.min(self.horizon), EventKind::MetricsSample);
        }
    }

    fn finish(self) -> RunOutput {
        let networks: Vec<NetworkInfo> = self.nodes.iter().map(|n| n.info.clone()).collect();
        let summary = summarize(&networks, &self.metrics);
        let glts = self
            .nodes
            .iter()
            .filter_map(|n| n.gateway.member.as_ref())
            .filter(|m| m.is_joined())
            .map(|m| (m.id(), m.glt().clone()))
            .collect();
        let cnts =
            self.nodes.iter().map(|n| (n.entry.node_id, n.gateway.reasoner.cnt().iter().cloned().collect())).collect();
        let join_failures = self.outcomes.into_iter().filter(|(_, o)| !matches!(o, JoinOutcome::Joined(_))).collect();
        RunOutput {
            mode: self.mode,
            seed: self.seed,
            horizon: self.horizon,
            networks,
            metrics: self.metrics,
            level_changes: self.level_changes,
            summary,
            glts,
            cnts,
            join_failures,
            messages: self.counts,
            trace: self.trace,
        }
    }
}

/// Cooperative run against a baseline run of the same scenario and seed.
pub fn compare(cooperative: &RunOutput, baseline: &RunOutput) -> Vec<NetworkComparison> {
    let horizon = cooperative.horizon;
    cooperative
        .summary
        .networks
        .iter()
        .zip(&baseline.summary.networks)
        .zip(cooperative.networks.iter().zip(&baseline.networks))
        .map(|((c, b), (ci, bi))| {
            let transitions = criticality_transitions(&cooperative.trace, &ci.category);
            let critical = match (c.mean_q_during_critical, b.mean_q_during_critical) {
                (Some(x), Some(y)) => metrics::ratio(x, y),
                _ => None,
            };
            NetworkComparison {
                network_id: c.network_id,
                name: c.name.clone(),
                energy_ratio: metrics::ratio(c.energy_total, b.energy_total),
                mean_q_ratio: metrics::ratio(c.mean_q, b.mean_q),
                critical_mean_q_ratio: critical,
                lags_cooperative: detection_lags(
                    &transitions,
                    ci.initial_level,
                    &cooperative.level_changes,
                    ci.network_id,
                    horizon,
                ),
                lags_baseline: detection_lags(
                    &transitions,
                    bi.initial_level,
                    &baseline.level_changes,
                    bi.network_id,
                    horizon,
                ),
            }
        })
        .collect()
}
