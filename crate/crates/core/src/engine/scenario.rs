//! In-memory scenario description and its validation.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::cooperation::CooperationPolicy;
use crate::environment::EnvironmentSpec;
use crate::geo::GeoCoordinate;
use crate::overlay::{NetworkCategory, NodeId};
use crate::reasoning::{FusionParams, LevelMap, OperationLevel, RuleSet};
use crate::wsn::{EnergyModel, QualityTargets};

/// Link classes with a fixed one-way delay.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Link {
    SinkToEg,
    EgToEg,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkDelays {
    pub sink_to_eg_s: f64,
    pub eg_to_eg_s: f64,
}

impl Default for LinkDelays {
    fn default() -> Self {
        Self { sink_to_eg_s: 1.0, eg_to_eg_s: 0.2 }
    }
}

impl LinkDelays {
    pub fn message_delay(&self, link: Link) -> f64 {
        match link {
            Link::SinkToEg => self.sink_to_eg_s,
            Link::EgToEg => self.eg_to_eg_s,
        }
    }
}

pub fn message_delay(delays: &LinkDelays, link: Link) -> f64 {
    delays.message_delay(link)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    pub name: String,
    /// Drawn from the run's generator when absent.
    pub node_id: Option<NodeId>,
    pub address: Option<String>,
    pub category: NetworkCategory,
    pub center: GeoCoordinate,
    pub n_sensors: usize,
    pub noise_stddev: f64,
    pub energy: EnergyModel,
    pub level_map: LevelMap,
    pub quality: QualityTargets,
    pub policy: CooperationPolicy,
    /// Minimum spacing between two updates this gateway publishes.
    pub update_interval_s: f64,
    pub rules: RuleSet,
    pub local_rules: Option<RuleSet>,
    pub initial_level: OperationLevel,
    pub fusion: FusionParams,
}

impl NetworkSpec {
    pub const DEFAULT_UPDATE_INTERVAL_S: f64 = 300.0;

    /// A spec with library defaults for everything but identity and placement.
    pub fn new(name: &str, category: NetworkCategory, center: GeoCoordinate, n_sensors: usize, rules: RuleSet) -> Self {
        Self {
            name: name.to_string(),
            node_id: None,
            address: None,
            category,
            center,
            n_sensors,
            noise_stddev: 0.0,
            energy: EnergyModel::default(),
            level_map: LevelMap::default(),
            quality: QualityTargets::matching_default_levels(n_sensors),
            policy: CooperationPolicy::new(10.0, []),
            update_interval_s: Self::DEFAULT_UPDATE_INTERVAL_S,
            rules,
            local_rules: None,
            initial_level: OperationLevel::High,
            fusion: FusionParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverlaySpec {
    /// Index of the founding gateway.
    pub bootstrap: usize,
    /// Remaining gateways in join order; empty means index order.
    pub join_order: Vec<usize>,
    /// Gap between consecutive join attempts.
    pub join_spacing_s: f64,
}

impl Default for OverlaySpec {
    fn default() -> Self {
        Self { bootstrap: 0, join_order: Vec::new(), join_spacing_s: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub horizon_s: f64,
    pub networks: Vec<NetworkSpec>,
    pub environment: EnvironmentSpec,
    pub overlay: OverlaySpec,
    pub delays: LinkDelays,
    pub metrics_interval_s: f64,
}

/// One problem found by [`Scenario::validate`], located by a dotted path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationIssue {
    pub path: String,
    pub message: String,
}

impl ValidationIssue {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { path: path.into(), message: message.into() }
    }
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

fn positive(v: f64) -> bool {
    v > 0.0 && v.is_finite()
}

impl Scenario {
    pub const DEFAULT_METRICS_INTERVAL_S: f64 = 60.0;

    /// Joiners in the order they attach, bootstrap excluded.
    pub fn join_sequence(&self) -> Vec<usize> {
        if self.overlay.join_order.is_empty() {
            (0..self.networks.len()).filter(|&i| i != self.overlay.bootstrap).collect()
        } else {
            self.overlay.join_order.clone()
        }
    }

    /// Every problem at once; empty when the scenario can run.
    pub fn validate(&self) -> Vec<ValidationIssue> {
        let mut issues = Vec::new();
        let mut issue = |path: String, message: String| issues.push(ValidationIssue::new(path, message));

        if !positive(self.horizon_s) {
            issue("horizon_s".into(), format!("must be positive, got {}", self.horizon_s));
        }
        if !positive(self.metrics_interval_s) {
            issue("metrics_interval_s".into(), format!("must be positive, got {}", self.metrics_interval_s));
        }
        for (field, v) in [("sink_to_eg_s", self.delays.sink_to_eg_s), ("eg_to_eg_s", self.delays.eg_to_eg_s)] {
            if !(v >= 0.0 && v.is_finite()) {
                issue(format!("delays.{field}"), format!("delay must be non-negative, got {v}"));
            }
        }

        if let Err(e) = self.environment.validate() {
            issue("environment".into(), e.to_string());
        } else if positive(self.horizon_s) && self.horizon_s <= self.environment.max_lag_s() {
            issue("horizon_s".into(), "must exceed the longest coupling lag".into());
        }

        let mut defined: BTreeSet<NetworkCategory> = self.networks.iter().map(|n| n.category.clone()).collect();
        defined.extend(self.environment.signals.iter().map(|(c, _)| c.clone()));
        defined.insert(NetworkCategory::named(NetworkCategory::FIRE_RISK));

        let mut names = BTreeSet::new();
        let mut ids = BTreeSet::new();
        for (i, net) in self.networks.iter().enumerate() {
            let at = |field: &str| format!("networks[{i}].{field}");
            if net.name.is_empty() {
                issue(at("name"), "must not be empty".into());
            } else if !names.insert(net.name.as_str()) {
                issue(at("name"), format!("duplicate network name {:?}", net.name));
            }
            if let Some(id) = net.node_id {
                if !ids.insert(id) {
                    issue(at("node_id"), format!("duplicate node id {id}"));
                }
            }
            if net.n_sensors == 0 {
                issue(at("n_sensors"), "a network needs at least one sensor".into());
            }
            if !(net.noise_stddev >= 0.0 && net.noise_stddev.is_finite()) {
                issue(at("noise_stddev"), format!("must be non-negative, got {}", net.noise_stddev));
            }
            if let Err(e) = net.energy.validate() {
                issue(at("energy"), e.to_string());
            }
            if let Err(e) = net.policy.validate() {
                issue(at("policy"), e.to_string());
            }
            if !positive(net.update_interval_s) {
                issue(at("update_interval_s"), format!("must be positive, got {}", net.update_interval_s));
            }
            if !(net.fusion.confidence_floor >= 0.0) {
                issue(at("fusion.confidence_floor"), "must be non-negative".into());
            }
            if !(net.fusion.trust_min >= 0.0) {
                issue(at("fusion.trust_min"), "must be non-negative".into());
            }
            if !positive(net.fusion.t_stale_s) {
                issue(at("fusion.t_stale_s"), format!("must be positive, got {}", net.fusion.t_stale_s));
            }
            if !(net.fusion.self_weight >= 0.0) {
                issue(at("fusion.self_weight"), "must be non-negative".into());
            }
            for c in &net.policy.compatible_categories {
                if !defined.contains(c) {
                    issue(at("policy.compatible_categories"), format!("unknown category {c}"));
                }
            }
            let rule_sets = [("rules", Some(&net.rules)), ("local_rules", net.local_rules.as_ref())];
            for (field, rules) in rule_sets {
                for c in rules.into_iter().flat_map(RuleSet::categories) {
                    if !defined.contains(&c) {
                        issue(at(field), format!("rule references unknown category {c}"));
                    }
                }
            }
            if !self.environment.signals.iter().any(|(c, _)| *c == net.category) {
                issue(at("category"), format!("environment defines no signal for {}", net.category));
            }
            if !self.environment.thresholds.contains_key(&net.category) {
                issue(at("category"), format!("environment defines no criticality thresholds for {}", net.category));
            }
        }

        let n = self.networks.len();
        if n > 0 {
            if self.overlay.bootstrap >= n {
                issue("overlay.bootstrap".into(), format!("index {} out of range", self.overlay.bootstrap));
            }
            if !(self.overlay.join_spacing_s >= 0.0 && self.overlay.join_spacing_s.is_finite()) {
                issue("overlay.join_spacing_s".into(), "must be non-negative".into());
            }
            if !self.overlay.join_order.is_empty() {
                let mut seen = BTreeSet::new();
                for (k, &j) in self.overlay.join_order.iter().enumerate() {
                    let path = format!("overlay.join_order[{k}]");
                    if j >= n {
                        issue(path, format!("index {j} out of range"));
                    } else if j == self.overlay.bootstrap {
                        issue(path, "the bootstrap does not join".into());
                    } else if !seen.insert(j) {
                        issue(path, format!("network {j} listed twice"));
                    }
                }
                if seen.len() + 1 != n {
                    issue("overlay.join_order".into(), "must list every network except the bootstrap".into());
                }
            }
        }
        issues
    }
}
