//! Scenario file loading: parse, convert, and report every problem with
//! its JSON path.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::{Path, PathBuf};

use thiserror::Error;
use wsncoop_core::cooperation::{CooperationPolicy, CorrelationSign};
use wsncoop_core::engine::{LinkDelays, NetworkSpec, OverlaySpec, Scenario, ValidationIssue};
use wsncoop_core::environment::{
    default_thresholds, CouplingSpec, CriticalityThresholds, EnvironmentSpec, Schedule, SignalSpec,
};
use wsncoop_core::geo::{parse_dms, GeoCoordinate};
use wsncoop_core::overlay::{NetworkCategory, NodeId};
use wsncoop_core::reasoning::{
    Condition, FusionParams, Interval, LevelMap, LevelMapError, LevelSetting, OperationLevel, Rule, RuleError, RuleSet,
};
use wsncoop_core::wsn::{EnergyModel, QualityTarget, QualityTargets, WsnError};

use crate::presets;
use crate::schema::*;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{} validation error(s):\n{}", .0.len(), render_issues(.0))]
    Invalid(Vec<ValidationIssue>),
}

pub fn render_issues(issues: &[ValidationIssue]) -> String {
    issues.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n")
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io { path: path.to_path_buf(), source })?;
    parse_scenario(&text).map_err(LoadError::Invalid)
}

/// A file path, or the name of a bundled scenario when no such file exists.
pub fn resolve_scenario(arg: &str) -> Result<Scenario, LoadError> {
    let path = Path::new(arg);
    match presets::bundled(arg) {
        Some(text) if !path.exists() => parse_scenario(text).map_err(LoadError::Invalid),
        _ => load_scenario(path),
    }
}

/// Parses scenario JSON. Structural errors (bad JSON, wrong types, unknown
/// fields) stop at the first one; semantic errors are all collected.
pub fn parse_scenario(text: &str) -> Result<Scenario, Vec<ValidationIssue>> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ScenarioFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let at = if path == "." { "$".to_string() } else { format!("$.{path}") };
        vec![ValidationIssue::new(at, format!("line {} column {}: {inner}", inner.line(), inner.column()))]
    })?;
    convert(&file)
}

struct Ctx {
    issues: Vec<ValidationIssue>,
}

impl Ctx {
    fn err(&mut self, path: impl Into<String>, message: impl Display) {
        self.issues.push(ValidationIssue::new(path, message.to_string()));
    }

    fn category(&mut self, path: &str, label: &str) -> NetworkCategory {
        NetworkCategory::new(label).unwrap_or_else(|e| {
            self.err(path, e);
            NetworkCategory::named("invalid")
        })
    }

    fn level(&mut self, path: &str, text: &str) -> OperationLevel {
        text.parse().unwrap_or_else(|e| {
            self.err(path, format!("{e}, got {text:?}"));
            OperationLevel::High
        })
    }
}

fn convert(file: &ScenarioFile) -> Result<Scenario, Vec<ValidationIssue>> {
    let mut cx = Ctx { issues: Vec::new() };

    let mut library: BTreeMap<&str, RuleSet> = BTreeMap::new();
    for (name, rs) in &file.rulesets {
        if RuleSet::preset(name).is_some() {
            cx.err(format!("$.rulesets.{name}"), "shadows a built-in rule set");
        }
        if let Some(rs) = convert_ruleset(&mut cx, &format!("$.rulesets.{name}"), rs) {
            library.insert(name, rs);
        }
    }

    let environment = convert_environment(&mut cx, &file.environment);
    let networks: Vec<NetworkSpec> = file
        .networks
        .iter()
        .enumerate()
        .map(|(i, n)| convert_network(&mut cx, &format!("$.networks[{i}]"), n, &library))
        .collect();

    let index: BTreeMap<&str, usize> = file.networks.iter().enumerate().map(|(i, n)| (n.name.as_str(), i)).collect();
    let mut overlay = OverlaySpec::default();
    if let Some(o) = &file.overlay {
        if let Some(b) = &o.bootstrap {
            match index.get(b.as_str()) {
                Some(&i) => overlay.bootstrap = i,
                None => cx.err("$.overlay.bootstrap", format!("no network named {b:?}")),
            }
        }
        for (k, name) in o.join_order.iter().enumerate() {
            match index.get(name.as_str()) {
                Some(&i) => overlay.join_order.push(i),
                None => cx.err(format!("$.overlay.join_order[{k}]"), format!("no network named {name:?}")),
            }
        }
        if let Some(s) = o.join_spacing_s {
            overlay.join_spacing_s = s;
        }
    }

    let defaults = LinkDelays::default();
    let delays = file.delays.as_ref().map_or(defaults, |d| LinkDelays {
        sink_to_eg_s: d.sink_to_eg_s.unwrap_or(defaults.sink_to_eg_s),
        eg_to_eg_s: d.eg_to_eg_s.unwrap_or(defaults.eg_to_eg_s),
    });

    let scenario = Scenario {
        name: file.name.clone(),
        horizon_s: file.horizon_s,
        networks,
        environment,
        overlay,
        delays,
        metrics_interval_s: file.metrics_interval_s.unwrap_or(Scenario::DEFAULT_METRICS_INTERVAL_S),
    };

    let env_reported = cx.issues.iter().any(|i| i.path.starts_with("$.environment"));
    for issue in scenario.validate() {
        if env_reported && issue.path == "environment" {
            continue;
        }
        let path = format!("$.{}", issue.path);
        if !cx.issues.iter().any(|i| i.path == path && i.message == issue.message) {
            cx.err(path, issue.message);
        }
    }
    if cx.issues.is_empty() {
        Ok(scenario)
    } else {
        Err(cx.issues)
    }
}

fn convert_environment(cx: &mut Ctx, env: &EnvironmentFile) -> EnvironmentSpec {
    let step_s = env.step_s.unwrap_or(10.0);
    if !(step_s > 0.0 && step_s.is_finite()) {
        cx.err("$.environment.step_s", format!("must be positive, got {step_s}"));
    }
    let mut signals = Vec::new();
    let mut defined: BTreeSet<NetworkCategory> = BTreeSet::new();
    for (k, s) in env.signals.iter().enumerate() {
        let at = format!("$.environment.signals[{k}]");
        let category = cx.category(&format!("{at}.category"), &s.category);
        if !defined.insert(category.clone()) {
            cx.err(format!("{at}.category"), format!("{category} is defined twice"));
        }
        let kinds = [s.constant.is_some(), s.schedule.is_some(), s.coupled.is_some(), s.fire_risk.is_some()];
        if kinds.iter().filter(|&&k| k).count() != 1 {
            cx.err(at.clone(), "needs exactly one of constant, schedule, coupled, fire_risk");
            continue;
        }
        let humidity = category.label() == NetworkCategory::HUMIDITY;
        let source = |cx: &mut Ctx, field: &str, label: &str| {
            let c = cx.category(&format!("{at}.{field}"), label);
            if !defined.contains(&c) {
                cx.err(format!("{at}.{field}"), format!("{c} must be defined by an earlier signal"));
            }
            c
        };
        let signal = if let Some(v) = s.constant {
            if humidity && !(0.0..=100.0).contains(&v) {
                cx.err(format!("{at}.constant"), format!("relative humidity {v} outside [0, 100]"));
            }
            SignalSpec::Scheduled(Schedule::constant(v))
        } else if let Some(steps) = &s.schedule {
            for (j, &(_, v)) in steps.iter().enumerate() {
                if humidity && !(0.0..=100.0).contains(&v) {
                    cx.err(format!("{at}.schedule[{j}]"), format!("relative humidity {v} outside [0, 100]"));
                }
            }
            match Schedule::new(steps.clone()) {
                Ok(schedule) => SignalSpec::Scheduled(schedule),
                Err(e) => {
                    cx.err(format!("{at}.schedule"), e);
                    continue;
                }
            }
        } else if let Some(c) = &s.coupled {
            let coupling = CouplingSpec { alpha: c.alpha, tau_s: c.tau_s, beta: c.beta, noise_stddev: c.noise_stddev };
            if let Err(e) = coupling.validate() {
                cx.err(format!("{at}.coupled"), e);
            }
            let src = source(cx, "coupled.source", &c.source);
            SignalSpec::Coupled { source: src, coupling }
        } else {
            let f = s.fire_risk.as_ref().expect("one kind is set");
            SignalSpec::FireRisk {
                temperature: source(cx, "fire_risk.temperature", &f.temperature),
                humidity: source(cx, "fire_risk.humidity", &f.humidity),
                wind: source(cx, "fire_risk.wind", &f.wind),
            }
        };
        defined.insert(category.clone());
        signals.push((category, signal));
    }

    let mut thresholds = BTreeMap::new();
    for (label, t) in &env.thresholds {
        let at = format!("$.environment.thresholds.{label}");
        let category = cx.category(&at, label);
        let th = CriticalityThresholds { first: t.first, second: t.second, descending: t.descending };
        if !th.is_ordered() {
            let order = if th.descending { "first > second" } else { "first < second" };
            cx.err(at, format!("thresholds must satisfy {order}"));
        }
        thresholds.insert(category, th);
    }
    for (category, _) in &signals {
        if !thresholds.contains_key(category) {
            if let Some(th) = default_thresholds(category) {
                thresholds.insert(category.clone(), th);
            }
        }
    }
    EnvironmentSpec { step_s, signals, thresholds }
}

fn convert_ruleset(cx: &mut Ctx, at: &str, file: &RuleSetFile) -> Option<RuleSet> {
    let before = cx.issues.len();
    let default_level =
        file.default_level.as_deref().map_or(OperationLevel::High, |l| cx.level(&format!("{at}.default_level"), l));
    let rules: Vec<Rule> = file
        .rules
        .iter()
        .enumerate()
        .map(|(r, rule)| {
            let rat = format!("{at}.rules[{r}]");
            Rule {
                level: cx.level(&format!("{rat}.level"), &rule.level),
                priority: rule.priority,
                conditions: rule
                    .conditions
                    .iter()
                    .enumerate()
                    .map(|(c, cond)| Condition {
                        category: cx.category(&format!("{rat}.conditions[{c}].category"), &cond.category),
                        interval: Interval {
                            min: cond.min,
                            max: cond.max,
                            min_inclusive: cond.min_inclusive,
                            max_inclusive: cond.max_inclusive,
                        },
                    })
                    .collect(),
            }
        })
        .collect();
    if cx.issues.len() > before {
        return None;
    }
    let priorities: Vec<i64> = rules.iter().map(|r| r.priority).collect();
    match RuleSet::new(rules, default_level) {
        Ok(rs) => Some(rs),
        Err(e) => {
            let path = match &e {
                RuleError::Empty => format!("{at}.rules"),
                RuleError::DuplicatePriority(p)
                | RuleError::NoConditions { priority: p }
                | RuleError::RepeatedCategory { priority: p, .. }
                | RuleError::EmptyInterval { priority: p, .. } => {
                    let idx = priorities.iter().rposition(|q| q == p).unwrap_or(0);
                    format!("{at}.rules[{idx}]")
                }
            };
            cx.err(path, e);
            None
        }
    }
}

fn resolve_rules(cx: &mut Ctx, at: &str, rules: &RulesRef, library: &BTreeMap<&str, RuleSet>) -> Option<RuleSet> {
    match rules {
        RulesRef::Named(name) => {
            let found = library.get(name.as_str()).cloned().or_else(|| RuleSet::preset(name));
            if found.is_none() {
                cx.err(at, format!("dangling rule set reference {name:?}"));
            }
            found
        }
        RulesRef::Inline(file) => convert_ruleset(cx, at, file),
    }
}

fn level_map_path(e: &LevelMapError) -> String {
    let (level, field) = match e {
        LevelMapError::Interval { level, .. } | LevelMapError::IntervalOrder { level } => (level, "t_alpha_s"),
        LevelMapError::Fraction { level, .. } | LevelMapError::FractionOrder { level } => (level, "active_fraction"),
    };
    format!("{}.{field}", level.as_str().to_ascii_lowercase())
}

fn convert_network(cx: &mut Ctx, at: &str, n: &NetworkFile, library: &BTreeMap<&str, RuleSet>) -> NetworkSpec {
    let category = cx.category(&format!("{at}.category"), &n.category);
    let center = match &n.center {
        CenterFile::Dms(text) => parse_dms(text),
        CenterFile::Decimal { lat, lon } => GeoCoordinate::new(*lat, *lon),
    }
    .unwrap_or_else(|e| {
        cx.err(format!("{at}.center"), e);
        GeoCoordinate::new(0.0, 0.0).expect("origin")
    });
    let fallback = RuleSet::preset(RuleSet::TRAFFIC_POLLUTION_V1).expect("built-in");
    let rules = resolve_rules(cx, &format!("{at}.rules"), &n.rules, library).unwrap_or(fallback);
    let mut spec = NetworkSpec::new(&n.name, category, center, n.n_sensors, rules);

    if let Some(id) = &n.node_id {
        match id.parse::<NodeId>() {
            Ok(id) => spec.node_id = Some(id),
            Err(e) => cx.err(format!("{at}.node_id"), e),
        }
    }
    spec.address = n.address.clone();
    spec.noise_stddev = n.noise_stddev;
    if let Some(e) = &n.energy {
        spec.energy = EnergyModel { e_report: e.e_report, e_query: e.e_query, e_idle_per_s: e.e_idle_per_s };
    }
    if let Some(m) = &n.level_map {
        let s = |f: LevelSettingFile| LevelSetting { t_alpha_s: f.t_alpha_s, active_fraction: f.active_fraction };
        match LevelMap::new(s(m.low), s(m.moderate), s(m.high)) {
            Ok(map) => spec.level_map = map,
            Err(e) => cx.err(format!("{at}.level_map.{}", level_map_path(&e)), e),
        }
    }
    if let Some(q) = &n.quality {
        let t =
            |f: QualityTargetFile| QualityTarget { lambda_star_hz: f.lambda_star_hz, n_active_star: f.n_active_star };
        match QualityTargets::new(t(q.low), t(q.moderate), t(q.high)) {
            Ok(targets) => spec.quality = targets,
            Err(e) => {
                let path = match &e {
                    WsnError::QualityOrder { level, field } => {
                        format!("{}.{field}", level.as_str().to_ascii_lowercase())
                    }
                    WsnError::QualityTarget { level } => level.as_str().to_ascii_lowercase(),
                    _ => String::new(),
                };
                cx.err(format!("{at}.quality.{path}"), e);
            }
        }
    }

    let p = &n.policy;
    let compatible: Vec<NetworkCategory> = p
        .compatible_categories
        .iter()
        .enumerate()
        .map(|(k, c)| cx.category(&format!("{at}.policy.compatible_categories[{k}]"), c))
        .collect();
    let mut policy = CooperationPolicy::new(p.d_max_km, compatible);
    policy.trust_max = p.trust_max.unwrap_or(policy.trust_max);
    policy.correlation_threshold = p.correlation_threshold.unwrap_or(policy.correlation_threshold);
    policy.trust_bonus = p.trust_bonus.unwrap_or(policy.trust_bonus);
    policy.min_history = p.min_history.unwrap_or(policy.min_history);
    policy.history_capacity = p.history_capacity.unwrap_or(policy.history_capacity);
    for (label, sign) in &p.expected_sign {
        let sat = format!("{at}.policy.expected_sign.{label}");
        let c = cx.category(&sat, label);
        let sign = match sign.to_ascii_lowercase().as_str() {
            "positive" => CorrelationSign::Positive,
            "negative" => CorrelationSign::Negative,
            _ => {
                cx.err(sat, format!("expected \"positive\" or \"negative\", got {sign:?}"));
                continue;
            }
        };
        policy = policy.with_sign(c, sign);
    }
    spec.policy = policy;

    spec.update_interval_s = n.update_interval_s.unwrap_or(NetworkSpec::DEFAULT_UPDATE_INTERVAL_S);
    spec.local_rules = n.local_rules.as_ref().and_then(|r| resolve_rules(cx, &format!("{at}.local_rules"), r, library));
    if let Some(l) = &n.initial_level {
        spec.initial_level = cx.level(&format!("{at}.initial_level"), l);
    }
    if let Some(f) = &n.fusion {
        let d = FusionParams::default();
        spec.fusion = FusionParams {
            t_stale_s: f.t_stale_s.unwrap_or(d.t_stale_s),
            trust_min: f.trust_min.unwrap_or(d.trust_min),
            self_weight: f.self_weight.unwrap_or(d.self_weight),
            confidence_floor: f.confidence_floor.unwrap_or(d.confidence_floor),
        };
    }
    spec
}
