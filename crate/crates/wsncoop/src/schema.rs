//! Serde mirror of the scenario file format.

use std::collections::BTreeMap;

use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    pub horizon_s: f64,
    #[serde(default)]
    pub metrics_interval_s: Option<f64>,
    #[serde(default)]
    pub delays: Option<DelaysFile>,
    pub environment: EnvironmentFile,
    #[serde(default)]
    pub overlay: Option<OverlayFile>,
    /// Named inline rule sets that networks may reference.
    #[serde(default)]
    pub rulesets: BTreeMap<String, RuleSetFile>,
    pub networks: Vec<NetworkFile>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelaysFile {
    #[serde(default)]
    pub sink_to_eg_s: Option<f64>,
    #[serde(default)]
    pub eg_to_eg_s: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentFile {
    #[serde(default)]
    pub step_s: Option<f64>,
    pub signals: Vec<SignalFile>,
    /// Per category; built-in categories fall back to their defaults.
    #[serde(default)]
    pub thresholds: BTreeMap<String, ThresholdsFile>,
}

/// Exactly one of `constant`, `schedule`, `coupled`, `fire_risk` is set.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalFile {
    pub category: String,
    #[serde(default)]
    pub constant: Option<f64>,
    /// `[start_s, value]` steps.
    #[serde(default)]
    pub schedule: Option<Vec<(f64, f64)>>,
    #[serde(default)]
    pub coupled: Option<CouplingFile>,
    #[serde(default)]
    pub fire_risk: Option<FireRiskFile>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingFile {
    pub source: String,
    pub alpha: f64,
    pub tau_s: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default)]
    pub noise_stddev: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FireRiskFile {
    pub temperature: String,
    pub humidity: String,
    pub wind: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdsFile {
    pub first: f64,
    pub second: f64,
    #[serde(default)]
    pub descending: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverlayFile {
    /// Network name; defaults to the first network.
    #[serde(default)]
    pub bootstrap: Option<String>,
    #[serde(default)]
    pub join_order: Vec<String>,
    #[serde(default)]
    pub join_spacing_s: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum CenterFile {
    Dms(String),
    Decimal { lat: f64, lon: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum RulesRef {
    Named(String),
    Inline(RuleSetFile),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleSetFile {
    #[serde(default)]
    pub default_level: Option<String>,
    pub rules: Vec<RuleFile>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleFile {
    pub priority: i64,
    pub level: String,
    pub conditions: Vec<ConditionFile>,
}

/// Bounds default to a left-open, right-closed interval.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionFile {
    pub category: String,
    #[serde(default)]
    pub min: Option<f64>,
    #[serde(default)]
    pub max: Option<f64>,
    #[serde(default)]
    pub min_inclusive: bool,
    #[serde(default = "yes")]
    pub max_inclusive: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub name: String,
    #[serde(default)]
    pub node_id: Option<String>,
    #[serde(default)]
    pub address: Option<String>,
    pub category: String,
    pub center: CenterFile,
    pub n_sensors: usize,
    #[serde(default)]
    pub noise_stddev: f64,
    #[serde(default)]
    pub energy: Option<EnergyFile>,
    #[serde(default)]
    pub level_map: Option<LevelMapFile>,
    #[serde(default)]
    pub quality: Option<QualityFile>,
    pub policy: PolicyFile,
    #[serde(default)]
    pub update_interval_s: Option<f64>,
    pub rules: RulesRef,
    #[serde(default)]
    pub local_rules: Option<RulesRef>,
    #[serde(default)]
    pub initial_level: Option<String>,
    #[serde(default)]
    pub fusion: Option<FusionFile>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyFile {
    pub e_report: f64,
    pub e_query: f64,
    pub e_idle_per_s: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelSettingFile {
    pub t_alpha_s: f64,
    pub active_fraction: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelMapFile {
    pub low: LevelSettingFile,
    pub moderate: LevelSettingFile,
    pub high: LevelSettingFile,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QualityTargetFile {
    pub lambda_star_hz: f64,
    pub n_active_star: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QualityFile {
    pub low: QualityTargetFile,
    pub moderate: QualityTargetFile,
    pub high: QualityTargetFile,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyFile {
    pub d_max_km: f64,
    #[serde(default)]
    pub compatible_categories: Vec<String>,
    #[serde(default)]
    pub trust_max: Option<f64>,
    #[serde(default)]
    pub correlation_threshold: Option<f64>,
    #[serde(default)]
    pub trust_bonus: Option<f64>,
    #[serde(default)]
    pub min_history: Option<usize>,
    #[serde(default)]
    pub history_capacity: Option<usize>,
    /// `"positive"` or `"negative"` per category.
    #[serde(default)]
    pub expected_sign: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FusionFile {
    #[serde(default)]
    pub t_stale_s: Option<f64>,
    #[serde(default)]
    pub trust_min: Option<f64>,
    #[serde(default)]
    pub self_weight: Option<f64>,
    #[serde(default)]
    pub confidence_floor: Option<f64>,
}
