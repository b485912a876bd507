//! Interval rules mapping fused measurements to an operation level.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use super::{FusedInputs, OperationLevel};
use crate::overlay::NetworkCategory;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuleError {
    #[error("rule set has no rules")]
    Empty,
    #[error("priority {0} is used by more than one rule")]
    DuplicatePriority(i64),
    #[error("rule {priority} has no conditions")]
    NoConditions { priority: i64 },
    #[error("rule {priority} references category {category} more than once")]
    RepeatedCategory { priority: i64, category: NetworkCategory },
    #[error("rule {priority} has an empty interval for {category}")]
    EmptyInterval { priority: i64, category: NetworkCategory },
}

/// A numeric range with optional bounds. A missing bound is unbounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub min_inclusive: bool,
    pub max_inclusive: bool,
}

impl Interval {
    /// `v <= max`
    pub fn at_most(max: f64) -> Self {
        Self { min: None, max: Some(max), min_inclusive: false, max_inclusive: true }
    }

    /// `v > min`
    pub fn above(min: f64) -> Self {
        Self { min: Some(min), max: None, min_inclusive: false, max_inclusive: false }
    }

    /// `v >= min`
    pub fn at_least(min: f64) -> Self {
        Self { min: Some(min), max: None, min_inclusive: true, max_inclusive: false }
    }

    /// `v < max`
    pub fn below(max: f64) -> Self {
        Self { min: None, max: Some(max), min_inclusive: false, max_inclusive: false }
    }

    /// `min < v <= max`
    pub fn left_open(min: f64, max: f64) -> Self {
        Self { min: Some(min), max: Some(max), min_inclusive: false, max_inclusive: true }
    }

    pub fn contains(&self, v: f64) -> bool {
        let above_min = match self.min {
            None => true,
            Some(m) if self.min_inclusive => v >= m,
            Some(m) => v > m,
        };
        let below_max = match self.max {
            None => true,
            Some(m) if self.max_inclusive => v <= m,
            Some(m) => v < m,
        };
        above_min && below_max
    }

    pub fn is_empty(&self) -> bool {
        match (self.min, self.max) {
            (Some(lo), Some(hi)) => lo > hi || (lo == hi && !(self.min_inclusive && self.max_inclusive)),
            (Some(b), None) | (None, Some(b)) => b.is_nan(),
            (None, None) => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub category: NetworkCategory,
    pub interval: Interval,
}

impl Condition {
    pub fn new(category: &str, interval: Interval) -> Self {
        Self { category: NetworkCategory::named(category), interval }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub conditions: Vec<Condition>,
    pub level: OperationLevel,
    pub priority: i64,
}

impl Rule {
    /// True when every condition's category is present and in range.
    pub fn matches(&self, inputs: &FusedInputs) -> bool {
        self.conditions.iter().all(|c| inputs.value(&c.category).is_some_and(|v| c.interval.contains(v)))
    }

    pub fn categories(&self) -> impl Iterator<Item = &NetworkCategory> {
        self.conditions.iter().map(|c| &c.category)
    }
}

/// Priority-ordered rules with a fallback level.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleSet {
    rules: Vec<Rule>,
    default_level: OperationLevel,
}

impl RuleSet {
    pub const TRAFFIC_POLLUTION_V1: &'static str = "traffic-pollution-v1";
    pub const POLLUTION_LOCAL_V1: &'static str = "pollution-local-v1";
    pub const TRAFFIC_LOCAL_V1: &'static str = "traffic-local-v1";
    pub const FIRE_RISK_V1: &'static str = "fire-risk-v1";
    pub const FIRE_LOCAL_V1: &'static str = "fire-local-v1";
    pub const TEMPERATURE_LOCAL_V1: &'static str = "temperature-local-v1";
    pub const HUMIDITY_LOCAL_V1: &'static str = "humidity-local-v1";
    pub const WIND_LOCAL_V1: &'static str = "wind-local-v1";

    pub const PRESETS: [&'static str; 8] = [
        Self::TRAFFIC_POLLUTION_V1,
        Self::POLLUTION_LOCAL_V1,
        Self::TRAFFIC_LOCAL_V1,
        Self::FIRE_RISK_V1,
        Self::FIRE_LOCAL_V1,
        Self::TEMPERATURE_LOCAL_V1,
        Self::HUMIDITY_LOCAL_V1,
        Self::WIND_LOCAL_V1,
    ];

    /// Rules are sorted by ascending priority.
    pub fn new(mut rules: Vec<Rule>, default_level: OperationLevel) -> Result<Self, RuleError> {
        if rules.is_empty() {
            return Err(RuleError::Empty);
        }
        let mut seen = BTreeSet::new();
        for rule in &rules {
            if !seen.insert(rule.priority) {
                return Err(RuleError::DuplicatePriority(rule.priority));
            }
            if rule.conditions.is_empty() {
                return Err(RuleError::NoConditions { priority: rule.priority });
            }
            let mut cats = BTreeSet::new();
            for c in &rule.conditions {
                if !cats.insert(c.category.clone()) {
                    return Err(RuleError::RepeatedCategory { priority: rule.priority, category: c.category.clone() });
                }
                if c.interval.is_empty() {
                    return Err(RuleError::EmptyInterval { priority: rule.priority, category: c.category.clone() });
                }
            }
        }
        rules.sort_by_key(|r| r.priority);
        Ok(Self { rules, default_level })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn default_level(&self) -> OperationLevel {
        self.default_level
    }

    /// Every category referenced by some rule.
    pub fn categories(&self) -> BTreeSet<NetworkCategory> {
        self.rules.iter().flat_map(|r| r.categories().cloned()).collect()
    }

    /// First matching rule wins; no match falls back to the default level.
    pub fn evaluate(&self, inputs: &FusedInputs) -> OperationLevel {
        self.rules.iter().find(|r| r.matches(inputs)).map_or(self.default_level, |r| r.level)
    }

    /// Built-in rule sets by name.
    pub fn preset(name: &str) -> Option<RuleSet> {
        use NetworkCategory as C;
        use OperationLevel::*;
        let rule = |priority, level, conditions| Rule { conditions, level, priority };
        let single = |cat: &str, rows: [(Interval, OperationLevel); 2]| {
            rows.into_iter()
                .enumerate()
                .map(|(i, (iv, lvl))| rule(i as i64 + 1, lvl, vec![Condition::new(cat, iv)]))
                .collect::<Vec<_>>()
        };
        let rules = match name {
            Self::TRAFFIC_POLLUTION_V1 => vec![
                rule(
                    1,
                    Low,
                    vec![
                        Condition::new(C::POLLUTION, Interval::at_most(10.0)),
                        Condition::new(C::TRAFFIC, Interval::at_most(10.0)),
                    ],
                ),
                rule(
                    2,
                    Moderate,
                    vec![
                        Condition::new(C::POLLUTION, Interval::left_open(10.0, 20.0)),
                        Condition::new(C::TRAFFIC, Interval::left_open(10.0, 50.0)),
                    ],
                ),
                rule(
                    3,
                    High,
                    vec![
                        Condition::new(C::POLLUTION, Interval::left_open(10.0, 45.0)),
                        Condition::new(C::TRAFFIC, Interval::left_open(10.0, 50.0)),
                    ],
                ),
            ],
            Self::POLLUTION_LOCAL_V1 => {
                single(C::POLLUTION, [(Interval::at_most(10.0), Low), (Interval::left_open(10.0, 20.0), Moderate)])
            }
            Self::TRAFFIC_LOCAL_V1 => {
                single(C::TRAFFIC, [(Interval::at_most(10.0), Low), (Interval::left_open(10.0, 50.0), Moderate)])
            }
            Self::FIRE_RISK_V1 => vec![
                rule(
                    1,
                    Low,
                    vec![
                        Condition::new(C::FIRE_DETECTION, Interval::at_most(0.3)),
                        Condition::new(C::FIRE_RISK, Interval::at_most(0.3)),
                    ],
                ),
                rule(
                    2,
                    Moderate,
                    vec![
                        Condition::new(C::FIRE_DETECTION, Interval::at_most(0.7)),
                        Condition::new(C::FIRE_RISK, Interval::at_most(0.7)),
                    ],
                ),
            ],
            Self::FIRE_LOCAL_V1 => {
                single(C::FIRE_DETECTION, [(Interval::at_most(0.3), Low), (Interval::left_open(0.3, 0.7), Moderate)])
            }
            Self::TEMPERATURE_LOCAL_V1 => {
                single(C::TEMPERATURE, [(Interval::at_most(30.0), Low), (Interval::left_open(30.0, 40.0), Moderate)])
            }
            Self::HUMIDITY_LOCAL_V1 => single(
                C::HUMIDITY,
                [
                    (Interval::at_least(30.0), Low),
                    (
                        Interval { min: Some(15.0), max: Some(30.0), min_inclusive: true, max_inclusive: false },
                        Moderate,
                    ),
                ],
            ),
            Self::WIND_LOCAL_V1 => {
                single(C::WIND_SPEED, [(Interval::at_most(40.0), Low), (Interval::left_open(40.0, 70.0), Moderate)])
            }
            _ => return None,
        };
        Some(RuleSet::new(rules, High).expect("built-in rule sets are valid"))
    }
}

/// Shorthand for [`RuleSet::evaluate`].
pub fn evaluate_rules(ruleset: &RuleSet, inputs: &FusedInputs) -> OperationLevel {
    ruleset.evaluate(inputs)
}
