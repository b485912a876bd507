//! Ground-truth traces for the use-case scenarios and the true criticality
//! that quality is scored against.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::overlay::NetworkCategory;
use crate::reasoning::OperationLevel;
use crate::time::SimTime;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvironmentError {
    #[error("relative humidity {0} outside [0, 100]")]
    Humidity(f64),
    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("schedule has no steps")]
    EmptySchedule,
    #[error("schedule steps must start at strictly increasing times")]
    UnorderedSchedule,
    #[error("coupling gain must be positive and the lag non-negative")]
    Coupling,
    #[error("signal for {0} depends on {1}, which is not defined before it")]
    UnknownSource(NetworkCategory, NetworkCategory),
    #[error("category {0} is defined twice")]
    DuplicateSignal(NetworkCategory),
    #[error("trace step must be positive")]
    Step,
    #[error("horizon must exceed the coupling lag")]
    Horizon,
    #[error("criticality thresholds for {0} are not ordered")]
    Thresholds(NetworkCategory),
}

/// Piecewise-constant profile: each `(start_s, value)` holds until the next.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    steps: Vec<(f64, f64)>,
}

impl Schedule {
    pub fn new(steps: Vec<(f64, f64)>) -> Result<Self, EnvironmentError> {
        if steps.is_empty() {
            return Err(EnvironmentError::EmptySchedule);
        }
        if steps.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            return Err(EnvironmentError::UnorderedSchedule);
        }
        Ok(Self { steps })
    }

    pub fn constant(value: f64) -> Self {
        Self { steps: alloc::vec![(0.0, value)] }
    }

    pub fn steps(&self) -> &[(f64, f64)] {
        &self.steps
    }

    /// Value at `t_s`; times before the first step take the first value.
    pub fn value_at(&self, t_s: f64) -> f64 {
        let idx = self.steps.partition_point(|&(start, _)| start <= t_s);
        self.steps[idx.saturating_sub(1)].1
    }
}

/// `P(t) = max(0, beta + alpha·T(t − tau) + noise)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingSpec {
    pub alpha: f64,
    pub tau_s: f64,
    pub beta: f64,
    pub noise_stddev: f64,
}

impl CouplingSpec {
    pub fn validate(&self) -> Result<(), EnvironmentError> {
        if !(self.alpha > 0.0) || !(self.tau_s >= 0.0) || !(self.noise_stddev >= 0.0) {
            return Err(EnvironmentError::Coupling);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SignalSpec {
    Scheduled(Schedule),
    /// Lagged affine response to an earlier signal.
    Coupled {
        source: NetworkCategory,
        coupling: CouplingSpec,
    },
    /// Fire-risk index computed from three earlier weather signals.
    FireRisk {
        temperature: NetworkCategory,
        humidity: NetworkCategory,
        wind: NetworkCategory,
    },
}

/// Cut points that split a true value into three levels. Ascending:
/// `v <= first` Low, `v <= second` Moderate, above High. Descending
/// (e.g. humidity): `v >= first` Low, `v >= second` Moderate, below High.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalityThresholds {
    pub first: f64,
    pub second: f64,
    pub descending: bool,
}

impl CriticalityThresholds {
    pub fn ascending(first: f64, second: f64) -> Self {
        Self { first, second, descending: false }
    }

    pub fn descending(first: f64, second: f64) -> Self {
        Self { first, second, descending: true }
    }

    pub fn is_ordered(&self) -> bool {
        if self.descending {
            self.first > self.second
        } else {
            self.first < self.second
        }
    }

    pub fn classify(&self, v: f64) -> OperationLevel {
        use OperationLevel::*;
        if self.descending {
            if v >= self.first {
                Low
            } else if v >= self.second {
                Moderate
            } else {
                High
            }
        } else if v <= self.first {
            Low
        } else if v <= self.second {
            Moderate
        } else {
            High
        }
    }
}

/// Everything needed to generate a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentSpec {
    pub step_s: f64,
    /// Generated in order; a signal may only depend on earlier ones.
    pub signals: Vec<(NetworkCategory, SignalSpec)>,
    pub thresholds: BTreeMap<NetworkCategory, CriticalityThresholds>,
}

impl EnvironmentSpec {
    pub fn validate(&self) -> Result<(), EnvironmentError> {
        if !(self.step_s > 0.0 && self.step_s.is_finite()) {
            return Err(EnvironmentError::Step);
        }
        let mut defined: Vec<&NetworkCategory> = Vec::new();
        for (category, signal) in &self.signals {
            if defined.contains(&category) {
                return Err(EnvironmentError::DuplicateSignal(category.clone()));
            }
            let needs: Vec<&NetworkCategory> = match signal {
                SignalSpec::Scheduled(s) => {
                    if is_humidity(category) {
                        for &(_, v) in s.steps() {
                            if !(0.0..=100.0).contains(&v) {
                                return Err(EnvironmentError::Humidity(v));
                            }
                        }
                    }
                    Vec::new()
                }
                SignalSpec::Coupled { source, coupling } => {
                    coupling.validate()?;
                    alloc::vec![source]
                }
                SignalSpec::FireRisk { temperature, humidity, wind } => alloc::vec![temperature, humidity, wind],
            };
            for source in needs {
                if !defined.contains(&source) {
                    return Err(EnvironmentError::UnknownSource(category.clone(), source.clone()));
                }
            }
            defined.push(category);
        }
        for (category, th) in &self.thresholds {
            if !th.is_ordered() {
                return Err(EnvironmentError::Thresholds(category.clone()));
            }
        }
        Ok(())
    }

    pub fn max_lag_s(&self) -> f64 {
        self.signals
            .iter()
            .filter_map(|(_, s)| match s {
                SignalSpec::Coupled { coupling, .. } => Some(coupling.tau_s),
                _ => None,
            })
            .fold(0.0, f64::max)
    }

    /// Samples every signal on `[0, horizon_s]` at `step_s` resolution.
    pub fn generate<R: Rng + ?Sized>(&self, horizon_s: f64, rng: &mut R) -> Result<EnvironmentTrace, EnvironmentError> {
        self.validate()?;
        if !(horizon_s > self.max_lag_s()) {
            return Err(EnvironmentError::Horizon);
        }
        let len = libm::floor(horizon_s / self.step_s) as usize + 1;
        let mut series: BTreeMap<NetworkCategory, Vec<f64>> = BTreeMap::new();
        for (category, signal) in &self.signals {
            let values: Vec<f64> = match signal {
                SignalSpec::Scheduled(schedule) => {
                    (0..len).map(|i| schedule.value_at(i as f64 * self.step_s)).collect()
                }
                SignalSpec::Coupled { source, coupling } => {
                    let src = &series[source];
                    let lag_steps = libm::round(coupling.tau_s / self.step_s) as usize;
                    let noise = (coupling.noise_stddev > 0.0)
                        .then(|| Normal::new(0.0, coupling.noise_stddev).expect("validated stddev"));
                    (0..len)
                        .map(|i| {
                            let driver = src[i.saturating_sub(lag_steps)];
                            let n = noise.as_ref().map_or(0.0, |d| d.sample(rng));
                            (coupling.beta + coupling.alpha * driver + n).max(0.0)
                        })
                        .collect()
                }
                SignalSpec::FireRisk { temperature, humidity, wind } => {
                    let (t, h, w) = (&series[temperature], &series[humidity], &series[wind]);
                    (0..len)
                        .map(|i| {
                            fire_risk_index(t[i].max(0.0), h[i].clamp(0.0, 100.0), w[i].max(0.0))
                                .expect("clamped arguments are in range")
                        })
                        .collect()
                }
            };
            let bounded = values
                .into_iter()
                .map(|v| if is_humidity(category) { v.clamp(0.0, 100.0) } else { v.max(0.0) })
                .collect();
            series.insert(category.clone(), bounded);
        }
        Ok(EnvironmentTrace { step_s: self.step_s, len, series, thresholds: self.thresholds.clone() })
    }
}

fn is_humidity(category: &NetworkCategory) -> bool {
    category.label() == NetworkCategory::HUMIDITY
}

/// Pre-generated true values, sampled every `step_s` seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentTrace {
    step_s: f64,
    len: usize,
    series: BTreeMap<NetworkCategory, Vec<f64>>,
    thresholds: BTreeMap<NetworkCategory, CriticalityThresholds>,
}

impl EnvironmentTrace {
    pub fn step_s(&self) -> f64 {
        self.step_s
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn categories(&self) -> impl Iterator<Item = &NetworkCategory> {
        self.series.keys()
    }

    pub fn series(&self, category: &NetworkCategory) -> Option<&[f64]> {
        self.series.get(category).map(Vec::as_slice)
    }

    pub fn thresholds(&self, category: &NetworkCategory) -> Option<&CriticalityThresholds> {
        self.thresholds.get(category)
    }

    fn index(&self, t: SimTime) -> usize {
        let i = libm::floor(t.as_secs() / self.step_s) as usize;
        i.min(self.len.saturating_sub(1))
    }

    /// True value in effect at `t` (held from the last sample).
    pub fn value_at(&self, category: &NetworkCategory, t: SimTime) -> Option<f64> {
        self.series.get(category).map(|s| s[self.index(t)])
    }

    /// Threshold classification of the true value at `t`.
    pub fn criticality(&self, category: &NetworkCategory, t: SimTime) -> Option<OperationLevel> {
        let th = self.thresholds.get(category)?;
        self.value_at(category, t).map(|v| th.classify(v))
    }
}

/// Shorthand for [`EnvironmentTrace::criticality`].
pub fn true_criticality(trace: &EnvironmentTrace, category: &NetworkCategory, t: SimTime) -> Option<OperationLevel> {
    trace.criticality(category, t)
}

/// Default criticality cut points for the built-in categories.
pub fn default_thresholds(category: &NetworkCategory) -> Option<CriticalityThresholds> {
    let th = match category.label() {
        NetworkCategory::POLLUTION => CriticalityThresholds::ascending(10.0, 20.0),
        NetworkCategory::TRAFFIC => CriticalityThresholds::ascending(10.0, 50.0),
        NetworkCategory::TEMPERATURE => CriticalityThresholds::ascending(30.0, 40.0),
        NetworkCategory::HUMIDITY => CriticalityThresholds::descending(30.0, 15.0),
        NetworkCategory::WIND_SPEED => CriticalityThresholds::ascending(40.0, 70.0),
        NetworkCategory::FIRE_DETECTION | NetworkCategory::FIRE_RISK => CriticalityThresholds::ascending(0.3, 0.7),
        _ => return None,
    };
    Some(th)
}

/// Traffic from `schedule`, pollution coupled to it, on `[0, horizon_s]`.
pub fn gen_traffic_pollution(
    coupling: CouplingSpec,
    schedule: Schedule,
    horizon_s: f64,
    step_s: f64,
    seed: u64,
) -> Result<EnvironmentTrace, EnvironmentError> {
    let traffic = NetworkCategory::named(NetworkCategory::TRAFFIC);
    let pollution = NetworkCategory::named(NetworkCategory::POLLUTION);
    let thresholds =
        [&traffic, &pollution].into_iter().filter_map(|c| default_thresholds(c).map(|t| (c.clone(), t))).collect();
    let spec = EnvironmentSpec {
        step_s,
        signals: alloc::vec![
            (traffic.clone(), SignalSpec::Scheduled(schedule)),
            (pollution, SignalSpec::Coupled { source: traffic, coupling }),
        ],
        thresholds,
    };
    spec.generate(horizon_s, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Piecewise-linear interpolation through `(x, y)` anchors, held flat
/// outside the anchor range.
fn interpolate(anchors: &[(f64, f64)], x: f64) -> f64 {
    let (first, last) = (anchors[0], anchors[anchors.len() - 1]);
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let i = anchors.partition_point(|&(ax, _)| ax <= x);
    let (x0, y0) = anchors[i - 1];
    let (x1, y1) = anchors[i];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

const TEMPERATURE_FACTOR: [(f64, f64); 5] = [(0.0, 0.1), (20.0, 0.35), (35.0, 0.75), (45.0, 0.97), (60.0, 1.0)];
const HUMIDITY_FACTOR: [(f64, f64); 5] = [(0.0, 1.0), (10.0, 0.97), (30.0, 0.6), (60.0, 0.25), (100.0, 0.05)];
const WIND_FACTOR: [(f64, f64); 5] = [(0.0, 0.3), (20.0, 0.5), (50.0, 0.8), (100.0, 0.99), (150.0, 1.0)];

/// Fire-risk index in `[0, 1]` as the product of three piecewise-linear
/// factors. Strictly increasing in temperature on `[0, 60]` °C and in wind on
/// `[0, 150]` km/h, strictly decreasing in humidity; flat beyond those
/// ranges.
pub fn fire_risk_index(temp_c: f64, humidity_pct: f64, wind_kmh: f64) -> Result<f64, EnvironmentError> {
    if !(0.0..=100.0).contains(&humidity_pct) {
        return Err(EnvironmentError::Humidity(humidity_pct));
    }
    if !(temp_c >= 0.0) {
        return Err(EnvironmentError::Negative { name: "temperature", value: temp_c });
    }
    if !(wind_kmh >= 0.0) {
        return Err(EnvironmentError::Negative { name: "wind speed", value: wind_kmh });
    }
    let risk = interpolate(&TEMPERATURE_FACTOR, temp_c)
        * interpolate(&HUMIDITY_FACTOR, humidity_pct)
        * interpolate(&WIND_FACTOR, wind_kmh);
    Ok(risk.clamp(0.0, 1.0))
}
