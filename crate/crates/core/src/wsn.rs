//! Sensor networks as seen by the simulator: sensors, sink, energy and
//! sensing quality.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::geo::GeoCoordinate;
use crate::overlay::{NetworkCategory, NodeId};
use crate::reasoning::OperationLevel;
use crate::time::{SimDuration, SimTime};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WsnError {
    #[error("a network needs at least one sensor")]
    NoSensors,
    #[error("t_alpha_s must be positive, got {0}")]
    Interval(f64),
    #[error("n_active {n_active} outside 1..={n_total}")]
    ActiveCount { n_active: usize, n_total: usize },
    #[error("noise_stddev must be finite and non-negative, got {0}")]
    Noise(f64),
    #[error("energy constants must be non-negative with e_report > e_idle_per_s")]
    Energy,
    #[error("{field} of quality target {level} must increase with the level")]
    QualityOrder { level: OperationLevel, field: &'static str },
    #[error("quality target {level} needs lambda_star_hz > 0 and n_active_star >= 1")]
    QualityTarget { level: OperationLevel },
}

/// The controllable pair a query installs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkConfig {
    pub t_alpha_s: f64,
    pub n_active: usize,
}

impl NetworkConfig {
    pub fn validate(&self, n_total: usize) -> Result<(), WsnError> {
        if !(self.t_alpha_s > 0.0 && self.t_alpha_s.is_finite()) {
            return Err(WsnError::Interval(self.t_alpha_s));
        }
        if self.n_active == 0 || self.n_active > n_total {
            return Err(WsnError::ActiveCount { n_active: self.n_active, n_total });
        }
        Ok(())
    }

    pub fn report_rate_hz(&self) -> f64 {
        1.0 / self.t_alpha_s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Query {
    pub issued_at: SimTime,
    pub new_config: NetworkConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Report {
    pub sensor_id: usize,
    pub value: f64,
    pub sent_at: SimTime,
}

/// Three-constant energy abstraction: per report, per sensor per query,
/// and per sensor-second of idling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyModel {
    pub e_report: f64,
    pub e_query: f64,
    pub e_idle_per_s: f64,
}

impl Default for EnergyModel {
    fn default() -> Self {
        Self { e_report: 1.0, e_query: 0.5, e_idle_per_s: 0.001 }
    }
}

impl EnergyModel {
    pub fn validate(&self) -> Result<(), WsnError> {
        let finite = [self.e_report, self.e_query, self.e_idle_per_s].iter().all(|e| e.is_finite() && *e >= 0.0);
        if !finite || self.e_report <= self.e_idle_per_s {
            return Err(WsnError::Energy);
        }
        Ok(())
    }

    /// Energy spent by a network of `n_total` sensors over `dt_s` seconds
    /// in which `reports` reports were sent and `queries` queries broadcast.
    pub fn accumulate(&self, n_total: usize, dt_s: f64, reports: u64, queries: u64) -> f64 {
        let n = n_total as f64;
        n * self.e_idle_per_s * dt_s.max(0.0) + reports as f64 * self.e_report + queries as f64 * n * self.e_query
    }
}

/// Ideal report frequency and active count for one criticality level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityTarget {
    pub lambda_star_hz: f64,
    pub n_active_star: f64,
}

/// Quality targets indexed by the environment's true criticality.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityTargets {
    targets: [QualityTarget; 3],
}

impl QualityTargets {
    pub fn new(low: QualityTarget, moderate: QualityTarget, high: QualityTarget) -> Result<Self, WsnError> {
        let targets = [low, moderate, high];
        for (level, t) in OperationLevel::ALL.into_iter().zip(&targets) {
            if !(t.lambda_star_hz > 0.0 && t.lambda_star_hz.is_finite() && t.n_active_star >= 1.0) {
                return Err(WsnError::QualityTarget { level });
            }
        }
        for i in 1..3 {
            let level = OperationLevel::ALL[i];
            if targets[i].lambda_star_hz <= targets[i - 1].lambda_star_hz {
                return Err(WsnError::QualityOrder { level, field: "lambda_star_hz" });
            }
            if targets[i].n_active_star <= targets[i - 1].n_active_star {
                return Err(WsnError::QualityOrder { level, field: "n_active_star" });
            }
        }
        Ok(Self { targets })
    }

    /// Targets that make the default level map ideal on `n_total` sensors.
    pub fn matching_default_levels(n_total: usize) -> Self {
        let n = n_total as f64;
        let t = |period: f64, share: f64| QualityTarget {
            lambda_star_hz: 1.0 / period,
            n_active_star: libm::round(share * n).max(1.0),
        };
        Self { targets: [t(600.0, 0.25), t(300.0, 0.5), t(60.0, 1.0)] }
    }

    pub fn at(&self, level: OperationLevel) -> QualityTarget {
        self.targets[level as usize]
    }
}

/// Sensing quality `min(1, (λ/λ*)·(n/n*))` with `λ = 1/t_alpha`.
pub fn sensing_quality(config: &NetworkConfig, target: &QualityTarget) -> f64 {
    let lambda = config.report_rate_hz();
    let q = (lambda / target.lambda_star_hz) * (config.n_active as f64 / target.n_active_star);
    q.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorNode {
    pub sensor_id: usize,
    pub noise_stddev: f64,
    pub active: bool,
    /// Energy this sensor has spent so far.
    pub energy: f64,
}

/// What a report round produced at the sink.
#[derive(Debug, Clone, PartialEq)]
pub struct SinkAggregate {
    pub value: f64,
    pub reports: Vec<Report>,
}

/// One simulated WSN: sensors, their sink and the energy ledger.
#[derive(Debug, Clone)]
pub struct SensorNetwork {
    pub network_id: NodeId,
    pub category: NetworkCategory,
    pub center: GeoCoordinate,
    sensors: Vec<SensorNode>,
    config: NetworkConfig,
    energy: EnergyModel,
    energy_cum: f64,
    idle_until: SimTime,
    reports_sent: u64,
    queries_applied: u64,
}

impl SensorNetwork {
    pub fn new(
        network_id: NodeId,
        category: NetworkCategory,
        center: GeoCoordinate,
        n_sensors: usize,
        noise_stddev: f64,
        energy: EnergyModel,
        config: NetworkConfig,
    ) -> Result<Self, WsnError> {
        if n_sensors == 0 {
            return Err(WsnError::NoSensors);
        }
        if !(noise_stddev.is_finite() && noise_stddev >= 0.0) {
            return Err(WsnError::Noise(noise_stddev));
        }
        energy.validate()?;
        config.validate(n_sensors)?;
        let sensors = (0..n_sensors)
            .map(|sensor_id| SensorNode { sensor_id, noise_stddev, active: sensor_id < config.n_active, energy: 0.0 })
            .collect();
        Ok(Self {
            network_id,
            category,
            center,
            sensors,
            config,
            energy,
            energy_cum: 0.0,
            idle_until: SimTime::ZERO,
            reports_sent: 0,
            queries_applied: 0,
        })
    }

    pub fn n_total(&self) -> usize {
        self.sensors.len()
    }

    pub fn sensors(&self) -> &[SensorNode] {
        &self.sensors
    }

    pub fn config(&self) -> NetworkConfig {
        self.config
    }

    pub fn energy_model(&self) -> &EnergyModel {
        &self.energy
    }

    pub fn energy_cum(&self) -> f64 {
        self.energy_cum
    }

    pub fn reports_sent(&self) -> u64 {
        self.reports_sent
    }

    pub fn queries_applied(&self) -> u64 {
        self.queries_applied
    }

    pub fn active_count(&self) -> usize {
        self.sensors.iter().filter(|s| s.active).count()
    }

    /// Charges idle energy for every sensor up to `now`.
    pub fn advance_to(&mut self, now: SimTime) {
        if now <= self.idle_until {
            return;
        }
        let dt = now.secs_since(self.idle_until);
        self.idle_until = now;
        self.energy_cum += self.energy.accumulate(self.sensors.len(), dt, 0, 0);
        let per_sensor = self.energy.e_idle_per_s * dt;
        for s in &mut self.sensors {
            s.energy += per_sensor;
        }
    }

    /// Every active sensor reads `env_value` plus its gaussian noise; the
    /// sink averages the readings.
    pub fn sample_and_report<R: Rng + ?Sized>(&mut self, env_value: f64, now: SimTime, rng: &mut R) -> SinkAggregate {
        self.advance_to(now);
        let mut reports = Vec::with_capacity(self.config.n_active);
        for s in self.sensors.iter_mut().filter(|s| s.active) {
            let noise = if s.noise_stddev > 0.0 {
                Normal::new(0.0, s.noise_stddev).expect("noise checked at construction").sample(rng)
            } else {
                0.0
            };
            s.energy += self.energy.e_report;
            reports.push(Report { sensor_id: s.sensor_id, value: env_value + noise, sent_at: now });
        }
        debug_assert!(!reports.is_empty(), "at least one sensor is always active");
        self.reports_sent += reports.len() as u64;
        self.energy_cum += self.energy.accumulate(self.sensors.len(), 0.0, reports.len() as u64, 0);
        let value = reports.iter().map(|r| r.value).sum::<f64>() / reports.len() as f64;
        SinkAggregate { value, reports }
    }

    /// Installs a new configuration. The `n_active` sensors that spent the
    /// least energy so far become active (ties by sensor id). Every sensor
    /// pays for receiving the query. Returns when the next report is due.
    pub fn apply_query(&mut self, query: &Query) -> Result<SimTime, WsnError> {
        query.new_config.validate(self.sensors.len())?;
        self.advance_to(query.issued_at);
        for s in &mut self.sensors {
            s.energy += self.energy.e_query;
        }
        self.energy_cum += self.energy.accumulate(self.sensors.len(), 0.0, 0, 1);
        self.queries_applied += 1;

        let mut order: Vec<usize> = (0..self.sensors.len()).collect();
        order.sort_by(|&a, &b| self.sensors[a].energy.total_cmp(&self.sensors[b].energy).then(a.cmp(&b)));
        for s in &mut self.sensors {
            s.active = false;
        }
        for &i in order.iter().take(query.new_config.n_active) {
            self.sensors[i].active = true;
        }
        self.config = query.new_config;
        Ok(query.issued_at + SimDuration::from_secs(self.config.t_alpha_s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn net(n: usize, noise: f64, config: NetworkConfig, energy: EnergyModel) -> SensorNetwork {
        SensorNetwork::new(
            NodeId::new(1).unwrap(),
            NetworkCategory::named("Pollution"),
            GeoCoordinate::new(0.0, 0.0).unwrap(),
            n,
            noise,
            energy,
            config,
        )
        .unwrap()
    }

    fn cfg(t: f64, n: usize) -> NetworkConfig {
        NetworkConfig { t_alpha_s: t, n_active: n }
    }

    #[test]
    fn zero_noise_reports_ground_truth() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n_active in [1, 5, 20] {
            let mut w = net(20, 0.0, cfg(60.0, n_active), EnergyModel::default());
            let agg = w.sample_and_report(35.0, SimTime::ZERO, &mut rng);
            assert_eq!(agg.value, 35.0);
            assert_eq!(agg.reports.len(), n_active);
        }
    }

    #[test]
    fn single_active_sensor_is_the_aggregate() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut w = net(5, 2.0, cfg(60.0, 1), EnergyModel::default());
        let agg = w.sample_and_report(10.0, SimTime::ZERO, &mut rng);
        assert_eq!(agg.reports.len(), 1);
        assert_eq!(agg.value, agg.reports[0].value);
    }

    #[test]
    fn mean_of_hundred_noisy_sensors_is_tight() {
        // standard error 0.1, so 35 ± 0.5 is a 5-sigma band
        for seed in 0..200 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut w = net(100, 1.0, cfg(60.0, 100), EnergyModel::default());
            let agg = w.sample_and_report(35.0, SimTime::ZERO, &mut rng);
            assert!((agg.value - 35.0).abs() < 0.5, "seed {seed}: {}", agg.value);
        }
    }

    #[test]
    fn report_round_charges_active_sensors() {
        let energy = EnergyModel { e_report: 1.0, e_query: 0.0, e_idle_per_s: 0.0 };
        let mut w = net(20, 0.0, cfg(600.0, 5), energy);
        w.sample_and_report(1.0, SimTime::ZERO, &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(w.energy_cum(), 5.0);
    }

    #[test]
    fn query_application() {
        let mut w = net(20, 0.0, cfg(600.0, 5), EnergyModel::default());
        let next = w.apply_query(&Query { issued_at: SimTime::from_secs(100.0), new_config: cfg(60.0, 20) }).unwrap();
        assert_eq!(w.active_count(), 20);
        assert_eq!(next, SimTime::from_secs(160.0));
    }

    #[test]
    fn reapplying_same_config_still_costs_a_broadcast() {
        let energy = EnergyModel { e_report: 1.0, e_query: 0.5, e_idle_per_s: 0.0 };
        let mut w = net(20, 0.0, cfg(600.0, 5), energy);
        let before: Vec<bool> = w.sensors().iter().map(|s| s.active).collect();
        w.apply_query(&Query { issued_at: SimTime::ZERO, new_config: cfg(600.0, 5) }).unwrap();
        let after: Vec<bool> = w.sensors().iter().map(|s| s.active).collect();
        assert_eq!(before, after);
        assert_eq!(w.energy_cum(), 10.0);
    }

    #[test]
    fn oversized_active_set_is_rejected() {
        let mut w = net(20, 0.0, cfg(600.0, 5), EnergyModel::default());
        let err = w.apply_query(&Query { issued_at: SimTime::ZERO, new_config: cfg(60.0, 25) });
        assert_eq!(err, Err(WsnError::ActiveCount { n_active: 25, n_total: 20 }));
        assert_eq!(w.config(), cfg(600.0, 5));
        assert_eq!(w.energy_cum(), 0.0);
    }

    #[test]
    fn active_set_rotates_by_spent_energy() {
        let energy = EnergyModel { e_report: 1.0, e_query: 0.0, e_idle_per_s: 0.0 };
        let mut w = net(4, 0.0, cfg(60.0, 2), energy);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        w.sample_and_report(1.0, SimTime::ZERO, &mut rng);
        w.apply_query(&Query { issued_at: SimTime::ZERO, new_config: cfg(60.0, 2) }).unwrap();
        let active: Vec<usize> = w.sensors().iter().filter(|s| s.active).map(|s| s.sensor_id).collect();
        assert_eq!(active, [2, 3]);
    }

    #[test]
    fn energy_accumulation_examples() {
        let e = EnergyModel { e_report: 1.0, e_query: 0.5, e_idle_per_s: 0.0 };
        // one round of 5 reports vs ten rounds in the same 600 s window
        assert_eq!(e.accumulate(20, 600.0, 5, 0), 5.0);
        assert_eq!(e.accumulate(20, 600.0, 10 * 5, 0), 50.0);
        assert_eq!(e.accumulate(20, 0.0, 0, 0), 0.0);
        let idle = EnergyModel { e_idle_per_s: 0.01, ..e };
        assert!((idle.accumulate(20, 10.0, 0, 1) - (2.0 + 10.0)).abs() < 1e-12);
    }

    #[test]
    fn idle_energy_is_charged_lazily() {
        let e = EnergyModel { e_report: 1.0, e_query: 0.0, e_idle_per_s: 0.5 };
        let mut w = net(2, 0.0, cfg(60.0, 1), e);
        w.advance_to(SimTime::from_secs(10.0));
        assert_eq!(w.energy_cum(), 10.0);
        w.advance_to(SimTime::from_secs(5.0));
        assert_eq!(w.energy_cum(), 10.0);
    }

    #[test]
    fn quality_examples() {
        let target = QualityTarget { lambda_star_hz: 1.0 / 60.0, n_active_star: 20.0 };
        assert_eq!(sensing_quality(&cfg(60.0, 20), &target), 1.0);
        assert!((sensing_quality(&cfg(120.0, 20), &target) - 0.5).abs() < 1e-12);
        assert_eq!(sensing_quality(&cfg(30.0, 20), &target), 1.0);
    }

    #[test]
    fn validation_guards() {
        assert!(EnergyModel { e_report: 0.001, e_query: 0.0, e_idle_per_s: 0.001 }.validate().is_err());
        assert!(EnergyModel { e_report: 1.0, e_query: -1.0, e_idle_per_s: 0.0 }.validate().is_err());
        assert!(cfg(0.0, 1).validate(5).is_err());
        assert!(cfg(10.0, 0).validate(5).is_err());
        let t = |l, n| QualityTarget { lambda_star_hz: l, n_active_star: n };
        assert!(QualityTargets::new(t(1.0, 1.0), t(2.0, 2.0), t(3.0, 3.0)).is_ok());
        assert!(QualityTargets::new(t(1.0, 1.0), t(1.0, 2.0), t(3.0, 3.0)).is_err());
        assert!(QualityTargets::new(t(1.0, 1.0), t(2.0, 2.0), t(3.0, 2.0)).is_err());
    }
}
