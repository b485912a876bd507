//! The two built-in scenarios, constructed directly.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::cooperation::{CooperationPolicy, CorrelationSign};
use crate::environment::{default_thresholds, CouplingSpec, EnvironmentSpec, Schedule, SignalSpec};
use crate::geo::{parse_dms, GeoCoordinate};
use crate::overlay::{NetworkCategory as C, NodeId};
use crate::reasoning::RuleSet;

use super::{LinkDelays, NetworkSpec, OverlaySpec, Scenario};

pub const TRAFFIC_POLLUTION_V1: &str = "traffic-pollution-v1";
pub const FOREST_FIRE_V1: &str = "forest-fire-v1";

pub const TRAFFIC_SPIKE_START_S: f64 = 3600.0;
pub const TRAFFIC_SPIKE_END_S: f64 = 7200.0;
pub const FIRE_WEATHER_START_S: f64 = 7200.0;
pub const FIRE_WEATHER_END_S: f64 = 14400.0;

/// Benign and extreme weather as (temperature °C, humidity %, wind km/h).
pub const BENIGN_WEATHER: (f64, f64, f64) = (15.0, 80.0, 10.0);
pub const EXTREME_WEATHER: (f64, f64, f64) = (46.4, 6.0, 100.0);

fn preset(name: &str) -> RuleSet {
    RuleSet::preset(name).expect("built-in rule set")
}

fn thresholds(categories: &[&str]) -> BTreeMap<C, crate::environment::CriticalityThresholds> {
    categories.iter().map(|&c| (C::named(c), default_thresholds(&C::named(c)).expect("built-in category"))).collect()
}

fn id(hex: &str) -> Option<NodeId> {
    Some(hex.parse().expect("valid id"))
}

/// Traffic and pollution networks a few centimetres apart; pollution follows
/// traffic with a 15 minute lag. Over one day, traffic jumps from 5 to 40
/// vehicles/min for a one-hour rush starting at 01:00.
pub fn traffic_pollution_v1() -> Scenario {
    let traffic_center = parse_dms("N 49° 47' 39.4510\", E 9° 55' 38.9703\"").expect("valid");
    let pollution_center = parse_dms("N 49° 47' 39.4506\", E 9° 55' 38.9778\"").expect("valid");

    let mut traffic =
        NetworkSpec::new("traffic", C::named(C::TRAFFIC), traffic_center, 20, preset(RuleSet::TRAFFIC_POLLUTION_V1));
    traffic.node_id = id("4248C4");
    traffic.address = Some("193.174.81.220".into());
    traffic.noise_stddev = 1.0;
    traffic.policy = CooperationPolicy::new(10.0, [C::named(C::POLLUTION)]);
    traffic.local_rules = Some(preset(RuleSet::TRAFFIC_LOCAL_V1));

    let mut pollution = NetworkSpec::new(
        "pollution",
        C::named(C::POLLUTION),
        pollution_center,
        20,
        preset(RuleSet::TRAFFIC_POLLUTION_V1),
    );
    pollution.node_id = id("CF32A1");
    pollution.address = Some("132.187.16.21".into());
    pollution.noise_stddev = 1.0;
    pollution.policy = CooperationPolicy::new(10.0, [C::named(C::TRAFFIC)]);
    pollution.local_rules = Some(preset(RuleSet::POLLUTION_LOCAL_V1));

    let schedule =
        Schedule::new(vec![(0.0, 5.0), (TRAFFIC_SPIKE_START_S, 40.0), (TRAFFIC_SPIKE_END_S, 5.0)]).expect("ordered");
    let coupling = CouplingSpec { alpha: 0.7, tau_s: 900.0, beta: 2.0, noise_stddev: 0.5 };
    Scenario {
        name: TRAFFIC_POLLUTION_V1.into(),
        horizon_s: 86400.0,
        networks: vec![traffic, pollution],
        environment: EnvironmentSpec {
            step_s: 10.0,
            signals: vec![
                (C::named(C::TRAFFIC), SignalSpec::Scheduled(schedule)),
                (C::named(C::POLLUTION), SignalSpec::Coupled { source: C::named(C::TRAFFIC), coupling }),
            ],
            thresholds: thresholds(&[C::TRAFFIC, C::POLLUTION]),
        },
        overlay: OverlaySpec::default(),
        delays: LinkDelays::default(),
        metrics_interval_s: Scenario::DEFAULT_METRICS_INTERVAL_S,
    }
}

fn weather_schedule(benign: f64, extreme: f64) -> Schedule {
    Schedule::new(vec![(0.0, benign), (FIRE_WEATHER_START_S, extreme), (FIRE_WEATHER_END_S, benign)]).expect("ordered")
}

fn site(lat: f64, lon: f64) -> GeoCoordinate {
    GeoCoordinate::new(lat, lon).expect("in range")
}

/// Temperature, humidity and wind networks feeding a fire-detection
/// network; the weather turns extreme between two and four hours.
pub fn forest_fire_v1() -> Scenario {
    let weather = [
        (C::TEMPERATURE, "temperature", site(-37.5000, 145.3000), RuleSet::TEMPERATURE_LOCAL_V1, "1A0001"),
        (C::HUMIDITY, "humidity", site(-37.5150, 145.3100), RuleSet::HUMIDITY_LOCAL_V1, "1A0002"),
        (C::WIND_SPEED, "wind", site(-37.4900, 145.2850), RuleSet::WIND_LOCAL_V1, "1A0003"),
    ];
    let mut networks: Vec<NetworkSpec> = weather
        .iter()
        .map(|&(category, name, center, rules, hex)| {
            let mut n = NetworkSpec::new(name, C::named(category), center, 12, preset(rules));
            n.node_id = id(hex);
            n.noise_stddev = 0.5;
            n
        })
        .collect();

    let mut fire = NetworkSpec::new(
        "fire-detection",
        C::named(C::FIRE_DETECTION),
        site(-37.5050, 145.3050),
        20,
        preset(RuleSet::FIRE_RISK_V1),
    );
    fire.node_id = id("F1D000");
    fire.noise_stddev = 0.02;
    fire.local_rules = Some(preset(RuleSet::FIRE_LOCAL_V1));
    fire.policy =
        CooperationPolicy::new(10.0, [C::named(C::TEMPERATURE), C::named(C::HUMIDITY), C::named(C::WIND_SPEED)])
            .with_sign(C::named(C::HUMIDITY), CorrelationSign::Negative);
    networks.push(fire);

    let (tb, hb, wb) = BENIGN_WEATHER;
    let (te, he, we) = EXTREME_WEATHER;
    Scenario {
        name: FOREST_FIRE_V1.into(),
        horizon_s: 21600.0,
        networks,
        environment: EnvironmentSpec {
            step_s: 10.0,
            signals: vec![
                (C::named(C::TEMPERATURE), SignalSpec::Scheduled(weather_schedule(tb, te))),
                (C::named(C::HUMIDITY), SignalSpec::Scheduled(weather_schedule(hb, he))),
                (C::named(C::WIND_SPEED), SignalSpec::Scheduled(weather_schedule(wb, we))),
                (
                    C::named(C::FIRE_DETECTION),
                    SignalSpec::FireRisk {
                        temperature: C::named(C::TEMPERATURE),
                        humidity: C::named(C::HUMIDITY),
                        wind: C::named(C::WIND_SPEED),
                    },
                ),
            ],
            thresholds: thresholds(&[C::TEMPERATURE, C::HUMIDITY, C::WIND_SPEED, C::FIRE_DETECTION]),
        },
        overlay: OverlaySpec::default(),
        delays: LinkDelays::default(),
        metrics_interval_s: Scenario::DEFAULT_METRICS_INTERVAL_S,
    }
}

/// Built-in scenario by name.
pub fn by_name(name: &str) -> Option<Scenario> {
    match name {
        TRAFFIC_POLLUTION_V1 => Some(traffic_pollution_v1()),
        FOREST_FIRE_V1 => Some(forest_fire_v1()),
        _ => None,
    }
}
