//! Scenario files shipped with the binary.

pub const TRAFFIC_POLLUTION_V1: &str = include_str!("../scenarios/traffic-pollution-v1.json");
pub const FOREST_FIRE_V1: &str = include_str!("../scenarios/forest-fire-v1.json");

pub const NAMES: [&str; 2] = ["traffic-pollution-v1", "forest-fire-v1"];

/// JSON text of a bundled scenario.
pub fn bundled(name: &str) -> Option<&'static str> {
    match name {
        "traffic-pollution-v1" => Some(TRAFFIC_POLLUTION_V1),
        "forest-fire-v1" => Some(FOREST_FIRE_V1),
        _ => None,
    }
}
