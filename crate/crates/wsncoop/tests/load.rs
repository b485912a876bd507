use serde_json::{json, Value};
use wsncoop::{parse_scenario, resolve_scenario};
use wsncoop_core::engine::presets;
use wsncoop_core::geo::parse_dms;
use wsncoop_core::reasoning::RuleSet;

const TRAFFIC: &str = include_str!("../scenarios/traffic-pollution-v1.json");

fn traffic_json() -> Value {
    serde_json::from_str(TRAFFIC).unwrap()
}

fn issues(v: &Value) -> Vec<(String, String)> {
    parse_scenario(&v.to_string()).unwrap_err().into_iter().map(|i| (i.path, i.message)).collect()
}

#[test]
fn bundled_scenarios_match_builders() {
    assert_eq!(resolve_scenario("traffic-pollution-v1").unwrap(), presets::traffic_pollution_v1());
    let fire = resolve_scenario("forest-fire-v1").unwrap();
    assert_eq!(fire.networks.len(), 4);
    assert_eq!(fire, presets::forest_fire_v1());
}

#[test]
fn unknown_scenario_name_is_an_io_error() {
    let err = resolve_scenario("no-such-scenario").unwrap_err();
    assert!(matches!(err, wsncoop::LoadError::Io { .. }), "{err}");
}

#[test]
fn inverted_level_map_names_the_field() {
    let mut v = traffic_json();
    v["networks"][1]["level_map"]["high"]["t_alpha_s"] = json!(900);
    let found = issues(&v);
    assert!(found.iter().any(|(p, _)| p.starts_with("$.networks[1].level_map")), "{found:?}");
}

#[test]
fn all_issues_are_reported_together() {
    let mut v = traffic_json();
    v["networks"][0]["n_sensors"] = json!(0);
    v["networks"][1]["rules"] = json!("no-such-rules");
    v["delays"]["eg_to_eg_s"] = json!(-1.0);
    let found = issues(&v);
    let paths: Vec<&str> = found.iter().map(|(p, _)| p.as_str()).collect();
    assert!(paths.contains(&"$.networks[0].n_sensors"), "{found:?}");
    assert!(paths.contains(&"$.networks[1].rules"), "{found:?}");
    assert!(paths.contains(&"$.delays.eg_to_eg_s"), "{found:?}");
}

#[test]
fn dangling_rule_reference() {
    let mut v = traffic_json();
    v["networks"][0]["local_rules"] = json!("missing-v9");
    let found = issues(&v);
    assert!(
        found.iter().any(|(p, m)| p == "$.networks[0].local_rules" && m.contains("dangling rule set reference")),
        "{found:?}"
    );
}

#[test]
fn rulesets_section_can_define_library_entries() {
    let mut v = traffic_json();
    v["rulesets"] = json!({
        "quiet-traffic": {
            "rules": [{ "priority": 1, "level": "Low", "conditions": [{ "category": "Traffic", "max": 30 }] }]
        }
    });
    v["networks"][0]["local_rules"] = json!("quiet-traffic");
    let sc = parse_scenario(&v.to_string()).unwrap();
    let local = sc.networks[0].local_rules.as_ref().unwrap();
    assert_eq!(local.rules().len(), 1);
}

#[test]
fn inline_rules_match_the_preset() {
    let mut v = traffic_json();
    let cond = |cat: &str, min: Option<f64>, max: f64| match min {
        Some(min) => json!({ "category": cat, "min": min, "max": max }),
        None => json!({ "category": cat, "max": max }),
    };
    v["networks"][1]["rules"] = json!({
        "rules": [
            { "priority": 1, "level": "Low", "conditions": [cond("Pollution", None, 10.0), cond("Traffic", None, 10.0)] },
            { "priority": 2, "level": "Moderate", "conditions": [cond("Pollution", Some(10.0), 20.0), cond("Traffic", Some(10.0), 50.0)] },
            { "priority": 3, "level": "High", "conditions": [cond("Pollution", Some(10.0), 45.0), cond("Traffic", Some(10.0), 50.0)] }
        ]
    });
    let sc = parse_scenario(&v.to_string()).unwrap();
    let preset = RuleSet::preset(RuleSet::TRAFFIC_POLLUTION_V1).unwrap();
    let grid = |rs: &RuleSet| -> Vec<_> {
        (0..=60)
            .flat_map(|p| (0..=70).map(move |t| (p as f64, t as f64)))
            .map(|(p, t)| {
                let mut f = wsncoop_core::reasoning::FusedInputs::default();
                f.insert(wsncoop_core::overlay::NetworkCategory::named("Pollution"), p, 1.0);
                f.insert(wsncoop_core::overlay::NetworkCategory::named("Traffic"), t, 1.0);
                rs.evaluate(&f)
            })
            .collect()
    };
    assert_eq!(grid(&sc.networks[1].rules), grid(&preset));
}

#[test]
fn unknown_category_is_rejected() {
    let mut v = traffic_json();
    v["networks"][0]["policy"]["compatible_categories"] = json!(["Noise"]);
    let found = issues(&v);
    assert!(found.iter().any(|(p, _)| p.starts_with("$.networks[0].policy")), "{found:?}");
}

#[test]
fn humidity_schedule_out_of_range() {
    let v: Value = serde_json::from_str(include_str!("../scenarios/forest-fire-v1.json")).unwrap();
    let signals = v["environment"]["signals"].as_array().unwrap();
    let k = signals.iter().position(|s| s["category"] == "Humidity").unwrap();
    let mut v = v.clone();
    v["environment"]["signals"][k]["schedule"][0][1] = json!(120.0);
    let found = issues(&v);
    assert!(found.iter().any(|(p, _)| p == &format!("$.environment.signals[{k}].schedule[0]")), "{found:?}");
}

#[test]
fn negative_delay_is_rejected() {
    let mut v = traffic_json();
    v["delays"]["sink_to_eg_s"] = json!(-0.5);
    let found = issues(&v);
    assert!(found.iter().any(|(p, _)| p == "$.delays.sink_to_eg_s"), "{found:?}");
}

#[test]
fn decimal_and_dms_centers_agree() {
    let dms = "N 49° 47' 39.4510\", E 9° 55' 38.9703\"";
    let c = parse_dms(dms).unwrap();
    let mut v = traffic_json();
    v["networks"][0]["center"] = json!({ "lat": c.latitude_deg(), "lon": c.longitude_deg() });
    let sc = parse_scenario(&v.to_string()).unwrap();
    assert_eq!(sc.networks[0].center, c);
}

#[test]
fn syntax_error_reports_line_and_column() {
    let text = "{\n  \"name\": \"x\",\n  \"horizon_s\": ,\n}";
    let found = parse_scenario(text).unwrap_err();
    assert_eq!(found.len(), 1);
    assert!(found[0].message.contains("line 3"), "{:?}", found[0]);
}

#[test]
fn unknown_field_is_rejected_with_its_path() {
    let mut v = traffic_json();
    v["networks"][0]["sensors"] = json!(5);
    let found = issues(&v);
    assert_eq!(found.len(), 1);
    assert!(found[0].0.starts_with("$.networks[0]"), "{found:?}");
    assert!(found[0].1.contains("sensors"), "{found:?}");
}
