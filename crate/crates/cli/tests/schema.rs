use serde_json::Value;

use relaxwave_cli::config::{ExperimentConfig, FanConfig};

fn schema() -> Value {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/config.schema.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

/// Schemas that may describe the value at this node, following `oneOf`.
fn branches(node: &Value) -> Vec<&Value> {
    match node.get("oneOf").and_then(Value::as_array) {
        Some(list) => list.iter().collect(),
        None => vec![node],
    }
}

fn assert_covered(value: &Value, node: &Value, path: &str) {
    let Value::Object(map) = value else { return };
    for (key, child) in map {
        // free-form maps describe their values with `additionalProperties`
        let sub: Vec<&Value> = branches(node)
            .into_iter()
            .filter_map(|b| match b.get("properties") {
                Some(p) => p.get(key),
                None => b.get("additionalProperties").filter(|a| a.is_object()),
            })
            .collect();
        assert!(!sub.is_empty(), "key '{path}{key}' missing from the schema");
        for s in sub {
            assert_covered(child, s, &format!("{path}{key}."));
        }
    }
    for b in branches(node) {
        if b.get("properties").is_some() {
            assert_eq!(b.get("additionalProperties"), Some(&Value::Bool(false)), "{path} is open");
        }
    }
}

#[test]
fn every_config_key_is_in_the_schema() {
    let s = schema();
    let mut config = ExperimentConfig::default();
    assert_covered(&serde_json::to_value(&config).unwrap(), &s, "");
    config.fan = FanConfig::Riemann {
        u_minus: vec![1.0],
        u_plus: vec![0.0],
    };
    config.check.shifts = Some(vec![0.0]);
    config.model.matrix = Some(vec![vec![1.0]]);
    config.perturbation.direction = relaxwave_core::initial::Direction::Custom(vec![1.0]);
    assert_covered(&serde_json::to_value(&config).unwrap(), &s, "");
}

#[test]
fn schema_lists_every_top_level_key() {
    let s = schema();
    let props = s["properties"].as_object().unwrap();
    let config = serde_json::to_value(ExperimentConfig::default()).unwrap();
    let keys = config.as_object().unwrap();
    assert_eq!(props.len(), keys.len());
    assert!(keys.keys().all(|k| props.contains_key(k)));
}

#[test]
fn example_configs_load() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        relaxwave_cli::config::load(Some(&path), &[]).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        count += 1;
    }
    assert!(count >= 5);
}
