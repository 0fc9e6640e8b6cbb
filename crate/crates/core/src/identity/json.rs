use serde::Serialize;
use serde_json::{Map, Value};

/// Serializes `value` as canonical JSON: object keys sorted by code point,
/// UTF-8, no insignificant whitespace.
pub fn canonical_json<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    let v = serde_json::to_value(value).expect("identity types serialize to JSON");
    serde_json::to_vec(&sorted(v)).expect("JSON values serialize")
}

fn sorted(v: Value) -> Value {
    match v {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            let mut out = Map::new();
            for (k, v) in entries {
                out.insert(k, sorted(v));
            }
            Value::Object(out)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(sorted).collect()),
        other => other,
    }
}
