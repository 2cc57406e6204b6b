//! Validation for the subset of JSON Schema used by `schema/report.schema.json`:
//! `type` (string or list), `required`, `properties`, `items`, `enum`, `const`.

use serde_json::Value;

fn type_matches(name: &str, v: &Value) -> bool {
    match name {
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "boolean" => v.is_boolean(),
        "null" => v.is_null(),
        "number" => v.is_number(),
        "integer" => v.as_f64().is_some_and(|x| x.fract() == 0.0),
        other => panic!("unsupported schema type {other}"),
    }
}

/// Returns every violation found, as `path: message`.
pub fn validate(schema: &Value, value: &Value) -> Vec<String> {
    let mut errors = Vec::new();
    walk(schema, value, "$", &mut errors);
    errors
}

fn walk(schema: &Value, value: &Value, path: &str, errors: &mut Vec<String>) {
    let Some(obj) = schema.as_object() else { return };
    for key in obj.keys() {
        let known = [
            "$schema", "$id", "title", "description", "type", "required", "properties", "items", "enum", "const",
        ];
        assert!(known.contains(&key.as_str()), "schema keyword {key} is not supported");
    }
    if let Some(t) = obj.get("type") {
        let ok = match t {
            Value::String(s) => type_matches(s, value),
            Value::Array(list) => list.iter().any(|s| type_matches(s.as_str().unwrap(), value)),
            _ => panic!("bad type keyword"),
        };
        if !ok {
            errors.push(format!("{path}: expected type {t}, got {value}"));
            return;
        }
    }
    if let Some(c) = obj.get("const") {
        if c != value {
            errors.push(format!("{path}: expected {c}, got {value}"));
        }
    }
    if let Some(Value::Array(options)) = obj.get("enum") {
        if !options.contains(value) {
            errors.push(format!("{path}: {value} not in {options:?}"));
        }
    }
    if let (Some(Value::Array(req)), Some(map)) = (obj.get("required"), value.as_object()) {
        for r in req {
            let r = r.as_str().unwrap();
            if !map.contains_key(r) {
                errors.push(format!("{path}: missing {r}"));
            }
        }
    }
    if let (Some(Value::Object(props)), Some(map)) = (obj.get("properties"), value.as_object()) {
        for (k, sub) in props {
            if let Some(child) = map.get(k) {
                walk(sub, child, &format!("{path}.{k}"), errors);
            }
        }
    }
    if let (Some(sub), Some(items)) = (obj.get("items"), value.as_array()) {
        for (i, child) in items.iter().enumerate() {
            walk(sub, child, &format!("{path}[{i}]"), errors);
        }
    }
}
