//! Validation of emitted reports against the shipped JSON schema.
//!
//! The schema uses a fixed subset of draft-07 (`type`, `enum`,
//! `required`, `properties`, `additionalProperties: false`, `items`,
//! `oneOf`, and `$ref` into `#/definitions`), and this module
//! implements exactly that subset.

use serde_json::Value;

/// The schema shipped with the binary.
pub const REPORT_SCHEMA: &str = include_str!("../schema/report-v1.json");

/// Validates `value` against the shipped report schema. Returns the
/// list of violations (empty means valid).
pub fn validate_report(value: &Value) -> Vec<String> {
    let schema: Value = serde_json::from_str(REPORT_SCHEMA).expect("shipped schema parses");
    let mut errors = Vec::new();
    validate(value, &schema, &schema, "$", &mut errors);
    errors
}

fn resolve<'a>(schema: &'a Value, root: &'a Value) -> &'a Value {
    if let Some(reference) = schema.get("$ref").and_then(Value::as_str) {
        let path = reference
            .trim_start_matches("#/")
            .split('/')
            .collect::<Vec<_>>();
        let mut node = root;
        for part in path {
            node = node.get(part).expect("schema reference resolves");
        }
        return node;
    }
    schema
}

fn type_matches(value: &Value, ty: &str) -> bool {
    match ty {
        "object" => value.is_object(),
        "array" => value.is_array(),
        "string" => value.is_string(),
        "boolean" => value.is_boolean(),
        "number" => value.is_number(),
        "integer" => value.is_i64() || value.is_u64(),
        "null" => value.is_null(),
        _ => false,
    }
}

fn validate(value: &Value, schema: &Value, root: &Value, path: &str, errors: &mut Vec<String>) {
    let schema = resolve(schema, root);

    if let Some(variants) = schema.get("oneOf").and_then(Value::as_array) {
        let mut matching = 0usize;
        for variant in variants {
            let mut sub = Vec::new();
            validate(value, variant, root, path, &mut sub);
            if sub.is_empty() {
                matching += 1;
            }
        }
        if matching != 1 {
            errors.push(format!("{path}: matches {matching} of the oneOf variants"));
        }
        return;
    }

    if let Some(ty) = schema.get("type").and_then(Value::as_str) {
        if !type_matches(value, ty) {
            errors.push(format!("{path}: expected {ty}"));
            return;
        }
    }

    if let Some(allowed) = schema.get("enum").and_then(Value::as_array) {
        if !allowed.contains(value) {
            errors.push(format!("{path}: not one of the allowed values"));
            return;
        }
    }

    if let Some(obj) = value.as_object() {
        if let Some(required) = schema.get("required").and_then(Value::as_array) {
            for key in required.iter().filter_map(Value::as_str) {
                if !obj.contains_key(key) {
                    errors.push(format!("{path}: missing required key '{key}'"));
                }
            }
        }
        let props = schema.get("properties").and_then(Value::as_object);
        let closed = schema
            .get("additionalProperties")
            .and_then(Value::as_bool)
            .map(|b| !b)
            .unwrap_or(false);
        for (key, sub) in obj {
            match props.and_then(|p| p.get(key)) {
                Some(subschema) => {
                    validate(sub, subschema, root, &format!("{path}.{key}"), errors)
                }
                None if closed => {
                    errors.push(format!("{path}: unexpected key '{key}'"));
                }
                None => {}
            }
        }
    }

    if let (Some(items), Some(arr)) = (schema.get("items"), value.as_array()) {
        for (i, sub) in arr.iter().enumerate() {
            validate(sub, items, root, &format!("{path}[{i}]"), errors);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn minimal_valid_report() {
        let report = json!({
            "version": "0.1.0",
            "policy": {"tolerance": 1e-9, "samples": 200, "seed": 42},
            "checks": [{
                "id": "a", "kind": "zero",
                "entries": [{
                    "id": "result", "label": "zero",
                    "outcome": {"type": "zero", "verdict": {"class": "exact-zero"}},
                    "passed": true, "expected": "pass",
                    "require_exact": false, "matched": true
                }],
                "passed": true, "matched": true, "wall_ms": 0.5
            }],
            "overall": "pass"
        });
        assert!(validate_report(&report).is_empty());
    }

    #[test]
    fn rejects_malformed_reports() {
        let missing_overall = json!({
            "version": "0.1.0",
            "policy": {"tolerance": 1e-9, "samples": 200, "seed": 42},
            "checks": []
        });
        assert!(!validate_report(&missing_overall).is_empty());

        let bad_verdict = json!({
            "version": "0.1.0",
            "policy": {"tolerance": 1e-9, "samples": 200, "seed": 42},
            "checks": [{
                "id": "a", "kind": "zero",
                "entries": [{
                    "id": "result", "label": "zero",
                    "outcome": {"type": "zero", "verdict": {"class": "sorta-zero"}},
                    "passed": true, "expected": "pass",
                    "require_exact": false, "matched": true
                }],
                "passed": true, "matched": true, "wall_ms": 0.5
            }],
            "overall": "pass"
        });
        assert!(!validate_report(&bad_verdict).is_empty());
    }
}
