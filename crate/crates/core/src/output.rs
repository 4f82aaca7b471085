//! Number formatting for exported artifacts: 17 significant digits in JSON,
//! 12 in CSV. Non-finite values become `null` in JSON and `inf`/`nan` in CSV.

/// 12 significant digits.
pub fn csv_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn csv_row(values: &[f64]) -> String {
    values.iter().map(|v| csv_num(*v)).collect::<Vec<_>>().join(",")
}

/// 17 significant digits.
pub fn json_num_text(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".into()
    }
}

/// Rewrites every number of a JSON value with 17 significant digits.
pub fn to_json_sig17(value: &serde_json::Value) -> String {
    let mut out = String::new();
    write_value(value, 0, &mut out);
    out.push('\n');
    out
}

fn indent(level: usize, out: &mut String) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn write_value(v: &serde_json::Value, level: usize, out: &mut String) {
    use serde_json::Value;
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&json_num_text(n.as_f64().unwrap_or(f64::NAN)));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).unwrap_or_default()),
        Value::Array(items) => {
            if items.iter().all(|i| !i.is_array() && !i.is_object()) {
                out.push('[');
                for (k, item) in items.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    write_value(item, level, out);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                indent(level + 1, out);
                write_value(item, level + 1, out);
                if k + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            indent(level, out);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            let n = map.len();
            for (k, (key, item)) in map.iter().enumerate() {
                indent(level + 1, out);
                out.push_str(&serde_json::to_string(key).unwrap_or_default());
                out.push_str(": ");
                write_value(item, level + 1, out);
                if k + 1 < n {
                    out.push(',');
                }
                out.push('\n');
            }
            indent(level, out);
            out.push('}');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_twelve_digits() {
        assert_eq!(csv_num(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(csv_num(f64::INFINITY), "inf");
    }

    #[test]
    fn json_round_trips_exactly() {
        for x in [0.1, 1.0 / 3.0, std::f64::consts::PI * 1e-200, -2.5e300] {
            let s = json_num_text(x);
            let back: f64 = serde_json::from_str(&s).unwrap();
            assert_eq!(back, x);
        }
        assert_eq!(json_num_text(f64::NAN), "null");
    }

    #[test]
    fn value_writer_formats_floats_only() {
        let v = serde_json::json!({"a": 1, "b": [0.5, 2.0], "c": {"d": "x"}});
        let s = to_json_sig17(&v);
        assert!(s.contains("\"a\": 1"));
        assert!(s.contains("5.0000000000000000e-1"));
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["b"][1], 2.0);
    }
}
