//! Flattening of JSON artifacts into a long-format CSV and collection of
//! their `pass` flags.

use serde_json::Value;
use toeplitz_lab::output::format_float;

/// One leaf of a JSON document: `errors[2].E_n`-style path and its value.
#[derive(Debug, Clone, PartialEq)]
pub struct Leaf {
    pub path: String,
    pub value: String,
}

pub fn flatten(v: &Value) -> Vec<Leaf> {
    let mut out = Vec::new();
    walk(v, String::new(), &mut out);
    out
}

fn walk(v: &Value, path: String, out: &mut Vec<Leaf>) {
    let leaf = |value: String, out: &mut Vec<Leaf>| {
        out.push(Leaf {
            path: path.clone(),
            value,
        })
    };
    match v {
        Value::Null => leaf(String::new(), out),
        Value::Bool(b) => leaf(b.to_string(), out),
        Value::Number(n) if n.is_f64() => leaf(format_float(n.as_f64().unwrap_or(f64::NAN)), out),
        Value::Number(n) => leaf(n.to_string(), out),
        Value::String(s) => leaf(s.clone(), out),
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                walk(item, format!("{path}[{i}]"), out);
            }
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            for k in keys {
                let child = if path.is_empty() {
                    k.clone()
                } else {
                    format!("{path}.{k}")
                };
                walk(&map[k], child, out);
            }
        }
    }
}

/// Every boolean stored under a key named `pass`, at any depth.
pub fn pass_flags(v: &Value) -> Vec<bool> {
    let mut flags = Vec::new();
    collect_flags(v, &mut flags);
    flags
}

fn collect_flags(v: &Value, flags: &mut Vec<bool>) {
    match v {
        Value::Array(items) => items.iter().for_each(|i| collect_flags(i, flags)),
        Value::Object(map) => {
            for (k, child) in map {
                match child {
                    Value::Bool(b) if k == "pass" => flags.push(*b),
                    _ => collect_flags(child, flags),
                }
            }
        }
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn paths_are_sorted_and_indexed() {
        let v = json!({"b": [1, {"c": true}], "a": 0.5, "n": null});
        let got: Vec<(String, String)> =
            flatten(&v).into_iter().map(|l| (l.path, l.value)).collect();
        assert_eq!(
            got,
            vec![
                ("a".into(), "5.0000000000000000e-1".into()),
                ("b[0]".into(), "1".into()),
                ("b[1].c".into(), "true".into()),
                ("n".into(), "".into()),
            ]
        );
    }

    #[test]
    fn pass_flags_found_at_any_depth() {
        let v = json!({"pass": true, "checks": [{"pass": false}, {"pass": true, "x": {"pass": false}}]});
        let mut f = pass_flags(&v);
        f.sort();
        assert_eq!(f, vec![false, false, true, true]);
        assert!(pass_flags(&json!({"pass": "yes"})).is_empty());
    }
}
