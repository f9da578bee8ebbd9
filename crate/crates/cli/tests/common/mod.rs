#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

pub fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn data(name: &str) -> PathBuf {
    manifest_dir().join("tests/data").join(name)
}

pub fn demo_config() -> PathBuf {
    manifest_dir().join("configs/demo.json")
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Run {
    pub fn json(&self) -> Value {
        serde_json::from_str(&self.stdout).unwrap_or_else(|e| panic!("stdout is not JSON ({}): {}", e, self.stdout))
    }
}

pub fn run(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_rkhsmult"))
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

pub fn run_config(command: &str, config: &Path, extra: &[&str]) -> Run {
    let mut args = vec![command, "--config", config.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

/// Validates against `schemas/<name>` using the keywords those schemas use:
/// `$ref`, `type`, `enum`, `const`, `required`, `properties`,
/// `additionalProperties`, `items`, `prefixItems`, `minItems`, `maxItems`,
/// `minimum` and `oneOf`.
pub fn schema_errors(name: &str, value: &Value) -> Vec<String> {
    let mut v = Validator { errors: Vec::new() };
    let root = load_schema(name);
    v.check(&root, &root, value, "$");
    v.errors
}

fn load_schema(name: &str) -> Value {
    let path = manifest_dir().join("schemas").join(name);
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

struct Validator {
    errors: Vec<String>,
}

fn type_matches(t: &str, v: &Value) -> bool {
    match t {
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "number" => v.is_number(),
        "integer" => v.is_u64() || v.is_i64(),
        "boolean" => v.is_boolean(),
        "null" => v.is_null(),
        other => panic!("unsupported type {}", other),
    }
}

impl Validator {
    fn check(&mut self, root: &Value, schema: &Value, v: &Value, at: &str) {
        let s = schema.as_object().expect("schema object");
        if let Some(r) = s.get("$ref").and_then(Value::as_str) {
            if let Some(def) = r.strip_prefix("#/$defs/") {
                let target = root["$defs"][def].clone();
                assert!(!target.is_null(), "dangling $ref {}", r);
                self.check(root, &target, v, at);
            } else {
                let other = load_schema(r);
                self.check(&other, &other, v, at);
            }
            return;
        }
        if let Some(t) = s.get("type") {
            let ok = match t {
                Value::String(t) => type_matches(t, v),
                Value::Array(ts) => ts.iter().any(|t| type_matches(t.as_str().unwrap(), v)),
                _ => panic!("bad type keyword"),
            };
            if !ok {
                self.errors.push(format!("{}: expected type {}, got {}", at, t, v));
                return;
            }
        }
        if let Some(e) = s.get("enum").and_then(Value::as_array) {
            if !e.contains(v) {
                self.errors.push(format!("{}: {} not in {:?}", at, v, e));
            }
        }
        if let Some(c) = s.get("const") {
            if c != v {
                self.errors.push(format!("{}: expected {}, got {}", at, c, v));
            }
        }
        if let (Some(m), Some(x)) = (s.get("minimum").and_then(Value::as_f64), v.as_f64()) {
            if x < m {
                self.errors.push(format!("{}: {} below minimum {}", at, x, m));
            }
        }
        if let Some(options) = s.get("oneOf").and_then(Value::as_array) {
            let matching = options
                .iter()
                .filter(|o| {
                    let mut inner = Validator { errors: Vec::new() };
                    inner.check(root, o, v, at);
                    inner.errors.is_empty()
                })
                .count();
            if matching != 1 {
                self.errors.push(format!("{}: {} oneOf branches match", at, matching));
            }
        }
        if let Some(obj) = v.as_object() {
            if let Some(req) = s.get("required").and_then(Value::as_array) {
                for r in req {
                    if !obj.contains_key(r.as_str().unwrap()) {
                        self.errors.push(format!("{}: missing {}", at, r));
                    }
                }
            }
            let props = s.get("properties").and_then(Value::as_object);
            for (k, x) in obj {
                let here = format!("{}.{}", at, k);
                match props.and_then(|p| p.get(k)) {
                    Some(ps) => self.check(root, ps, x, &here),
                    None => match s.get("additionalProperties") {
                        Some(Value::Bool(false)) => self.errors.push(format!("{}: unexpected property", here)),
                        Some(ap @ Value::Object(_)) => self.check(root, ap, x, &here),
                        _ => {}
                    },
                }
            }
        }
        if let Some(arr) = v.as_array() {
            if let Some(n) = s.get("minItems").and_then(Value::as_u64) {
                if (arr.len() as u64) < n {
                    self.errors.push(format!("{}: fewer than {} items", at, n));
                }
            }
            if let Some(n) = s.get("maxItems").and_then(Value::as_u64) {
                if (arr.len() as u64) > n {
                    self.errors.push(format!("{}: more than {} items", at, n));
                }
            }
            let prefix = s.get("prefixItems").and_then(Value::as_array);
            for (i, x) in arr.iter().enumerate() {
                let here = format!("{}[{}]", at, i);
                if let Some(ps) = prefix.and_then(|p| p.get(i)) {
                    self.check(root, ps, x, &here);
                } else if let Some(items) = s.get("items") {
                    self.check(root, items, x, &here);
                }
            }
        }
    }
}
