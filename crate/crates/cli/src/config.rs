//! Flat configuration with namespaced keys ("iht.l_factor", "gen.n", ...).
//! Values come from an optional JSON file plus --set overrides; every key
//! that a run consumes (including defaulted ones) is echoed back into the
//! output header, and unknown keys are rejected.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::Value;

#[derive(Debug, Default)]
pub struct ConfigBag {
    values: BTreeMap<String, Value>,
    resolved: RefCell<BTreeMap<String, Value>>,
    read: RefCell<std::collections::BTreeSet<String>>,
}

impl ConfigBag {
    pub fn load(path: Option<&Path>, sets: &[String]) -> Result<Self> {
        let mut values = BTreeMap::new();
        if let Some(p) = path {
            let text = fs::read_to_string(p)
                .with_context(|| format!("reading config file {}", p.display()))?;
            let parsed: Value =
                serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
            let obj = parsed
                .as_object()
                .ok_or_else(|| anyhow!("config file must hold a JSON object of flat keys"))?;
            for (k, v) in obj {
                if v.is_object() {
                    bail!("config key {k:?} holds a nested object; use flat dotted keys");
                }
                values.insert(k.clone(), v.clone());
            }
        }
        for s in sets {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| anyhow!("--set expects key=value, got {s:?}"))?;
            let value = serde_json::from_str::<Value>(v)
                .unwrap_or_else(|_| Value::String(v.to_string()));
            values.insert(k.to_string(), value);
        }
        Ok(ConfigBag { values, ..Default::default() })
    }

    /// Force a key (used for CLI flags that shadow config keys).
    pub fn override_key(&mut self, key: &str, value: Value) {
        self.values.insert(key.to_string(), value);
    }

    fn record(&self, key: &str, effective: Value) {
        self.read.borrow_mut().insert(key.to_string());
        self.resolved.borrow_mut().insert(key.to_string(), effective);
    }

    pub fn f64(&self, key: &str, default: f64) -> Result<f64> {
        let v = match self.values.get(key) {
            None => default,
            Some(Value::Number(n)) => {
                n.as_f64().ok_or_else(|| anyhow!("key {key:?}: not representable as f64"))?
            }
            Some(Value::String(s)) => match s.as_str() {
                "inf" | "+inf" => f64::INFINITY,
                "-inf" => f64::NEG_INFINITY,
                other => other
                    .parse::<f64>()
                    .map_err(|_| anyhow!("key {key:?}: expected a number, got {other:?}"))?,
            },
            Some(other) => bail!("key {key:?}: expected a number, got {other}"),
        };
        self.record(key, json_f64(v));
        Ok(v)
    }

    pub fn f64_opt(&self, key: &str) -> Result<Option<f64>> {
        if self.values.contains_key(key) {
            Ok(Some(self.f64(key, f64::NAN)?))
        } else {
            self.read.borrow_mut().insert(key.to_string());
            Ok(None)
        }
    }

    pub fn usize(&self, key: &str, default: usize) -> Result<usize> {
        let v = match self.values.get(key) {
            None => default,
            Some(Value::Number(n)) => n
                .as_u64()
                .ok_or_else(|| anyhow!("key {key:?}: expected a nonnegative integer"))?
                as usize,
            Some(other) => bail!("key {key:?}: expected an integer, got {other}"),
        };
        self.record(key, Value::from(v as u64));
        Ok(v)
    }

    pub fn u64(&self, key: &str, default: u64) -> Result<u64> {
        let v = match self.values.get(key) {
            None => default,
            Some(Value::Number(n)) => {
                n.as_u64().ok_or_else(|| anyhow!("key {key:?}: expected a nonnegative integer"))?
            }
            Some(other) => bail!("key {key:?}: expected an integer, got {other}"),
        };
        self.record(key, Value::from(v));
        Ok(v)
    }

    pub fn boolean(&self, key: &str, default: bool) -> Result<bool> {
        let v = match self.values.get(key) {
            None => default,
            Some(Value::Bool(b)) => *b,
            Some(Value::String(s)) if s == "true" => true,
            Some(Value::String(s)) if s == "false" => false,
            Some(other) => bail!("key {key:?}: expected a bool, got {other}"),
        };
        self.record(key, Value::Bool(v));
        Ok(v)
    }

    pub fn string(&self, key: &str, default: &str) -> Result<String> {
        let v = match self.values.get(key) {
            None => default.to_string(),
            Some(Value::String(s)) => s.clone(),
            Some(other) => bail!("key {key:?}: expected a string, got {other}"),
        };
        self.record(key, Value::String(v.clone()));
        Ok(v)
    }

    pub fn f64_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        let v: Vec<f64> = match self.values.get(key) {
            None => default.to_vec(),
            Some(Value::Array(items)) => items
                .iter()
                .map(|it| {
                    it.as_f64().ok_or_else(|| anyhow!("key {key:?}: non-numeric list entry"))
                })
                .collect::<Result<_>>()?,
            Some(other) => bail!("key {key:?}: expected a list, got {other}"),
        };
        self.record(key, Value::Array(v.iter().map(|&x| json_f64(x)).collect()));
        Ok(v)
    }

    pub fn u64_list(&self, key: &str, default: &[u64]) -> Result<Vec<u64>> {
        let v: Vec<u64> = match self.values.get(key) {
            None => default.to_vec(),
            Some(Value::Array(items)) => items
                .iter()
                .map(|it| {
                    it.as_u64().ok_or_else(|| anyhow!("key {key:?}: non-integer list entry"))
                })
                .collect::<Result<_>>()?,
            Some(other) => bail!("key {key:?}: expected a list, got {other}"),
        };
        self.record(key, Value::Array(v.iter().map(|&x| Value::from(x)).collect()));
        Ok(v)
    }

    pub fn string_list(&self, key: &str, default: &[&str]) -> Result<Vec<String>> {
        let v: Vec<String> = match self.values.get(key) {
            None => default.iter().map(|s| s.to_string()).collect(),
            Some(Value::Array(items)) => items
                .iter()
                .map(|it| {
                    it.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| anyhow!("key {key:?}: non-string list entry"))
                })
                .collect::<Result<_>>()?,
            Some(other) => bail!("key {key:?}: expected a list, got {other}"),
        };
        self.record(key, Value::Array(v.iter().map(|s| Value::String(s.clone())).collect()));
        Ok(v)
    }

    /// Reject unknown keys and return the fully resolved (defaults included)
    /// key/value map for the output header.
    pub fn finish(&self) -> Result<BTreeMap<String, Value>> {
        let read = self.read.borrow();
        let unknown: Vec<&String> =
            self.values.keys().filter(|k| !read.contains(*k)).collect();
        if !unknown.is_empty() {
            bail!(
                "unknown config key(s): {}",
                unknown.iter().map(|s| format!("{s:?}")).collect::<Vec<_>>().join(", ")
            );
        }
        Ok(self.resolved.borrow().clone())
    }
}

/// Encode f64 for the echo map, keeping infinities representable.
fn json_f64(v: f64) -> Value {
    if v == f64::INFINITY {
        Value::String("inf".into())
    } else if v == f64::NEG_INFINITY {
        Value::String("-inf".into())
    } else {
        serde_json::Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null)
    }
}
