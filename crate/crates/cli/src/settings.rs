//! Flat dotted-key run configuration.
//!
//! A config file is TOML; nested tables are flattened so that
//! `[rotate]\nbins = 90` and `rotate.bins = 90` mean the same thing.
//! Every key must be consumed by some reader, otherwise the run is
//! rejected.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use toml::Value;

use crate::CliError;

#[derive(Debug, Default)]
pub struct Keys {
    values: BTreeMap<String, Value>,
    used: BTreeSet<String>,
}

fn flatten(prefix: &str, value: Value, out: &mut BTreeMap<String, Value>) {
    match value {
        Value::Table(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() {
                    k
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, out);
            }
        }
        v => {
            out.insert(prefix.to_string(), v);
        }
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl Keys {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| config_err(format!("config parse: {}", e.message())))?;
        let mut values = BTreeMap::new();
        flatten("", Value::Table(table), &mut values);
        Ok(Self {
            values,
            used: BTreeSet::new(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Apply a `key=value` override; the value is parsed as a TOML value,
    /// falling back to a bare string.
    pub fn set(&mut self, assignment: &str) -> Result<(), CliError> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| config_err(format!("override '{assignment}' is not key=value")))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(config_err(format!(
                "override '{assignment}' has an empty key"
            )));
        }
        let raw = raw.trim();
        let value = match format!("v = {raw}").parse::<toml::Table>() {
            Ok(mut t) => t.remove("v").expect("parsed key"),
            Err(_) => Value::String(raw.to_string()),
        };
        let mut nested = BTreeMap::new();
        flatten(key, value, &mut nested);
        self.values.extend(nested);
        Ok(())
    }

    pub fn insert(&mut self, key: &str, value: Value) {
        self.values.insert(key.to_string(), value);
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    fn take(&mut self, key: &str) -> Option<&Value> {
        let v = self.values.get(key)?;
        self.used.insert(key.to_string());
        Some(v)
    }

    pub fn f64(&mut self, key: &str) -> Result<Option<f64>, CliError> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Float(f)) => Ok(Some(*f)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(v) => Err(config_err(format!("{key} must be a number, got {v}"))),
        }
    }

    pub fn usize(&mut self, key: &str) -> Result<Option<usize>, CliError> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as usize)),
            Some(v) => Err(config_err(format!(
                "{key} must be a non-negative integer, got {v}"
            ))),
        }
    }

    pub fn u64(&mut self, key: &str) -> Result<Option<u64>, CliError> {
        Ok(self.usize(key)?.map(|v| v as u64))
    }

    pub fn bool(&mut self, key: &str) -> Result<Option<bool>, CliError> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Boolean(b)) => Ok(Some(*b)),
            Some(v) => Err(config_err(format!("{key} must be true or false, got {v}"))),
        }
    }

    pub fn string(&mut self, key: &str) -> Result<Option<String>, CliError> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(v) => Err(config_err(format!("{key} must be a string, got {v}"))),
        }
    }

    pub fn f64_list(&mut self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        let Some(v) = self.take(key) else {
            return Ok(None);
        };
        let bad = || config_err(format!("{key} must be a list of numbers"));
        let Value::Array(items) = v else {
            return Err(bad());
        };
        items
            .iter()
            .map(|x| match x {
                Value::Float(f) => Ok(*f),
                Value::Integer(i) => Ok(*i as f64),
                _ => Err(bad()),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    pub fn usize_list(&mut self, key: &str) -> Result<Option<Vec<usize>>, CliError> {
        let Some(v) = self.take(key) else {
            return Ok(None);
        };
        let bad = || config_err(format!("{key} must be a list of non-negative integers"));
        let Value::Array(items) = v else {
            return Err(bad());
        };
        items
            .iter()
            .map(|x| match x {
                Value::Integer(i) if *i >= 0 => Ok(*i as usize),
                _ => Err(bad()),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    pub fn string_list(&mut self, key: &str) -> Result<Option<Vec<String>>, CliError> {
        let Some(v) = self.take(key) else {
            return Ok(None);
        };
        let bad = || config_err(format!("{key} must be a list of strings"));
        let Value::Array(items) = v else {
            return Err(bad());
        };
        items
            .iter()
            .map(|x| x.as_str().map(str::to_string).ok_or_else(bad))
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    pub fn pair(&mut self, key: &str) -> Result<Option<(f64, f64)>, CliError> {
        match self.f64_list(key)? {
            None => Ok(None),
            Some(v) if v.len() == 2 => Ok(Some((v[0], v[1]))),
            Some(_) => Err(config_err(format!("{key} must be a [low, high] pair"))),
        }
    }

    /// Keys that start with `prefix.`, in sorted order.
    pub fn keys_under(&self, prefix: &str) -> Vec<String> {
        let p = format!("{prefix}.");
        self.values
            .keys()
            .filter(|k| k.starts_with(&p))
            .cloned()
            .collect()
    }

    pub fn reject_unused(&self) -> Result<(), CliError> {
        let unknown: Vec<&str> = self
            .values
            .keys()
            .filter(|k| !self.used.contains(*k))
            .map(String::as_str)
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(config_err(format!(
                "unknown config keys: {}",
                unknown.join(", ")
            )))
        }
    }
}

macro_rules! read_into {
    ($keys:expr, $get:ident, $key:expr, $slot:expr) => {
        if let Some(v) = $keys.$get($key)? {
            $slot = v;
        }
    };
}
pub(crate) use read_into;
