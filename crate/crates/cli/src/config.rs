//! Flat `key = value` run configuration.
//!
//! Each subcommand declares its keys in a [`Schema`]. Values are resolved in
//! three layers: schema defaults, then the TOML file given with `--config`,
//! then command-line flags (`--key value`).

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ConfigError {
    #[error("unknown key \"{0}\"")]
    UnknownKey(String),
    #[error("key \"{key}\": expected {expected}, got {got}")]
    TypeMismatch { key: String, expected: &'static str, got: String },
    #[error("missing required key \"{0}\"")]
    Missing(String),
    #[error("key \"{key}\": {message}")]
    Invalid { key: String, message: String },
    #[error("config file {path}: {message}")]
    File { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Int,
    Float,
    Bool,
    Str,
    IntList,
    /// Two floats, written `[a, b]` in files and `a,b` on the command line.
    Pair,
}

impl Kind {
    fn describe(self) -> &'static str {
        match self {
            Kind::Int => "an integer",
            Kind::Float => "a number",
            Kind::Bool => "true or false",
            Kind::Str => "a string",
            Kind::IntList => "a list of integers",
            Kind::Pair => "a pair of numbers",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
    Str(String),
    IntList(Vec<i64>),
    Pair(f64, f64),
}

impl Value {
    pub fn to_toml(&self) -> toml::Value {
        match self {
            Value::Int(i) => toml::Value::Integer(*i),
            Value::Float(f) => toml::Value::Float(*f),
            Value::Bool(b) => toml::Value::Boolean(*b),
            Value::Str(s) => toml::Value::String(s.clone()),
            Value::IntList(v) => toml::Value::Array(v.iter().map(|i| toml::Value::Integer(*i)).collect()),
            Value::Pair(a, b) => toml::Value::Array(vec![toml::Value::Float(*a), toml::Value::Float(*b)]),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Int(i) => (*i).into(),
            Value::Float(f) => (*f).into(),
            Value::Bool(b) => (*b).into(),
            Value::Str(s) => s.clone().into(),
            Value::IntList(v) => v.clone().into(),
            Value::Pair(a, b) => vec![*a, *b].into(),
        }
    }
}

impl fmt::Display for Value {
    // `{:?}` on floats prints the shortest round-trip form, always with a
    // decimal point, which keeps the canonical form stable and unambiguous.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Float(x) => write!(f, "{x:?}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Str(s) => write!(f, "{s:?}"),
            Value::IntList(v) => {
                let items: Vec<String> = v.iter().map(|i| i.to_string()).collect();
                write!(f, "[{}]", items.join(", "))
            }
            Value::Pair(a, b) => write!(f, "[{a:?}, {b:?}]"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Default {
    Required,
    Optional,
    Value(&'static str),
}

#[derive(Debug, Clone, Copy)]
pub struct Key {
    pub name: &'static str,
    pub kind: Kind,
    pub default: Default,
    pub help: &'static str,
}

pub const fn key(name: &'static str, kind: Kind, default: Default, help: &'static str) -> Key {
    Key { name, kind, default, help }
}

pub type Schema = &'static [Key];

fn parse_flag(key: &Key, text: &str) -> Result<Value, ConfigError> {
    let mismatch = || ConfigError::TypeMismatch {
        key: key.name.to_string(),
        expected: key.kind.describe(),
        got: format!("{text:?}"),
    };
    let float = |s: &str| s.trim().parse::<f64>().map_err(|_| mismatch());
    Ok(match key.kind {
        Kind::Int => Value::Int(text.trim().parse().map_err(|_| mismatch())?),
        Kind::Float => Value::Float(float(text)?),
        Kind::Bool => Value::Bool(text.trim().parse().map_err(|_| mismatch())?),
        Kind::Str => Value::Str(text.to_string()),
        Kind::IntList => Value::IntList(
            text.trim_matches(|c| c == '[' || c == ']')
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| s.trim().parse().map_err(|_| mismatch()))
                .collect::<Result<_, _>>()?,
        ),
        Kind::Pair => {
            let parts: Vec<&str> = text.trim_matches(|c| c == '[' || c == ']').split(',').collect();
            match parts.as_slice() {
                [a, b] => Value::Pair(float(a)?, float(b)?),
                _ => return Err(mismatch()),
            }
        }
    })
}

fn from_toml(key: &Key, v: &toml::Value) -> Result<Value, ConfigError> {
    let mismatch = || ConfigError::TypeMismatch {
        key: key.name.to_string(),
        expected: key.kind.describe(),
        got: format!("{} {v}", v.type_str()),
    };
    let number = |v: &toml::Value| match v {
        toml::Value::Integer(i) => Some(*i as f64),
        toml::Value::Float(f) => Some(*f),
        _ => None,
    };
    Ok(match (key.kind, v) {
        (Kind::Int, toml::Value::Integer(i)) => Value::Int(*i),
        (Kind::Float, _) => Value::Float(number(v).ok_or_else(mismatch)?),
        (Kind::Bool, toml::Value::Boolean(b)) => Value::Bool(*b),
        (Kind::Str, toml::Value::String(s)) => Value::Str(s.clone()),
        (Kind::IntList, toml::Value::Array(a)) => Value::IntList(
            a.iter().map(|x| x.as_integer().ok_or_else(mismatch)).collect::<Result<_, _>>()?,
        ),
        (Kind::Pair, toml::Value::Array(a)) if a.len() == 2 => {
            Value::Pair(number(&a[0]).ok_or_else(mismatch)?, number(&a[1]).ok_or_else(mismatch)?)
        }
        _ => return Err(mismatch()),
    })
}

/// Fully resolved configuration; absent optional keys have no entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub values: BTreeMap<String, Value>,
}

impl Resolved {
    /// Layers `file` text and `flags` over the schema defaults.
    pub fn resolve(schema: Schema, file: Option<&str>, flags: &[(String, String)]) -> Result<Self, ConfigError> {
        let find = |name: &str| schema.iter().find(|k| k.name == name);
        let mut values = BTreeMap::new();
        for k in schema {
            if let Default::Value(text) = k.default {
                values.insert(k.name.to_string(), parse_flag(k, text).expect("schema default must parse"));
            }
        }
        if let Some(text) = file {
            let table: toml::Table = toml::from_str(text).map_err(|e| ConfigError::File {
                path: String::new(),
                message: e.message().to_string(),
            })?;
            for (name, v) in &table {
                let k = find(name).ok_or_else(|| ConfigError::UnknownKey(name.clone()))?;
                values.insert(name.clone(), from_toml(k, v)?);
            }
        }
        for (name, text) in flags {
            let k = find(name).ok_or_else(|| ConfigError::UnknownKey(name.clone()))?;
            values.insert(name.clone(), parse_flag(k, text)?);
        }
        for k in schema {
            if matches!(k.default, Default::Required) && !values.contains_key(k.name) {
                return Err(ConfigError::Missing(k.name.to_string()));
            }
        }
        Ok(Resolved { values })
    }

    /// Reads `path` and resolves; file errors carry the path.
    pub fn from_file(schema: Schema, path: Option<&Path>, flags: &[(String, String)]) -> Result<Self, ConfigError> {
        let text = match path {
            None => None,
            Some(p) => Some(std::fs::read_to_string(p).map_err(|e| ConfigError::File {
                path: p.display().to_string(),
                message: e.to_string(),
            })?),
        };
        Self::resolve(schema, text.as_deref(), flags).map_err(|e| match (e, path) {
            (ConfigError::File { message, .. }, Some(p)) => ConfigError::File { path: p.display().to_string(), message },
            (e, _) => e,
        })
    }

    /// One `key = value` line per key, sorted by key.
    pub fn canonical(&self) -> String {
        self.values.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// SHA-256 of [`Self::canonical`], hex encoded.
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    fn get(&self, key: &str) -> Option<&Value> {
        self.values.get(key)
    }

    fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::Invalid { key: key.to_string(), message: message.into() }
    }

    pub fn int(&self, key: &str) -> Option<i64> {
        match self.get(key) {
            Some(Value::Int(i)) => Some(*i),
            _ => None,
        }
    }

    pub fn float(&self, key: &str) -> Option<f64> {
        match self.get(key) {
            Some(Value::Float(f)) => Some(*f),
            _ => None,
        }
    }

    pub fn boolean(&self, key: &str) -> Option<bool> {
        match self.get(key) {
            Some(Value::Bool(b)) => Some(*b),
            _ => None,
        }
    }

    pub fn string(&self, key: &str) -> Option<&str> {
        match self.get(key) {
            Some(Value::Str(s)) => Some(s),
            _ => None,
        }
    }

    pub fn int_list(&self, key: &str) -> Option<&[i64]> {
        match self.get(key) {
            Some(Value::IntList(v)) => Some(v),
            _ => None,
        }
    }

    pub fn pair(&self, key: &str) -> Option<(f64, f64)> {
        match self.get(key) {
            Some(Value::Pair(a, b)) => Some((*a, *b)),
            _ => None,
        }
    }

    /// Nonnegative integer in range for `usize`.
    pub fn count(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        self.int(key)
            .map(|i| usize::try_from(i).map_err(|_| Self::invalid(key, format!("{i} must be nonnegative"))))
            .transpose()
    }

    pub fn require_count(&self, key: &str) -> Result<usize, ConfigError> {
        self.count(key)?.ok_or_else(|| ConfigError::Missing(key.to_string()))
    }

    pub fn require_float(&self, key: &str) -> Result<f64, ConfigError> {
        self.float(key).ok_or_else(|| ConfigError::Missing(key.to_string()))
    }

    pub fn positive_counts(&self, key: &str) -> Result<Vec<usize>, ConfigError> {
        let list = self.int_list(key).ok_or_else(|| ConfigError::Missing(key.to_string()))?;
        list.iter()
            .map(|&i| usize::try_from(i).ok().filter(|n| *n > 0).ok_or_else(|| Self::invalid(key, format!("entry {i} must be positive"))))
            .collect()
    }

    pub fn seed(&self) -> Option<u64> {
        self.int("seed").map(|s| s as u64)
    }
}
