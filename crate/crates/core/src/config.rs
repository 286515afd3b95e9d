//! Flat `key = value` run configuration.
//!
//! One assignment per line, `#` starts a comment, blank lines are ignored.
//! Each scenario declares its keys with [`KeySpec`]; parsing is strict and
//! reports every problem it finds, not just the first.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{io_err, ConfigIssue, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Float,
    /// Non-negative integer.
    Int,
    Bool,
    Text,
    /// Comma-separated floats.
    FloatList,
    /// A float or the literal `auto`, resolved by the scenario.
    AutoFloat,
}

impl Kind {
    fn describe(self) -> &'static str {
        match self {
            Kind::Float => "a number",
            Kind::Int => "a non-negative integer",
            Kind::Bool => "true or false",
            Kind::Text => "text",
            Kind::FloatList => "a comma-separated list of numbers",
            Kind::AutoFloat => "a number or `auto`",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fallback {
    Required,
    /// May be left unset.
    Optional,
    Value(&'static str),
}

#[derive(Debug, Clone, Copy)]
pub struct KeySpec {
    pub name: &'static str,
    pub kind: Kind,
    pub default: Fallback,
    pub help: &'static str,
}

impl KeySpec {
    pub const fn new(name: &'static str, kind: Kind, default: &'static str, help: &'static str) -> Self {
        Self { name, kind, default: Fallback::Value(default), help }
    }

    pub const fn required(name: &'static str, kind: Kind, help: &'static str) -> Self {
        Self { name, kind, default: Fallback::Required, help }
    }

    pub const fn optional(name: &'static str, kind: Kind, help: &'static str) -> Self {
        Self { name, kind, default: Fallback::Optional, help }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    List(Vec<f64>),
    Auto,
}

#[derive(Debug, Clone)]
struct RawEntry {
    key: String,
    value: String,
    line: Option<usize>,
}

/// Unvalidated assignments, in file order, with command-line overrides
/// applied on top.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: Vec<RawEntry>,
}

fn split_assignment(text: &str) -> Option<(&str, &str)> {
    let (k, v) = text.split_once('=')?;
    let (k, v) = (k.trim(), v.trim());
    (!k.is_empty()).then_some((k, v))
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<RawEntry> = Vec::new();
        let mut issues = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = split_assignment(content) else {
                issues.push(ConfigIssue {
                    key: content.to_string(),
                    line: Some(line),
                    message: "expected `key = value`".into(),
                });
                continue;
            };
            if let Some(prev) = entries.iter().find(|e| e.key == key) {
                issues.push(ConfigIssue {
                    key: key.to_string(),
                    line: Some(line),
                    message: format!("duplicate key (first set on line {})", prev.line.unwrap_or(0)),
                });
                continue;
            }
            entries.push(RawEntry { key: key.to_string(), value: value.to_string(), line: Some(line) });
        }
        if issues.is_empty() {
            Ok(Self { entries })
        } else {
            Err(Error::Config(issues))
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Self::parse(&text)
    }

    /// Applies a `key=value` override; it replaces any value from the file.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let Some((key, value)) = split_assignment(assignment) else {
            return Err(Error::Config(vec![ConfigIssue {
                key: assignment.to_string(),
                line: None,
                message: "override must look like key=value".into(),
            }]));
        };
        self.entries.retain(|e| e.key != key);
        self.entries.push(RawEntry { key: key.to_string(), value: value.to_string(), line: None });
        Ok(())
    }
}

fn parse_value(kind: Kind, text: &str) -> Option<Value> {
    let float = |s: &str| s.trim().parse::<f64>().ok().filter(|v| v.is_finite());
    match kind {
        Kind::Float => float(text).map(Value::Float),
        Kind::Int => text.parse::<u64>().ok().map(Value::Int),
        Kind::Bool => match text {
            "true" => Some(Value::Bool(true)),
            "false" => Some(Value::Bool(false)),
            _ => None,
        },
        Kind::Text => (!text.is_empty()).then(|| Value::Text(text.to_string())),
        Kind::FloatList => text.split(',').map(float).collect::<Option<Vec<_>>>().map(Value::List),
        Kind::AutoFloat if text == "auto" => Some(Value::Auto),
        Kind::AutoFloat => float(text).map(Value::Float),
    }
}

fn render(v: &Value) -> String {
    match v {
        Value::Float(x) => crate::output::fmt_float(*x),
        Value::Int(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Text(s) => s.clone(),
        Value::List(xs) => xs.iter().map(|x| crate::output::fmt_float(*x)).collect::<Vec<_>>().join(","),
        Value::Auto => "auto".into(),
    }
}

/// A configuration checked against a scenario's key table. Every declared key
/// with a default is present.
#[derive(Debug, Clone)]
pub struct Config {
    values: BTreeMap<&'static str, Value>,
    lines: BTreeMap<&'static str, usize>,
}

impl Config {
    pub fn resolve(specs: &[KeySpec], raw: &RawConfig) -> Result<Self> {
        let mut issues = Vec::new();
        let mut values = BTreeMap::new();
        let mut lines = BTreeMap::new();
        for e in &raw.entries {
            if !specs.iter().any(|s| s.name == e.key) {
                let known: Vec<&str> = specs.iter().map(|s| s.name).collect();
                issues.push(ConfigIssue {
                    key: e.key.clone(),
                    line: e.line,
                    message: format!("unknown key (expected one of: {})", known.join(", ")),
                });
            }
        }
        for spec in specs {
            let given = raw.entries.iter().find(|e| e.key == spec.name);
            let (text, line) = match (given, spec.default) {
                (Some(e), _) => (e.value.as_str(), e.line),
                (None, Fallback::Value(d)) => (d, None),
                (None, Fallback::Optional) => continue,
                (None, Fallback::Required) => {
                    issues.push(ConfigIssue {
                        key: spec.name.into(),
                        line: None,
                        message: format!("missing required key ({})", spec.help),
                    });
                    continue;
                }
            };
            match parse_value(spec.kind, text) {
                Some(v) => {
                    values.insert(spec.name, v);
                    if let Some(l) = line {
                        lines.insert(spec.name, l);
                    }
                }
                None => issues.push(ConfigIssue {
                    key: spec.name.into(),
                    line,
                    message: format!("expected {}, got `{text}`", spec.kind.describe()),
                }),
            }
        }
        if issues.is_empty() {
            Ok(Self { values, lines })
        } else {
            Err(Error::Config(issues))
        }
    }

    fn get(&self, key: &str) -> Option<&Value> {
        self.values.get(key)
    }

    pub fn is_set(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn opt_f64(&self, key: &str) -> Option<f64> {
        match self.get(key)? {
            Value::Float(x) => Some(*x),
            Value::Int(n) => Some(*n as f64),
            _ => None,
        }
    }

    /// Panics if `key` was not declared as a float with a default; scenario
    /// code only asks for keys it declared.
    pub fn f64(&self, key: &str) -> f64 {
        self.opt_f64(key).unwrap_or_else(|| panic!("float key `{key}` not resolved"))
    }

    pub fn usize(&self, key: &str) -> usize {
        match self.get(key) {
            Some(Value::Int(n)) => *n as usize,
            _ => panic!("integer key `{key}` not resolved"),
        }
    }

    pub fn u64(&self, key: &str) -> u64 {
        self.usize(key) as u64
    }

    pub fn bool(&self, key: &str) -> bool {
        match self.get(key) {
            Some(Value::Bool(b)) => *b,
            _ => panic!("boolean key `{key}` not resolved"),
        }
    }

    pub fn text(&self, key: &str) -> &str {
        match self.get(key) {
            Some(Value::Text(s)) => s,
            _ => panic!("text key `{key}` not resolved"),
        }
    }

    pub fn list(&self, key: &str) -> &[f64] {
        match self.get(key) {
            Some(Value::List(xs)) => xs,
            _ => panic!("list key `{key}` not resolved"),
        }
    }

    /// `None` for `auto`.
    pub fn auto_f64(&self, key: &str) -> Option<f64> {
        match self.get(key) {
            Some(Value::Auto) => None,
            Some(Value::Float(x)) => Some(*x),
            _ => panic!("auto key `{key}` not resolved"),
        }
    }

    /// An issue attached to `key`, carrying its file line when known.
    pub fn issue(&self, key: &str, message: impl Into<String>) -> ConfigIssue {
        ConfigIssue { key: key.into(), line: self.lines.get(key).copied(), message: message.into() }
    }

    /// Canonical text of every resolved key; feeding it back reproduces the run.
    pub fn echo(&self) -> BTreeMap<String, String> {
        self.values.iter().map(|(k, v)| (k.to_string(), render(v))).collect()
    }

    pub fn to_text(&self) -> String {
        self.echo().iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}
