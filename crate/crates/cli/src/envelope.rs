use std::collections::BTreeMap;

use chrono::{SecondsFormat, Utc};
use elo_core::Prob;
use rug::Rational;
use serde_json::{json, Value};

/// Bumped on any breaking change to an envelope or payload layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Representation kind of every non-integer numeric payload field, keyed by
/// path (`rows[].prob` for a field inside each array element).
#[derive(Debug, Default, Clone)]
pub struct Kinds(BTreeMap<String, &'static str>);

impl Kinds {
    pub fn mark(&mut self, path: &str, kind: &'static str) {
        self.0.insert(path.to_string(), kind);
    }

    pub fn rational(&mut self, path: &str, value: &Rational) -> Value {
        self.mark(path, "rational");
        Value::String(value.to_string())
    }

    pub fn decimal(&mut self, path: &str, text: String) -> Value {
        self.mark(path, "decimal");
        Value::String(text)
    }

    pub fn prob(&mut self, path: &str, value: &Prob) -> Value {
        self.mark(path, value.kind());
        Value::String(value.to_string())
    }

    fn to_json(&self) -> Value {
        Value::Object(self.0.iter().map(|(k, v)| (k.clone(), json!(v))).collect())
    }
}

/// CSV rendering of a payload.
#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

/// What a command hands back for serialization.
#[derive(Debug, Clone)]
pub struct Output {
    pub backend: &'static str,
    pub payload: Value,
    pub kinds: Kinds,
    pub table: Option<Table>,
}

impl Output {
    pub fn envelope(&self, command: &str, argv: &[String]) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": { "name": command, "argv": argv },
            "timestamp": Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true),
            "backend": self.backend,
            "exit_status": 0,
            "payload": self.payload,
            "kinds": self.kinds.to_json(),
        })
    }
}
