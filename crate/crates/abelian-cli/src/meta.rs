//! Self-describing output metadata.
//!
//! Every subcommand's output opens with enough metadata to rerun it: tool
//! name and version, the subcommand, every parameter that affects the
//! payload, and a UTC ISO-8601 timestamp. Tabular outputs carry the block
//! as `#`-prefixed comment lines; JSON outputs carry it as a `metadata`
//! member. The timestamp is the only entry that varies between identical
//! invocations, so payloads stay byte-identical.

use std::io::{self, Write};

use chrono::{SecondsFormat, Utc};
use serde_json::{Map, Value};

const TOOL: &str = "abelian";

/// Ordered key/value metadata for one invocation.
pub struct MetaBlock {
    entries: Vec<(String, String)>,
}

impl MetaBlock {
    /// Start a block identifying the tool, its version, and the subcommand.
    pub fn new(command: &str) -> Self {
        let mut block = MetaBlock {
            entries: Vec::new(),
        };
        block.push("tool", TOOL);
        block.push("version", env!("CARGO_PKG_VERSION"));
        block.push("command", command);
        block
    }

    /// Append one parameter. Floats formatted through here use Rust's
    /// shortest round-trip representation.
    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    /// Write the block as `# key: value` comment lines, closing with the
    /// timestamp.
    pub fn write_comments<W: Write>(&self, out: &mut W) -> io::Result<()> {
        for (key, value) in &self.entries {
            writeln!(out, "# {key}: {value}")?;
        }
        writeln!(out, "# timestamp: {}", timestamp_utc())
    }

    /// The block as a JSON object, closing with the timestamp. Values stay
    /// strings so that formatting matches the comment form exactly.
    pub fn to_json(&self) -> Value {
        let mut map = Map::new();
        for (key, value) in &self.entries {
            map.insert(key.clone(), Value::String(value.clone()));
        }
        map.insert("timestamp".into(), Value::String(timestamp_utc()));
        Value::Object(map)
    }
}

/// Current time as UTC ISO-8601 with a `Z` suffix.
fn timestamp_utc() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true)
}
