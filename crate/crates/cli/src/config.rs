//! Flat `key = value` config files.
//!
//! A config holds one `command` key and the same keys as the command's long
//! flags; positional arguments go by their field name. Blank lines and lines
//! starting with `#` are skipped. Values run to the end of the line, so a
//! copula spec such as `bound(theta=0.5)` needs no quoting.

use clap::CommandFactory;
use serde_json::Value;

use crate::args::{Cli, Command};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Serialized form of a parsed command.
pub fn to_text(command: &Command) -> String {
    let value = serde_json::to_value(command).expect("commands serialize to a JSON object");
    let obj = value.as_object().expect("tagged enum is an object");
    let mut out = format!("command = {}\n", scalar(&obj["command"]));
    for (key, val) in obj.iter().filter(|(k, _)| *k != "command") {
        out.push_str(&format!("{key} = {}\n", scalar(val)));
    }
    out
}

fn pairs(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut seen = Vec::<(String, String)>::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("line {}: expected `key = value`", no + 1)))?;
        let key = key.trim().to_string();
        if seen.iter().any(|(k, _)| *k == key) {
            return Err(ConfigError(format!("line {}: duplicate key `{key}`", no + 1)));
        }
        seen.push((key, value.trim().to_string()));
    }
    Ok(seen)
}

/// Command-line words equivalent to a config file, program name first.
pub fn to_argv(text: &str) -> Result<Vec<String>, ConfigError> {
    let mut entries = pairs(text)?;
    let at = entries
        .iter()
        .position(|(k, _)| k == "command")
        .ok_or_else(|| ConfigError("missing `command` key".into()))?;
    let (_, name) = entries.remove(at);
    let cli = Cli::command();
    let sub = cli
        .find_subcommand(&name)
        .ok_or_else(|| ConfigError(format!("unknown command `{name}`")))?;

    let mut argv = vec!["boundcop".to_string(), name.clone()];
    for pos in sub.get_positionals() {
        let id = pos.get_id().as_str().replace('_', "-");
        if let Some(i) = entries.iter().position(|(k, _)| *k == id) {
            argv.push(entries.remove(i).1);
        }
    }
    for (key, value) in entries {
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| ConfigError(format!("`{key}` is not a parameter of `{name}`")))?;
        if arg.get_action().takes_values() {
            argv.push(format!("--{key}={value}"));
        } else if value == "true" {
            argv.push(format!("--{key}"));
        }
    }
    Ok(argv)
}
