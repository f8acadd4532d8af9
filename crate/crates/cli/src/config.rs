//! Flag defaults from a TOML file.
//!
//! Top-level keys apply to every command that has a flag of that name;
//! `[scan]`, `[report.rp]` and so on apply to one command. Keys are long flag
//! names. File values are spliced into the argument list ahead of the
//! command-line flags, and since repeated flags override earlier ones, the
//! command line wins.

use clap::CommandFactory;
use toml::{Table, Value};

use crate::args::Cli;
use crate::error::{CliError, Result};

const GLOBAL_VALUE_FLAGS: [&str; 4] = ["--threads", "--config", "--out", "--curves"];

/// The value of `--config` in raw arguments, if any.
pub fn config_path(args: &[String]) -> Option<String> {
    let mut iter = args.iter();
    while let Some(a) = iter.next() {
        if a == "--config" {
            return iter.next().cloned();
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(v.to_string());
        }
    }
    None
}

fn flag_values(key: &str, value: &Value) -> Result<Vec<String>> {
    let flag = format!("--{key}");
    let scalar = |v: &Value| -> Result<String> {
        match v {
            Value::String(s) => Ok(s.clone()),
            Value::Integer(i) => Ok(i.to_string()),
            Value::Float(f) => Ok(f.to_string()),
            _ => Err(CliError::Usage(format!("config key {key}: unsupported value {v}"))),
        }
    };
    Ok(match value {
        Value::Boolean(true) => vec![flag],
        Value::Boolean(false) => vec![],
        Value::Array(items) => {
            let parts = items.iter().map(scalar).collect::<Result<Vec<_>>>()?;
            vec![flag, parts.join(",")]
        }
        v => vec![flag, scalar(v)?],
    })
}

/// `args` (program name first) with the file's defaults inserted after the
/// subcommand path.
pub fn apply(args: &[String], config_text: &str) -> Result<Vec<String>> {
    let table: Table = config_text.parse().map_err(|e| CliError::Usage(format!("config: {e}")))?;
    let root = Cli::command();
    let mut cmd = root.clone();
    let mut path = Vec::new();
    let mut insert_at = 1;
    let mut i = 1;
    while i < args.len() {
        let a = &args[i];
        if a.starts_with('-') {
            if GLOBAL_VALUE_FLAGS.contains(&a.as_str()) {
                i += 1;
            }
        } else if let Some(sub) = cmd.find_subcommand(a).cloned() {
            path.push(a.clone());
            cmd = sub;
            insert_at = i + 1;
        } else {
            break;
        }
        i += 1;
    }
    let accepts = |name: &str| {
        cmd.get_arguments().any(|arg| arg.get_long() == Some(name))
            || root.get_arguments().any(|arg| arg.get_long() == Some(name) && name != "config")
    };

    let mut defaults = Vec::new();
    for (key, value) in &table {
        if !value.is_table() && accepts(key) {
            defaults.extend(flag_values(key, value)?);
        }
    }
    let mut section = Some(&table);
    for name in &path {
        section = section.and_then(|t| t.get(name)).and_then(Value::as_table);
    }
    if let Some(section) = section.filter(|_| !path.is_empty()) {
        for (key, value) in section {
            if value.is_table() {
                continue;
            }
            if !accepts(key) {
                return Err(CliError::Usage(format!("config [{}]: unknown key {key}", path.join("."))));
            }
            defaults.extend(flag_values(key, value)?);
        }
    }
    let mut out = args[..insert_at].to_vec();
    out.extend(defaults);
    out.extend_from_slice(&args[insert_at..]);
    Ok(out)
}
