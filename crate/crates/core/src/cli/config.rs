//! Flat `key = value` job files.
//!
//! Keys are long flag names (`px`, `D`, `u-size` or `u_size`) plus
//! `command`. Boolean flags take `true` or `false`. File values are inserted
//! ahead of the command-line flags, so flags given on the command line win.

use std::ffi::OsString;

use super::CliError;

const BOOLEAN_KEYS: [&str; 4] = [
    "full-enumeration",
    "spot-check",
    "strict-cardinality",
    "check",
];

fn config_error(message: String) -> CliError {
    CliError::usage(message)
}

/// Parses a job file into `(key, value)` pairs with normalized keys.
pub(crate) fn parse_config(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(config_error(format!(
                "config line {}: expected key=value",
                i + 1
            )));
        };
        let key = key.trim();
        let key = if key == "D" || key == "R" {
            key.to_string()
        } else {
            key.to_ascii_lowercase().replace('_', "-")
        };
        let value = value.trim();
        if key.is_empty() || value.is_empty() {
            return Err(config_error(format!(
                "config line {}: empty key or value",
                i + 1
            )));
        }
        if key == "config" {
            return Err(config_error(format!(
                "config line {}: nested config files are not supported",
                i + 1
            )));
        }
        pairs.push((key, value.to_string()));
    }
    Ok(pairs)
}

/// Removes `--config PATH` from `argv` and splices the file's settings in
/// right after the subcommand.
pub(crate) fn expand_config(argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut path = None;
    let mut it = argv.into_iter();
    let program = it.next().unwrap_or_else(|| "simid".into());
    while let Some(arg) = it.next() {
        let s = arg.to_string_lossy();
        if s == "--config" {
            let Some(p) = it.next() else {
                return Err(config_error("--config needs a path".into()));
            };
            path = Some(p);
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(p.into());
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = path else {
        let mut out = vec![program];
        out.extend(rest);
        return Ok(out);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| {
        config_error(format!(
            "cannot read config {}: {e}",
            path.to_string_lossy()
        ))
    })?;
    let pairs = parse_config(&text)?;

    let has_command = rest
        .first()
        .is_some_and(|a| !a.to_string_lossy().starts_with('-'));
    let mut out = vec![program];
    if has_command {
        out.push(rest.remove(0));
    } else {
        match pairs.iter().find(|(k, _)| k == "command") {
            Some((_, c)) => out.push(c.into()),
            None => {
                return Err(config_error(
                    "no command given on the command line or in the config".into(),
                ))
            }
        }
    }
    for (key, value) in pairs.into_iter().filter(|(k, _)| k != "command") {
        if BOOLEAN_KEYS.contains(&key.as_str()) {
            match value.as_str() {
                "true" => out.push(format!("--{key}").into()),
                "false" => {}
                _ => {
                    return Err(config_error(format!(
                        "config key {key}: expected true or false, got {value}"
                    )))
                }
            }
        } else {
            out.push(format!("--{key}").into());
            out.push(value.into());
        }
    }
    out.extend(rest);
    Ok(out)
}
