//! Flat `key = value` experiment files.
//!
//! The `command` key names the subcommand; every other key is passed on as
//! the flag `--key value`, so a config file accepts exactly the flags of its
//! subcommand. Underscores in keys become dashes. `#` starts a comment.

use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("line {line}: expected `key = value`, found {text:?}")]
    Syntax { line: usize, text: String },
    #[error("line {line}: duplicate key {key:?}")]
    Duplicate { line: usize, key: String },
    #[error("missing `command` key")]
    MissingCommand,
}

/// Translates a config file into command-line arguments (without the
/// program name).
pub fn config_to_args(text: &str) -> Result<Vec<String>, ConfigError> {
    let mut command = None;
    let mut seen: Vec<String> = vec![];
    let mut flags = vec![];
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim().replace('_', "-"), v.trim().to_string()))
            .filter(|(k, _)| !k.is_empty())
            .ok_or_else(|| ConfigError::Syntax { line: i + 1, text: raw.to_string() })?;
        if seen.contains(&key) {
            return Err(ConfigError::Duplicate { line: i + 1, key });
        }
        seen.push(key.clone());
        if key == "command" {
            command = Some(value);
            continue;
        }
        flags.push(format!("--{key}"));
        if value != "true" {
            flags.push(value);
        }
    }
    let mut args = vec![command.ok_or(ConfigError::MissingCommand)?];
    args.extend(flags);
    Ok(args)
}

pub fn read_config(path: &Path) -> Result<Vec<String>, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Read { path: path.display().to_string(), source })?;
    config_to_args(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn translates_keys_to_flags() {
        let args = config_to_args("# demo\ncommand = model-q\nn = 4\ngamma=1.5 # inline\nscan = 1.1:1.9:9\n").unwrap();
        assert_eq!(args, ["model-q", "--n", "4", "--gamma", "1.5", "--scan", "1.1:1.9:9"]);
        let args = config_to_args("command = report-all\nfault_dgamma = 1.01\ntimings = true\n").unwrap();
        assert_eq!(args, ["report-all", "--fault-dgamma", "1.01", "--timings"]);
    }

    #[test]
    fn rejects_malformed_files() {
        assert!(matches!(config_to_args("gamma = 0.5\n"), Err(ConfigError::MissingCommand)));
        assert!(matches!(config_to_args("command = apply\ngamma 0.5\n"), Err(ConfigError::Syntax { line: 2, .. })));
        assert!(matches!(config_to_args("command = a\nn = 1\nn = 2\n"), Err(ConfigError::Duplicate { .. })));
    }
}
