//! Flat `key = value` run files merged into the command line.
//!
//! Keys are long flag names (`grid-step` or `grid_step`). A key is only
//! applied when the same flag is absent from argv, so flags win.

use std::ffi::OsString;
use std::fs;

use clap::{ArgAction, Command};

use crate::UsageError;

fn config_path(args: &[OsString]) -> Result<Option<String>, UsageError> {
    let mut it = args.iter().map(|a| a.to_string_lossy());
    while let Some(a) = it.next() {
        if a == "--config" {
            return it
                .next()
                .map(|p| Some(p.into_owned()))
                .ok_or_else(|| UsageError("--config requires a path".into()));
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Ok(Some(p.to_string()));
        }
    }
    Ok(None)
}

fn has_flag(args: &[OsString], long: &str) -> bool {
    let flag = format!("--{long}");
    let prefix = format!("--{long}=");
    args.iter().any(|a| {
        let a = a.to_string_lossy();
        a == flag || a.starts_with(&prefix)
    })
}

/// Parses the run file into `(key, value)` pairs.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, UsageError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| UsageError(format!("config line {}: expected key = value", n + 1)))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(UsageError(format!("config line {}: empty key", n + 1)));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

/// Returns `args` with the entries of any `--config` file appended.
pub fn merge_config(cmd: &Command, args: Vec<OsString>) -> Result<Vec<OsString>, UsageError> {
    let Some(path) = config_path(&args)? else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path).map_err(|e| UsageError(format!("cannot read config {path}: {e}")))?;
    let entries = parse_config(&text)?;
    let sub_name = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .find(|a| cmd.find_subcommand(a).is_some());
    let sub = sub_name.as_deref().and_then(|n| cmd.find_subcommand(n));

    let mut merged = args.clone();
    for (key, value) in entries {
        if key == "config" {
            return Err(UsageError("config files cannot include other config files".into()));
        }
        let arg = sub
            .into_iter()
            .flat_map(|s| s.get_arguments())
            .chain(cmd.get_arguments())
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| UsageError(format!("unknown config key {key:?}")))?;
        if has_flag(&args, &key) {
            continue;
        }
        if matches!(arg.get_action(), ArgAction::SetTrue) {
            match value.as_str() {
                "true" | "yes" | "1" => merged.push(format!("--{key}").into()),
                "false" | "no" | "0" => {}
                _ => return Err(UsageError(format!("config key {key}: expected a boolean, got {value:?}"))),
            }
        } else {
            merged.push(format!("--{key}").into());
            merged.push(value.into());
        }
    }
    Ok(merged)
}
