//! `key = value` configuration files and the run manifests written beside each CSV.
//!
//! Keys are long flag names without the dashes. A bare key stands for a flag
//! without a value. A manifest is itself a valid configuration file, so
//! `--config out.csv.manifest` repeats a run.

use std::ffi::OsString;
use std::fs;

use anyhow::{Context, Result};
use clap::ArgMatches;

use crate::args::SUBCOMMANDS;
use crate::output::usage;

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Flags that change where output goes or how fast it is produced, never what it contains.
const NOT_RECORDED: [&str; 4] = ["config", "workers", "out", "help"];

/// Splices the entries of `--config FILE` into `raw` right after the
/// subcommand, ahead of the explicit flags so that those take precedence.
pub fn expand_argv(raw: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&raw) else {
        return Ok(raw);
    };
    let text = fs::read_to_string(&path)
        .with_context(|| format!("reading config {}", path.to_string_lossy()))?;
    let (command, file_args) = parse_config(&text)?;
    let pos = raw
        .iter()
        .skip(1)
        .position(|a| SUBCOMMANDS.iter().any(|s| a == s))
        .map(|p| p + 1);
    let mut argv = Vec::with_capacity(raw.len() + file_args.len() + 1);
    match (pos, command) {
        (Some(i), _) => {
            argv.extend_from_slice(&raw[..=i]);
            argv.extend(file_args);
            argv.extend_from_slice(&raw[i + 1..]);
        }
        (None, Some(c)) => {
            argv.push(raw[0].clone());
            argv.push(c.into());
            argv.extend(file_args);
            argv.extend_from_slice(&raw[1..]);
        }
        (None, None) => return Ok(raw),
    }
    Ok(argv)
}

fn config_path(raw: &[OsString]) -> Option<OsString> {
    let mut it = raw.iter().skip(1);
    while let Some(a) = it.next() {
        if a == "--" {
            break;
        }
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = a.to_str().and_then(|s| s.strip_prefix("--config=")) {
            return Some(v.into());
        }
    }
    None
}

fn parse_config(text: &str) -> Result<(Option<String>, Vec<OsString>)> {
    let mut command = None;
    let mut args = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = match line.split_once('=') {
            Some((k, v)) => (k.trim(), Some(v.trim())),
            None => (line, None),
        };
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(usage(format!("config line {}: bad key '{key}'", n + 1)));
        }
        match (key, value) {
            ("command", Some(v)) => command = Some(v.to_string()),
            ("version", Some(v)) => {
                if v != VERSION {
                    eprintln!("warning: config written by version {v}, running {VERSION}");
                }
            }
            ("config", _) => {}
            (k, v) => {
                args.push(format!("--{k}").into());
                if let Some(v) = v {
                    args.push(v.into());
                }
            }
        }
    }
    Ok((command, args))
}

/// Every value the subcommand ran with, defaults included.
pub fn manifest(cmd: &clap::Command, matches: &ArgMatches) -> String {
    let mut s = format!("# ergodic-se run manifest\nversion = {VERSION}\n");
    let Some((name, sub)) = matches.subcommand() else {
        return s;
    };
    s.push_str(&format!("command = {name}\n"));
    let Some(sc) = cmd.find_subcommand(name) else {
        return s;
    };
    for arg in sc.get_arguments() {
        let id = arg.get_id().as_str();
        if NOT_RECORDED.contains(&id) || !arg.get_action().takes_values() {
            continue;
        }
        let Some(long) = arg.get_long() else { continue };
        if let Ok(Some(vals)) = sub.try_get_raw(id) {
            let v: Vec<String> = vals.map(|v| v.to_string_lossy().into_owned()).collect();
            s.push_str(&format!("{long} = {}\n", v.join(",")));
        }
    }
    s
}
