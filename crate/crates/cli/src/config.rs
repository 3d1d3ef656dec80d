//! Flat `key: value` config files merged under command-line flags.

use std::collections::BTreeMap;
use std::ffi::OsString;

use clap::{ArgAction, CommandFactory};

use crate::args::Cli;
use crate::CliError;

/// Parsed config file: keys normalised to kebab-case, in file order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConfigFile {
    pub command: Option<String>,
    pub entries: Vec<(String, String)>,
}

pub fn parse_config(text: &str) -> Result<ConfigFile, CliError> {
    let mut out = ConfigFile::default();
    let mut seen = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once(':')
            .ok_or_else(|| CliError::Config(format!("config line {}: expected `key: value`, got {line:?}", i + 1)))?;
        let key = k.trim().replace('_', "-");
        let value = v.trim().to_string();
        if key.is_empty() {
            return Err(CliError::Config(format!("config line {}: empty key", i + 1)));
        }
        if seen.insert(key.clone(), i + 1).is_some() {
            return Err(CliError::Config(format!("config line {}: duplicate key {key:?}", i + 1)));
        }
        if key == "command" {
            out.command = Some(value);
        } else {
            out.entries.push((key, value));
        }
    }
    Ok(out)
}

fn config_path(argv: &[OsString]) -> Option<String> {
    let mut it = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned());
    while let Some(a) = it.next() {
        if a == "--" {
            break;
        }
        if a == "--config" {
            return it.next();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

fn subcommand_names() -> Vec<String> {
    Cli::command().get_subcommands().map(|c| c.get_name().to_string()).collect()
}

fn given_flags(argv: &[OsString]) -> Vec<String> {
    argv.iter()
        .skip(1)
        .filter_map(|a| {
            let a = a.to_string_lossy();
            let flag = a.strip_prefix("--")?;
            Some(flag.split_once('=').map(|(k, _)| k).unwrap_or(flag).to_string())
        })
        .collect()
}

/// Returns `argv` with config entries appended for flags not already given.
/// Unknown keys, or a `command` that contradicts the command line, are errors.
pub fn merge_config(argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::Config(format!("cannot read config {path}: {e}")))?;
    let file = parse_config(&text)?;
    let names = subcommand_names();
    let on_line = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).find(|a| names.contains(a));
    let mut argv = argv;
    let command = match (on_line, file.command) {
        (Some(c), Some(f)) if c != f => {
            return Err(CliError::Config(format!("config command {f:?} contradicts command line {c:?}")))
        }
        (Some(c), _) => c,
        (None, Some(f)) => {
            if !names.contains(&f) {
                return Err(CliError::Config(format!("unknown command {f:?} in config")));
            }
            argv.insert(1.min(argv.len()), f.clone().into());
            f
        }
        (None, None) => return Ok(argv),
    };
    let root = Cli::command();
    let sub = root.find_subcommand(&command).expect("known subcommand");
    let given = given_flags(&argv);
    for (key, value) in file.entries {
        let arg = sub
            .get_arguments()
            .chain(root.get_arguments())
            .find(|a| a.get_long() == Some(key.as_str()) && key != "config");
        let Some(arg) = arg else {
            return Err(CliError::Config(format!("unknown key {key:?} for command {command}")));
        };
        if given.contains(&key) {
            continue;
        }
        if matches!(arg.get_action(), ArgAction::SetTrue) {
            match value.as_str() {
                "true" => argv.push(format!("--{key}").into()),
                "false" => {}
                _ => return Err(CliError::Config(format!("key {key:?} expects true or false, got {value:?}"))),
            }
        } else {
            argv.push(format!("--{key}").into());
            argv.push(value.into());
        }
    }
    Ok(argv)
}
