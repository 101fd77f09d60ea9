//! Set arguments and the key=value config file.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context};
use sievekit::IntegerSet;

/// `1,2,5`, `lo..hi`, a mix of both, or `@path` with one integer (or range)
/// per line. Blank lines and `#` comments are skipped in files.
pub fn parse_set(s: &str) -> Result<IntegerSet, String> {
    match s.strip_prefix('@') {
        Some(path) => read_set_file(Path::new(path)).map_err(|e| format!("{e:#}")),
        None => s.parse().map_err(|e| format!("{e}")),
    }
}

fn read_set_file(path: &Path) -> anyhow::Result<IntegerSet> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let part: IntegerSet = line
            .parse()
            .with_context(|| format!("{}:{}: bad set element", path.display(), i + 1))?;
        out.extend(part.into_vec());
    }
    Ok(IntegerSet::new(out))
}

/// Entries of a config file, keyed by long flag name; later lines win.
#[derive(Debug, Default)]
pub struct Config {
    pub entries: BTreeMap<String, String>,
}

impl Config {
    pub fn load(path: &Path) -> anyhow::Result<Config> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                bail!("{}:{}: expected key=value", path.display(), i + 1);
            };
            let key = k.trim().trim_start_matches("--").to_string();
            if key.is_empty() {
                bail!("{}:{}: empty key", path.display(), i + 1);
            }
            entries.insert(key, v.trim().to_string());
        }
        Ok(Config { entries })
    }
}

/// Splices config entries into `argv` right after the subcommand so flags
/// given on the command line (which come later) take precedence. A
/// `command` entry supplies the subcommand when the command line has none.
pub fn merge_config(argv: Vec<String>, config: &Config, subcommands: &[&str]) -> Vec<String> {
    let mut flags = Vec::new();
    for (k, v) in &config.entries {
        match (k.as_str(), v.as_str()) {
            ("command" | "config", _) => {}
            (_, "true") => flags.push(format!("--{k}")),
            (_, "false") => {}
            _ => flags.push(format!("--{k}={v}")),
        }
    }
    let pos = argv
        .iter()
        .skip(1)
        .position(|a| subcommands.contains(&a.as_str()))
        .map(|i| i + 1);
    let mut out = argv;
    match pos {
        Some(i) => {
            out.splice(i + 1..i + 1, flags);
        }
        None => {
            if let Some(cmd) = config.entries.get("command") {
                out.insert(1, cmd.clone());
                out.splice(2..2, flags);
            }
        }
    }
    out
}

/// Finds `--config PATH` or `--config=PATH` before clap sees the arguments.
pub fn config_path(argv: &[String]) -> Option<String> {
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}
