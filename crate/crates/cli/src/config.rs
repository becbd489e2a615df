//! Run configuration resolved from defaults, a flat `key = value` file and flags, in
//! increasing precedence.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{CliError, Result};

/// Smallest tolerance a check can meaningfully use; anything tighter is reported as an
/// expected failure.
pub const MIN_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    VerifyIdentities,
    BuildQscheme,
    Security,
    Sweep,
    Chains,
    Multiparty,
    Pqc,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::VerifyIdentities,
        Command::BuildQscheme,
        Command::Security,
        Command::Sweep,
        Command::Chains,
        Command::Multiparty,
        Command::Pqc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyIdentities => "verify-identities",
            Command::BuildQscheme => "build-qscheme",
            Command::Security => "security",
            Command::Sweep => "sweep",
            Command::Chains => "chains",
            Command::Multiparty => "multiparty",
            Command::Pqc => "pqc",
        }
    }

    /// Defaults for every key the command reads.
    fn defaults(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Command::VerifyIdentities => &[("n", "1,2"), ("tol", "1e-10"), ("instances", "300")],
            Command::BuildQscheme => &[("bit-scheme", "werner:d=2"), ("n", "1"), ("tol", "1e-9")],
            Command::Security => &[
                ("bit-scheme", "werner:d=2"),
                ("n", "1"),
                ("estimator", "ppt"),
                ("cut", "A:B"),
                ("tol", "1e-6"),
            ],
            Command::Sweep => &[("dims", "2,3,4"), ("tol", "1e-6")],
            Command::Chains => &[("mode", "werner"), ("n", "1"), ("k", "1,2"), ("tol", "1e-10")],
            Command::Multiparty => &[
                ("code", "five-qubit"),
                ("authorized", "1,2,3"),
                ("demo", "reconstruct"),
                ("tol", "1e-9"),
            ],
            Command::Pqc => &[("n", "1"), ("audit", "false"), ("tol", "1e-9")],
        }
    }

    /// Keys that may be set without a default.
    fn optional(self) -> &'static [&'static str] {
        match self {
            Command::BuildQscheme => &["emit"],
            Command::Security => &["scheme", "report"],
            Command::Multiparty => &["access"],
            _ => &[],
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| CliError::Usage(format!("unknown command `{s}`")))
    }
}

const COMMON_DEFAULTS: [(&str, &str); 2] = [("seed", "42"), ("format", "json")];
const COMMON_OPTIONAL: [&str; 1] = ["out"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`, got `{raw}`", lineno + 1)))?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() {
            return Err(CliError::Config(format!("line {}: empty key", lineno + 1)));
        }
        out.insert(key, value.trim().to_string());
    }
    Ok(out)
}

/// The resolved settings of one run; echoed verbatim into its report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub settings: BTreeMap<String, String>,
}

impl ExperimentConfig {
    /// Defaults, then `file`, then `flags`. Keys the command does not read are rejected,
    /// except that a shared config file may carry keys of other commands.
    pub fn resolve(command: Command, file: Option<&BTreeMap<String, String>>, flags: &[(&str, String)]) -> Result<Self> {
        let known = |key: &str| {
            COMMON_DEFAULTS.iter().any(|(k, _)| *k == key)
                || COMMON_OPTIONAL.contains(&key)
                || command.defaults().iter().any(|(k, _)| *k == key)
                || command.optional().contains(&key)
        };
        let mut settings: BTreeMap<String, String> = COMMON_DEFAULTS
            .iter()
            .chain(command.defaults())
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        if let Some(file) = file {
            for (key, value) in file {
                if known(key) {
                    settings.insert(key.clone(), value.clone());
                } else if !Command::ALL.iter().any(|c| {
                    c.defaults().iter().any(|(k, _)| k == key) || c.optional().contains(&key.as_str())
                }) {
                    return Err(CliError::Config(format!("unknown key `{key}`")));
                }
            }
        }
        for (key, value) in flags {
            if !known(key) {
                return Err(CliError::Usage(format!("`{key}` does not apply to {command}")));
            }
            settings.insert(key.to_string(), value.clone());
        }
        let config = Self { command, settings };
        config.seed()?;
        config.tolerance()?;
        config.format()?;
        Ok(config)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.settings.get(key).map(String::as_str)
    }

    pub fn string(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| CliError::Usage(format!("{} needs `{key}`", self.command)))
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.string(key)?;
        raw.trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("`{key}` = `{raw}` does not parse")))
    }

    pub fn seed(&self) -> Result<u64> {
        self.parsed("seed")
    }

    pub fn tolerance(&self) -> Result<f64> {
        let tol: f64 = self.parsed("tol")?;
        if tol.is_nan() || tol <= 0.0 || tol.is_infinite() {
            return Err(CliError::Usage(format!("tolerance must be positive, got {tol}")));
        }
        Ok(tol)
    }

    pub fn format(&self) -> Result<Format> {
        match self.string("format")? {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(CliError::Usage(format!("format must be json or csv, got `{other}`"))),
        }
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        self.parsed(key)
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        self.parsed(key)
    }

    /// Comma-separated list; empty lists are a usage error.
    pub fn usize_list(&self, key: &str) -> Result<Vec<usize>> {
        let raw = self.string(key)?;
        let items = raw
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse()
                    .map_err(|_| CliError::Usage(format!("`{key}` entry `{s}` is not a non-negative integer")))
            })
            .collect::<Result<Vec<usize>>>()?;
        if items.is_empty() {
            return Err(CliError::Usage(format!("`{key}` is empty")));
        }
        Ok(items)
    }

    pub fn out(&self) -> Option<&str> {
        self.get("out")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_is_flags_then_file_then_defaults() {
        let file = parse_config_file("# sweep\nseed = 7\ndims = 2,3\n\ntol=1e-8 # tighter\n").unwrap();
        let config = ExperimentConfig::resolve(Command::Sweep, Some(&file), &[("seed", "9".into())]).unwrap();
        assert_eq!(config.seed().unwrap(), 9);
        assert_eq!(config.usize_list("dims").unwrap(), vec![2, 3]);
        assert_eq!(config.tolerance().unwrap(), 1e-8);
        assert_eq!(config.format().unwrap(), Format::Json);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_config_file("seed 3").is_err());
        let file = parse_config_file("colour = red").unwrap();
        assert!(ExperimentConfig::resolve(Command::Sweep, Some(&file), &[]).is_err());
        let shared = parse_config_file("code = five-qubit").unwrap();
        assert!(ExperimentConfig::resolve(Command::Sweep, Some(&shared), &[]).is_ok());
        assert!(ExperimentConfig::resolve(Command::Sweep, None, &[("code", "x".into())]).is_err());
        let empty = ExperimentConfig::resolve(Command::Sweep, None, &[("dims", "".into())]).unwrap();
        assert!(matches!(empty.usize_list("dims"), Err(CliError::Usage(_))));
        assert!(ExperimentConfig::resolve(Command::Pqc, None, &[("tol", "-1".into())]).is_err());
    }
}
