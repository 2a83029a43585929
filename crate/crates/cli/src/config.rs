//! Flat `key = value` configuration files with `#` comments.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, (usize, String)>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("line {}: expected key = value", i + 1)))?;
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(CliError::config(format!("line {}: empty key", i + 1)));
            }
            if entries.insert(key.clone(), (i + 1, value.trim().to_string())).is_some() {
                return Err(CliError::config(format!("line {}: duplicate key `{key}`", i + 1)));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Rejects any key outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        match self.entries.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            Some((key, (line, _))) => Err(CliError::config(format!(
                "line {line}: unknown key `{key}` (allowed: {})",
                allowed.join(", ")
            ))),
            None => Ok(()),
        }
    }

    fn raw(&self, key: &str) -> Option<&(usize, String)> {
        self.entries.get(key)
    }

    fn parse_value<T: std::str::FromStr>(key: &str, line: usize, s: &str) -> Result<T> {
        s.parse()
            .map_err(|_| CliError::config(format!("line {line}: cannot parse `{key}` value `{s}`")))
    }

    pub fn f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.raw(key) {
            Some((line, v)) => Self::parse_value(key, *line, v),
            None => Ok(default),
        }
    }

    pub fn usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.raw(key) {
            Some((line, v)) => Self::parse_value(key, *line, v),
            None => Ok(default),
        }
    }

    pub fn string(&self, key: &str, default: &str) -> String {
        self.raw(key).map_or_else(|| default.to_string(), |(_, v)| v.clone())
    }

    /// Comma-separated numbers.
    pub fn f64_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.raw(key) {
            Some((line, v)) => v
                .split(',')
                .map(|s| Self::parse_value(key, *line, s.trim()))
                .collect(),
            None => Ok(default.to_vec()),
        }
    }

    pub fn usize_list(&self, key: &str, default: &[usize]) -> Result<Vec<usize>> {
        match self.raw(key) {
            Some((line, v)) => v
                .split(',')
                .map(|s| Self::parse_value(key, *line, s.trim()))
                .collect(),
            None => Ok(default.to_vec()),
        }
    }
}
