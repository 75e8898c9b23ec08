//! Flat `key = value` config files merged under command-line flags.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};

/// Values read from a config file, plus the fully resolved parameter set.
#[derive(Debug, Default)]
pub struct Resolver {
    file: BTreeMap<String, String>,
    used: Vec<String>,
    resolved: Vec<(String, String)>,
}

impl Resolver {
    pub fn from_file(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut file = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("config line {}: expected key = value", lineno + 1);
            };
            let key = key.trim().replace('_', "-");
            if file.insert(key.clone(), value.trim().to_string()).is_some() {
                bail!("config line {}: duplicate key `{key}`", lineno + 1);
            }
        }
        Ok(Self {
            file,
            ..Self::default()
        })
    }

    /// Flag value, else config value, else `default`.
    pub fn value<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let v = match flag {
            Some(v) => v,
            None => match self.file.get(key) {
                Some(text) => text
                    .parse()
                    .map_err(|e| anyhow::anyhow!("config key `{key}`: {e}"))?,
                None => default,
            },
        };
        self.record(key, v.to_string());
        Ok(v)
    }

    /// Boolean switch: set by the flag or by `key = true` in the file.
    pub fn switch(&mut self, key: &str, flag: bool) -> Result<bool> {
        let v = flag || self.value(key, None, false)?;
        self.resolved.retain(|(k, _)| k != key);
        self.record(key, v.to_string());
        Ok(v)
    }

    /// Comma-separated list of numbers.
    pub fn list(&mut self, key: &str, flag: Option<Vec<f64>>, default: &[f64]) -> Result<Vec<f64>> {
        let v = match flag {
            Some(v) => v,
            None => match self.file.get(key) {
                Some(text) => parse_list(text).with_context(|| format!("config key `{key}`"))?,
                None => default.to_vec(),
            },
        };
        let shown: Vec<String> = v.iter().map(f64::to_string).collect();
        self.record(key, shown.join(","));
        Ok(v)
    }

    /// Optional list with no default.
    pub fn optional_list(&mut self, key: &str, flag: Option<Vec<f64>>) -> Result<Option<Vec<f64>>> {
        let v = match flag {
            Some(v) => Some(v),
            None => match self.file.get(key) {
                Some(text) => Some(parse_list(text).with_context(|| format!("config key `{key}`"))?),
                None => None,
            },
        };
        self.used.push(key.to_string());
        if let Some(v) = &v {
            let shown: Vec<String> = v.iter().map(f64::to_string).collect();
            self.resolved.push((key.to_string(), shown.join(",")));
        }
        Ok(v)
    }

    pub fn optional_path(&mut self, key: &str, flag: Option<PathBuf>) -> Result<Option<PathBuf>> {
        let v = flag.or_else(|| self.file.get(key).map(PathBuf::from));
        self.used.push(key.to_string());
        if let Some(p) = &v {
            self.resolved.push((key.to_string(), p.display().to_string()));
        }
        Ok(v)
    }

    fn record(&mut self, key: &str, shown: String) {
        self.used.push(key.to_string());
        self.resolved.push((key.to_string(), shown));
    }

    /// Fails on config keys that no parameter consumed.
    pub fn finish(self) -> Result<Vec<(String, String)>> {
        let unknown: Vec<&String> = self
            .file
            .keys()
            .filter(|k| !self.used.contains(k))
            .collect();
        if !unknown.is_empty() {
            let names: Vec<&str> = unknown.iter().map(|s| s.as_str()).collect();
            bail!("unknown config keys: {}", names.join(", "));
        }
        Ok(self.resolved)
    }
}

pub fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .with_context(|| format!("`{t}` is not a number"))
        })
        .collect()
}
