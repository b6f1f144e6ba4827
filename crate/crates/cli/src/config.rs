//! Flat `key = value` config files.
//!
//! Keys are the long flag names without the leading dashes. Blank lines and
//! lines starting with `#` are ignored. A flag given on the command line
//! always wins over the file; the file wins over built-in defaults.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

#[derive(Clone, Debug, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Config::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("config: cannot read {}", p.display()))?;
                Self::parse(&text).with_context(|| format!("config: {}", p.display()))
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("line {}: expected key = value", lineno + 1);
            };
            let key = key.trim().trim_start_matches("--").to_string();
            if key.is_empty() {
                bail!("line {}: empty key", lineno + 1);
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Config { values })
    }

    pub fn get<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.values
            .get(key)
            .map(|v| v.parse::<T>().map_err(|e| anyhow!("{key}: invalid value {v:?} in config file: {e}")))
            .transpose()
    }

    /// Command-line value if present, else the config file's.
    pub fn pick<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }

    pub fn pick_or<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.pick(flag, key)?.unwrap_or(default))
    }

    pub fn require<T>(&self, flag: Option<T>, key: &str) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.pick(flag, key)?.ok_or_else(|| anyhow!("{key}: missing required parameter"))
    }

    pub fn flag(&self, flag: bool, key: &str) -> Result<bool> {
        Ok(flag || self.get::<bool>(key)?.unwrap_or(false))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let cfg = Config::parse("# comment\nalpha = 1.5\n\n--nx=7\n").unwrap();
        assert_eq!(cfg.pick(Some(2.0), "alpha").unwrap(), Some(2.0));
        assert_eq!(cfg.pick(None::<f64>, "alpha").unwrap(), Some(1.5));
        assert_eq!(cfg.pick_or(None::<usize>, "nx", 3).unwrap(), 7);
        assert_eq!(cfg.pick_or(None::<usize>, "ny", 3).unwrap(), 3);
    }

    #[test]
    fn errors_name_the_key() {
        let cfg = Config::parse("nx = seven").unwrap();
        let err = cfg.get::<usize>("nx").unwrap_err().to_string();
        assert!(err.starts_with("nx:"), "{err}");
        let err = cfg.require(None::<f64>, "alpha").unwrap_err().to_string();
        assert!(err.starts_with("alpha:"));
        assert!(Config::parse("just words").is_err());
    }
}
