//! `key=value` config files. Keys are long flag names; a flag given on the
//! command line always wins over the file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Settings::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => CliError::new("MissingArtifact", path.display().to_string()),
            _ => CliError::new("Io", format!("{}: {e}", path.display())),
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let mut values = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(CliError::new("InvalidConfig", format!("line {}: expected key=value", n + 1)));
            };
            let key = k.trim().trim_start_matches("--").replace('_', "-");
            if values.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(CliError::new("InvalidConfig", format!("line {}: duplicate key `{key}`", n + 1)));
            }
        }
        Ok(Settings { values })
    }

    fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.values
            .get(key)
            .map(|v| {
                v.parse()
                    .map_err(|e| CliError::new("InvalidConfig", format!("config key `{key}`: {e}")))
            })
            .transpose()
    }

    /// The flag if given, else the config value.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> CliResult<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }

    pub fn pick_or<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> CliResult<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.pick(flag, key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, flag: Option<T>, key: &str) -> CliResult<T>
    where
        T::Err: std::fmt::Display,
    {
        self.pick(flag, key)?.ok_or_else(|| CliError::missing_argument(key))
    }

    pub fn path(&self, flag: Option<PathBuf>, key: &str) -> CliResult<Option<PathBuf>> {
        self.pick(flag, key)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let s = Settings::parse("# comment\nseed = 7\nn_train=10\n\n").unwrap();
        assert_eq!(s.pick_or(None, "seed", 0u64).unwrap(), 7);
        assert_eq!(s.pick_or(Some(3u64), "seed", 0).unwrap(), 3);
        assert_eq!(s.pick_or(None::<usize>, "n-train", 0).unwrap(), 10);
        assert_eq!(s.pick_or(None, "epochs", 5usize).unwrap(), 5);
    }

    #[test]
    fn malformed_lines_are_rejected() {
        assert_eq!(Settings::parse("seed").unwrap_err().code, "InvalidConfig");
        assert_eq!(Settings::parse("a=1\na=2").unwrap_err().code, "InvalidConfig");
        let s = Settings::parse("seed=x").unwrap();
        assert_eq!(s.pick_or(None, "seed", 0u64).unwrap_err().code, "InvalidConfig");
    }

    #[test]
    fn missing_required_value() {
        let s = Settings::default();
        assert_eq!(s.require(None::<String>, "task").unwrap_err().code, "MissingArgument");
    }
}
