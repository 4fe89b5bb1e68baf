//! Flat `key = value` configuration files.
//!
//! Keys are the long flag names without the leading dashes. Blank lines and
//! lines starting with `#` are ignored. Command-line flags take precedence.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use fewshot_eval::Error;

#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
    source: String,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self, Error> {
        match path {
            None => Ok(ConfigFile::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
                Self::parse(&text, &p.display().to_string())
            }
        }
    }

    pub fn parse(text: &str, source: &str) -> Result<Self, Error> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("{source}:{}: expected `key = value`", i + 1)))?;
            let key = k.trim().trim_start_matches("--").to_owned();
            if values.insert(key.clone(), v.trim().to_owned()).is_some() {
                return Err(Error::Config(format!("{source}:{}: `{key}` is set twice", i + 1)));
            }
        }
        Ok(ConfigFile {
            values,
            source: source.to_owned(),
        })
    }

    /// The flag value if given, else the config value, parsed.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, Error>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| Error::Config(format!("{}: invalid `{key}` = `{v}`: {e}", self.source))),
        }
    }

    pub fn require<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<T, Error>
    where
        T::Err: std::fmt::Display,
    {
        self.pick(flag, key)?
            .ok_or_else(|| Error::Config(format!("`--{key}` is required (flag or config file)")))
    }

    pub fn flag(&self, flag: bool, key: &str) -> Result<bool, Error> {
        Ok(flag || self.pick::<bool>(None, key)?.unwrap_or(false))
    }

    /// Rejects keys that the command does not understand.
    pub fn check_keys(&self, known: &[&str]) -> Result<(), Error> {
        match self.values.keys().find(|k| !known.contains(&k.as_str())) {
            Some(k) => Err(Error::Config(format!("{}: unknown key `{k}`", self.source))),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let c = ConfigFile::parse("# comment\nways = 5\nshots=1\n\nmode = depletion\n", "c").unwrap();
        assert_eq!(c.pick(Some(3usize), "ways").unwrap(), Some(3));
        assert_eq!(c.pick(None::<usize>, "ways").unwrap(), Some(5));
        assert_eq!(c.pick(None::<usize>, "queries").unwrap(), None);
        assert!(c.require(None::<usize>, "queries").is_err());
        assert!(c.check_keys(&["ways", "shots"]).is_err());
        assert!(c.check_keys(&["ways", "shots", "mode"]).is_ok());
    }

    #[test]
    fn malformed_lines() {
        assert!(ConfigFile::parse("ways 5\n", "c").is_err());
        assert!(ConfigFile::parse("ways=5\nways=6\n", "c").is_err());
        let c = ConfigFile::parse("ways = five\n", "c").unwrap();
        assert!(c.pick(None::<usize>, "ways").is_err());
    }
}
