use crate::CliError;
use std::collections::BTreeMap;
use std::str::FromStr;

/// Command-specific `key=value` settings.
#[derive(Debug, Clone, Copy)]
pub struct Extras<'a>(pub &'a BTreeMap<String, String>);

fn parse<T: FromStr>(key: &str, raw: &str) -> Result<T, CliError> {
    raw.trim()
        .parse()
        .map_err(|_| CliError::Config(format!("{key}: cannot parse {raw:?}")))
}

impl<'a> Extras<'a> {
    pub fn str(&self, key: &str) -> Option<&'a str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&'a str, CliError> {
        self.str(key)
            .ok_or_else(|| CliError::Config(format!("missing --set {key}=...")))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.str(key).map(|raw| parse(key, raw)).transpose()
    }

    pub fn or<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn need<T: FromStr>(&self, key: &str) -> Result<T, CliError> {
        parse(key, self.require(key)?)
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>, CliError> {
        let raw = self.require(key)?;
        let items: Vec<T> = raw
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| parse(key, s))
            .collect::<Result<_, _>>()?;
        if items.is_empty() {
            return Err(CliError::Config(format!("{key}: empty list")));
        }
        Ok(items)
    }

    /// Inline JSON matrix, e.g. `[[0.6,0,0.4],[0,0.6,0.4]]`.
    pub fn matrix(&self, key: &str) -> Result<Option<Vec<Vec<f64>>>, CliError> {
        self.str(key)
            .map(|raw| {
                serde_json::from_str(raw).map_err(|e| CliError::Config(format!("{key}: {e}")))
            })
            .transpose()
    }

    /// Rejects keys the command does not read.
    pub fn only(&self, allowed: &[&str]) -> Result<(), CliError> {
        match self.0.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(CliError::Config(format!(
                "unknown setting {k:?}; this command reads {allowed:?}"
            ))),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_defaults() {
        let map: BTreeMap<String, String> = [("d", "0.1, 0.2,"), ("m", "4")]
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        let x = Extras(&map);
        assert_eq!(x.list::<f64>("d").unwrap(), vec![0.1, 0.2]);
        assert_eq!(x.or("m", 1usize).unwrap(), 4);
        assert_eq!(x.or("n", 7usize).unwrap(), 7);
        assert!(x.need::<f64>("r").is_err());
        assert!(x.get::<usize>("d").is_err());
        assert!(x.only(&["d"]).is_err());
    }
}
