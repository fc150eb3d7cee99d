//! `key=value` suite parameters.

use std::collections::BTreeMap;
use std::str::FromStr;

use distfix::{derive_seed, parallel_sample, DistSpec};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params(BTreeMap<String, String>);

impl Params {
    /// Parse `key=value` items. Keys must be unique and nonempty.
    pub fn parse<S: AsRef<str>>(items: &[S]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for item in items {
            let item = item.as_ref();
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| CliError::bad(item, "expected key=value"))?;
            let k = k.trim();
            if k.is_empty() {
                return Err(CliError::bad(item, "empty key"));
            }
            if map.insert(k.to_string(), v.trim().to_string()).is_some() {
                return Err(CliError::bad(k, "given more than once"));
            }
        }
        Ok(Params(map))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Refuse keys the suite does not understand.
    pub fn allow(&self, suite: &str, keys: &[&str]) -> Result<()> {
        for k in self.0.keys() {
            if !keys.contains(&k.as_str()) {
                let accepted = if keys.is_empty() {
                    "none".to_string()
                } else {
                    keys.join(", ")
                };
                return Err(CliError::bad(
                    k,
                    format!("not accepted by `{suite}` (accepted: {accepted})"),
                ));
            }
        }
        Ok(())
    }

    pub fn value<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|e: T::Err| CliError::bad(key, format!("`{v}`: {e}"))),
        }
    }

    pub fn dist(&self, key: &str, default: &str, seed: u64) -> Result<DistSpec> {
        parse_dist(self.get(key).unwrap_or(default), seed).map_err(|e| match e {
            CliError::Core(e) => CliError::bad(key, e.to_string()),
            e => e,
        })
    }
}

/// Draws behind the `lognormal` surrogate.
pub const LOGNORMAL_ATOMS: usize = 20_000;

/// A distribution from a short name or from its JSON form.
///
/// Names: `normal`, `exponential`, `uniform` (variance one, on
/// `(-sqrt 3, sqrt 3)`), `uniform01`, `cube` (uniform on `(-1, 1)`),
/// `point-mass` (at 1), `rademacher`, `maxwell`, and `lognormal`, an
/// empirical law of `exp(Z)` draws seeded from `seed`.
pub fn parse_dist(text: &str, seed: u64) -> Result<DistSpec> {
    let d = match text {
        "normal" => DistSpec::standard_normal(),
        "exponential" => DistSpec::exponential(1.0)?,
        "uniform" => DistSpec::uniform(-3f64.sqrt(), 3f64.sqrt())?,
        "uniform01" => DistSpec::uniform(0.0, 1.0)?,
        "cube" => DistSpec::uniform(-1.0, 1.0)?,
        "point-mass" => DistSpec::point_mass(1.0)?,
        "rademacher" => DistSpec::rademacher(),
        "maxwell" => DistSpec::maxwell(1.0)?,
        "lognormal" => {
            let z = parallel_sample(
                &DistSpec::standard_normal(),
                derive_seed(seed, "lognormal"),
                LOGNORMAL_ATOMS,
                1,
            )?;
            DistSpec::empirical(z.values.into_iter().map(f64::exp).collect::<Vec<_>>())?
        }
        t if t.trim_start().starts_with('{') => DistSpec::from_json(t)?,
        t => {
            return Err(CliError::bad(
                t,
                "expected a distribution name (normal, exponential, uniform, uniform01, cube, \
                 point-mass, rademacher, maxwell, lognormal) or JSON",
            ))
        }
    };
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs() {
        let p = Params::parse(&["a=1", "candidate = uniform01"]).unwrap();
        assert_eq!(p.value("a", 0.0).unwrap(), 1.0);
        assert_eq!(p.get("candidate"), Some("uniform01"));
        assert_eq!(p.value("n", 2u32).unwrap(), 2);
    }

    #[test]
    fn rejects_malformed() {
        assert!(Params::parse(&["a"]).is_err());
        assert!(Params::parse(&["=1"]).is_err());
        assert!(Params::parse(&["a=1", "a=2"]).is_err());
        let p = Params::parse(&["a=x"]).unwrap();
        assert!(p.value("a", 0.0).is_err());
        assert!(p.allow("s", &["b"]).is_err());
        assert!(p.allow("s", &["a"]).is_ok());
    }

    #[test]
    fn named_distributions() {
        let u = parse_dist("uniform", 1).unwrap();
        assert!((u.moment(2.0).unwrap() - 1.0).abs() < 1e-12);
        let l = parse_dist("lognormal", 1).unwrap();
        assert_eq!(l, parse_dist("lognormal", 1).unwrap());
        assert_ne!(l, parse_dist("lognormal", 2).unwrap());
        let j = DistSpec::gamma(2.0, 1.0).unwrap().to_json();
        assert_eq!(parse_dist(&j, 0).unwrap(), DistSpec::gamma(2.0, 1.0).unwrap());
        assert!(parse_dist("cauchy", 0).is_err());
    }
}
