//! Flat `key = value` configuration files.
//!
//! Blank lines and `#` comments are ignored. Keys may appear once. Callers
//! take the keys they understand and then ask for the leftovers, so a typo
//! is reported against its line instead of being silently ignored.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::trainer::{Retention, TrainConfig};

#[derive(Clone, Debug, Default)]
pub struct KeyValues {
    path: String,
    entries: BTreeMap<String, (usize, String)>,
}

impl KeyValues {
    pub fn parse(text: &str, path: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |reason: String| Error::Parse {
                path: path.into(),
                line: i + 1,
                reason,
            };
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(err("empty key".into()));
            }
            if let Some((first, _)) = entries.insert(k.to_string(), (i + 1, v.to_string())) {
                return Err(err(format!("`{k}` already set on line {first}")));
            }
        }
        Ok(KeyValues {
            path: path.into(),
            entries,
        })
    }

    /// Removes and parses `key`, if present.
    pub fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        let Some((line, v)) = self.entries.remove(key) else {
            return Ok(None);
        };
        v.parse().map(Some).map_err(|_| Error::Parse {
            path: self.path.clone(),
            line,
            reason: format!("invalid value `{v}` for `{key}`"),
        })
    }

    /// Fails on the first key nobody took.
    pub fn finish(self) -> Result<()> {
        match self.entries.iter().min_by_key(|(_, (line, _))| *line) {
            None => Ok(()),
            Some((k, (line, _))) => Err(Error::Parse {
                path: self.path,
                line: *line,
                reason: format!("unknown key `{k}`"),
            }),
        }
    }
}

/// Reads the training keys from `kv` on top of the defaults. Unknown keys
/// are left in place.
pub fn take_train_config(kv: &mut KeyValues) -> Result<TrainConfig> {
    let mut c = TrainConfig::default();
    if let Some(v) = kv.take("batch_size")? {
        c.batch_size = v;
    }
    if let Some(v) = kv.take("epochs")? {
        c.epochs = v;
    }
    if let Some(v) = kv.take::<String>("iterations")? {
        c.iterations = match v.as_str() {
            "ramp" => None,
            n => Some(n.parse().map_err(|_| {
                Error::Config(format!("iterations must be a count or `ramp`, got `{n}`"))
            })?),
        };
    }
    if let Some(v) = kv.take("damping")? {
        c.damping = v;
    }
    if let Some(v) = kv.take("seed")? {
        c.seed = v;
    }
    if let Some(v) = kv.take("prior_target_variance")? {
        c.prior_target_variance = v;
    }
    if let Some(v) = kv.take("bias_prior_variance")? {
        c.bias_prior_variance = v;
    }
    if let Some(v) = kv.take::<String>("retention")? {
        c.retention = match v.as_str() {
            "per_example" => Retention::PerExample,
            "aggregate_only" => Retention::AggregateOnly,
            other => {
                return Err(Error::Config(format!(
                    "retention must be `per_example` or `aggregate_only`, got `{other}`"
                )))
            }
        };
    }
    if let Some(v) = kv.take("shuffle")? {
        c.shuffle = v;
    }
    c.validate()?;
    Ok(c)
}

/// Parses a file holding only training keys.
pub fn parse_train_config(text: &str, path: &str) -> Result<TrainConfig> {
    let mut kv = KeyValues::parse(text, path)?;
    let c = take_train_config(&mut kv)?;
    kv.finish()?;
    Ok(c)
}

/// Canonical text form of a training configuration.
pub fn train_config_text(c: &TrainConfig) -> String {
    let mut s = String::new();
    writeln!(s, "batch_size = {}", c.batch_size).unwrap();
    writeln!(s, "epochs = {}", c.epochs).unwrap();
    match c.iterations {
        Some(n) => writeln!(s, "iterations = {n}").unwrap(),
        None => writeln!(s, "iterations = ramp").unwrap(),
    }
    writeln!(s, "damping = {:?}", c.damping).unwrap();
    writeln!(s, "seed = {}", c.seed).unwrap();
    writeln!(s, "prior_target_variance = {:?}", c.prior_target_variance).unwrap();
    writeln!(s, "bias_prior_variance = {:?}", c.bias_prior_variance).unwrap();
    let r = match c.retention {
        Retention::PerExample => "per_example",
        Retention::AggregateOnly => "aggregate_only",
    };
    writeln!(s, "retention = {r}").unwrap();
    writeln!(s, "shuffle = {}", c.shuffle).unwrap();
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn defaults_from_empty_file() {
        assert_eq!(
            parse_train_config("# nothing\n", "c").unwrap(),
            TrainConfig::default()
        );
    }

    #[test]
    fn reads_every_key() {
        let c = parse_train_config(
            "batch_size = 200\nepochs=3\niterations = 500\ndamping = 0.5\nseed = 9\n\
             prior_target_variance = 2\nbias_prior_variance = 0.25\nretention = aggregate_only\nshuffle = true\n",
            "c",
        )
        .unwrap();
        assert_eq!(c.batch_size, 200);
        assert_eq!(c.iterations, Some(500));
        assert_eq!(c.retention, Retention::AggregateOnly);
        assert!(c.shuffle);
    }

    #[test]
    fn line_anchored_errors() {
        let e = parse_train_config("epochs = 2\n\nbatch_sise = 3\n", "run.cfg").unwrap_err();
        assert_eq!(e.to_string(), "run.cfg:3: unknown key `batch_sise`");
        let e = parse_train_config("epochs = two\n", "run.cfg").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
        assert!(matches!(
            parse_train_config("epochs\n", "c"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_train_config("seed = 1\nseed = 2\n", "c"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(parse_train_config("damping = 1.5\n", "c").is_err());
    }

    proptest! {
        #[test]
        fn text_round_trip(
            batch_size in 1usize..1000,
            epochs in 0usize..50,
            iterations in prop::option::of(0usize..600),
            damping in 0.01f64..=1.0,
            seed in any::<u64>(),
            target in 0.81f64..10.0,
            bias in 0.01f64..5.0,
            aggregate in any::<bool>(),
            shuffle in any::<bool>(),
        ) {
            let c = TrainConfig {
                batch_size, epochs, iterations, damping, seed,
                prior_target_variance: target,
                bias_prior_variance: bias,
                retention: if aggregate { Retention::AggregateOnly } else { Retention::PerExample },
                shuffle,
            };
            prop_assert_eq!(parse_train_config(&train_config_text(&c), "c").unwrap(), c);
        }
    }
}
