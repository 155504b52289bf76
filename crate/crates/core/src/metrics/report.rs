//! Plain `key=value` metric reports.
//!
//! Values are printed with Rust's shortest round-trip float formatting, so
//! reading a report back yields bit-identical numbers.

use std::fmt::Write;

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    entries: Vec<(String, String)>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn num(&mut self, key: &str, v: f64) -> &mut Self {
        self.text(key, &format!("{v:?}"))
    }

    pub fn int(&mut self, key: &str, v: u64) -> &mut Self {
        self.text(key, &v.to_string())
    }

    pub fn text(&mut self, key: &str, v: &str) -> &mut Self {
        assert!(
            !key.contains('=') && !v.contains('\n'),
            "unrepresentable entry {key}"
        );
        self.entries.push((key.to_string(), v.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn get_num(&self, key: &str) -> Option<f64> {
        self.get(key)?.parse().ok()
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            writeln!(s, "{k}={v}").unwrap();
        }
        s
    }

    pub fn parse(text: &str, path: &str) -> Result<Self> {
        let mut r = Report::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: path.into(),
                line: i + 1,
                reason: "expected key=value".into(),
            })?;
            r.entries.push((k.to_string(), v.to_string()));
        }
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lookup() {
        let mut r = Report::new();
        r.num("nll", 0.25)
            .int("examples", 10)
            .text("mode", "latent");
        assert_eq!(r.to_text(), "nll=0.25\nexamples=10\nmode=latent\n");
        assert_eq!(r.get_num("nll"), Some(0.25));
        assert!(Report::parse("oops\n", "r").is_err());
    }

    proptest! {
        #[test]
        fn round_trip(vals in prop::collection::vec(any::<f64>(), 0..20)) {
            let mut r = Report::new();
            for (i, v) in vals.iter().enumerate() {
                r.num(&format!("k{i}"), *v);
            }
            let back = Report::parse(&r.to_text(), "r").unwrap();
            prop_assert_eq!(back.to_text(), r.to_text());
            for (i, v) in vals.iter().enumerate() {
                let got = back.get_num(&format!("k{i}")).unwrap();
                prop_assert!(got.to_bits() == v.to_bits() || (got.is_nan() && v.is_nan()));
            }
        }
    }
}
