//! Text format for model descriptions.
//!
//! One layer per line, `Kind arg ...`, with `#` starting a comment:
//!
//! ```text
//! Input 1
//! Linear 16          # bias on by default, `Linear 16 nobias` drops it
//! LeakyReLU 0.1
//! Linear 1
//! Regression 0.0025  # observation noise variance
//! ```
//!
//! Other kinds: `Input c h w`, `Conv channels kernel [padding]`,
//! `MaxPool stride`, `Flatten`, `Argmax [regularized|plain] [gamma]` and
//! `Softmax`. Kind names are case-insensitive.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::layers::{shape_infer, LayerSpec};

/// Parses and shape-checks a model description. `path` only labels errors.
pub fn parse(text: &str, path: &str) -> Result<Vec<LayerSpec>> {
    let mut specs = Vec::new();
    let mut lines = Vec::new();
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
        let mut words = line.split_whitespace();
        let kind = words.next().unwrap_or_default();
        let args: Vec<&str> = words.collect();
        specs.push(parse_line(kind, &args).map_err(err)?);
        lines.push(i + 1);
    }
    if specs.is_empty() {
        return Err(Error::Parse {
            path: path.into(),
            line: 1,
            reason: "no layers".into(),
        });
    }
    // re-anchor shape errors to the offending line
    shape_infer(&specs).map_err(|e| match e {
        Error::LayerSpec {
            index,
            kind,
            reason,
        } => Error::Parse {
            path: path.into(),
            line: lines[index],
            reason: format!("{kind}: {reason}"),
        },
        other => other,
    })?;
    Ok(specs)
}

fn parse_line(kind: &str, args: &[&str]) -> std::result::Result<LayerSpec, String> {
    let int = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| format!("expected an integer, got `{s}`"))
    };
    let real = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| format!("expected a number, got `{s}`"))
    };
    let arity = |lo: usize, hi: usize| {
        if args.len() < lo || args.len() > hi {
            Err(format!(
                "{kind} takes {lo}..={hi} arguments, got {}",
                args.len()
            ))
        } else {
            Ok(())
        }
    };
    Ok(match kind.to_ascii_lowercase().as_str() {
        "input" => {
            arity(1, 3)?;
            LayerSpec::Input(
                args.iter()
                    .map(|a| int(a))
                    .collect::<std::result::Result<_, _>>()?,
            )
        }
        "linear" => {
            arity(1, 2)?;
            let bias = match args.get(1) {
                None | Some(&"bias") => true,
                Some(&"nobias") => false,
                Some(other) => return Err(format!("expected `bias` or `nobias`, got `{other}`")),
            };
            LayerSpec::Linear {
                out: int(args[0])?,
                bias,
            }
        }
        "conv" => {
            arity(2, 3)?;
            LayerSpec::Conv {
                out_channels: int(args[0])?,
                kernel: int(args[1])?,
                padding: args.get(2).map_or(Ok(0), |a| int(a))?,
            }
        }
        "leakyrelu" => {
            arity(1, 1)?;
            LayerSpec::LeakyRelu(real(args[0])?)
        }
        "relu" => {
            arity(0, 0)?;
            LayerSpec::LeakyRelu(0.0)
        }
        "maxpool" => {
            arity(1, 1)?;
            LayerSpec::MaxPool(int(args[0])?)
        }
        "flatten" => {
            arity(0, 0)?;
            LayerSpec::Flatten
        }
        "regression" => {
            arity(1, 1)?;
            LayerSpec::Regression(real(args[0])?)
        }
        "argmax" => {
            arity(0, 2)?;
            let regularized = match args.first() {
                None | Some(&"regularized") => true,
                Some(&"plain") => false,
                Some(other) => {
                    return Err(format!("expected `regularized` or `plain`, got `{other}`"))
                }
            };
            LayerSpec::Argmax {
                regularized,
                gamma: args.get(1).map_or(Ok(1.0), |a| real(a))?,
            }
        }
        "softmax" => {
            arity(0, 0)?;
            LayerSpec::Softmax
        }
        _ => return Err(format!("unknown layer kind `{kind}`")),
    })
}

/// Canonical text form; [`parse`] reads it back to the same specs.
pub fn to_text(specs: &[LayerSpec]) -> String {
    let mut out = String::new();
    for s in specs {
        match s {
            LayerSpec::Input(shape) => {
                out.push_str("Input");
                for d in shape {
                    write!(out, " {d}").unwrap();
                }
            }
            LayerSpec::Linear { out: o, bias } => {
                write!(out, "Linear {o}{}", if *bias { "" } else { " nobias" }).unwrap()
            }
            LayerSpec::Conv {
                out_channels,
                kernel,
                padding,
            } => write!(out, "Conv {out_channels} {kernel} {padding}").unwrap(),
            LayerSpec::LeakyRelu(a) => write!(out, "LeakyReLU {a:?}").unwrap(),
            LayerSpec::MaxPool(s) => write!(out, "MaxPool {s}").unwrap(),
            LayerSpec::Flatten => out.push_str("Flatten"),
            LayerSpec::Regression(b) => write!(out, "Regression {b:?}").unwrap(),
            LayerSpec::Argmax { regularized, gamma } => write!(
                out,
                "Argmax {} {gamma:?}",
                if *regularized { "regularized" } else { "plain" }
            )
            .unwrap(),
            LayerSpec::Softmax => out.push_str("Softmax"),
        }
        out.push('\n');
    }
    out
}
