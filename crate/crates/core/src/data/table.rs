//! Plain CSV datasets.
//!
//! The header decides the meaning of the first column: `y` marks a
//! regression value, `class` a class index. Any other header means every
//! column is a feature and the targets are unknown.

use std::path::Path;

use super::Dataset;
use crate::error::{Error, Result};
use crate::layers::Target;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum TargetColumn {
    Value,
    Class,
    None,
}

fn parse_err(path: &Path, line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        reason: reason.into(),
    }
}

pub fn read(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    parse(&text, path)
}

/// Parses CSV `text`; `path` only labels errors.
pub fn parse(text: &str, path: &Path) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = rdr
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?
        .clone();
    let kind = match header.get(0) {
        Some("y") => TargetColumn::Value,
        Some("class") => TargetColumn::Class,
        _ => TargetColumn::None,
    };
    let skip = usize::from(kind != TargetColumn::None);
    let width = header.len() - skip;
    if width == 0 {
        return Err(parse_err(path, 1, "no feature columns"));
    }
    let mut inputs = Vec::new();
    let mut targets = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let num = |i: usize| -> Result<f64> {
            let s = &rec[i];
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    parse_err(
                        path,
                        line,
                        format!("column {}: '{s}' is not a finite number", i + 1),
                    )
                })
        };
        targets.push(match kind {
            TargetColumn::Value => Target::Value(num(0)?),
            TargetColumn::Class => Target::Class(rec[0].parse::<usize>().map_err(|_| {
                parse_err(path, line, format!("'{}' is not a class index", &rec[0]))
            })?),
            TargetColumn::None => Target::Unknown,
        });
        inputs.push((skip..rec.len()).map(num).collect::<Result<Vec<f64>>>()?);
    }
    Dataset::new(vec![width], inputs, targets)
}

/// Writes `data` so that [`read`] returns it unchanged.
pub fn write(path: &Path, data: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_io)?;
    let d = data
        .inputs
        .first()
        .map_or(crate::layers::numel(&data.shape), Vec::len);
    let target = match data.targets.first() {
        Some(Target::Value(_)) => Some("y"),
        Some(Target::Class(_)) => Some("class"),
        _ => None,
    };
    let mut head: Vec<String> = target.iter().map(|s| s.to_string()).collect();
    head.extend((0..d).map(|i| format!("x{i}")));
    w.write_record(&head).map_err(csv_io)?;
    for (x, t) in data.inputs.iter().zip(&data.targets) {
        let mut row = Vec::with_capacity(d + 1);
        match (target, t) {
            (Some("y"), Target::Value(y)) => row.push(y.to_string()),
            (Some("class"), Target::Class(c)) => row.push(c.to_string()),
            (None, Target::Unknown) => {}
            _ => return Err(Error::Shape("mixed target kinds in one dataset".into())),
        }
        row.extend(x.iter().map(f64::to_string));
        w.write_record(&row).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}
