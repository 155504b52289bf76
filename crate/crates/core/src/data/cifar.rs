//! CIFAR-10 in its standard binary layout.
//!
//! Each record is one label byte followed by 3072 pixel bytes: the 1024
//! red values of a 32x32 image in row-major order, then green, then blue.
//! Pixels are standardized per channel with statistics of the training
//! split.

use std::path::{Path, PathBuf};

use rand::Rng;

use super::Dataset;
use crate::error::{Error, Result};
use crate::layers::Target;
use crate::rng::{stream, Stream};

pub const SIDE: usize = 32;
pub const PIXELS: usize = 3 * SIDE * SIDE;
pub const RECORD_LEN: usize = PIXELS + 1;
pub const CLASSES: usize = 10;

pub const TRAIN_FILES: [&str; 5] = [
    "data_batch_1.bin",
    "data_batch_2.bin",
    "data_batch_3.bin",
    "data_batch_4.bin",
    "data_batch_5.bin",
];
pub const TEST_FILE: &str = "test_batch.bin";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Record {
    pub label: u8,
    pub pixels: Vec<u8>,
}

/// Parses a whole file image. `path` only labels errors.
pub fn parse(bytes: &[u8], path: &Path) -> Result<Vec<Record>> {
    let full = bytes.len() / RECORD_LEN;
    if !bytes.len().is_multiple_of(RECORD_LEN) {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            offset: (full * RECORD_LEN) as u64,
        });
    }
    bytes
        .chunks_exact(RECORD_LEN)
        .enumerate()
        .map(|(i, rec)| {
            if rec[0] as usize >= CLASSES {
                return Err(Error::Corrupt {
                    path: path.to_path_buf(),
                    offset: (i * RECORD_LEN) as u64,
                    reason: format!("label {} is not a CIFAR-10 class", rec[0]),
                });
            }
            Ok(Record {
                label: rec[0],
                pixels: rec[1..].to_vec(),
            })
        })
        .collect()
}

pub fn read_file(path: &Path) -> Result<Vec<Record>> {
    parse(&std::fs::read(path)?, path)
}

pub fn write_file(path: &Path, records: &[Record]) -> Result<()> {
    let mut out = Vec::with_capacity(records.len() * RECORD_LEN);
    for r in records {
        assert_eq!(r.pixels.len(), PIXELS, "record must hold {PIXELS} pixels");
        out.push(r.label);
        out.extend_from_slice(&r.pixels);
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn read_all(dir: &Path, names: &[&str]) -> Result<Vec<Record>> {
    let mut all = Vec::new();
    for name in names {
        let p: PathBuf = dir.join(name);
        all.extend(read_file(&p)?);
    }
    Ok(all)
}

/// The five training files of an extracted `cifar-10-batches-bin` directory.
pub fn read_train(dir: &Path) -> Result<Vec<Record>> {
    read_all(dir, &TRAIN_FILES)
}

pub fn read_test(dir: &Path) -> Result<Vec<Record>> {
    read_all(dir, &[TEST_FILE])
}

/// Per-channel pixel mean and standard deviation, in raw byte units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelStats {
    pub mean: [f64; 3],
    pub std: [f64; 3],
}

impl ChannelStats {
    /// Exact integer sums, so the result does not depend on record order.
    pub fn from_records(records: &[Record]) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::Shape(
                "no records to compute channel statistics".into(),
            ));
        }
        let plane = SIDE * SIDE;
        let mut s = [0u64; 3];
        let mut s2 = [0u64; 3];
        for r in records {
            for c in 0..3 {
                for &p in &r.pixels[c * plane..(c + 1) * plane] {
                    s[c] += p as u64;
                    s2[c] += (p as u64) * (p as u64);
                }
            }
        }
        let n = (records.len() * plane) as f64;
        let mut mean = [0.0; 3];
        let mut std = [0.0; 3];
        for c in 0..3 {
            mean[c] = s[c] as f64 / n;
            // var = (n s2 - s^2) / n^2 evaluated in integers
            let num =
                (records.len() * plane) as u128 * s2[c] as u128 - (s[c] as u128) * (s[c] as u128);
            std[c] = (num as f64).sqrt() / n;
            if !(std[c] > 0.0) {
                std[c] = 1.0;
            }
        }
        Ok(ChannelStats { mean, std })
    }

    pub fn normalize(&self, pixels: &[u8]) -> Vec<f64> {
        let plane = SIDE * SIDE;
        pixels
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let c = i / plane;
                (p as f64 - self.mean[c]) / self.std[c]
            })
            .collect()
    }
}

/// Standardized `[3, 32, 32]` inputs with class targets.
pub fn to_dataset(records: &[Record], stats: &ChannelStats) -> Dataset {
    Dataset {
        shape: vec![3, SIDE, SIDE],
        inputs: records.iter().map(|r| stats.normalize(&r.pixels)).collect(),
        targets: records
            .iter()
            .map(|r| Target::Class(r.label as usize))
            .collect(),
    }
}

/// Uniform random byte images, a stand-in out-of-distribution set.
pub fn noise_records(n: usize, seed: u64) -> Vec<Record> {
    let mut rng = stream(seed, Stream::Noise);
    (0..n)
        .map(|_| Record {
            label: 0,
            pixels: (0..PIXELS).map(|_| rng.gen()).collect(),
        })
        .collect()
}
