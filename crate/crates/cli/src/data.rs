//! Resolves `--data` and `--ood-data` arguments.
//!
//! A directory is read as extracted CIFAR-10 binaries, `noise:N` as `N`
//! uniform noise images (out-of-distribution only) and anything else as a
//! CSV table.

use std::path::Path;

use anyhow::{bail, Context, Result};
use factorbnn::data::cifar::{self, ChannelStats};
use factorbnn::data::{table, Dataset};
use factorbnn::rng::sample_indices;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

/// Loads `arg`, keeping a seeded random subset of `limit` examples if set.
pub fn load(arg: &str, split: Split, limit: Option<usize>, seed: u64) -> Result<Dataset> {
    if arg.starts_with("noise:") {
        bail!("`{arg}` is only valid for --ood-data");
    }
    let path = Path::new(arg);
    if path.is_dir() {
        let stats = train_stats(path)?;
        let records = match split {
            Split::Train => cifar::read_train(path)?,
            Split::Test => cifar::read_test(path)?,
        };
        let keep = sample_indices(records.len(), limit.unwrap_or(usize::MAX), seed);
        let picked: Vec<_> = keep.into_iter().map(|i| records[i].clone()).collect();
        return Ok(cifar::to_dataset(&picked, &stats));
    }
    let data = table::read(path).with_context(|| format!("reading {arg}"))?;
    Ok(match limit {
        Some(n) => data.sample(n, seed),
        None => data,
    })
}

/// Out-of-distribution inputs. `noise:N` images are standardized with the
/// in-distribution training statistics of `reference`.
pub fn load_ood(arg: &str, reference: &str, seed: u64) -> Result<Dataset> {
    if let Some(n) = arg.strip_prefix("noise:") {
        let n: usize = n
            .parse()
            .with_context(|| format!("bad noise count in `{arg}`"))?;
        let dir = Path::new(reference);
        if !dir.is_dir() {
            bail!("noise images need CIFAR-10 --data to borrow its normalization");
        }
        let stats = train_stats(dir)?;
        return Ok(cifar::to_dataset(&cifar::noise_records(n, seed), &stats));
    }
    load(arg, Split::Test, None, seed)
}

fn train_stats(dir: &Path) -> Result<ChannelStats> {
    let train = cifar::read_train(dir).with_context(|| format!("reading {}", dir.display()))?;
    Ok(ChannelStats::from_records(&train)?)
}

/// Fails unless the inputs have the shape the model expects.
pub fn check_shape(data: &Dataset, expected: &[usize]) -> Result<()> {
    if data.shape != expected {
        bail!(
            "data has input shape {:?} but the model expects {:?}",
            data.shape,
            expected
        );
    }
    Ok(())
}
