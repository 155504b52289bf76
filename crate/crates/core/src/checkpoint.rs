//! Versioned binary checkpoints.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic "FBNNCKPT" | u32 version
//! str model text | str config text | u64 examples | u64 epoch
//! per layer:  u64 n | n priors | n marginals          (tau, rho as f64)
//! u64 batches | per batch: u8 present [| per layer: u64 n | n messages]
//! ```
//!
//! Strings are a u64 byte length followed by UTF-8. Timings and incident
//! counters are deliberately absent so that identical runs produce identical
//! files.

use std::path::Path;

use crate::config::{parse_train_config, train_config_text};
use crate::error::{Error, Result};
use crate::gaussian::Gaussian;
use crate::layers::{LayerSpec, Network};
use crate::modelspec;
use crate::trainer::{TrainConfig, Trainer};

const MAGIC: &[u8; 8] = b"FBNNCKPT";
pub const VERSION: u32 = 1;

type LayerMessages = Vec<Vec<Gaussian>>;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub specs: Vec<LayerSpec>,
    pub config: TrainConfig,
    /// Size of the training set the batches were cut from.
    pub examples: usize,
    pub epoch: usize,
    /// Per layer, empty for layers without weights.
    pub priors: LayerMessages,
    pub marginals: LayerMessages,
    pub aggregates: Vec<Option<LayerMessages>>,
}

impl Checkpoint {
    /// Captures a trainer between batch visits.
    pub fn from_trainer(t: &Trainer) -> Self {
        let (priors, marginals) = t
            .net
            .layers
            .iter()
            .map(|l| {
                l.weights().map_or((Vec::new(), Vec::new()), |w| {
                    (w.prior.clone(), w.marginal.clone())
                })
            })
            .unzip();
        Checkpoint {
            specs: t.net.specs.clone(),
            config: t.config.clone(),
            examples: t.batches().iter().map(Vec::len).sum(),
            epoch: t.epoch(),
            priors,
            marginals,
            aggregates: t.aggregates().to_vec(),
        }
    }

    /// The network with stored priors and marginals, ready to predict.
    pub fn network(&self) -> Result<Network> {
        let mut net = Network::new(&self.specs)?;
        for (j, layer) in net.layers.iter_mut().enumerate() {
            let want = layer.weights().map_or(0, |w| w.len());
            if self.priors[j].len() != want || self.marginals[j].len() != want {
                return Err(Error::Checkpoint(format!(
                    "layer {j} stores {} weights, model has {want}",
                    self.priors[j].len()
                )));
            }
            if let Some(w) = layer.weights_mut() {
                w.prior.clone_from(&self.priors[j]);
                w.marginal.clone_from(&self.marginals[j]);
            }
        }
        Ok(net)
    }

    /// A trainer that continues from the stored epoch.
    pub fn trainer(&self) -> Result<Trainer> {
        Trainer::with_state(
            self.network()?,
            self.config.clone(),
            self.examples,
            self.aggregates.clone(),
            self.epoch,
        )
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Vec::new();
        w.extend_from_slice(MAGIC);
        w.extend_from_slice(&VERSION.to_le_bytes());
        put_str(&mut w, &modelspec::to_text(&self.specs));
        put_str(&mut w, &train_config_text(&self.config));
        put_u64(&mut w, self.examples as u64);
        put_u64(&mut w, self.epoch as u64);
        for (p, m) in self.priors.iter().zip(&self.marginals) {
            put_u64(&mut w, p.len() as u64);
            put_gaussians(&mut w, p);
            put_gaussians(&mut w, m);
        }
        put_u64(&mut w, self.aggregates.len() as u64);
        for agg in &self.aggregates {
            match agg {
                None => w.push(0),
                Some(layers) => {
                    w.push(1);
                    for l in layers {
                        put_u64(&mut w, l.len() as u64);
                        put_gaussians(&mut w, l);
                    }
                }
            }
        }
        w
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(Error::Checkpoint("not a checkpoint (bad magic)".into()));
        }
        let version = u32::from_le_bytes(r.take(4)?.try_into().unwrap());
        if version != VERSION {
            return Err(Error::Checkpoint(format!(
                "version {version}, expected {VERSION}"
            )));
        }
        let specs = modelspec::parse(&r.string()?, "<checkpoint model>")?;
        let config = parse_train_config(&r.string()?, "<checkpoint config>")?;
        let examples = r.u64()? as usize;
        let epoch = r.u64()? as usize;
        let n_layers = specs.len() - 2;
        let mut priors = Vec::with_capacity(n_layers);
        let mut marginals = Vec::with_capacity(n_layers);
        for _ in 0..n_layers {
            let n = r.u64()? as usize;
            priors.push(r.gaussians(n)?);
            marginals.push(r.gaussians(n)?);
        }
        let n_batches = r.u64()? as usize;
        let mut aggregates: Vec<Option<LayerMessages>> = Vec::new();
        for _ in 0..n_batches {
            aggregates.push(match r.take(1)?[0] {
                0 => None,
                1 => Some(
                    (0..n_layers)
                        .map(|_| {
                            let n = r.u64()? as usize;
                            r.gaussians(n)
                        })
                        .collect::<Result<_>>()?,
                ),
                b => return Err(Error::Checkpoint(format!("bad aggregate tag {b}"))),
            });
        }
        if r.pos != bytes.len() {
            return Err(Error::Checkpoint(format!(
                "{} trailing bytes",
                bytes.len() - r.pos
            )));
        }
        for agg in aggregates.iter().flatten() {
            if agg.iter().zip(&priors).any(|(a, p)| a.len() != p.len()) {
                return Err(Error::Checkpoint(
                    "aggregate length disagrees with the model".into(),
                ));
            }
        }
        let ck = Checkpoint {
            specs,
            config,
            examples,
            epoch,
            priors,
            marginals,
            aggregates,
        };
        ck.network()?;
        Ok(ck)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

fn put_u64(w: &mut Vec<u8>, v: u64) {
    w.extend_from_slice(&v.to_le_bytes());
}

fn put_str(w: &mut Vec<u8>, s: &str) {
    put_u64(w, s.len() as u64);
    w.extend_from_slice(s.as_bytes());
}

fn put_gaussians(w: &mut Vec<u8>, gs: &[Gaussian]) {
    for g in gs {
        w.extend_from_slice(&g.tau.to_le_bytes());
        w.extend_from_slice(&g.rho.to_le_bytes());
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Checkpoint(format!("truncated at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String> {
        let n = self.u64()? as usize;
        String::from_utf8(self.take(n)?.to_vec())
            .map_err(|_| Error::Checkpoint("invalid UTF-8 in text section".into()))
    }

    fn gaussians(&mut self, n: usize) -> Result<Vec<Gaussian>> {
        if n > (self.bytes.len() - self.pos) / 16 {
            return Err(Error::Checkpoint(format!("truncated at byte {}", self.pos)));
        }
        (0..n)
            .map(|_| Ok(Gaussian::new(self.f64()?, self.f64()?)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::sine;

    fn trained(epochs: usize) -> (Trainer, crate::data::Dataset) {
        let specs = modelspec::parse(
            "Input 1\nLinear 4\nLeakyReLU 0.1\nLinear 1\nRegression 0.01\n",
            "m",
        )
        .unwrap();
        let data = sine::synth(12, (0.0, 1.0), 0.1, 3).unwrap();
        let cfg = TrainConfig {
            batch_size: 5,
            epochs,
            iterations: Some(2),
            seed: 4,
            ..TrainConfig::default()
        };
        let mut t = Trainer::new(Network::new(&specs).unwrap(), cfg, data.len()).unwrap();
        t.train(&data).unwrap();
        (t, data)
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let (t, _) = trained(2);
        let ck = Checkpoint::from_trainer(&t);
        let bytes = ck.to_bytes();
        let back = Checkpoint::from_bytes(&bytes).unwrap();
        assert_eq!(back, ck);
        assert_eq!(back.to_bytes(), bytes);
        assert_eq!(back.aggregates.len(), 3);
    }

    #[test]
    fn reloaded_network_predicts_identically() {
        let (t, _) = trained(1);
        let ck = Checkpoint::from_trainer(&t);
        let net = ck.network().unwrap();
        for x in [-1.0, 0.3, 2.0] {
            assert_eq!(net.predict(&[x]).unwrap(), t.net.predict(&[x]).unwrap());
        }
        // a resumed trainer rebuilds exactly the stored marginals
        assert_eq!(Checkpoint::from_trainer(&ck.trainer().unwrap()), ck);
    }

    #[test]
    fn resuming_is_deterministic() {
        let (one, data) = trained(1);
        let mut ck = Checkpoint::from_trainer(&one);
        ck.config.epochs = 3;
        let run = || {
            let mut t = ck.trainer().unwrap();
            t.train(&data).unwrap();
            Checkpoint::from_trainer(&t).to_bytes()
        };
        let a = run();
        assert_eq!(a, run());
        assert_eq!(Checkpoint::from_bytes(&a).unwrap().epoch, 3);
    }

    #[test]
    fn epochs_zero_stores_the_priors() {
        let (t, _) = trained(0);
        let ck = Checkpoint::from_trainer(&t);
        assert_eq!(ck.priors, ck.marginals);
        assert!(ck.aggregates.iter().all(Option::is_none));
    }

    #[test]
    fn rejects_damaged_files() {
        let (t, _) = trained(1);
        let bytes = Checkpoint::from_trainer(&t).to_bytes();
        assert!(Checkpoint::from_bytes(&bytes[..bytes.len() - 3]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(Checkpoint::from_bytes(&bad).is_err());
        let mut bad = bytes.clone();
        bad[8] = 9;
        assert!(Checkpoint::from_bytes(&bad).is_err());
        let mut long = bytes;
        long.push(0);
        assert!(Checkpoint::from_bytes(&long).is_err());
    }

    #[test]
    fn file_round_trip() {
        let (t, _) = trained(1);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.ckpt");
        let ck = Checkpoint::from_trainer(&t);
        ck.save(&p).unwrap();
        assert_eq!(Checkpoint::load(&p).unwrap(), ck);
    }
}
