//! Datasets: synthetic sine curves, CIFAR-10 binary files and CSV tables.

pub mod cifar;
pub mod sine;
pub mod table;

use crate::error::{Error, Result};
use crate::layers::{numel, Target};
use crate::rng::sample_indices;

/// Inputs with one target each.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    /// Shape of one input.
    pub shape: Vec<usize>,
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Target>,
}

impl Dataset {
    /// Checks lengths and that every feature is finite.
    pub fn new(shape: Vec<usize>, inputs: Vec<Vec<f64>>, targets: Vec<Target>) -> Result<Self> {
        if inputs.len() != targets.len() {
            return Err(Error::Shape(format!(
                "{} inputs but {} targets",
                inputs.len(),
                targets.len()
            )));
        }
        let d = numel(&shape);
        for (i, x) in inputs.iter().enumerate() {
            if x.len() != d {
                return Err(Error::Shape(format!(
                    "example {i} has {} values, expected {d} for shape {shape:?}",
                    x.len()
                )));
            }
            if let Some(v) = x.iter().find(|v| !v.is_finite()) {
                return Err(Error::Shape(format!(
                    "example {i} has non-finite feature {v}"
                )));
            }
        }
        Ok(Dataset {
            shape,
            inputs,
            targets,
        })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// The examples at `idx`, in that order.
    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            shape: self.shape.clone(),
            inputs: idx.iter().map(|&i| self.inputs[i].clone()).collect(),
            targets: idx.iter().map(|&i| self.targets[i]).collect(),
        }
    }

    /// The first `n` examples.
    pub fn take(&self, n: usize) -> Dataset {
        let idx: Vec<usize> = (0..n.min(self.len())).collect();
        self.subset(&idx)
    }

    /// A seeded random selection of `n` examples, kept in dataset order.
    pub fn sample(&self, n: usize, seed: u64) -> Dataset {
        self.subset(&sample_indices(self.len(), n, seed))
    }

    /// Class labels, or `None` if any target is not a class.
    pub fn labels(&self) -> Option<Vec<usize>> {
        self.targets
            .iter()
            .map(|t| match t {
                Target::Class(c) => Some(*c),
                _ => None,
            })
            .collect()
    }

    /// Regression targets, or `None` if any target is not a value.
    pub fn values(&self) -> Option<Vec<f64>> {
        self.targets
            .iter()
            .map(|t| match t {
                Target::Value(y) => Some(*y),
                _ => None,
            })
            .collect()
    }
}
