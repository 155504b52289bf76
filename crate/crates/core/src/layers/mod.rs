//! Layer-level message passing.
//!
//! A network is a sequence of layers between boundaries `0..=L`. Boundary 0
//! holds the observed input, boundary `L` the head's input. Every boundary
//! variable has two neighbours: the layer to its left sends the forward
//! message `up[i]`, the layer (or head) to its right sends `down[i]`.

mod affine;
mod network;
mod weights;

pub use affine::{Conv, Linear};
pub use network::{ExampleState, Head, Incidents, Layer, Network, Predictive, Target};
pub use weights::WeightStore;

use crate::error::{Error, Result};

/// One line of a model description.
#[derive(Clone, Debug, PartialEq)]
pub enum LayerSpec {
    /// Observed input with the given shape, `[d]` or `[c, h, w]`.
    Input(Vec<usize>),
    Linear {
        out: usize,
        bias: bool,
    },
    Conv {
        out_channels: usize,
        kernel: usize,
        padding: usize,
    },
    LeakyRelu(f64),
    MaxPool(usize),
    Flatten,
    /// Gaussian likelihood with noise variance `beta2`.
    Regression(f64),
    Argmax {
        regularized: bool,
        gamma: f64,
    },
    Softmax,
}

impl LayerSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            LayerSpec::Input(_) => "Input",
            LayerSpec::Linear { .. } => "Linear",
            LayerSpec::Conv { .. } => "Conv",
            LayerSpec::LeakyRelu(_) => "LeakyReLU",
            LayerSpec::MaxPool(_) => "MaxPool",
            LayerSpec::Flatten => "Flatten",
            LayerSpec::Regression(_) => "Regression",
            LayerSpec::Argmax { .. } => "Argmax",
            LayerSpec::Softmax => "Softmax",
        }
    }

    pub fn is_head(&self) -> bool {
        matches!(
            self,
            LayerSpec::Regression(_) | LayerSpec::Argmax { .. } | LayerSpec::Softmax
        )
    }
}

/// Number of scalars in a shape.
pub fn numel(shape: &[usize]) -> usize {
    shape.iter().product()
}

/// Shapes after every entry of `specs`.
///
/// `specs[0]` must be `Input` and the last entry a head; heads keep their
/// input shape. Errors name the offending layer index.
pub fn shape_infer(specs: &[LayerSpec]) -> Result<Vec<Vec<usize>>> {
    let err = |index: usize, reason: String| Error::LayerSpec {
        index,
        kind: specs[index].kind().to_string(),
        reason,
    };
    let mut shapes = Vec::with_capacity(specs.len());
    let mut cur = match specs.first() {
        Some(LayerSpec::Input(s)) if !s.is_empty() && s.iter().all(|&d| d > 0) => s.clone(),
        Some(LayerSpec::Input(s)) => return Err(err(0, format!("invalid input shape {s:?}"))),
        Some(_) => return Err(err(0, "the first layer must be Input".into())),
        None => return Err(Error::Shape("empty model".into())),
    };
    if cur.len() != 1 && cur.len() != 3 {
        return Err(err(
            0,
            format!("input must be [d] or [c, h, w], got {cur:?}"),
        ));
    }
    shapes.push(cur.clone());
    // whether the current boundary still holds the observed input
    let mut observed = true;
    for (i, spec) in specs.iter().enumerate().skip(1) {
        if spec.is_head() != (i + 1 == specs.len()) {
            return Err(err(
                i,
                if spec.is_head() {
                    "a head must be the last layer".into()
                } else {
                    "the model must end with a head".into()
                },
            ));
        }
        cur = match *spec {
            LayerSpec::Input(_) => return Err(err(i, "Input may only appear first".into())),
            LayerSpec::Linear { out, .. } => {
                if cur.len() != 1 {
                    return Err(err(i, format!("expects a flat input, got {cur:?}")));
                }
                if out == 0 {
                    return Err(err(i, "zero output width".into()));
                }
                vec![out]
            }
            LayerSpec::Conv {
                out_channels,
                kernel,
                padding,
            } => {
                let [_, h, w] = cur[..] else {
                    return Err(err(i, format!("expects [c, h, w], got {cur:?}")));
                };
                if out_channels == 0 || kernel == 0 {
                    return Err(err(i, "zero channels or kernel".into()));
                }
                if h + 2 * padding < kernel || w + 2 * padding < kernel {
                    return Err(err(
                        i,
                        format!("kernel {kernel} exceeds padded input {cur:?}"),
                    ));
                }
                vec![
                    out_channels,
                    h + 2 * padding - kernel + 1,
                    w + 2 * padding - kernel + 1,
                ]
            }
            LayerSpec::LeakyRelu(alpha) => {
                if !(alpha >= 0.0 && alpha.is_finite()) {
                    return Err(err(i, format!("leak must be finite and >= 0, got {alpha}")));
                }
                if observed {
                    return Err(err(i, "cannot act on the observed input".into()));
                }
                cur
            }
            LayerSpec::MaxPool(s) => {
                let [c, h, w] = cur[..] else {
                    return Err(err(i, format!("expects [c, h, w], got {cur:?}")));
                };
                if s == 0 || h < s || w < s {
                    return Err(err(i, format!("stride {s} does not fit {cur:?}")));
                }
                if observed {
                    return Err(err(i, "cannot act on the observed input".into()));
                }
                vec![c, h / s, w / s]
            }
            LayerSpec::Flatten => vec![numel(&cur)],
            LayerSpec::Regression(beta2) => {
                if !(beta2 > 0.0 && beta2.is_finite()) {
                    return Err(err(i, format!("noise variance must be > 0, got {beta2}")));
                }
                if cur != [1] {
                    return Err(err(i, format!("expects a single output, got {cur:?}")));
                }
                cur
            }
            LayerSpec::Argmax { gamma, .. } => {
                if !(gamma > 0.0 && gamma.is_finite()) {
                    return Err(err(i, format!("gamma must be > 0, got {gamma}")));
                }
                if cur.len() != 1 || cur[0] < 2 {
                    return Err(err(i, format!("expects at least two logits, got {cur:?}")));
                }
                cur
            }
            LayerSpec::Softmax => {
                if cur.len() != 1 || cur[0] < 2 {
                    return Err(err(i, format!("expects at least two logits, got {cur:?}")));
                }
                cur
            }
        };
        if spec.is_head() && observed {
            return Err(err(
                i,
                "the head needs at least one parametric layer".into(),
            ));
        }
        observed &= matches!(spec, LayerSpec::Flatten);
        shapes.push(cur.clone());
    }
    if specs.len() < 2 {
        return Err(err(0, "the model must end with a head".into()));
    }
    Ok(shapes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn conv(c: usize, k: usize, p: usize) -> LayerSpec {
        LayerSpec::Conv {
            out_channels: c,
            kernel: k,
            padding: p,
        }
    }

    #[test]
    fn cifar_architecture_shapes() {
        let specs = vec![
            LayerSpec::Input(vec![3, 32, 32]),
            conv(32, 3, 0),
            LayerSpec::LeakyRelu(0.1),
            conv(32, 3, 0),
            LayerSpec::LeakyRelu(0.1),
            LayerSpec::MaxPool(2),
            conv(64, 3, 0),
            LayerSpec::LeakyRelu(0.1),
            conv(64, 3, 0),
            LayerSpec::LeakyRelu(0.1),
            LayerSpec::MaxPool(2),
            LayerSpec::Flatten,
            LayerSpec::Linear {
                out: 512,
                bias: true,
            },
            LayerSpec::LeakyRelu(0.1),
            LayerSpec::Linear {
                out: 10,
                bias: true,
            },
            LayerSpec::Argmax {
                regularized: true,
                gamma: 1.0,
            },
        ];
        let s = shape_infer(&specs).unwrap();
        assert_eq!(s[1], vec![32, 30, 30]);
        assert_eq!(s[5], vec![32, 14, 14]);
        assert_eq!(s[6], vec![64, 12, 12]);
        assert_eq!(s[10], vec![64, 5, 5]);
        assert_eq!(s[11], vec![1600]);
        assert_eq!(s.last().unwrap(), &vec![10]);
    }

    #[test]
    fn errors_name_the_layer() {
        let specs = vec![
            LayerSpec::Input(vec![3, 4, 4]),
            LayerSpec::Linear { out: 2, bias: true },
            LayerSpec::Softmax,
        ];
        match shape_infer(&specs) {
            Err(Error::LayerSpec { index, kind, .. }) => {
                assert_eq!(index, 1);
                assert_eq!(kind, "Linear");
            }
            other => panic!("{other:?}"),
        }
        let specs = vec![
            LayerSpec::Input(vec![3]),
            LayerSpec::Linear { out: 2, bias: true },
            LayerSpec::Regression(0.1),
        ];
        assert!(matches!(
            shape_infer(&specs),
            Err(Error::LayerSpec { index: 2, .. })
        ));
        let specs = vec![
            LayerSpec::Input(vec![3]),
            LayerSpec::Linear { out: 1, bias: true },
        ];
        assert!(matches!(
            shape_infer(&specs),
            Err(Error::LayerSpec { index: 1, .. })
        ));
        let specs = vec![
            LayerSpec::Input(vec![3]),
            LayerSpec::LeakyRelu(0.1),
            LayerSpec::Linear { out: 1, bias: true },
            LayerSpec::Regression(0.1),
        ];
        assert!(matches!(
            shape_infer(&specs),
            Err(Error::LayerSpec { index: 1, .. })
        ));
    }

    #[test]
    fn padding_grows_output() {
        let specs = vec![
            LayerSpec::Input(vec![1, 5, 5]),
            conv(2, 3, 1),
            LayerSpec::Flatten,
            LayerSpec::Linear { out: 2, bias: true },
            LayerSpec::Softmax,
        ];
        assert_eq!(shape_infer(&specs).unwrap()[1], vec![2, 5, 5]);
    }
}
