//! Model files: one JSON document holding the spec, every weight matrix
//! (row-major), biases and masks. Floats are written in shortest round-trip
//! form, so `load(save(net))` is bit-exact.

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::model::{EqlNetwork, Layer};
use super::spec::NetworkSpec;
use crate::error::{Error, Result};

pub const MODEL_FORMAT: &str = "tp-eqln-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    spec: NetworkSpec,
    layers: Vec<LayerFile>,
}

#[derive(Serialize, Deserialize)]
struct LayerFile {
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
    weight_mask: Vec<bool>,
    bias_mask: Vec<bool>,
}

impl EqlNetwork {
    pub fn to_json(&self) -> String {
        let file = ModelFile {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            spec: self.spec().clone(),
            layers: self
                .layers()
                .iter()
                .map(|l| LayerFile {
                    rows: l.rows(),
                    cols: l.cols(),
                    weights: l.weights.iter().copied().collect(),
                    bias: l.bias.to_vec(),
                    weight_mask: l.weight_mask.iter().copied().collect(),
                    bias_mask: l.bias_mask.to_vec(),
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.format != MODEL_FORMAT {
            return Err(Error::Parse {
                kind: "model",
                line: 1,
                msg: format!("unknown format tag {:?}", file.format),
            });
        }
        if file.version != MODEL_VERSION {
            return Err(Error::Version {
                kind: "model",
                found: file.version,
                expected: MODEL_VERSION,
            });
        }
        let layers = file
            .layers
            .into_iter()
            .map(|l| {
                let shape = (l.rows, l.cols);
                let bad = |what: &str| Error::Parse {
                    kind: "model",
                    line: 0,
                    msg: format!("{what} length does not match {shape:?}"),
                };
                Ok(Layer {
                    weights: Array2::from_shape_vec(shape, l.weights).map_err(|_| bad("weights"))?,
                    weight_mask: Array2::from_shape_vec(shape, l.weight_mask)
                        .map_err(|_| bad("weight_mask"))?,
                    bias: {
                        if l.bias.len() != l.rows {
                            return Err(bad("bias"));
                        }
                        Array1::from(l.bias)
                    },
                    bias_mask: {
                        if l.bias_mask.len() != l.rows {
                            return Err(bad("bias_mask"));
                        }
                        Array1::from(l.bias_mask)
                    },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let masked_nonzero = layers.iter().any(|l| {
            l.weights
                .iter()
                .zip(l.weight_mask.iter())
                .chain(l.bias.iter().zip(l.bias_mask.iter()))
                .any(|(&v, &m)| m && v != 0.0)
        });
        if masked_nonzero {
            return Err(Error::Parse {
                kind: "model",
                line: 0,
                msg: "masked parameter is nonzero".into(),
            });
        }
        EqlNetwork::from_layers(file.spec, layers)
    }
}

pub fn save_model(net: &EqlNetwork, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, net.to_json()).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<EqlNetwork> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    EqlNetwork::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::LayerSpec;

    #[test]
    fn round_trip_is_bit_exact() {
        let spec = NetworkSpec::new(3, vec![LayerSpec::uniform(1), LayerSpec::uniform(2)], 3).unwrap();
        let mut net = EqlNetwork::init(spec, 42).unwrap();
        net.layers_mut()[1].weights[[0, 0]] = -0.0;
        net.layers_mut()[2].bias[1] = 1e-300;
        net.prune_below(0.05);
        let back = EqlNetwork::from_json(&net.to_json()).unwrap();
        let bits = |n: &EqlNetwork| n.params().map(|(v, m)| (v.to_bits(), m)).collect::<Vec<_>>();
        assert_eq!(bits(&net), bits(&back));
        assert_eq!(net.to_json(), back.to_json());
    }

    #[test]
    fn rejects_bad_files() {
        let spec = NetworkSpec::new(2, vec![LayerSpec::uniform(1)], 1).unwrap();
        let net = EqlNetwork::init(spec, 1).unwrap();
        let text = net.to_json();
        assert!(EqlNetwork::from_json(&text[..text.len() / 2]).is_err());
        let wrong_version = text.replace("\"version\": 1", "\"version\": 9");
        assert!(matches!(
            EqlNetwork::from_json(&wrong_version),
            Err(Error::Version { found: 9, .. })
        ));
    }
}
