use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::SearchSpaceDescriptor;
use crate::spaces;

use super::{check_version, Origin, FORMAT_VERSION};

const FORMAT: &str = "naxbench-ensemble";
pub const FEATURIZER_ONE_HOT: &str = "onehot";

/// Affine layer; `w` is stored row-major as `[output][input]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub w: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

impl Layer {
    pub fn input_dim(&self) -> usize {
        self.w.first().map_or(0, Vec::len)
    }

    pub fn output_dim(&self) -> usize {
        self.b.len()
    }
}

/// Feed-forward regressor: rectifier between layers, linear scalar output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layers: Vec<Layer>,
}

impl MlpModel {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        let model = MlpModel { layers };
        model.validate(None)?;
        Ok(model)
    }

    pub fn input_dim(&self) -> usize {
        self.layers.first().map_or(0, Layer::input_dim)
    }

    /// Checks that layer shapes chain and end in a single output.
    pub fn validate(&self, input_dim: Option<usize>) -> Result<()> {
        let Some(first) = self.layers.first() else {
            return Err(Error::Schema("model has no layers".into()));
        };
        let mut expected = input_dim.unwrap_or_else(|| first.input_dim());
        for (i, layer) in self.layers.iter().enumerate() {
            if layer.w.len() != layer.b.len() || layer.b.is_empty() {
                return Err(Error::Schema(format!(
                    "layer {i}: {} weight rows but {} biases",
                    layer.w.len(),
                    layer.b.len()
                )));
            }
            if let Some(row) = layer.w.iter().position(|r| r.len() != expected) {
                return Err(Error::Schema(format!(
                    "layer {i}, row {row}: expected {expected} inputs, found {}",
                    layer.w[row].len()
                )));
            }
            if layer
                .w
                .iter()
                .flatten()
                .chain(&layer.b)
                .any(|v| !v.is_finite())
            {
                return Err(Error::Schema(format!(
                    "layer {i} has non-finite parameters"
                )));
            }
            expected = layer.output_dim();
        }
        if expected != 1 {
            return Err(Error::Schema(format!(
                "model must end in one output, ends in {expected}"
            )));
        }
        Ok(())
    }
}

/// Pool of regressors fitted on different cross-validation folds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurrogateEnsemble {
    pub format: String,
    pub version: u32,
    pub space: String,
    pub featurizer: String,
    pub input_dim: usize,
    #[serde(default)]
    pub origin: Origin,
    pub models: Vec<MlpModel>,
}

impl SurrogateEnsemble {
    pub fn new(space: &SearchSpaceDescriptor, models: Vec<MlpModel>) -> Result<Self> {
        let ensemble = SurrogateEnsemble {
            format: FORMAT.into(),
            version: FORMAT_VERSION,
            space: space.name.clone(),
            featurizer: FEATURIZER_ONE_HOT.into(),
            input_dim: one_hot_dim(space),
            origin: Origin::Synthetic,
            models,
        };
        ensemble.validate()?;
        Ok(ensemble)
    }

    pub fn pool_size(&self) -> usize {
        self.models.len()
    }

    fn validate(&self) -> Result<()> {
        check_version(&self.format, FORMAT, self.version)?;
        if self.featurizer != FEATURIZER_ONE_HOT {
            return Err(Error::Schema(format!(
                "unknown featurizer `{}`",
                self.featurizer
            )));
        }
        let space = spaces::by_name(&self.space)?;
        let expected = one_hot_dim(space.descriptor());
        if self.input_dim != expected {
            return Err(Error::Schema(format!(
                "input_dim {} does not match one-hot width {expected} of `{}`",
                self.input_dim, self.space
            )));
        }
        if self.models.is_empty() {
            return Err(Error::Schema("ensemble has no models".into()));
        }
        for (i, m) in self.models.iter().enumerate() {
            m.validate(Some(self.input_dim))
                .map_err(|e| Error::Schema(format!("model {i}: {e}")))?;
        }
        Ok(())
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer(&mut out, self)?;
        out.write_all(b"\n")?;
        out.flush()?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn read_from<R: Read>(input: R) -> Result<Self> {
        let ensemble: SurrogateEnsemble = serde_json::from_reader(BufReader::new(input))?;
        ensemble.validate()?;
        Ok(ensemble)
    }
}

pub fn load_ensemble(path: impl AsRef<Path>) -> Result<SurrogateEnsemble> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingData(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    SurrogateEnsemble::read_from(file)
}

fn one_hot_dim(space: &SearchSpaceDescriptor) -> usize {
    space.cardinalities.iter().map(|&c| c as usize).sum()
}

/// One-hot encoding per genotype position, concatenated in position order.
pub fn featurize(space: &SearchSpaceDescriptor, x: &[u32]) -> Vec<f64> {
    let mut out = vec![0.0; one_hot_dim(space)];
    let mut offset = 0;
    for (&v, &c) in x.iter().zip(&space.cardinalities) {
        out[offset + v as usize] = 1.0;
        offset += c as usize;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(input: usize) -> MlpModel {
        MlpModel::new(vec![
            Layer {
                w: vec![vec![0.5; input]; 3],
                b: vec![0.0; 3],
            },
            Layer {
                w: vec![vec![1.0 / 3.0, -0.25, 0.125]],
                b: vec![0.1],
            },
        ])
        .unwrap()
    }

    #[test]
    fn one_hot_layout() {
        let nats = spaces::by_name("nats").unwrap();
        let f = featurize(nats.descriptor(), &[0, 7, 1, 0, 3]);
        assert_eq!(f.len(), 40);
        let hot: Vec<usize> = f
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == 1.0)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(hot, vec![0, 15, 17, 24, 35]);
    }

    #[test]
    fn ten_models_round_trip() {
        let nats = spaces::by_name("nats").unwrap();
        let e = SurrogateEnsemble::new(nats.descriptor(), vec![tiny(40); 10]).unwrap();
        assert_eq!(e.pool_size(), 10);
        let mut buf = Vec::new();
        e.write_to(&mut buf).unwrap();
        let back = SurrogateEnsemble::read_from(buf.as_slice()).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn mismatched_layers_are_schema_errors() {
        let bad = MlpModel::new(vec![
            Layer {
                w: vec![vec![0.5; 4]; 3],
                b: vec![0.0; 3],
            },
            Layer {
                w: vec![vec![1.0, 1.0]],
                b: vec![0.0],
            },
        ]);
        assert!(matches!(bad, Err(Error::Schema(_))));

        let two_outputs = MlpModel::new(vec![Layer {
            w: vec![vec![1.0]; 2],
            b: vec![0.0; 2],
        }]);
        assert!(matches!(two_outputs, Err(Error::Schema(_))));

        let nats = spaces::by_name("nats").unwrap();
        let wrong_input = SurrogateEnsemble::new(nats.descriptor(), vec![tiny(39)]);
        assert!(matches!(wrong_input, Err(Error::Schema(_))));
    }
}
