use std::path::Path;

use rand::Rng;

use crate::autodiff::{Tape, Tensor, Var};

use super::checkpoint::{read_named_tensors, write_named_tensors};
use super::{ModelConfig, ModelError, ModelKind};

/// Named weight tensors of one model, in a fixed order.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    entries: Vec<(String, Tensor)>,
}

/// Glorot-uniform `rows x cols` matrix.
fn glorot<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Tensor {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    let data = (0..rows * cols).map(|_| rng.random_range(-limit..limit)).collect();
    Tensor::matrix(rows, cols, data)
}

/// Expected `(name, shape)` list for `cfg` with `feature_dim` inputs.
fn layout(cfg: &ModelConfig, feature_dim: usize) -> Vec<(String, [usize; 2])> {
    let d = &cfg.layer_dims;
    let f = feature_dim;
    match cfg.kind {
        ModelKind::Gcn => vec![
            ("layer0.weight".into(), [f, d[1]]),
            ("layer1.weight".into(), [d[1], d[2]]),
        ],
        ModelKind::Sage => vec![
            ("layer0.w_self".into(), [f, d[1]]),
            ("layer0.w_neigh".into(), [f, d[1]]),
            ("layer1.w_self".into(), [d[1], d[2]]),
            ("layer1.w_neigh".into(), [d[1], d[2]]),
        ],
        ModelKind::Gat => {
            let mut out = Vec::new();
            let inputs = [f, cfg.heads[0] * d[1]];
            for layer in 0..2 {
                let width = d[layer + 1];
                for h in 0..cfg.heads[layer] {
                    out.push((format!("layer{layer}.head{h}.weight"), [inputs[layer], width]));
                    out.push((format!("layer{layer}.head{h}.attention"), [2 * width, 1]));
                }
            }
            out
        }
        ModelKind::Vgae => vec![
            ("hidden.weight".into(), [f, d[1]]),
            ("mu.weight".into(), [d[1], d[2]]),
            ("logsigma.weight".into(), [d[1], d[2]]),
        ],
    }
}

impl ModelParams {
    /// Glorot-initialized parameters for `cfg`. The input width is taken
    /// from `cfg.layer_dims[0]`.
    pub fn init<R: Rng + ?Sized>(cfg: &ModelConfig, rng: &mut R) -> Result<Self, ModelError> {
        cfg.validate()?;
        let entries = layout(cfg, cfg.layer_dims[0])
            .into_iter()
            .map(|(name, [r, c])| (name, glorot(r, c, rng)))
            .collect();
        Ok(Self { entries })
    }

    pub fn from_entries(entries: Vec<(String, Tensor)>) -> Self {
        Self { entries }
    }

    pub fn entries(&self) -> &[(String, Tensor)] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [(String, Tensor)] {
        &mut self.entries
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total number of scalar weights.
    pub fn num_weights(&self) -> usize {
        self.entries.iter().map(|(_, t)| t.len()).sum()
    }

    /// Registers every tensor as a trainable leaf on `tape`.
    pub fn bind<'t>(&self, tape: &'t Tape) -> BoundParams<'t> {
        BoundParams {
            vars: self
                .entries
                .iter()
                .map(|(n, t)| (n.clone(), tape.param(t.clone())))
                .collect(),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        let path = path.as_ref();
        let entries: Vec<(&str, &Tensor)> = self.entries.iter().map(|(n, t)| (n.as_str(), t)).collect();
        let io = |e: std::io::Error| ModelError::Checkpoint {
            path: path.display().to_string(),
            message: e.to_string(),
        };
        let mut file = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        write_named_tensors(&mut file, &entries).map_err(io)?;
        std::io::Write::flush(&mut file).map_err(io)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let path = path.as_ref();
        let fail = |message: String| ModelError::Checkpoint {
            path: path.display().to_string(),
            message,
        };
        let file = std::fs::File::open(path).map_err(|e| fail(e.to_string()))?;
        let entries = read_named_tensors(&mut std::io::BufReader::new(file)).map_err(|e| fail(e.to_string()))?;
        Ok(Self { entries })
    }
}

/// Parameters registered on one tape.
#[derive(Clone, Debug)]
pub struct BoundParams<'t> {
    vars: Vec<(String, Var<'t>)>,
}

impl<'t> BoundParams<'t> {
    /// Wraps variables already on a tape, e.g. perturbed copies.
    pub fn from_vars(vars: Vec<(String, Var<'t>)>) -> Self {
        Self { vars }
    }

    pub fn get(&self, name: &str) -> Result<Var<'t>, ModelError> {
        self.vars
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
            .ok_or_else(|| ModelError::Contract(format!("missing parameter '{name}'")))
    }

    pub fn vars(&self) -> &[(String, Var<'t>)] {
        &self.vars
    }

    /// Checks names and shapes against `cfg` with `feature_dim` inputs.
    pub fn check(&self, cfg: &ModelConfig, feature_dim: usize) -> Result<(), ModelError> {
        let expected = layout(cfg, feature_dim);
        if expected.len() != self.vars.len() {
            return Err(ModelError::Contract(format!(
                "{} expects {} tensors, got {}",
                cfg.kind,
                expected.len(),
                self.vars.len()
            )));
        }
        for (name, shape) in expected {
            let shape_found = self.get(&name)?.shape();
            if shape_found != shape {
                return Err(ModelError::Contract(format!(
                    "'{name}' has shape {shape_found:?}, expected {shape:?}"
                )));
            }
        }
        Ok(())
    }
}
