use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::DatasetName;
use crate::models::{GatActivation, ModelConfig, ModelKind};
use crate::train::TrainConfig;

use super::HarnessError;

/// Environment variable consulted when no data directory is given.
pub const DATA_ENV: &str = "LINKBENCH_DATA";

/// One (dataset, model) experiment. Build with [`parse_config`].
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: DatasetName,
    pub model: ModelKind,
    pub runs: usize,
    pub epochs: usize,
    pub lr: f64,
    pub split_seed: u64,
    pub base_run_seed: u64,
    pub output_dir: PathBuf,
    pub data_dir: PathBuf,
    pub bootstrap_resamples: usize,
    pub emit_tsne: bool,
    pub jobs: usize,
    /// Draw a fresh split for every run (seed `split_seed + run`).
    pub resplit_per_run: bool,
    pub gat_activation: GatActivation,
}

/// Settings that determine results; stored next to every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub dataset: String,
    pub model: String,
    pub runs: usize,
    pub epochs: usize,
    pub lr: f64,
    pub split_seed: u64,
    pub base_run_seed: u64,
    pub bootstrap_resamples: usize,
    pub resplit_per_run: bool,
    pub gat_activation: String,
}

pub const KEYS: [&str; 14] = [
    "dataset",
    "model",
    "runs",
    "epochs",
    "lr",
    "split_seed",
    "base_run_seed",
    "output_dir",
    "data_dir",
    "bootstrap_resamples",
    "emit_tsne",
    "jobs",
    "resplit_per_run",
    "gat_activation",
];

/// Values collected before dataset and model are known.
#[derive(Default)]
struct Partial {
    dataset: Option<DatasetName>,
    model: Option<ModelKind>,
    runs: Option<usize>,
    epochs: Option<usize>,
    lr: Option<f64>,
    split_seed: Option<u64>,
    base_run_seed: Option<u64>,
    output_dir: Option<PathBuf>,
    data_dir: Option<PathBuf>,
    bootstrap_resamples: Option<usize>,
    emit_tsne: Option<bool>,
    jobs: Option<usize>,
    resplit_per_run: Option<bool>,
    gat_activation: Option<GatActivation>,
}

fn usage(key: &str, message: impl Into<String>) -> HarnessError {
    HarnessError::Usage {
        key: key.to_string(),
        message: message.into(),
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, HarnessError>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse().map_err(|e| usage(key, format!("invalid value '{value}': {e}")))
}

fn positive(key: &str, value: &str) -> Result<usize, HarnessError> {
    let n: usize = parse(key, value)?;
    if n == 0 {
        return Err(usage(key, "must be at least 1"));
    }
    Ok(n)
}

fn boolean(key: &str, value: &str) -> Result<bool, HarnessError> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(usage(key, format!("expected true or false, got '{value}'"))),
    }
}

impl Partial {
    fn set(&mut self, key: &str, value: &str) -> Result<(), HarnessError> {
        match key {
            "dataset" => self.dataset = Some(parse(key, value)?),
            "model" => self.model = Some(parse(key, value)?),
            "runs" => self.runs = Some(positive(key, value)?),
            "epochs" => self.epochs = Some(positive(key, value)?),
            "lr" => {
                let lr: f64 = parse(key, value)?;
                if !(lr > 0.0 && lr.is_finite()) {
                    return Err(usage(key, format!("must be positive, got {value}")));
                }
                self.lr = Some(lr);
            }
            "split_seed" => self.split_seed = Some(parse(key, value)?),
            "base_run_seed" => self.base_run_seed = Some(parse(key, value)?),
            "output_dir" => self.output_dir = Some(PathBuf::from(value.trim())),
            "data_dir" => self.data_dir = Some(PathBuf::from(value.trim())),
            "bootstrap_resamples" => self.bootstrap_resamples = Some(positive(key, value)?),
            "emit_tsne" => self.emit_tsne = Some(boolean(key, value)?),
            "jobs" => self.jobs = Some(positive(key, value)?),
            "resplit_per_run" => self.resplit_per_run = Some(boolean(key, value)?),
            "gat_activation" => self.gat_activation = Some(parse(key, value)?),
            _ => return Err(usage(key, format!("unknown key (expected one of {})", KEYS.join(", ")))),
        }
        Ok(())
    }
}

/// `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, HarnessError> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(usage(line, format!("line {}: expected key = value", no + 1)));
        };
        out.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(out)
}

/// Resolves defaults, then `file` entries, then `flags` (later wins).
///
/// The learning rate defaults to 0.001 for GAT on Wiki-CS and 0.01
/// otherwise. `data_dir` falls back to `$LINKBENCH_DATA`, then `data`.
pub fn parse_config(flags: &[(String, String)], file: Option<&Path>) -> Result<ExperimentConfig, HarnessError> {
    let mut partial = Partial::default();
    if let Some(path) = file {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        for (k, v) in parse_config_text(&text)? {
            partial.set(&k, &v)?;
        }
    }
    for (k, v) in flags {
        partial.set(k, v)?;
    }
    let dataset = partial.dataset.ok_or_else(|| usage("dataset", "required"))?;
    let model = partial.model.ok_or_else(|| usage("model", "required"))?;
    let train = TrainConfig::new(model, dataset);
    let data_dir = partial
        .data_dir
        .or_else(|| std::env::var_os(DATA_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("data"));
    Ok(ExperimentConfig {
        dataset,
        model,
        runs: partial.runs.unwrap_or(train.runs),
        epochs: partial.epochs.unwrap_or(train.epochs),
        lr: partial.lr.unwrap_or(train.lr),
        split_seed: partial.split_seed.unwrap_or(0),
        base_run_seed: partial.base_run_seed.unwrap_or(0),
        output_dir: partial.output_dir.unwrap_or_else(|| PathBuf::from("results")),
        data_dir,
        bootstrap_resamples: partial.bootstrap_resamples.unwrap_or(1000),
        emit_tsne: partial.emit_tsne.unwrap_or(false),
        jobs: partial.jobs.unwrap_or(1),
        resplit_per_run: partial.resplit_per_run.unwrap_or(false),
        gat_activation: partial.gat_activation.unwrap_or(GatActivation::Relu),
    })
}

impl ExperimentConfig {
    pub fn model_config(&self, feature_dim: usize) -> ModelConfig {
        let mut cfg = ModelConfig::new(self.model, feature_dim);
        cfg.gat_activation = self.gat_activation;
        cfg
    }

    pub fn train_config(&self) -> TrainConfig {
        let mut cfg = TrainConfig::new(self.model, self.dataset);
        cfg.epochs = self.epochs;
        cfg.lr = self.lr;
        cfg.runs = self.runs;
        cfg.seed = self.base_run_seed;
        cfg
    }

    pub fn report_config(&self) -> ReportConfig {
        ReportConfig {
            dataset: self.dataset.id().into(),
            model: self.model.id().into(),
            runs: self.runs,
            epochs: self.epochs,
            lr: self.lr,
            split_seed: self.split_seed,
            base_run_seed: self.base_run_seed,
            bootstrap_resamples: self.bootstrap_resamples,
            resplit_per_run: self.resplit_per_run,
            gat_activation: self.gat_activation.to_string(),
        }
    }

    /// Every key in config-file syntax; parses back to `self`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "dataset = {}", self.dataset);
        let _ = writeln!(s, "model = {}", self.model);
        let _ = writeln!(s, "runs = {}", self.runs);
        let _ = writeln!(s, "epochs = {}", self.epochs);
        let _ = writeln!(s, "lr = {}", self.lr);
        let _ = writeln!(s, "split_seed = {}", self.split_seed);
        let _ = writeln!(s, "base_run_seed = {}", self.base_run_seed);
        let _ = writeln!(s, "output_dir = {}", self.output_dir.display());
        let _ = writeln!(s, "data_dir = {}", self.data_dir.display());
        let _ = writeln!(s, "bootstrap_resamples = {}", self.bootstrap_resamples);
        let _ = writeln!(s, "emit_tsne = {}", self.emit_tsne);
        let _ = writeln!(s, "jobs = {}", self.jobs);
        let _ = writeln!(s, "resplit_per_run = {}", self.resplit_per_run);
        let _ = writeln!(s, "gat_activation = {}", self.gat_activation);
        s
    }
}
