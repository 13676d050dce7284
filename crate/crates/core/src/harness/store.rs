use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::autodiff::Tensor;
use crate::data::EdgeSplit;
use crate::metrics::RunReport;
use crate::models::{read_named_tensors, write_named_tensors};
use crate::train::{write_trace_csv, EpochRecord};

use super::{ExperimentConfig, HarnessError, ReportConfig};

/// Contents of `report.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoredReport {
    pub config: ReportConfig,
    pub report: RunReport,
}

/// Output layout of one experiment:
///
/// ```text
/// <out>/<dataset>/<model>/
///     config.txt  report.json  split.txt
///     embedding.lbnt  labels.txt  tsne.svg  tsne.csv
///     runs/run-000/trace.csv  (and split.txt when re-splitting per run)
/// ```
#[derive(Clone, Debug)]
pub struct ResultsStore {
    root: PathBuf,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), HarnessError> {
    fs::write(path, contents).map_err(io_err(path))
}

impl ResultsStore {
    pub fn create(cfg: &ExperimentConfig) -> Result<Self, HarnessError> {
        let root = cfg.output_dir.join(cfg.dataset.id()).join(cfg.model.id());
        fs::create_dir_all(root.join("runs")).map_err(io_err(&root))?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn run_dir(&self, run: usize) -> Result<PathBuf, HarnessError> {
        let dir = self.root.join("runs").join(format!("run-{run:03}"));
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        Ok(dir)
    }

    pub fn write_config(&self, cfg: &ExperimentConfig) -> Result<(), HarnessError> {
        write(&self.root.join("config.txt"), cfg.to_text())
    }

    pub fn write_split(&self, split: &EdgeSplit, run: Option<usize>) -> Result<(), HarnessError> {
        let path = match run {
            Some(r) => self.run_dir(r)?.join("split.txt"),
            None => self.root.join("split.txt"),
        };
        split.write_to(&path).map_err(|e| HarnessError::Data(e))
    }

    pub fn write_trace(&self, run: usize, trace: &[EpochRecord]) -> Result<(), HarnessError> {
        let path = self.run_dir(run)?.join("trace.csv");
        write_trace_csv(&path, trace).map_err(io_err(&path))
    }

    pub fn embedding_path(&self) -> PathBuf {
        self.root.join("embedding.lbnt")
    }

    pub fn labels_path(&self) -> PathBuf {
        self.root.join("labels.txt")
    }

    pub fn write_embedding(&self, z: &Tensor, labels: &[usize]) -> Result<(), HarnessError> {
        write_embedding(&self.embedding_path(), z)?;
        write_labels(&self.labels_path(), labels)
    }

    pub fn report_path(&self) -> PathBuf {
        self.root.join("report.json")
    }

    pub fn write_report(&self, cfg: &ExperimentConfig, report: &RunReport) -> Result<(), HarnessError> {
        let stored = StoredReport {
            config: cfg.report_config(),
            report: report.clone(),
        };
        let json = serde_json::to_string_pretty(&stored).expect("report serializes");
        write(&self.report_path(), json + "\n")
    }
}

pub fn write_embedding(path: &Path, z: &Tensor) -> Result<(), HarnessError> {
    let mut buf = Vec::new();
    write_named_tensors(&mut buf, &[("embedding", z)]).map_err(io_err(path))?;
    write(path, buf)
}

/// The tensor named `embedding`, or the only tensor in the file.
pub fn read_embedding(path: &Path) -> Result<Tensor, HarnessError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    let mut entries = read_named_tensors(&mut bytes.as_slice()).map_err(io_err(path))?;
    let index = match entries.iter().position(|(n, _)| n == "embedding") {
        Some(i) => i,
        None if entries.len() == 1 => 0,
        None => {
            return Err(HarnessError::Io {
                path: path.to_path_buf(),
                source: std::io::Error::new(std::io::ErrorKind::InvalidData, "no tensor named 'embedding'"),
            })
        }
    };
    Ok(entries.swap_remove(index).1)
}

/// One class id per line.
pub fn write_labels(path: &Path, labels: &[usize]) -> Result<(), HarnessError> {
    let text: String = labels.iter().map(|l| format!("{l}\n")).collect();
    write(path, text)
}

pub fn read_labels(path: &Path) -> Result<Vec<usize>, HarnessError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(i, l)| {
            l.parse().map_err(|_| HarnessError::Io {
                path: path.to_path_buf(),
                source: std::io::Error::new(std::io::ErrorKind::InvalidData, format!("label {}: '{l}'", i + 1)),
            })
        })
        .collect()
}

pub fn read_report(path: &Path) -> Result<StoredReport, HarnessError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()),
    })
}

/// Every `report.json` below `dir`, in path order.
pub fn find_reports(dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let mut found = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).map_err(io_err(&d))? {
            let path = entry.map_err(io_err(&d))?.path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().is_some_and(|n| n == "report.json") {
                found.push(path);
            }
        }
    }
    found.sort();
    Ok(found)
}
