use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::data::DatasetName;
use crate::metrics::RunReport;
use crate::models::ModelKind;

use super::HarnessError;

pub const RESULT_COLUMNS: [&str; 8] =
    ["model", "dataset", "mean_auc", "auc_ci_halfwidth", "mean_ap", "ap_ci_halfwidth", "runs", "seed"];

/// Rendered results: a long table with one row per report, and
/// model x dataset grids for AUC and AP.
#[derive(Clone, Debug, PartialEq)]
pub struct Tables {
    pub results_csv: String,
    pub results_text: String,
    pub auc_csv: String,
    pub auc_text: String,
    pub ap_csv: String,
    pub ap_text: String,
}

/// `mean ± half-width` to four decimals.
pub fn format_cell(mean: f64, halfwidth: f64) -> String {
    format!("{mean:.4} ± {halfwidth:.4}")
}

fn model_label(id: &str) -> String {
    id.parse::<ModelKind>().map(|k| k.display_name().to_string()).unwrap_or_else(|_| id.to_string())
}

fn dataset_label(id: &str) -> String {
    id.parse::<DatasetName>().map(|d| d.display_name().to_string()).unwrap_or_else(|_| id.to_string())
}

/// Known names in benchmark order, then anything else alphabetically.
fn ordered(ids: impl Iterator<Item = String>, rank: impl Fn(&str) -> Option<usize>) -> Vec<String> {
    let mut ids: Vec<String> = ids.collect();
    ids.sort_by_key(|id| (rank(id).unwrap_or(usize::MAX), id.clone()));
    ids.dedup();
    ids
}

fn aligned(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (i, row) in rows.iter().enumerate() {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, s)| format!("{s:<w$}", w = widths[c]))
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
        if i == 0 {
            let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
            let _ = writeln!(out, "{}", rule.join("  "));
        }
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv(rows: &[Vec<String>]) -> String {
    rows.iter()
        .map(|r| r.iter().map(|s| csv_field(s)).collect::<Vec<_>>().join(",") + "\n")
        .collect()
}

/// Builds all tables. A (model, dataset) pair reported twice is an error;
/// a pair never reported renders as `-`.
pub fn render_tables(reports: &[RunReport]) -> Result<Tables, HarnessError> {
    let mut cells: BTreeMap<(String, String), &RunReport> = BTreeMap::new();
    for r in reports {
        if cells.insert((r.model.clone(), r.dataset.clone()), r).is_some() {
            return Err(HarnessError::Aggregation(format!(
                "two reports for model {} on dataset {}",
                r.model, r.dataset
            )));
        }
    }
    let models = ordered(reports.iter().map(|r| r.model.clone()), |id| {
        id.parse::<ModelKind>().ok().map(|k| k as usize)
    });
    let datasets = ordered(reports.iter().map(|r| r.dataset.clone()), |id| {
        id.parse::<DatasetName>().ok().map(|d| d as usize)
    });

    let mut long = vec![RESULT_COLUMNS.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
    for m in &models {
        for d in &datasets {
            if let Some(r) = cells.get(&(m.clone(), d.clone())) {
                long.push(vec![
                    r.model.clone(),
                    r.dataset.clone(),
                    format!("{:.4}", r.mean_auc),
                    format!("{:.4}", r.auc_ci_halfwidth),
                    format!("{:.4}", r.mean_ap),
                    format!("{:.4}", r.ap_ci_halfwidth),
                    r.runs.to_string(),
                    r.seed.to_string(),
                ]);
            }
        }
    }

    let grid = |pick: fn(&RunReport) -> (f64, f64)| -> Vec<Vec<String>> {
        let mut rows = vec![std::iter::once("Model".to_string()).chain(datasets.iter().map(|d| dataset_label(d))).collect()];
        for m in &models {
            let mut row = vec![model_label(m)];
            for d in &datasets {
                row.push(match cells.get(&(m.clone(), d.clone())) {
                    Some(r) => {
                        let (mean, half) = pick(r);
                        format_cell(mean, half)
                    }
                    None => {
                        log::warn!("no result for model {m} on dataset {d}");
                        "-".to_string()
                    }
                });
            }
            rows.push(row);
        }
        rows
    };
    let auc = grid(|r| (r.mean_auc, r.auc_ci_halfwidth));
    let ap = grid(|r| (r.mean_ap, r.ap_ci_halfwidth));
    Ok(Tables {
        results_csv: csv(&long),
        results_text: aligned(&long),
        auc_csv: csv(&auc),
        auc_text: aligned(&auc),
        ap_csv: csv(&ap),
        ap_text: aligned(&ap),
    })
}

impl Tables {
    /// Writes `results`, `auc_table` and `ap_table` as `.csv` and `.txt`.
    pub fn write_to(&self, dir: &Path) -> Result<(), HarnessError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| HarnessError::Io { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        for (name, text) in [
            ("results.csv", &self.results_csv),
            ("results.txt", &self.results_text),
            ("auc_table.csv", &self.auc_csv),
            ("auc_table.txt", &self.auc_text),
            ("ap_table.csv", &self.ap_csv),
            ("ap_table.txt", &self.ap_text),
        ] {
            let path = dir.join(name);
            std::fs::write(&path, text).map_err(io(&path))?;
        }
        Ok(())
    }
}
