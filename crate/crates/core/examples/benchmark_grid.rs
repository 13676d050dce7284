//! Runs every model on a synthetic graph through the experiment harness and
//! renders the AUC and AP tables.
//!
//! ```text
//! cargo run --release --example benchmark_grid -- [out_dir] [runs] [epochs]
//! ```

use std::path::PathBuf;

use linkbench::data::synthetic::{stochastic_block_model, SbmConfig};
use linkbench::harness::{find_reports, parse_config, read_report, render_tables, run_experiment_on};
use linkbench::models::ModelKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "target/benchmark_grid".into()));
    let runs = args.next().unwrap_or_else(|| "5".into());
    let epochs = args.next().unwrap_or_else(|| "100".into());
    let dataset = stochastic_block_model(&SbmConfig::citation_like(800), 9)?;

    for model in ModelKind::ALL {
        let flags: Vec<(String, String)> = [
            ("dataset", "cora"),
            ("model", model.id()),
            ("runs", runs.as_str()),
            ("epochs", epochs.as_str()),
            ("jobs", "4"),
        ]
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .chain(std::iter::once(("output_dir".to_string(), out.display().to_string())))
        .collect();
        let cfg = parse_config(&flags, None)?;
        let report = run_experiment_on(&cfg, &dataset)?;
        println!("{:<10} auc {:.4} (sd {:.4})", model.display_name(), report.mean_auc, report.std_auc);
    }

    let reports = find_reports(&out)?
        .iter()
        .map(|p| read_report(p).map(|s| s.report))
        .collect::<Result<Vec<_>, _>>()?;
    let tables = render_tables(&reports)?;
    tables.write_to(&out.join("tables"))?;
    println!("\nAUC\n{}\nAP\n{}", tables.auc_text, tables.ap_text);
    Ok(())
}
