//! Command-line front end behind the `linkbench` binary.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::tsne::{emit_scatter, tsne_project, ScatterFormat, TsneConfig};

use super::{find_reports, parse_config, read_embedding, read_labels, read_report, render_tables, run_experiment};
use super::HarnessError;

#[derive(Debug, Parser)]
#[command(name = "linkbench", version, about = "Link-prediction benchmark for GCN, GraphSAGE, GAT and VGAE")]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one model on one dataset for several runs and report test metrics.
    Run(RunArgs),
    /// Collect report.json files into AUC and AP tables.
    Tables {
        #[arg(long = "in", value_name = "DIR")]
        input: PathBuf,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Project a stored embedding with t-SNE and plot it.
    Tsne {
        #[arg(long, value_name = "FILE")]
        embedding: PathBuf,
        #[arg(long, value_name = "FILE")]
        labels: PathBuf,
        /// Output file; `.svg` or `.csv`.
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        #[arg(long, default_value_t = 30.0)]
        perplexity: f64,
        #[arg(long, default_value_t = 1000)]
        iterations: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// File of `key = value` lines; flags override it.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub dataset: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub runs: Option<String>,
    #[arg(long)]
    pub epochs: Option<String>,
    #[arg(long)]
    pub lr: Option<String>,
    #[arg(long)]
    pub split_seed: Option<String>,
    #[arg(long)]
    pub run_seed: Option<String>,
    #[arg(long)]
    pub jobs: Option<String>,
    #[arg(long)]
    pub bootstrap_resamples: Option<String>,
    /// relu or elu between the GAT layers.
    #[arg(long)]
    pub gat_activation: Option<String>,
    #[arg(long)]
    pub emit_tsne: bool,
    #[arg(long)]
    pub resplit_per_run: bool,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Dataset root; defaults to $LINKBENCH_DATA, then ./data.
    #[arg(long, value_name = "DIR")]
    pub data: Option<PathBuf>,
}

impl RunArgs {
    fn overrides(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut push = |key: &str, v: &Option<String>| {
            if let Some(v) = v {
                out.push((key.to_string(), v.clone()));
            }
        };
        push("dataset", &self.dataset);
        push("model", &self.model);
        push("runs", &self.runs);
        push("epochs", &self.epochs);
        push("lr", &self.lr);
        push("split_seed", &self.split_seed);
        push("base_run_seed", &self.run_seed);
        push("jobs", &self.jobs);
        push("bootstrap_resamples", &self.bootstrap_resamples);
        push("gat_activation", &self.gat_activation);
        push("output_dir", &self.out.as_ref().map(|p| p.display().to_string()));
        push("data_dir", &self.data.as_ref().map(|p| p.display().to_string()));
        if self.emit_tsne {
            out.push(("emit_tsne".into(), "true".into()));
        }
        if self.resplit_per_run {
            out.push(("resplit_per_run".into(), "true".into()));
        }
        out
    }
}

pub fn execute(command: Command) -> Result<(), HarnessError> {
    match command {
        Command::Run(args) => {
            let cfg = parse_config(&args.overrides(), args.config.as_deref())?;
            let report = run_experiment(&cfg)?;
            println!(
                "{} {}: auc {} ap {} ({} runs) -> {}",
                cfg.model,
                cfg.dataset,
                super::format_cell(report.mean_auc, report.auc_ci_halfwidth),
                super::format_cell(report.mean_ap, report.ap_ci_halfwidth),
                report.runs,
                cfg.output_dir.display()
            );
        }
        Command::Tables { input, out } => {
            let paths = find_reports(&input)?;
            if paths.is_empty() {
                return Err(HarnessError::Aggregation(format!("no report.json under {}", input.display())));
            }
            let reports = paths
                .iter()
                .map(|p| read_report(p).map(|s| s.report))
                .collect::<Result<Vec<_>, _>>()?;
            let tables = render_tables(&reports)?;
            tables.write_to(&out)?;
            print!("AUC\n{}\nAP\n{}", tables.auc_text, tables.ap_text);
        }
        Command::Tsne {
            embedding,
            labels,
            out,
            perplexity,
            iterations,
            seed,
        } => {
            let format = ScatterFormat::from_path(&out).ok_or_else(|| HarnessError::Usage {
                key: "out".into(),
                message: format!("{} must end in .svg or .csv", out.display()),
            })?;
            let z = read_embedding(&embedding)?;
            let labels = read_labels(&labels)?;
            let cfg = TsneConfig {
                perplexity,
                iterations,
                seed,
                ..TsneConfig::default()
            };
            let projection = tsne_project(&z, &labels, &cfg)?;
            emit_scatter(&projection, &out, format)?;
        }
    }
    Ok(())
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
