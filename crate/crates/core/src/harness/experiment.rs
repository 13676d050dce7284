use std::sync::Arc;

use rayon::prelude::*;

use crate::autodiff::Tensor;
use crate::data::{load_dataset, split_edges, EdgeSplit, GraphDataset, RngState, TEST_FRACTION, VAL_FRACTION};
use crate::metrics::{evaluate_split, RunReport};
use crate::models::GraphInputs;
use crate::train::train_run;
use crate::tsne::{emit_scatter, tsne_project, ScatterFormat, TsneConfig};

use super::{ExperimentConfig, HarnessError, ResultsStore};

/// RNG stream for the bootstrap, derived from the base run seed.
const BOOTSTRAP_STREAM: u64 = 4;

struct RunResult {
    auc: f64,
    ap: f64,
    embedding: Option<Tensor>,
}

/// Loads the dataset named in `cfg` and runs the experiment on it.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport, HarnessError> {
    let dataset = load_dataset(cfg.dataset, &cfg.data_dir)?;
    log::info!(
        "{}: {} nodes, {} edges, {} features",
        cfg.dataset,
        dataset.num_nodes,
        dataset.num_edges(),
        dataset.feature_dim()
    );
    run_experiment_on(cfg, &dataset)
}

/// Runs `cfg.runs` independent trainings on `dataset` and aggregates
/// their test metrics. Everything is written below `cfg.output_dir`.
pub fn run_experiment_on(cfg: &ExperimentConfig, dataset: &GraphDataset) -> Result<RunReport, HarnessError> {
    let store = ResultsStore::create(cfg)?;
    store.write_config(cfg)?;
    let model_cfg = cfg.model_config(dataset.feature_dim());
    let train_cfg = cfg.train_config();

    let shared = if cfg.resplit_per_run {
        None
    } else {
        let split = split_edges(dataset, VAL_FRACTION, TEST_FRACTION, cfg.split_seed)?;
        store.write_split(&split, None)?;
        let inputs = GraphInputs::new(dataset, &split.train_pos);
        Some(Arc::new((split, inputs)))
    };

    let run_one = |run: usize| -> Result<RunResult, HarnessError> {
        let own;
        let (split, inputs): (&EdgeSplit, &GraphInputs) = match &shared {
            Some(s) => (&s.0, &s.1),
            None => {
                let split = split_edges(dataset, VAL_FRACTION, TEST_FRACTION, cfg.split_seed + run as u64)?;
                store.write_split(&split, Some(run))?;
                let inputs = GraphInputs::new(dataset, &split.train_pos);
                own = (split, inputs);
                (&own.0, &own.1)
            }
        };
        let seed = cfg.base_run_seed + run as u64;
        let outcome = train_run(dataset, split, inputs, &model_cfg, &train_cfg, seed)?;
        store.write_trace(run, &outcome.trace)?;
        let (auc, ap) = evaluate_split(&outcome.embedding, &split.test_pos, &split.test_neg)?;
        log::info!("{} {} run {run}: test auc {auc:.4} ap {ap:.4}", cfg.model, cfg.dataset);
        Ok(RunResult {
            auc,
            ap,
            embedding: (run == 0).then_some(outcome.embedding),
        })
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| HarnessError::Usage {
            key: "jobs".into(),
            message: e.to_string(),
        })?;
    let results: Vec<Result<RunResult, HarnessError>> =
        pool.install(|| (0..cfg.runs).into_par_iter().map(run_one).collect());

    let mut auc = Vec::with_capacity(cfg.runs);
    let mut ap = Vec::with_capacity(cfg.runs);
    let mut first_embedding = None;
    for (index, result) in results.into_iter().enumerate() {
        let r = result.map_err(|e| HarnessError::Run {
            index,
            source: Box::new(e),
        })?;
        auc.push(r.auc);
        ap.push(r.ap);
        if r.embedding.is_some() {
            first_embedding = r.embedding;
        }
    }

    let mut rng = RngState::derive(cfg.base_run_seed, BOOTSTRAP_STREAM);
    let report = RunReport::from_runs(
        cfg.dataset.id(),
        cfg.model.id(),
        cfg.base_run_seed,
        auc,
        ap,
        cfg.bootstrap_resamples,
        &mut rng,
    );

    if let Some(z) = first_embedding {
        store.write_embedding(&z, &dataset.labels)?;
        if cfg.emit_tsne {
            let tsne = TsneConfig {
                seed: cfg.base_run_seed,
                ..TsneConfig::default()
            };
            let projection = tsne_project(&z, &dataset.labels, &tsne)?;
            emit_scatter(&projection, store.root().join("tsne.svg"), ScatterFormat::Svg)?;
            emit_scatter(&projection, store.root().join("tsne.csv"), ScatterFormat::Csv)?;
        }
    }
    store.write_report(cfg, &report)?;
    log::info!(
        "{} {}: auc {:.4} ± {:.4}, ap {:.4} ± {:.4} over {} runs",
        cfg.model,
        cfg.dataset,
        report.mean_auc,
        report.auc_ci_halfwidth,
        report.mean_ap,
        report.ap_ci_halfwidth,
        report.runs
    );
    Ok(report)
}
