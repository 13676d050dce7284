//! Trains all four encoders on one synthetic citation graph and scores the
//! held-out edges.
//!
//! ```text
//! cargo run --release --example link_prediction -- [nodes] [epochs]
//! ```

use std::time::Instant;

use linkbench::data::synthetic::{stochastic_block_model, SbmConfig};
use linkbench::data::{split_edges, DatasetName, TEST_FRACTION, VAL_FRACTION};
use linkbench::metrics::evaluate_split;
use linkbench::models::{GraphInputs, ModelConfig, ModelKind};
use linkbench::train::{train_run, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let nodes: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1000);
    let epochs: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(200);

    let dataset = stochastic_block_model(&SbmConfig::citation_like(nodes), 1)?;
    let split = split_edges(&dataset, VAL_FRACTION, TEST_FRACTION, 0)?;
    let inputs = GraphInputs::new(&dataset, &split.train_pos);
    println!("{} nodes, {} edges, {} test pairs", dataset.num_nodes, dataset.num_edges(), 2 * split.test_pos.len());

    for kind in ModelKind::ALL {
        let model = ModelConfig::new(kind, dataset.feature_dim());
        let mut train = TrainConfig::new(kind, DatasetName::Cora);
        train.epochs = epochs;
        let start = Instant::now();
        let outcome = train_run(&dataset, &split, &inputs, &model, &train, 0)?;
        let (auc, ap) = evaluate_split(&outcome.embedding, &split.test_pos, &split.test_neg)?;
        let last = outcome.trace.last().map(|r| r.train_loss).unwrap_or(f64::NAN);
        println!(
            "{:<10} auc {auc:.4}  ap {ap:.4}  final loss {last:.4}  {} weights  {:.1?}",
            kind.display_name(),
            outcome.params.num_weights(),
            start.elapsed()
        );
    }
    Ok(())
}
