//! Trains a VGAE, projects its node embeddings with t-SNE and writes a
//! scatter plot colored by class.
//!
//! ```text
//! cargo run --release --example vgae_tsne -- [out.svg]
//! ```

use std::path::PathBuf;

use linkbench::data::synthetic::{stochastic_block_model, SbmConfig};
use linkbench::data::{split_edges, DatasetName, TEST_FRACTION, VAL_FRACTION};
use linkbench::metrics::evaluate_split;
use linkbench::models::{GraphInputs, ModelConfig, ModelKind};
use linkbench::train::{train_run, TrainConfig};
use linkbench::tsne::{emit_scatter, knn_label_agreement, tsne_project, ScatterFormat, TsneConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "target/vgae_tsne.svg".into()));
    let dataset = stochastic_block_model(&SbmConfig::citation_like(700), 2)?;
    let split = split_edges(&dataset, VAL_FRACTION, TEST_FRACTION, 0)?;
    let inputs = GraphInputs::new(&dataset, &split.train_pos);
    let model = ModelConfig::new(ModelKind::Vgae, dataset.feature_dim());
    let train = TrainConfig::new(ModelKind::Vgae, DatasetName::Cora);
    let outcome = train_run(&dataset, &split, &inputs, &model, &train, 0)?;
    let (auc, ap) = evaluate_split(&outcome.embedding, &split.test_pos, &split.test_neg)?;
    println!("vgae: test auc {auc:.4} ap {ap:.4}");

    let projection = tsne_project(&outcome.embedding, &dataset.labels, &TsneConfig::default())?;
    for (iteration, kl) in &projection.kl_trace {
        if iteration % 250 == 0 {
            println!("iteration {iteration:>4}: KL {kl:.4}");
        }
    }
    let chance = 1.0 / dataset.num_classes as f64;
    println!(
        "10-NN label agreement: embedding {:.3}, projection {:.3}, chance {chance:.3}",
        knn_label_agreement(&outcome.embedding, &dataset.labels, 10),
        knn_label_agreement(&projection.coords, &projection.labels, 10)
    );
    let format = ScatterFormat::from_path(&out).unwrap_or(ScatterFormat::Svg);
    emit_scatter(&projection, &out, format)?;
    println!("wrote {}", out.display());
    Ok(())
}
