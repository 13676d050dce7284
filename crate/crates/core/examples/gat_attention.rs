//! Trains a GAT on a planted-partition graph and inspects the learned
//! first-layer attention.

use std::sync::Arc;

use linkbench::autodiff::Tape;
use linkbench::data::synthetic::{stochastic_block_model, SbmConfig};
use linkbench::data::{split_edges, DatasetName, RngState, TEST_FRACTION, VAL_FRACTION};
use linkbench::metrics::evaluate_split;
use linkbench::models::{gat_layer, GatHead, GraphInputs, LayerInput, ModelConfig, ModelKind};
use linkbench::train::{train_run, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dataset = stochastic_block_model(&SbmConfig::citation_like(600), 5)?;
    let split = split_edges(&dataset, VAL_FRACTION, TEST_FRACTION, 0)?;
    let inputs = GraphInputs::new(&dataset, &split.train_pos);
    let model = ModelConfig::new(ModelKind::Gat, dataset.feature_dim());
    let mut train = TrainConfig::new(ModelKind::Gat, DatasetName::Cora);
    train.epochs = 100;
    let outcome = train_run(&dataset, &split, &inputs, &model, &train, 3)?;
    let (auc, ap) = evaluate_split(&outcome.embedding, &split.test_pos, &split.test_neg)?;
    println!("gat after {} epochs: test auc {auc:.4} ap {ap:.4}", train.epochs);

    let tape = Tape::new();
    let bound = outcome.params.bind(&tape);
    let heads: Vec<GatHead> = (0..model.heads[0])
        .map(|h| GatHead {
            weight: bound.get(&format!("layer0.head{h}.weight")).unwrap(),
            attention: bound.get(&format!("layer0.head{h}.attention")).unwrap(),
        })
        .collect();
    let x = LayerInput::Sparse(Arc::clone(&inputs.features));
    let edges = &inputs.attention;
    let layer = gat_layer(edges, &x, &heads, 0.0, false, model.leaky_slope, &mut RngState::new(0))?;

    let labels = &dataset.labels;
    let mut worst_sum: f64 = 0.0;
    let (mut same_mass, mut uniform_mass) = (0.0, 0.0);
    for alpha in &layer.attention {
        let alpha = alpha.value();
        for i in 0..dataset.num_nodes {
            let range = edges.offsets[i]..edges.offsets[i + 1];
            let seg = &alpha.values()[range.clone()];
            worst_sum = worst_sum.max((seg.iter().sum::<f64>() - 1.0).abs());
            let same: Vec<bool> = range.map(|e| labels[edges.sources[e]] == labels[i]).collect();
            same_mass += seg.iter().zip(&same).filter(|(_, s)| **s).map(|(a, _)| a).sum::<f64>();
            uniform_mass += same.iter().filter(|s| **s).count() as f64 / same.len() as f64;
        }
    }
    let total = (layer.attention.len() * dataset.num_nodes) as f64;
    println!("largest |sum(alpha) - 1| over all nodes and heads: {worst_sum:.2e}");
    println!(
        "attention on same-class neighbors: {:.3} learned vs {:.3} uniform",
        same_mass / total,
        uniform_mass / total
    );

    let node = (0..dataset.num_nodes).max_by_key(|&i| edges.offsets[i + 1] - edges.offsets[i]).unwrap();
    let alpha = layer.attention[0].value();
    println!("head 0, node {node} (class {}):", labels[node]);
    for e in edges.offsets[node]..edges.offsets[node + 1] {
        let j = edges.sources[e];
        println!("  from {j:>4} class {}  alpha {:.4}", labels[j], alpha.values()[e]);
    }
    Ok(())
}
