//! Loads a Planetoid dataset and writes its link-prediction split.
//!
//! With `LINKBENCH_DATA` pointing at a directory that holds the `ind.cora.*`
//! files the real graph is used; otherwise a citation-shaped stand-in is
//! written in the same format and read back.
//!
//! ```text
//! cargo run --release --example planetoid_split -- [out_dir]
//! ```

use std::path::PathBuf;

use linkbench::data::synthetic::{stochastic_block_model, SbmConfig};
use linkbench::data::{load_dataset, split_edges, write_planetoid, DatasetName, TEST_FRACTION, VAL_FRACTION};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "target/planetoid_split".into()));
    std::fs::create_dir_all(&out)?;

    let dataset = match std::env::var_os("LINKBENCH_DATA") {
        Some(root) => load_dataset(DatasetName::Cora, root)?,
        None => {
            let dir = out.join("cora");
            let stand_in = stochastic_block_model(&SbmConfig::citation_like(2708), 7)?;
            write_planetoid(&stand_in, &dir, "cora")?;
            println!("no LINKBENCH_DATA; wrote a synthetic stand-in to {}", dir.display());
            load_dataset(DatasetName::Cora, &out)?
        }
    };
    println!(
        "{}: {} nodes, {} undirected edges, {} features, {} classes, mean degree {:.2}",
        dataset.name,
        dataset.num_nodes,
        dataset.num_edges(),
        dataset.feature_dim(),
        dataset.num_classes,
        dataset.mean_degree()
    );

    let split = split_edges(&dataset, VAL_FRACTION, TEST_FRACTION, 0)?;
    split.validate(&dataset)?;
    println!(
        "train {} / val {}+{} / test {}+{}",
        split.train_pos.len(),
        split.val_pos.len(),
        split.val_neg.len(),
        split.test_pos.len(),
        split.test_neg.len()
    );
    let path = out.join("split.txt");
    split.write_to(&path)?;
    println!("split written to {}", path.display());
    Ok(())
}
