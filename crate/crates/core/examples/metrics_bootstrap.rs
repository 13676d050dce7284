//! Ranking metrics on noisy scores and bootstrap intervals over repeated
//! runs.

use linkbench::data::RngState;
use linkbench::metrics::{average_precision, bootstrap_ci, roc_auc, RunReport};
use rand::Rng;
use rand_distr::{Distribution, Normal};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = RngState::new(11);
    let labels: Vec<bool> = (0..400).map(|i| i < 200).collect();

    println!("separation   auc     ap");
    for separation in [0.0, 0.5, 1.0, 2.0, 4.0] {
        let pos = Normal::new(separation, 1.0)?;
        let neg = Normal::new(0.0, 1.0)?;
        let scores: Vec<f64> =
            labels.iter().map(|&l| if l { pos.sample(&mut rng) } else { neg.sample(&mut rng) }).collect();
        println!(
            "{separation:>10.1}  {:.4}  {:.4}",
            roc_auc(&scores, &labels)?,
            average_precision(&scores, &labels)?
        );
    }

    let runs: Vec<f64> = (0..50).map(|_| 0.92 + rng.random_range(-0.02..0.02)).collect();
    for n in [5, 10, 50] {
        let (lo, hi) = bootstrap_ci(&runs[..n], 0.95, 1000, &mut rng);
        println!("{n:>2} runs: 95% interval [{lo:.4}, {hi:.4}], half-width {:.4}", (hi - lo) / 2.0);
    }

    let aps: Vec<f64> = runs.iter().map(|a| a + 0.01).collect();
    let report = RunReport::from_runs("cora", "gcn", 0, runs, aps, 1000, &mut rng);
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
