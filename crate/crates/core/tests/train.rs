mod common;

use common::{gradient_check, random_tensor, rng};
use linkbench::autodiff::{Tape, Tensor};
use linkbench::data::synthetic::{stochastic_block_model, SbmConfig};
use linkbench::data::{split_edges, DatasetName, RngState, TEST_FRACTION, VAL_FRACTION};
use linkbench::models::{GraphInputs, ModelConfig, ModelKind, ModelParams};
use linkbench::train::{
    adam_step, bce_link_loss, elbo_loss, kl_to_standard_normal, sage_unsup_loss, train_run, AdamState, LossKind,
    TrainConfig, TrainError,
};
use rand::Rng;
use rand_distr::StandardNormal;

fn scalar(v: linkbench::autodiff::Var<'_>) -> f64 {
    v.value().item().unwrap()
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[test]
fn bce_at_zero_logits_is_ln2() {
    let tape = Tape::new();
    let z = tape.constant(Tensor::zeros(&[5]));
    let loss = scalar(bce_link_loss(z, z).unwrap());
    assert!((loss - 2f64.ln()).abs() < 1e-15);
}

#[test]
fn bce_saturated_correct_is_tiny() {
    let tape = Tape::new();
    let pos = tape.constant(Tensor::full(&[4], 30.0));
    let neg = tape.constant(Tensor::full(&[4], -30.0));
    let loss = scalar(bce_link_loss(pos, neg).unwrap());
    assert!((0.0..1e-9).contains(&loss));
}

#[test]
fn bce_matches_probability_form() {
    let mut r = rng(1);
    for _ in 0..50 {
        let p = r.random_range(1..20);
        let pos: Vec<f64> = (0..p).map(|_| r.random_range(-5.0..5.0)).collect();
        let neg: Vec<f64> = (0..p).map(|_| r.random_range(-5.0..5.0)).collect();
        let clamp = |x: f64| x.clamp(1e-15, 1.0 - 1e-15);
        let oracle = (pos.iter().map(|&s| -clamp(sigmoid(s)).ln()).sum::<f64>()
            + neg.iter().map(|&s| -(1.0 - clamp(sigmoid(s))).ln()).sum::<f64>())
            / (2 * p) as f64;
        let tape = Tape::new();
        let loss = scalar(
            bce_link_loss(tape.constant(Tensor::vector(pos)), tape.constant(Tensor::vector(neg))).unwrap(),
        );
        assert!(loss >= 0.0);
        assert!((loss - oracle).abs() < 1e-9, "{loss} vs {oracle}");
    }
}

#[test]
fn bce_rejects_empty_and_unequal() {
    let tape = Tape::new();
    let empty = tape.constant(Tensor::vector(vec![]));
    assert!(bce_link_loss(empty, empty).is_err());
    let a = tape.constant(Tensor::zeros(&[2]));
    let b = tape.constant(Tensor::zeros(&[3]));
    assert!(bce_link_loss(a, b).is_err());
}

#[test]
fn kl_examples() {
    let tape = Tape::new();
    let zero = tape.constant(Tensor::zeros(&[3, 2]));
    assert_eq!(scalar(kl_to_standard_normal(zero, zero).unwrap()), 0.0);
    let one = tape.constant(Tensor::matrix(1, 1, vec![1.0]));
    let ls = tape.constant(Tensor::matrix(1, 1, vec![0.0]));
    assert!((scalar(kl_to_standard_normal(one, ls).unwrap()) - 0.5).abs() < 1e-15);
}

#[test]
fn kl_matches_monte_carlo_estimate() {
    let (mu, ls) = (0.8, -0.4);
    let sigma = f64::exp(ls);
    let mut r = RngState::new(2);
    let samples = 100_000;
    // log q(z) - log p(z) at z ~ q
    let terms: Vec<f64> = (0..samples)
        .map(|_| {
            let eps: f64 = r.sample(StandardNormal);
            let z = mu + sigma * eps;
            -ls - 0.5 * eps * eps + 0.5 * z * z
        })
        .collect();
    let mean = terms.iter().sum::<f64>() / samples as f64;
    let var = terms.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (samples - 1) as f64;
    let stderr = (var / samples as f64).sqrt();

    let tape = Tape::new();
    let kl = scalar(
        kl_to_standard_normal(
            tape.constant(Tensor::matrix(1, 1, vec![mu])),
            tape.constant(Tensor::matrix(1, 1, vec![ls])),
        )
        .unwrap(),
    );
    assert!((kl - mean).abs() < 3.0 * stderr, "{kl} vs {mean} ± {stderr}");
}

#[test]
fn kl_is_non_negative_on_random_inputs() {
    let mut r = rng(3);
    for _ in 0..50 {
        let tape = Tape::new();
        let mu = tape.constant(random_tensor(&mut r, &[4, 3]));
        let ls = tape.constant(random_tensor(&mut r, &[4, 3]));
        assert!(scalar(kl_to_standard_normal(mu, ls).unwrap()) >= -1e-12);
    }
}

#[test]
fn elbo_reduces_to_bce_at_prior() {
    let mut r = rng(4);
    let tape = Tape::new();
    let pos = tape.constant(random_tensor(&mut r, &[6]));
    let neg = tape.constant(random_tensor(&mut r, &[6]));
    let zero = tape.constant(Tensor::zeros(&[5, 2]));
    let bce = scalar(bce_link_loss(pos, neg).unwrap());
    assert_eq!(scalar(elbo_loss(pos, neg, zero, zero, 0.2).unwrap()), bce);
}

#[test]
fn zero_kl_weight_gives_bce_gradients() {
    let mut r = rng(5);
    let inputs = [
        random_tensor(&mut r, &[6]),
        random_tensor(&mut r, &[6]),
        random_tensor(&mut r, &[3, 2]),
        random_tensor(&mut r, &[3, 2]),
    ];
    let grads = |weight: Option<f64>| {
        let tape = Tape::new();
        let v: Vec<_> = inputs.iter().map(|t| tape.param(t.clone())).collect();
        let loss = match weight {
            Some(w) => elbo_loss(v[0], v[1], v[2], v[3], w).unwrap(),
            None => bce_link_loss(v[0], v[1]).unwrap(),
        };
        tape.backward(loss).unwrap();
        (tape.grad(v[0]).unwrap(), tape.grad(v[1]).unwrap())
    };
    assert_eq!(grads(Some(0.0)), grads(None));
}

#[test]
fn elbo_gradient_on_six_nodes() {
    let mut r = rng(6);
    let inputs = [
        random_tensor(&mut r, &[5]),
        random_tensor(&mut r, &[5]),
        random_tensor(&mut r, &[6, 3]),
        random_tensor(&mut r, &[6, 3]),
    ];
    let err = gradient_check(&inputs, |_, v| elbo_loss(v[0], v[1], v[2], v[3], 1.0 / 6.0).unwrap());
    assert!(err < 1e-4, "{err}");
}

#[test]
fn sage_loss_is_twice_bce_for_one_negative() {
    let mut r = rng(7);
    for _ in 0..20 {
        let tape = Tape::new();
        let pos = tape.constant(random_tensor(&mut r, &[9]));
        let neg = tape.constant(random_tensor(&mut r, &[9]));
        let sage = scalar(sage_unsup_loss(pos, neg, 1).unwrap());
        let bce = scalar(bce_link_loss(pos, neg).unwrap());
        assert!((sage - 2.0 * bce).abs() < 1e-12);
    }
}

#[test]
fn sage_loss_analytic_case() {
    // z_u = z_v = (1, 2), negative pair orthogonal
    let norm_sq: f64 = 5.0;
    let tape = Tape::new();
    let pos = tape.constant(Tensor::vector(vec![norm_sq]));
    let neg = tape.constant(Tensor::vector(vec![0.0]));
    let want = -sigmoid(norm_sq).ln() - sigmoid(0.0).ln();
    assert!((scalar(sage_unsup_loss(pos, neg, 1).unwrap()) - want).abs() < 1e-14);
}

#[test]
fn sage_loss_groups_and_gradient() {
    let tape = Tape::new();
    let pos = tape.constant(Tensor::zeros(&[3]));
    let neg = tape.constant(Tensor::zeros(&[5]));
    assert!(sage_unsup_loss(pos, neg, 2).is_err());

    let mut r = rng(8);
    let inputs = [random_tensor(&mut r, &[4]), random_tensor(&mut r, &[12])];
    let err = gradient_check(&inputs, |_, v| sage_unsup_loss(v[0], v[1], 3).unwrap());
    assert!(err < 1e-4, "{err}");
}

fn scalar_params(theta: f64) -> ModelParams {
    ModelParams::from_entries(vec![("theta".into(), Tensor::vector(vec![theta]))])
}

#[test]
fn adam_matches_scalar_oracle_on_quadratic() {
    let (lr, b1, b2, eps) = (0.1, 0.9, 0.999, 1e-8);
    let mut params = scalar_params(1.5);
    let mut state = AdamState::new(&params, lr);

    let (mut theta, mut m, mut v) = (1.5f64, 0.0f64, 0.0f64);
    for t in 1..=5 {
        let g = 2.0 * theta;
        m = b1 * m + (1.0 - b1) * g;
        v = b2 * v + (1.0 - b2) * g * g;
        let m_hat = m / (1.0 - b1.powi(t));
        let v_hat = v / (1.0 - b2.powi(t));
        theta -= lr * m_hat / (v_hat.sqrt() + eps);

        let current = params.get("theta").unwrap().values()[0];
        adam_step(&mut params, &[Some(Tensor::vector(vec![2.0 * current]))], &mut state).unwrap();
        let got = params.get("theta").unwrap().values()[0];
        assert!((got - theta).abs() < 1e-12, "step {t}: {got} vs {theta}");
    }
    assert_eq!(state.t, 5);
}

#[test]
fn adam_first_step_moves_by_lr_times_sign() {
    let start = Tensor::vector(vec![0.3, -0.2, 1.0]);
    let mut params = ModelParams::from_entries(vec![("w".into(), start.clone())]);
    let mut state = AdamState::new(&params, 0.01);
    let g = Tensor::vector(vec![2.5, -0.7, 1e-3]);
    adam_step(&mut params, &[Some(g.clone())], &mut state).unwrap();
    for i in 0..3 {
        let delta = params.get("w").unwrap().values()[i] - start.values()[i];
        let expected = -0.01 * g.values()[i].signum();
        assert!((delta - expected).abs() < 1e-6, "{delta}");
    }
}

#[test]
fn adam_zero_gradient_and_zero_lr() {
    let mut params = scalar_params(0.7);
    let mut state = AdamState::new(&params, 0.01);
    adam_step(&mut params, &[Some(Tensor::vector(vec![0.0]))], &mut state).unwrap();
    assert_eq!(params, scalar_params(0.7));
    assert_eq!(state.t, 1);

    let mut state = AdamState::new(&params, 0.0);
    for _ in 0..3 {
        adam_step(&mut params, &[Some(Tensor::vector(vec![3.0]))], &mut state).unwrap();
    }
    assert_eq!(params, scalar_params(0.7));
    assert!(state.v.iter().flatten().all(|&v| v >= 0.0));
}

#[test]
fn adam_missing_gradient_is_a_contract_error() {
    let mut params = scalar_params(0.7);
    let mut state = AdamState::new(&params, 0.01);
    assert!(matches!(adam_step(&mut params, &[None], &mut state), Err(TrainError::Contract(_))));
}

fn small_setup(kind: ModelKind) -> (linkbench::data::GraphDataset, linkbench::data::EdgeSplit, GraphInputs, ModelConfig) {
    let ds = stochastic_block_model(&SbmConfig::small(), 9).unwrap();
    let split = split_edges(&ds, VAL_FRACTION, TEST_FRACTION, 0).unwrap();
    let inputs = GraphInputs::new(&ds, &split.train_pos);
    let cfg = ModelConfig::new(kind, ds.feature_dim());
    (ds, split, inputs, cfg)
}

#[test]
fn train_config_defaults() {
    let cfg = TrainConfig::new(ModelKind::Gcn, DatasetName::Cora);
    assert_eq!((cfg.epochs, cfg.lr, cfg.runs, cfg.loss), (200, 0.01, 50, LossKind::Bce));
    assert_eq!(TrainConfig::new(ModelKind::Gat, DatasetName::WikiCs).lr, 0.001);
    assert_eq!(TrainConfig::new(ModelKind::Gat, DatasetName::PubMed).lr, 0.01);
    assert_eq!(TrainConfig::new(ModelKind::Vgae, DatasetName::Cora).loss, LossKind::Elbo);
}

#[test]
fn zero_epochs_returns_initial_params() {
    let (ds, split, inputs, cfg) = small_setup(ModelKind::Gcn);
    let mut train = TrainConfig::new(ModelKind::Gcn, DatasetName::Cora);
    train.epochs = 0;
    let out = train_run(&ds, &split, &inputs, &cfg, &train, 3).unwrap();
    assert!(out.trace.is_empty());
    let init = ModelParams::init(&cfg, &mut RngState::derive(3, 1)).unwrap();
    assert_eq!(out.params, init);
}

#[test]
fn same_run_seed_gives_identical_embedding() {
    for kind in ModelKind::ALL {
        let (ds, split, inputs, cfg) = small_setup(kind);
        let mut train = TrainConfig::new(kind, DatasetName::Cora);
        train.epochs = 5;
        let a = train_run(&ds, &split, &inputs, &cfg, &train, 11).unwrap();
        let b = train_run(&ds, &split, &inputs, &cfg, &train, 11).unwrap();
        assert_eq!(a.embedding, b.embedding, "{kind}");
        assert_eq!(a.trace, b.trace);
        let c = train_run(&ds, &split, &inputs, &cfg, &train, 12).unwrap();
        assert_ne!(a.embedding, c.embedding);
    }
}

#[test]
fn training_loss_decreases_and_stays_finite() {
    for kind in ModelKind::ALL {
        let (ds, split, inputs, cfg) = small_setup(kind);
        let mut train = TrainConfig::new(kind, DatasetName::Cora);
        train.epochs = 60;
        let out = train_run(&ds, &split, &inputs, &cfg, &train, 1).unwrap();
        assert_eq!(out.trace.len(), 60);
        assert!(out.trace.iter().all(|r| r.train_loss.is_finite() && r.val_auc.is_finite()));
        let first = out.trace[0].train_loss;
        let last = out.trace[59].train_loss;
        assert!(last < first, "{kind}: {first} -> {last}");
    }
}

#[test]
fn sage_unsupervised_loss_trains() {
    let (ds, split, inputs, cfg) = small_setup(ModelKind::Sage);
    let mut train = TrainConfig::new(ModelKind::Sage, DatasetName::Cora);
    train.epochs = 10;
    train.loss = LossKind::SageUnsup;
    train.sage_negatives = 3;
    let out = train_run(&ds, &split, &inputs, &cfg, &train, 2).unwrap();
    assert!(out.trace.iter().all(|r| r.train_loss.is_finite()));
}

#[test]
fn elbo_without_vgae_is_a_config_error() {
    let (ds, split, inputs, cfg) = small_setup(ModelKind::Gcn);
    let mut train = TrainConfig::new(ModelKind::Gcn, DatasetName::Cora);
    train.epochs = 1;
    train.loss = LossKind::Elbo;
    assert!(matches!(train_run(&ds, &split, &inputs, &cfg, &train, 0), Err(TrainError::Config(_))));
}

#[test]
fn trace_csv_layout() {
    let (ds, split, inputs, cfg) = small_setup(ModelKind::Vgae);
    let mut train = TrainConfig::new(ModelKind::Vgae, DatasetName::Cora);
    train.epochs = 3;
    let out = train_run(&ds, &split, &inputs, &cfg, &train, 0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    linkbench::train::write_trace_csv(&path, &out.trace).unwrap();
    let text = std::fs::read_to_string(path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "epoch,train_loss,val_auc");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("1,"));
}
