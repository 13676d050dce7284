mod common;

use std::sync::Arc;

use common::{dense_matmul, gradient_check, random_tensor, rng};
use linkbench::autodiff::{AutodiffError, SparseMatrix, Tape, Tensor, UnaryOp};
use proptest::prelude::*;
use rand::Rng;

const GRAD_TOL: f64 = 1e-4;

fn random_sparse(rng: &mut impl Rng, rows: usize, cols: usize, density: f64) -> SparseMatrix {
    let mut triplets = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if rng.random::<f64>() < density {
                triplets.push((r, c, rng.random_range(-1.0..1.0)));
            }
        }
    }
    SparseMatrix::from_triplets(rows, cols, &triplets).unwrap()
}

#[test]
fn matmul_identity_and_hand_case() {
    let tape = Tape::new();
    let m = Tensor::from_rows(&[vec![1.5, -2.0], vec![0.25, 4.0]]);
    let i = tape.constant(Tensor::eye(2));
    let out = i.matmul(tape.constant(m.clone())).unwrap();
    assert_eq!(*out.value(), m);

    let a = tape.constant(Tensor::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]));
    let b = tape.constant(Tensor::from_rows(&[vec![1.0], vec![1.0]]));
    assert_eq!(a.matmul(b).unwrap().value().values(), &[3.0, 7.0]);
}

#[test]
fn matmul_shape_error_names_both_shapes() {
    let tape = Tape::new();
    let a = tape.constant(Tensor::zeros(&[2, 3]));
    let b = tape.constant(Tensor::zeros(&[2, 3]));
    match a.matmul(b) {
        Err(AutodiffError::Shape { left, right, .. }) => {
            assert_eq!(left, vec![2, 3]);
            assert_eq!(right, vec![2, 3]);
        }
        other => panic!("expected shape error, got {other:?}"),
    }
}

#[test]
fn matmul_gradient_is_ones_times_b_transpose() {
    let mut r = rng(1);
    let a = random_tensor(&mut r, &[3, 4]);
    let b = random_tensor(&mut r, &[4, 2]);
    let tape = Tape::new();
    let av = tape.param(a.clone());
    let bv = tape.constant(b.clone());
    tape.backward(av.matmul(bv).unwrap().sum()).unwrap();
    let expected = dense_matmul(&Tensor::ones(&[3, 2]), &b.transpose());
    let got = tape.grad(av).unwrap();
    for (x, y) in got.values().iter().zip(expected.values()) {
        assert!((x - y).abs() < 1e-12);
    }
    let err = gradient_check(&[a, b], |_, v| v[0].matmul(v[1]).unwrap().sum());
    assert!(err < GRAD_TOL, "rel err {err}");
}

#[test]
fn spmm_identity_and_empty_row() {
    let tape = Tape::new();
    let m = Tensor::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]);
    let id = Arc::new(SparseMatrix::identity(3));
    assert_eq!(*tape.spmm(&id, tape.constant(m.clone())).unwrap().value(), m);

    let s = Arc::new(SparseMatrix::from_triplets(3, 3, &[(0, 1, 2.0), (2, 2, 1.0)]).unwrap());
    let out = tape.spmm(&s, tape.constant(m)).unwrap().value();
    assert_eq!(out.row(1), &[0.0, 0.0]);
}

#[test]
fn spmm_shape_error() {
    let tape = Tape::new();
    let s = Arc::new(SparseMatrix::identity(3));
    assert!(matches!(
        tape.spmm(&s, tape.constant(Tensor::zeros(&[2, 2]))),
        Err(AutodiffError::Shape { .. })
    ));
}

#[test]
fn spmm_gradient_flows_into_dense_operand() {
    let mut r = rng(2);
    let s = Arc::new(random_sparse(&mut r, 6, 5, 0.4));
    let d = random_tensor(&mut r, &[5, 3]);
    let err = gradient_check(&[d], |tape, v| tape.spmm(&s, v[0]).unwrap().sum());
    assert!(err < GRAD_TOL, "rel err {err}");
}

#[test]
fn elementwise_point_values() {
    let tape = Tape::new();
    let zero = tape.constant(Tensor::scalar(0.0));
    assert_eq!(zero.sigmoid().value().item(), Some(0.5));
    let m1 = tape.constant(Tensor::scalar(-1.0));
    assert!((m1.leaky_relu(0.2).value().item().unwrap() + 0.2).abs() < 1e-15);
    assert_eq!(m1.relu().value().item(), Some(0.0));
    assert!((m1.elu().value().item().unwrap() - ((-1f64).exp() - 1.0)).abs() < 1e-15);
    let big = tape.constant(Tensor::vector(vec![800.0, -800.0]));
    assert_eq!(big.softplus().value().values(), &[800.0, 0.0]);
}

#[test]
fn log_rejects_non_positive_input() {
    let tape = Tape::new();
    let x = tape.constant(Tensor::vector(vec![1.0, 0.0]));
    assert!(matches!(x.log(), Err(AutodiffError::Domain { op: "log", .. })));
}

#[test]
fn unary_ops_pass_gradient_check() {
    let mut r = rng(3);
    let x = random_tensor(&mut r, &[4, 3]);
    let ops = [
        UnaryOp::Relu,
        UnaryOp::LeakyRelu(0.2),
        UnaryOp::Sigmoid,
        UnaryOp::Exp,
        UnaryOp::Neg,
        UnaryOp::Softplus,
        UnaryOp::Elu,
    ];
    for op in ops {
        let err = gradient_check(&[x.clone()], |tape, v| {
            // weight the output so the check is not just a sum of derivatives
            let w = tape.constant(Tensor::matrix(4, 3, (0..12).map(|i| i as f64 - 5.5).collect()));
            tape.unary(op, v[0]).unwrap().mul(w).unwrap().sum()
        });
        assert!(err < GRAD_TOL, "{op:?}: rel err {err}");
    }
    let positive = x.map(|v| v.abs() + 0.1);
    let err = gradient_check(&[positive], |_, v| v[0].log().unwrap().sum());
    assert!(err < GRAD_TOL, "log: rel err {err}");
}

#[test]
fn binary_ops_with_scalar_broadcast() {
    let mut r = rng(4);
    let a = random_tensor(&mut r, &[3, 2]);
    let b = random_tensor(&mut r, &[3, 2]);
    let s = random_tensor(&mut r, &[]);
    let err = gradient_check(&[a.clone(), b, s.clone()], |_, v| {
        let ab = v[0].mul(v[1]).unwrap();
        let d = ab.sub(v[2]).unwrap();
        d.add(v[0]).unwrap().mul(v[2]).unwrap().sum()
    });
    assert!(err < GRAD_TOL, "rel err {err}");

    let tape = Tape::new();
    let x = tape.constant(Tensor::zeros(&[3, 2]));
    let y = tape.constant(Tensor::zeros(&[2, 3]));
    assert!(x.add(y).is_err(), "no general broadcasting");
}

#[test]
fn segment_softmax_examples() {
    let tape = Tape::new();
    let single = tape.constant(Tensor::vector(vec![3.7]));
    assert_eq!(tape.segment_softmax(single, &[0]).unwrap().value().values(), &[1.0]);
    for c in [-50.0, 0.0, 12.5] {
        let pair = tape.constant(Tensor::vector(vec![c, c]));
        assert_eq!(
            tape.segment_softmax(pair, &[0, 0]).unwrap().value().values(),
            &[0.5, 0.5]
        );
    }
    let unsorted = tape.constant(Tensor::vector(vec![1.0, 2.0]));
    assert!(matches!(
        tape.segment_softmax(unsorted, &[1, 0]),
        Err(AutodiffError::Precondition(_))
    ));
}

#[test]
fn segment_softmax_matches_dense_row_softmax() {
    let mut r = rng(5);
    let sizes = [1usize, 3, 2, 5, 4];
    let ids: Vec<usize> = sizes.iter().enumerate().flat_map(|(s, &n)| std::iter::repeat_n(s, n)).collect();
    let scores = random_tensor(&mut r, &[ids.len()]);
    let tape = Tape::new();
    let out = tape.segment_softmax(tape.constant(scores.clone()), &ids).unwrap().value();
    let mut start = 0;
    for &n in &sizes {
        let seg = &scores.values()[start..start + n];
        let denom: f64 = seg.iter().map(|x| x.exp()).sum();
        for k in 0..n {
            assert!((out.values()[start + k] - seg[k].exp() / denom).abs() < 1e-14);
        }
        start += n;
    }
    let err = gradient_check(&[scores], |tape, v| {
        let w = tape.constant(Tensor::vector((0..ids.len()).map(|i| (i as f64).sin()).collect()));
        tape.segment_softmax(v[0], &ids).unwrap().mul(w).unwrap().sum()
    });
    assert!(err < GRAD_TOL, "rel err {err}");
}

#[test]
fn rows_l2_normalize_examples() {
    let tape = Tape::new();
    let x = tape.constant(Tensor::from_rows(&[vec![3.0, 4.0], vec![0.0, 0.0]]));
    let y = x.rows_l2_normalize().value();
    assert!((y.get(0, 0) - 0.6).abs() < 1e-15 && (y.get(0, 1) - 0.8).abs() < 1e-15);
    assert_eq!(y.row(1), &[0.0, 0.0]);

    let mut r = rng(6);
    let x = random_tensor(&mut r, &[5, 4]);
    let err = gradient_check(&[x], |tape, v| {
        let w = tape.constant(Tensor::matrix(5, 4, (0..20).map(|i| (i as f64).cos()).collect()));
        v[0].rows_l2_normalize().mul(w).unwrap().sum()
    });
    assert!(err < GRAD_TOL, "rel err {err}");
}

#[test]
fn dropout_modes_and_rate() {
    let mut r = rng(7);
    let tape = Tape::new();
    let x = tape.constant(Tensor::ones(&[100_000]));
    assert_eq!(tape.dropout(x, 0.0, true, &mut r).unwrap().id(), x.id());
    assert_eq!(tape.dropout(x, 0.9, false, &mut r).unwrap().id(), x.id());
    let y = tape.dropout(x, 0.6, true, &mut r).unwrap().value();
    let zeros = y.values().iter().filter(|&&v| v == 0.0).count() as f64 / 1e5;
    assert!((0.59..=0.61).contains(&zeros), "zero fraction {zeros}");
    let survivor = y.values().iter().find(|&&v| v != 0.0).unwrap();
    assert!((survivor - 2.5).abs() < 1e-12);
    assert!(matches!(tape.dropout(x, 1.0, true, &mut r), Err(AutodiffError::Config(_))));
}

#[test]
fn dropout_gradient_uses_the_same_mask() {
    let tape = Tape::new();
    let x = tape.param(Tensor::ones(&[1000]));
    let y = tape.dropout(x, 0.5, true, &mut rng(8)).unwrap();
    tape.backward(y.sum()).unwrap();
    assert_eq!(tape.grad(x).unwrap(), *y.value());
}

#[test]
fn concat_cols_examples() {
    let tape = Tape::new();
    let m = Tensor::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]);
    let empty = tape.constant(Tensor::zeros(&[3, 0]));
    assert_eq!(*tape.constant(m.clone()).concat_cols(empty).unwrap().value(), m);
    let wide = tape.constant(Tensor::zeros(&[3, 5]));
    assert_eq!(tape.constant(m).concat_cols(wide).unwrap().shape(), vec![3, 7]);
    let short = tape.constant(Tensor::zeros(&[2, 5]));
    assert!(empty.concat_cols(short).is_err());

    let mut r = rng(9);
    let a = random_tensor(&mut r, &[3, 2]);
    let b = random_tensor(&mut r, &[3, 5]);
    let err = gradient_check(&[a, b], |tape, v| {
        let w = tape.constant(Tensor::matrix(3, 7, (0..21).map(|i| i as f64 * 0.1).collect()));
        v[0].concat_cols(v[1]).unwrap().mul(w).unwrap().sum()
    });
    assert!(err < GRAD_TOL, "rel err {err}");

    // the two halves of the gradient reassemble the upstream gradient
    let tape = Tape::new();
    let a = tape.param(Tensor::zeros(&[2, 1]));
    let b = tape.param(Tensor::zeros(&[2, 2]));
    let w = Tensor::from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]);
    let c = a.concat_cols(b).unwrap().mul(tape.constant(w)).unwrap().sum();
    tape.backward(c).unwrap();
    assert_eq!(tape.grad(a).unwrap().values(), &[1.0, 4.0]);
    assert_eq!(tape.grad(b).unwrap().values(), &[2.0, 3.0, 5.0, 6.0]);
}

#[test]
fn gather_rows_examples() {
    let tape = Tape::new();
    let m = Tensor::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]);
    let x = tape.param(m.clone());
    assert_eq!(*x.gather_rows(vec![0, 1, 2]).unwrap().value(), m);
    assert_eq!(x.gather_rows(Vec::<usize>::new()).unwrap().shape(), vec![0, 2]);
    assert!(matches!(x.gather_rows(vec![3]), Err(AutodiffError::Index { index: 3, len: 3 })));

    let g = x.gather_rows(vec![1, 1]).unwrap();
    assert_eq!(g.value().values(), &[3.0, 4.0, 3.0, 4.0]);
    let w = tape.constant(Tensor::from_rows(&[vec![1.0, 10.0], vec![100.0, 1000.0]]));
    tape.backward(g.mul(w).unwrap().sum()).unwrap();
    assert_eq!(tape.grad(x).unwrap().values(), &[0.0, 0.0, 101.0, 1010.0, 0.0, 0.0]);

    let mut r = rng(10);
    let t = random_tensor(&mut r, &[4, 3]);
    let err = gradient_check(&[t], |tape, v| {
        let w = tape.constant(Tensor::matrix(3, 3, (0..9).map(|i| i as f64 - 4.0).collect()));
        v[0].gather_rows(vec![2, 0, 2]).unwrap().mul(w).unwrap().sum()
    });
    assert!(err < GRAD_TOL, "rel err {err}");
}

#[test]
fn slicing_and_row_sums_gradients() {
    let mut r = rng(11);
    let t = random_tensor(&mut r, &[4, 6]);
    let err = gradient_check(&[t], |tape, v| {
        let w = tape.constant(Tensor::vector(vec![1.0, -2.0, 3.0]));
        let block = v[0].slice_cols(1, 3).unwrap().slice_rows(1, 3).unwrap();
        block.exp().row_sums().mul(w).unwrap().sum()
    });
    assert!(err < GRAD_TOL, "rel err {err}");
}

#[test]
fn segment_weighted_sum_gradients() {
    let mut r = rng(12);
    let weights = random_tensor(&mut r, &[6]);
    let x = random_tensor(&mut r, &[4, 3]);
    let src: Arc<[usize]> = vec![0, 1, 1, 3, 2, 0].into();
    let offsets: Arc<[usize]> = vec![0, 2, 2, 5, 6].into();
    let err = gradient_check(&[weights, x], |tape, v| {
        let out = tape
            .segment_weighted_sum(v[0], v[1], src.clone(), offsets.clone())
            .unwrap();
        out.mul(out).unwrap().sum()
    });
    assert!(err < GRAD_TOL, "rel err {err}");
}

#[test]
fn backward_simple_roots() {
    let tape = Tape::new();
    let x = tape.param(Tensor::vector(vec![1.0, -2.0, 0.5]));
    tape.backward(x.sum()).unwrap();
    assert_eq!(tape.grad(x).unwrap().values(), &[1.0, 1.0, 1.0]);
    tape.zero_grad();
    tape.backward(x.mul(x).unwrap().sum()).unwrap();
    assert_eq!(tape.grad(x).unwrap().values(), &[2.0, -4.0, 1.0]);
}

#[test]
fn backward_rejects_non_scalar_root() {
    let tape = Tape::new();
    let x = tape.param(Tensor::vector(vec![1.0, 2.0]));
    assert!(matches!(tape.backward(x), Err(AutodiffError::Contract(_))));
}

#[test]
fn backward_accumulates_and_skips_unreachable() {
    let tape = Tape::new();
    let x = tape.param(Tensor::vector(vec![1.0, 2.0]));
    let unused = tape.param(Tensor::vector(vec![5.0]));
    let root = x.scale(3.0).sum();
    tape.backward(root).unwrap();
    tape.backward(root).unwrap();
    assert_eq!(tape.grad(x).unwrap().values(), &[6.0, 6.0]);
    assert!(tape.grad(unused).is_none());
}

#[test]
fn tensor_used_twice_sums_path_gradients() {
    let tape = Tape::new();
    let x = tape.param(Tensor::vector(vec![2.0]));
    let a = x.scale(3.0);
    let b = x.exp();
    tape.backward(a.add(b).unwrap().sum()).unwrap();
    let g = tape.grad(x).unwrap().values()[0];
    assert!((g - (3.0 + 2f64.exp())).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spmm_equals_dense_product(rows in 1usize..=8, cols in 1usize..=8, n in 1usize..=4, seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = Arc::new(random_sparse(&mut r, rows, cols, 0.4));
        let d = random_tensor(&mut r, &[cols, n]);
        let tape = Tape::new();
        let got = tape.spmm(&s, tape.constant(d.clone())).unwrap().value();
        prop_assert_eq!(&*got, &dense_matmul(&s.to_dense(), &d));
    }

    #[test]
    fn segment_softmax_sums_to_one(sizes in prop::collection::vec(1usize..6, 1..8), seed in any::<u64>()) {
        let mut r = rng(seed);
        let ids: Vec<usize> = sizes.iter().enumerate().flat_map(|(s, &n)| std::iter::repeat_n(s, n)).collect();
        let scores = Tensor::vector((0..ids.len()).map(|_| r.random_range(-20.0..20.0)).collect());
        let tape = Tape::new();
        let out = tape.segment_softmax(tape.constant(scores), &ids).unwrap().value();
        let mut start = 0;
        for n in sizes {
            let seg = &out.values()[start..start + n];
            prop_assert!((seg.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(seg.iter().all(|&p| p > 0.0 && p <= 1.0));
            start += n;
        }
    }

    #[test]
    fn normalized_rows_have_unit_norm(rows in 1usize..6, cols in 1usize..6, seed in any::<u64>()) {
        let mut r = rng(seed);
        let x = random_tensor(&mut r, &[rows, cols]);
        let tape = Tape::new();
        let y = tape.constant(x).rows_l2_normalize().value();
        for i in 0..rows {
            let norm = y.row(i).iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!((norm - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn random_composition_matches_finite_differences(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_tensor(&mut r, &[3, 4]);
        let b = random_tensor(&mut r, &[4, 2]);
        let c = random_tensor(&mut r, &[3, 2]);
        let err = gradient_check(&[a, b, c], |_, v| {
            let h = v[0].matmul(v[1]).unwrap().sigmoid();
            let k = h.mul(v[2]).unwrap().add(h).unwrap().softplus();
            k.concat_cols(v[2]).unwrap().rows_l2_normalize().gather_rows(vec![2, 0, 2]).unwrap().row_sums().sum()
        });
        prop_assert!(err < GRAD_TOL, "rel err {}", err);
    }
}
