//! Gradients of a small two-layer network, checked against finite differences.
//!
//! ```text
//! cargo run --example autodiff_basics
//! ```

use linkbench::autodiff::{Tape, Tensor};

fn loss(x: &Tensor, w1: &Tensor, w2: &Tensor) -> f64 {
    let tape = Tape::new();
    let h = tape.constant(x.clone()).matmul(tape.constant(w1.clone())).unwrap().relu();
    let out = h.matmul(tape.constant(w2.clone())).unwrap();
    out.mul(out).unwrap().sum().value().item().unwrap()
}

fn main() {
    let x = Tensor::matrix(3, 2, vec![1.0, 0.5, -1.0, 2.0, 0.25, -0.75]);
    let w1 = Tensor::matrix(2, 4, vec![0.3, -0.2, 0.5, 0.1, -0.4, 0.6, 0.2, -0.3]);
    let w2 = Tensor::matrix(4, 1, vec![0.7, -0.5, 0.2, 0.9]);

    let tape = Tape::new();
    let p1 = tape.param(w1.clone());
    let p2 = tape.param(w2.clone());
    let h = tape.constant(x.clone()).matmul(p1).unwrap().relu();
    let out = h.matmul(p2).unwrap();
    let l = out.mul(out).unwrap().sum();
    tape.backward(l).unwrap();
    println!("loss {:.6} over {} tape nodes", l.value().item().unwrap(), tape.len());

    let g1 = tape.grad(p1).unwrap();
    let eps = 1e-6;
    let mut worst: f64 = 0.0;
    for i in 0..w1.len() {
        let mut plus = w1.clone();
        plus.values_mut()[i] += eps;
        let mut minus = w1.clone();
        minus.values_mut()[i] -= eps;
        let numeric = (loss(&x, &plus, &w2) - loss(&x, &minus, &w2)) / (2.0 * eps);
        let analytic = g1.values()[i];
        println!("dL/dW1[{i}] analytic {analytic:+.8} numeric {numeric:+.8}");
        worst = worst.max((analytic - numeric).abs());
    }
    println!("largest absolute difference {worst:.2e}");
    println!("dL/dW2 = {:?}", tape.grad(p2).unwrap().values());
}
