use rayon::prelude::*;

use crate::autodiff::Tensor;

use super::TsneError;

pub(crate) const ENTROPY_TOLERANCE: f64 = 1e-5;
const MAX_BISECTIONS: usize = 50;
/// Search range for `ln(β · mean squared distance)`.
const LOG_RANGE: f64 = 40.0;

/// Squared Euclidean distances between all rows, row-major `n x n`.
pub(crate) fn squared_distances(x: &Tensor) -> Vec<f64> {
    let n = x.rows();
    let mut d = vec![0.0; n * n];
    d.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let xi = x.row(i);
        for (j, out) in row.iter_mut().enumerate() {
            *out = xi.iter().zip(x.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
        }
    });
    d
}

/// Conditional distribution of row `i` at precision `beta`, written into
/// `out`, and its Shannon entropy in nats.
fn conditional_row(dist: &[f64], i: usize, beta: f64, out: &mut [f64]) -> f64 {
    let d_min = dist
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &d)| d)
        .fold(f64::INFINITY, f64::min);
    let mut total = 0.0;
    let mut weighted = 0.0;
    for (j, (&d, p)) in dist.iter().zip(out.iter_mut()).enumerate() {
        if j == i {
            *p = 0.0;
            continue;
        }
        let shifted = d - d_min;
        *p = (-beta * shifted).exp();
        total += *p;
        weighted += shifted * *p;
    }
    for p in out.iter_mut() {
        *p /= total;
    }
    // H = ln Σ exp(-β d') + β Σ p d'
    total.ln() + beta * weighted / total
}

fn check_inputs(n: usize, perplexity: f64) -> Result<(), TsneError> {
    if n < 3 {
        return Err(TsneError::Config(format!("t-SNE needs at least 3 points, got {n}")));
    }
    if !(perplexity > 1.0 && perplexity < (n - 1) as f64) {
        return Err(TsneError::Config(format!(
            "perplexity {perplexity} is infeasible for {n} points"
        )));
    }
    Ok(())
}

/// Row-conditional affinities `p_{j|i}` and the Gaussian precision
/// `β_i = 1 / (2σ_i²)` found for each row.
///
/// Each row's entropy matches `ln(perplexity)` to within `1e-5`, except
/// rows whose neighbors are all equidistant, which are uniform.
pub fn conditional_affinities(x: &Tensor, perplexity: f64) -> Result<(Tensor, Vec<f64>), TsneError> {
    let n = x.rows();
    check_inputs(n, perplexity)?;
    let dist = squared_distances(x);
    let target = perplexity.ln();
    let mut p = vec![0.0; n * n];
    let betas: Vec<Result<f64, TsneError>> = p
        .par_chunks_mut(n)
        .enumerate()
        .map(|(i, out)| {
            let row = &dist[i * n..(i + 1) * n];
            let scale = row.iter().sum::<f64>() / (n - 1) as f64;
            if !scale.is_finite() {
                return Err(TsneError::Bandwidth { row: i });
            }
            let scale = if scale > 0.0 { scale } else { 1.0 };
            let others = row.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &d)| d);
            let (lo_d, hi_d) = others.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), d| (a.min(d), b.max(d)));
            if hi_d - lo_d <= 1e-12 * hi_d {
                // equidistant neighbors: uniform at every bandwidth, up to rounding
                conditional_row(row, i, 1.0 / scale, out);
                return Ok(1.0 / scale);
            }
            let (mut lo, mut hi) = (-LOG_RANGE, LOG_RANGE);
            for _ in 0..MAX_BISECTIONS {
                let t = 0.5 * (lo + hi);
                let beta = t.exp() / scale;
                let h = conditional_row(row, i, beta, out);
                if (h - target).abs() < ENTROPY_TOLERANCE {
                    return Ok(beta);
                }
                // entropy falls as β grows
                if h > target {
                    lo = t;
                } else {
                    hi = t;
                }
            }
            Err(TsneError::Bandwidth { row: i })
        })
        .collect();
    let betas = betas.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok((Tensor::matrix(n, n, p), betas))
}

/// Symmetric joint affinities `P = (P_{j|i} + P_{i|j}) / 2N`, summing to 1.
pub fn pairwise_affinities(x: &Tensor, perplexity: f64) -> Result<Tensor, TsneError> {
    let (cond, _) = conditional_affinities(x, perplexity)?;
    let n = cond.rows();
    let c = cond.values();
    let denom = 2.0 * n as f64;
    let mut p = vec![0.0; n * n];
    p.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for (j, out) in row.iter_mut().enumerate() {
            *out = (c[i * n + j] + c[j * n + i]) / denom;
        }
    });
    Ok(Tensor::matrix(n, n, p))
}
