use crate::autodiff::{AutodiffError, Var};

type Result<T> = std::result::Result<T, AutodiffError>;

fn count(v: Var<'_>) -> usize {
    v.shape().iter().product()
}

/// Mean binary cross-entropy over positives (label 1) and negatives
/// (label 0), from logits: `softplus(-s)` and `softplus(s)`.
pub fn bce_link_loss<'t>(pos: Var<'t>, neg: Var<'t>) -> Result<Var<'t>> {
    let (p, n) = (count(pos), count(neg));
    if p == 0 || p != n {
        return Err(AutodiffError::Contract(format!(
            "bce link loss needs equal, nonzero positive and negative counts, got {p} and {n}"
        )));
    }
    let total = pos.neg().softplus().sum().add(neg.softplus().sum())?;
    Ok(total.scale(1.0 / (2 * p) as f64))
}

/// `(1/N) Σ -½(1 + 2 logσ - μ² - σ²)` for `N` rows.
pub fn kl_to_standard_normal<'t>(mu: Var<'t>, logsigma: Var<'t>) -> Result<Var<'t>> {
    if mu.shape() != logsigma.shape() {
        return Err(AutodiffError::Shape {
            op: "kl_to_standard_normal",
            left: mu.shape(),
            right: logsigma.shape(),
        });
    }
    let rows = mu.shape().first().copied().unwrap_or(1).max(1);
    let two_ls = logsigma.scale(2.0);
    let inner = two_ls
        .add_scalar(1.0)
        .sub(mu.mul(mu)?)?
        .sub(two_ls.exp())?;
    Ok(inner.sum().scale(-0.5 / rows as f64))
}

/// Sampled reconstruction term plus `kl_weight` times the KL divergence.
pub fn elbo_loss<'t>(
    pos: Var<'t>,
    neg: Var<'t>,
    mu: Var<'t>,
    logsigma: Var<'t>,
    kl_weight: f64,
) -> Result<Var<'t>> {
    let recon = bce_link_loss(pos, neg)?;
    if kl_weight == 0.0 {
        return Ok(recon);
    }
    recon.add(kl_to_standard_normal(mu, logsigma)?.scale(kl_weight))
}

/// Unsupervised GraphSAGE objective from logits, averaged over positive
/// pairs: `softplus(-s_pos) + Σ_q softplus(s_neg,q)`. `neg` holds `q`
/// negatives per positive.
pub fn sage_unsup_loss<'t>(pos: Var<'t>, neg: Var<'t>, q: usize) -> Result<Var<'t>> {
    let (p, n) = (count(pos), count(neg));
    if p == 0 || q == 0 || n != p * q {
        return Err(AutodiffError::Contract(format!(
            "{n} negatives cannot be grouped {q} per positive for {p} positives"
        )));
    }
    // Q · mean over the Q negatives of one positive equals their sum
    let total = pos.neg().softplus().sum().add(neg.softplus().sum())?;
    Ok(total.scale(1.0 / p as f64))
}
