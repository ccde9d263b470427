//! Detection quality and rate metrics, and closed-form objective levels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::CMatrix;

/// `E|z|³` for `z ~ CN(0, 1)`, i.e. `Γ(5/2) = (3/4)√π`.
pub fn gamma1() -> f64 {
    0.75 * std::f64::consts::PI.sqrt()
}

/// Relative floor on the per-row error energy in rate computations; caps
/// each row's term near 40 bits at perfect recovery.
pub const RATE_ERROR_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub evm: f64,
    pub ser: f64,
    pub ber: f64,
    pub rate_blind: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rate_training: Option<f64>,
    pub normalized_objective: f64,
    pub iters: usize,
    /// Only recorded on request: wall time breaks byte-level reproducibility.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_time: Option<f64>,
}

fn check_same(a: &CMatrix, b: &CMatrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::Dimension(format!("shapes differ: {:?} vs {:?}", a.shape(), b.shape())));
    }
    Ok(())
}

/// `(1/K)·Σ_k ‖X̂_k − X_k‖² / ‖X_k‖²`.
pub fn evm(x_hat: &CMatrix, x_true: &CMatrix) -> Result<f64> {
    check_same(x_hat, x_true)?;
    let k = x_true.nrows();
    if k == 0 {
        return Err(Error::Dimension("empty frame".into()));
    }
    let mut sum = 0.0;
    for (est, truth) in x_hat.row_iter().zip(x_true.row_iter()) {
        let p = truth.norm_squared();
        if p == 0.0 {
            return Err(Error::InvalidParameter("true row has zero energy".into()));
        }
        sum += (est - truth).norm_squared() / p;
    }
    Ok(sum / k as f64)
}

/// Per-row `log₂(1 + ‖X_k‖² / max(‖X̂_k − X_k‖², floor))`.
fn row_log_terms(x_hat: &CMatrix, x_true: &CMatrix) -> Result<Vec<f64>> {
    check_same(x_hat, x_true)?;
    Ok(x_hat
        .row_iter()
        .zip(x_true.row_iter())
        .map(|(est, truth)| {
            let p = truth.norm_squared();
            let e = (est - truth).norm_squared().max(RATE_ERROR_FLOOR * p);
            if p == 0.0 {
                0.0
            } else {
                (1.0 + p / e).log2()
            }
        })
        .collect())
}

/// `Σ_k (1 − 1/T)·log₂(1 + SINR_k) − K⌈log₂K⌉/T`.
pub fn achievable_rate_blind(x_hat: &CMatrix, x_true: &CMatrix, t_len: usize) -> Result<f64> {
    if t_len == 0 {
        return Err(Error::InvalidParameter("T must be positive".into()));
    }
    let k = x_true.nrows();
    let t = t_len as f64;
    let ceil_log2k = if k <= 1 { 0 } else { usize::BITS - (k - 1).leading_zeros() } as f64;
    let sum: f64 = row_log_terms(x_hat, x_true)?.iter().sum();
    Ok((1.0 - 1.0 / t) * sum - k as f64 * ceil_log2k / t)
}

/// `Σ_k (1 − T_t/T)·log₂(1 + SINR_k)`.
pub fn achievable_rate_training(x_hat: &CMatrix, x_true: &CMatrix, t_len: usize, t_pilot: usize) -> Result<f64> {
    if t_pilot >= t_len {
        return Err(Error::InvalidParameter(format!("pilot length {t_pilot} must be below T = {t_len}")));
    }
    let sum: f64 = row_log_terms(x_hat, x_true)?.iter().sum();
    Ok((1.0 - t_pilot as f64 / t_len as f64) * sum)
}

/// Expected `‖Ȳ·A·G^{-1/2}‖₃³` levels for a Bernoulli-Gaussian channel.
///
/// `upper` is the value at the planted solution,
/// `γ₁·M·Σ_k [θ((1+s_k)^{3/2} − s_k^{3/2}) + s_k^{3/2}]` with `s_k = σ²/G_k`;
/// `lower` is `γ₁·θ·M·Σ_k s_k^{3/2}`.
pub fn theoretical_objective_bound(
    m: usize,
    k_users: usize,
    theta: f64,
    inv_snr_per_user: &[f64],
) -> Result<(f64, f64)> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::InvalidParameter(format!("θ must lie in (0, 1], got {theta}")));
    }
    if inv_snr_per_user.len() != k_users {
        return Err(Error::Dimension(format!(
            "expected {k_users} per-user noise ratios, got {}",
            inv_snr_per_user.len()
        )));
    }
    if inv_snr_per_user.iter().any(|s| !(*s >= 0.0)) {
        return Err(Error::InvalidParameter("noise ratios must be non-negative".into()));
    }
    let g1 = gamma1();
    let m = m as f64;
    let lower = g1 * theta * m * inv_snr_per_user.iter().map(|s| s.powf(1.5)).sum::<f64>();
    let upper = g1
        * m
        * inv_snr_per_user.iter().map(|s| theta * ((1.0 + s).powf(1.5) - s.powf(1.5)) + s.powf(1.5)).sum::<f64>();
    Ok((lower, upper))
}

/// Fraction of differing entries.
pub fn symbol_error_rate<T: PartialEq>(decided: &[Vec<T>], truth: &[Vec<T>]) -> Result<f64> {
    mismatch_rate(decided.iter().flatten(), truth.iter().flatten(), decided.len() == truth.len())
}

/// Fraction of differing bits.
pub fn bit_error_rate(decided: &[u8], truth: &[u8]) -> Result<f64> {
    mismatch_rate(decided.iter(), truth.iter(), true)
}

fn mismatch_rate<'a, T: PartialEq + 'a>(
    a: impl Iterator<Item = &'a T> + Clone,
    b: impl Iterator<Item = &'a T> + Clone,
    rows_match: bool,
) -> Result<f64> {
    let n = a.clone().count();
    if !rows_match || n != b.clone().count() {
        return Err(Error::Dimension("decision and truth sizes differ".into()));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let errors = a.zip(b).filter(|(x, y)| x != y).count();
    Ok(errors as f64 / n as f64)
}
