//! Reference detectors: Riemannian gradient ascent on the same ℓ3 objective,
//! and pilot-based sparse channel estimation followed by zero forcing.

use nalgebra::SVD;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::precondition::least_squares_reproject;
use super::{inv_sqrt_fading, objective_matrix, SolveTrace, SolverOptions, StopReason};
use crate::error::{Error, Result};
use crate::manifold::{nuclear_norm, polar_retract, random_stiefel, riemannian_grad, StiefelPoint};
use crate::{real_inner, CMatrix, C64};

/// Halvings of the step before the line search gives up.
const MAX_HALVINGS: usize = 30;

/// Sufficient-increase constant of the Armijo test.
const ARMIJO_C: f64 = 1e-4;

/// Gradient ascent `A ← Polar(A + τ·grad Ψ(A))` with backtracking on `τ`:
/// start at 1 and halve until `Ψ` rises by at least `c·τ·‖grad Ψ‖²`.
/// Accepting any rise lets an overlong step that wraps around the manifold
/// stall the ascent far from a critical point.
pub fn riemannian_gd_baseline<R: Rng + ?Sized>(
    y_bar: &CMatrix,
    g_diag: &[f64],
    opts: &SolverOptions,
    rng: &mut R,
) -> Result<(StiefelPoint, SolveTrace)> {
    opts.validate()?;
    let k = g_diag.len();
    let t = y_bar.ncols();
    if k == 0 || t < k {
        return Err(Error::Dimension(format!("need 1 ≤ K ≤ T, got K={k}, T={t}")));
    }
    inv_sqrt_fading(g_diag, k)?;
    let p = opts.p_exponent;
    let mut a = random_stiefel(t, k, rng)?;
    let mut trace = SolveTrace::default();
    let mut obj = objective_matrix(y_bar, a.matrix(), g_diag, p)?;
    trace.objective_evals += 1;
    let mut eta_threshold = f64::NAN;

    loop {
        let grad = super::euclid_grad(y_bar, a.matrix(), g_diag, p)?;
        trace.gradient_evals += 1;
        let eta = (nuclear_norm(&grad) - real_inner(a.matrix(), &grad)).max(0.0);
        trace.objective_per_iter.push(obj);
        trace.eta_per_iter.push(eta);
        if trace.iters_run == 0 {
            eta_threshold = opts.eta_tol * eta.max(1.0);
        }
        if eta < eta_threshold {
            trace.stop_reason = Some(StopReason::EtaTol);
            break;
        }
        if trace.iters_run >= opts.max_iters {
            trace.stop_reason = Some(StopReason::MaxIters);
            break;
        }
        let direction = riemannian_grad(&a, &grad)?.xi;
        let slope = direction.norm_squared();
        let mut tau = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let candidate = a.matrix() + &direction * C64::new(tau, 0.0);
            if let Ok(next) = polar_retract(&candidate) {
                let next_obj = objective_matrix(y_bar, next.matrix(), g_diag, p)?;
                trace.objective_evals += 1;
                if next_obj > obj && next_obj - obj >= ARMIJO_C * tau * slope {
                    accepted = Some((next, next_obj));
                    break;
                }
            }
            tau *= 0.5;
        }
        let Some((next, next_obj)) = accepted else {
            trace.stop_reason = Some(StopReason::ObjTol);
            break;
        };
        let rel = (next_obj - obj) / obj.abs().max(f64::MIN_POSITIVE);
        a = next;
        obj = next_obj;
        trace.iters_run += 1;
        if rel < opts.obj_rel_tol {
            let grad = super::euclid_grad(y_bar, a.matrix(), g_diag, p)?;
            trace.gradient_evals += 1;
            trace.objective_per_iter.push(obj);
            trace.eta_per_iter.push((nuclear_norm(&grad) - real_inner(a.matrix(), &grad)).max(0.0));
            trace.stop_reason = Some(StopReason::ObjTol);
            break;
        }
    }
    Ok((a, trace))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PilotOptions {
    /// ℓ1 weight.
    pub lambda: f64,
    pub max_iters: usize,
    pub rel_tol: f64,
}

impl Default for PilotOptions {
    fn default() -> Self {
        Self { lambda: 2.0, max_iters: 500, rel_tol: 1e-8 }
    }
}

/// Complex soft threshold: shrinks `|v|` by `t`, keeping the phase.
pub fn soft_threshold(v: C64, t: f64) -> C64 {
    let mag = v.norm();
    if mag <= t {
        C64::new(0.0, 0.0)
    } else {
        v * ((mag - t) / mag)
    }
}

/// Sparse channel estimate from pilots by iterative soft thresholding.
///
/// Pilots are rescaled to unit mean symbol energy, so `λ` does not depend
/// on the frame normalization. The problem `‖Ȳ_T − H̄·B‖² + λ‖H̄‖₁` with
/// `B = G^{1/2}X_T` is halved, giving gradient `(H̄B − Ȳ_T)Bᴴ`, Lipschitz
/// constant `‖B‖₂²` and threshold `λ/(2L)`.
pub fn estimate_sparse_channel(
    y_train: &CMatrix,
    x_train: &CMatrix,
    g_diag: &[f64],
    opts: &PilotOptions,
) -> Result<CMatrix> {
    let (k, tt) = x_train.shape();
    if tt == 0 {
        return Err(Error::InvalidParameter("pilot length must be at least 1".into()));
    }
    if y_train.ncols() != tt {
        return Err(Error::Dimension(format!("{} training observations for {tt} pilots", y_train.ncols())));
    }
    if g_diag.len() != k || g_diag.iter().any(|g| !(*g > 0.0)) {
        return Err(Error::InvalidParameter("need one positive fading coefficient per user".into()));
    }
    if !(opts.lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!("λ must be non-negative, got {}", opts.lambda)));
    }
    let rms = (x_train.norm_squared() / x_train.len() as f64).sqrt();
    if !(rms > 0.0) {
        return Err(Error::Degenerate("pilot symbols are all zero".into()));
    }
    let norm = C64::new(1.0 / rms, 0.0);
    let mut b = x_train * norm;
    for (mut row, g) in b.row_iter_mut().zip(g_diag) {
        row *= C64::new(g.sqrt(), 0.0);
    }
    let y = y_train * norm;

    let lipschitz = SVD::new(b.clone(), false, false).singular_values.max().powi(2);
    if !(lipschitz > 0.0) {
        return Err(Error::Degenerate("pilot operator is zero".into()));
    }
    let step = 1.0 / lipschitz;
    let thresh = opts.lambda * 0.5 * step;

    let b_adj = b.adjoint();
    let gram = &b * &b_adj;
    let yb = &y * &b_adj;
    let mut h = CMatrix::zeros(y.nrows(), k);
    for _ in 0..opts.max_iters {
        let grad = &h * &gram - &yb;
        let next = (&h - grad * C64::new(step, 0.0)).map(|z| soft_threshold(z, thresh));
        let change = (&next - &h).norm();
        let scale = next.norm();
        h = next;
        if change <= opts.rel_tol * scale.max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(h)
}

/// `X̂ = (DᴴD)^{-1}DᴴȲ` with `D = H̄·G^{1/2}`.
pub fn zero_forcing(h_est: &CMatrix, g_diag: &[f64], y_bar: &CMatrix) -> Result<CMatrix> {
    if g_diag.len() != h_est.ncols() {
        return Err(Error::Dimension("fading length does not match channel columns".into()));
    }
    let mut d = h_est.clone();
    for (mut col, g) in d.column_iter_mut().zip(g_diag) {
        col *= C64::new(g.sqrt(), 0.0);
    }
    least_squares_reproject(&d, y_bar).map_err(|_| Error::Degenerate("zero-forcing matrix is singular".into()))
}

/// Pilot-aided detection: sparse channel estimate from `(Ȳ_T, X_T)`, then
/// zero forcing on `Ȳ_data`.
pub fn pilot_zf_baseline(
    y_train: &CMatrix,
    x_train: &CMatrix,
    y_data: &CMatrix,
    g_diag: &[f64],
    opts: &PilotOptions,
) -> Result<CMatrix> {
    let h = estimate_sparse_channel(y_train, x_train, g_diag, opts)?;
    zero_forcing(&h, g_diag, y_data)
}
