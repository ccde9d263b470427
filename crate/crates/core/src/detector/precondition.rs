//! Preconditioning for short frames.
//!
//! When `T` is small, `Xᴴ` is far from orthonormal. Replacing `Ȳ` by the
//! polar factor of its rank-`K` signal subspace restores a Stiefel-shaped
//! problem; the channel estimate `D = Ȳ_pre·X̂_preᴴ` then lets least squares
//! recover the unconstrained `X`.

use nalgebra::SVD;

use crate::error::{Error, Result};
use crate::{CMatrix, C64};

/// Rank floor, relative to the largest singular value.
const PRECONDITION_RANK_TOL: f64 = 1e-10;

/// `U_K·V_Kᴴ` from the compact SVD of `Ȳ`, keeping the top `k` singular
/// triplets with all singular values set to one.
pub fn precondition(y_bar: &CMatrix, k: usize) -> Result<CMatrix> {
    let (m, t) = y_bar.shape();
    if k == 0 || k > m.min(t) {
        return Err(Error::Dimension(format!("cannot keep rank {k} of a {m}x{t} signal")));
    }
    let svd = SVD::new(y_bar.clone(), true, true);
    let sv = &svd.singular_values;
    // nalgebra returns singular values in descending order.
    let smax = sv[0];
    if !(smax > 0.0) || sv[k - 1] <= PRECONDITION_RANK_TOL * smax {
        return Err(Error::Degenerate(format!(
            "received signal has rank < {k} (σ_K = {:.3e}, σ_1 = {smax:.3e})",
            sv[k - 1]
        )));
    }
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested Vᴴ");
    Ok(u.columns(0, k) * v_t.rows(0, k))
}

/// `(DᴴD)^{-1}DᴴȲ`, without normalization.
pub fn least_squares_reproject(d: &CMatrix, y_bar: &CMatrix) -> Result<CMatrix> {
    if d.nrows() != y_bar.nrows() {
        return Err(Error::Dimension(format!("D has {} rows, Ȳ has {}", d.nrows(), y_bar.nrows())));
    }
    let gram = d.ad_mul(d);
    let rhs = d.ad_mul(y_bar);
    let chol = gram.cholesky().ok_or_else(|| Error::Degenerate("DᴴD is singular".into()))?;
    Ok(chol.solve(&rhs))
}

/// Maps the preconditioned estimate back: least squares on the estimated
/// channel `D = Ȳ_pre·X̂_preᴴ`, then each row scaled to unit ℓ2 norm.
pub fn postprocess(y_bar_pre: &CMatrix, x_hat_pre: &CMatrix, y_bar: &CMatrix) -> Result<CMatrix> {
    if y_bar_pre.shape() != y_bar.shape() || x_hat_pre.ncols() != y_bar.ncols() {
        return Err(Error::Dimension(format!(
            "shapes disagree: Ȳ_pre {:?}, X̂_pre {:?}, Ȳ {:?}",
            y_bar_pre.shape(),
            x_hat_pre.shape(),
            y_bar.shape()
        )));
    }
    let d = y_bar_pre * x_hat_pre.adjoint();
    let mut x = least_squares_reproject(&d, y_bar)?;
    for mut row in x.row_iter_mut() {
        let n = row.norm();
        if n > 0.0 {
            row /= C64::new(n, 0.0);
        }
    }
    Ok(x)
}
