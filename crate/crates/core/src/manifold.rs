//! Complex Stiefel manifold `St_K(ℂ^T) = {A ∈ ℂ^{T×K} : AᴴA = I_K}`.
//!
//! Inner products on the manifold are the real trace product
//! `⟨X, Y⟩ = Re tr(XᴴY)`, so that first-order changes of a real objective
//! are real numbers and points can be ordered by them.

use nalgebra::{DVector, SVD};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_shape, Error, Result};
use crate::{gaussian_matrix, CMatrix, C64};

/// Tolerance on `‖AᴴA − I‖_F` accepted by [`StiefelPoint::new`].
pub const ORTHONORMALITY_TOL: f64 = 1e-9;

/// Relative singular-value floor below which a polar factor is undefined.
pub const RANK_TOL: f64 = 1e-12;

/// A `T×K` complex matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CMatrix", into = "CMatrix")]
pub struct StiefelPoint {
    a: CMatrix,
}

impl StiefelPoint {
    /// Wraps `a`, checking `‖aᴴa − I‖_F < 1e-9`.
    pub fn new(a: CMatrix) -> Result<Self> {
        if a.ncols() == 0 || a.ncols() > a.nrows() {
            return Err(Error::Dimension(format!(
                "Stiefel frame must satisfy 1 ≤ K ≤ T, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let err = orthonormality_error(&a);
        if !(err < ORTHONORMALITY_TOL) {
            return Err(Error::NotOrthonormal(err));
        }
        Ok(Self { a })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.a
    }

    pub fn into_matrix(self) -> CMatrix {
        self.a
    }

    pub fn t_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn k_dim(&self) -> usize {
        self.a.ncols()
    }

    /// `‖AᴴA − I‖_F`.
    pub fn orthonormality_error(&self) -> f64 {
        orthonormality_error(&self.a)
    }

    /// Right-multiplies column `k` by `phases[k]`. Unit-modulus phases keep
    /// the point on the manifold.
    pub fn rotate_columns(&self, phases: &[C64]) -> Result<Self> {
        if phases.len() != self.k_dim() {
            return Err(Error::Dimension(format!("expected {} phases, got {}", self.k_dim(), phases.len())));
        }
        let mut a = self.a.clone();
        for (mut col, p) in a.column_iter_mut().zip(phases) {
            col *= *p;
        }
        Self::new(a)
    }
}

impl TryFrom<CMatrix> for StiefelPoint {
    type Error = Error;

    fn try_from(a: CMatrix) -> Result<Self> {
        Self::new(a)
    }
}

impl From<StiefelPoint> for CMatrix {
    fn from(p: StiefelPoint) -> Self {
        p.a
    }
}

/// `‖aᴴa − I‖_F` for an arbitrary matrix.
pub fn orthonormality_error(a: &CMatrix) -> f64 {
    let k = a.ncols();
    (a.ad_mul(a) - CMatrix::identity(k, k)).norm()
}

/// A direction tangent to the manifold at `base`.
#[derive(Debug, Clone)]
pub struct TangentDirection<'a> {
    pub xi: CMatrix,
    pub base: &'a StiefelPoint,
}

impl TangentDirection<'_> {
    /// Frobenius norm of the Hermitian part of `baseᴴ·xi`, which vanishes
    /// exactly on the tangent space.
    pub fn tangency_error(&self) -> f64 {
        let s = self.base.matrix().ad_mul(&self.xi);
        (&s + s.adjoint()).norm() * 0.5
    }

    pub fn norm(&self) -> f64 {
        self.xi.norm()
    }
}

/// Haar-distributed point on `St_K(ℂ^T)`.
///
/// Orthonormal factor of the QR factorization of a Gaussian `T×K` matrix,
/// with the column phases fixed so that `R` has a positive real diagonal.
pub fn random_stiefel<R: Rng + ?Sized>(t_dim: usize, k_dim: usize, rng: &mut R) -> Result<StiefelPoint> {
    if t_dim == 0 || k_dim == 0 || k_dim > t_dim {
        return Err(Error::Dimension(format!("random_stiefel requires 1 ≤ K ≤ T, got T={t_dim}, K={k_dim}")));
    }
    loop {
        let g = gaussian_matrix(t_dim, k_dim, rng);
        let qr = g.qr();
        let r_diag = qr.r().diagonal();
        // Gaussian matrices are full rank almost surely.
        if r_diag.iter().any(|r| r.norm() < 1e-300) {
            continue;
        }
        let mut q = qr.q();
        for (mut col, r) in q.column_iter_mut().zip(r_diag.iter()) {
            col *= *r / r.norm();
        }
        return StiefelPoint::new(q);
    }
}

/// Polar factor `U·Vᴴ` of `m = U·Σ·Vᴴ` together with the singular values
/// (descending). The singular values give the nuclear norm for free.
pub fn polar_decompose(m: &CMatrix) -> Result<(StiefelPoint, DVector<f64>)> {
    let (t, k) = m.shape();
    if k == 0 || k > t {
        return Err(Error::Dimension(format!("polar retraction needs 1 ≤ K ≤ T, got {t}x{k}")));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Degenerate("non-finite entries".into()));
    }
    let svd = SVD::new(m.clone(), true, true);
    let sv = svd.singular_values.clone();
    let smax = sv.max();
    let smin = sv.min();
    if !(smax > 0.0) || smin <= RANK_TOL * smax {
        return Err(Error::Degenerate(format!("rank-deficient polar input (σ_min = {smin:.3e}, σ_max = {smax:.3e})")));
    }
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested Vᴴ");
    let q = u * v_t;
    Ok((StiefelPoint::new(q)?, sv))
}

/// Nearest point on the manifold to `m`, and the maximizer of `Re⟨m, A⟩`.
pub fn polar_retract(m: &CMatrix) -> Result<StiefelPoint> {
    polar_decompose(m).map(|(p, _)| p)
}

/// Riemannian gradient `(I − aaᴴ)∇ + ½·a·(aᴴ∇ − ∇ᴴa)`.
///
/// Evaluated as `∇ − a·sym(aᴴ∇)` to stay `O(TK²)`.
pub fn riemannian_grad<'a>(a: &'a StiefelPoint, euclid_grad: &CMatrix) -> Result<TangentDirection<'a>> {
    check_shape("euclidean gradient", euclid_grad.shape(), a.matrix().shape())?;
    let s = a.matrix().ad_mul(euclid_grad);
    let sym = (&s + s.adjoint()) * C64::new(0.5, 0.0);
    let xi = euclid_grad - a.matrix() * sym;
    Ok(TangentDirection { xi, base: a })
}

/// Sum of singular values.
pub fn nuclear_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().sum()
}
