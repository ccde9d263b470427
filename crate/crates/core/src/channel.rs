//! Spatial and angular-domain channel generation.
//!
//! The angular (beamspace) channel is `H̄ = U_Mᴴ·H` with `U_M = F_{N_v} ⊗
//! F_{N_h}`, where `F_N` is the unitary `N`-point DFT. Entry `m = n_v·N_h +
//! n_h` of an array vector belongs to element `(n_v, n_h)`.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_shape, Error, Result};
use crate::{complex_gaussian, CMatrix, C64};

/// Magnitude fraction of `max|H̄|` below which an entry counts as zero in
/// [`ChannelRealization::theta_effective`].
pub const SPARSITY_THRESHOLD: f64 = 0.01;

/// Uniform rectangular planar array; `n_v = 1` is a uniform linear array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub n_h: usize,
    pub n_v: usize,
    pub d_over_lambda: f64,
}

impl ArrayGeometry {
    pub fn new(n_h: usize, n_v: usize) -> Result<Self> {
        Self::with_spacing(n_h, n_v, 0.5)
    }

    pub fn with_spacing(n_h: usize, n_v: usize, d_over_lambda: f64) -> Result<Self> {
        if n_h == 0 || n_v == 0 {
            return Err(Error::Dimension(format!("array must have at least one element, got {n_h}x{n_v}")));
        }
        if !(d_over_lambda > 0.0) {
            return Err(Error::InvalidParameter(format!("element spacing must be positive, got {d_over_lambda}")));
        }
        Ok(Self { n_h, n_v, d_over_lambda })
    }

    /// Number of antennas `M`.
    pub fn m_total(&self) -> usize {
        self.n_h * self.n_v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelModel {
    Clustered,
    BernoulliGaussian,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelRealization {
    /// Angular-domain gains, `M×K`.
    pub h_bar: CMatrix,
    pub model: ChannelModel,
    /// Fraction of entries above 1% of the largest magnitude.
    pub theta_effective: f64,
}

impl ChannelRealization {
    pub fn new(h_bar: CMatrix, model: ChannelModel) -> Self {
        let theta_effective = effective_sparsity(&h_bar);
        Self { h_bar, model, theta_effective }
    }

    pub fn m(&self) -> usize {
        self.h_bar.nrows()
    }

    pub fn k(&self) -> usize {
        self.h_bar.ncols()
    }
}

/// `count(|h| > 0.01·max|h|) / (M·K)`.
pub fn effective_sparsity(h: &CMatrix) -> f64 {
    if h.is_empty() {
        return 0.0;
    }
    let max = h.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let count = h.iter().filter(|z| z.norm() > SPARSITY_THRESHOLD * max).count();
    count as f64 / h.len() as f64
}

/// Propagation paths of one user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserPaths {
    pub gains: Vec<C64>,
    /// Azimuth angles of arrival in `[0, 2π)`.
    pub azimuths: Vec<f64>,
    /// Zenith angles of arrival in `[-π/2, π/2)`.
    pub zeniths: Vec<f64>,
}

impl UserPaths {
    pub fn n_paths(&self) -> usize {
        self.gains.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.gains.len();
        if n == 0 {
            return Err(Error::InvalidParameter("user has no propagation paths".into()));
        }
        if self.azimuths.len() != n || self.zeniths.len() != n {
            return Err(Error::Dimension(format!(
                "path vectors disagree: {} gains, {} azimuths, {} zeniths",
                n,
                self.azimuths.len(),
                self.zeniths.len()
            )));
        }
        Ok(())
    }
}

/// Paths for every user; `users[k]` feeds column `k` of the channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSet {
    pub users: Vec<UserPaths>,
}

impl PathSet {
    /// `n_paths` paths per user with `α ~ CN(0,1)`, azimuth uniform on
    /// `[0, 2π)` and zenith uniform on `[-π/2, π/2)`.
    pub fn random<R: Rng + ?Sized>(k_users: usize, n_paths: usize, rng: &mut R) -> Result<Self> {
        if n_paths == 0 {
            return Err(Error::InvalidParameter("at least one path per user is required".into()));
        }
        let users = (0..k_users)
            .map(|_| {
                let mut gains = Vec::with_capacity(n_paths);
                let mut azimuths = Vec::with_capacity(n_paths);
                let mut zeniths = Vec::with_capacity(n_paths);
                for _ in 0..n_paths {
                    gains.push(complex_gaussian(rng));
                    azimuths.push(rng.random_range(0.0..2.0 * PI));
                    zeniths.push(rng.random_range(-FRAC_PI_2..FRAC_PI_2));
                }
                UserPaths { gains, azimuths, zeniths }
            })
            .collect();
        Ok(Self { users })
    }
}

/// Unitary DFT matrix, `F[a, b] = e^{-j2πab/N}/√N`.
pub fn dft_matrix(n: usize) -> CMatrix {
    let scale = 1.0 / (n as f64).sqrt();
    CMatrix::from_fn(n, n, |a, b| {
        let phase = -2.0 * PI * ((a * b) % n) as f64 / n as f64;
        C64::from_polar(scale, phase)
    })
}

/// Steering matrix `U_M = F_{N_v} ⊗ F_{N_h}`.
pub fn steering_matrix(geom: &ArrayGeometry) -> CMatrix {
    dft_matrix(geom.n_v).kronecker(&dft_matrix(geom.n_h))
}

/// Unit-norm planar array response for azimuth `phi` and zenith `theta`.
pub fn array_response(phi: f64, theta: f64, geom: &ArrayGeometry) -> Vec<C64> {
    let m = geom.m_total();
    let scale = 1.0 / (m as f64).sqrt();
    let k = 2.0 * PI * geom.d_over_lambda;
    let v_step = k * phi.sin() * theta.sin();
    let h_step = k * theta.cos();
    let mut out = Vec::with_capacity(m);
    for nv in 0..geom.n_v {
        for nh in 0..geom.n_h {
            out.push(C64::from_polar(scale, nv as f64 * v_step + nh as f64 * h_step));
        }
    }
    out
}

/// Spatial channel `H` with columns `√(M/N_l)·Σ_l α_l·a(φ_l, θ_l)`.
pub fn spatial_channel(paths: &PathSet, geom: &ArrayGeometry) -> Result<CMatrix> {
    if paths.users.is_empty() {
        return Err(Error::InvalidParameter("empty path set".into()));
    }
    let m = geom.m_total();
    let mut h = CMatrix::zeros(m, paths.users.len());
    for (k, user) in paths.users.iter().enumerate() {
        user.validate()?;
        let scale = (m as f64 / user.n_paths() as f64).sqrt();
        for ((alpha, &phi), &theta) in user.gains.iter().zip(&user.azimuths).zip(&user.zeniths) {
            let a = array_response(phi, theta, geom);
            for (i, ai) in a.iter().enumerate() {
                h[(i, k)] += alpha * ai * scale;
            }
        }
    }
    Ok(h)
}

/// Clustered mmWave channel in the angular domain.
pub fn clustered_channel(paths: &PathSet, geom: &ArrayGeometry) -> Result<ChannelRealization> {
    let h = spatial_channel(paths, geom)?;
    let u = steering_matrix(geom);
    Ok(ChannelRealization::new(u.ad_mul(&h), ChannelModel::Clustered))
}

/// Clustered channel with freshly drawn paths.
pub fn random_clustered_channel<R: Rng + ?Sized>(
    k_users: usize,
    n_paths: usize,
    geom: &ArrayGeometry,
    rng: &mut R,
) -> Result<ChannelRealization> {
    let paths = PathSet::random(k_users, n_paths, rng)?;
    clustered_channel(&paths, geom)
}

/// Angular channel with i.i.d. Bernoulli(θ)·CN(0,1) entries.
pub fn bernoulli_gaussian_channel<R: Rng + ?Sized>(
    m: usize,
    k: usize,
    theta: f64,
    rng: &mut R,
) -> Result<ChannelRealization> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::InvalidParameter(format!("sparsity θ must lie in (0, 1], got {theta}")));
    }
    if m == 0 || k == 0 {
        return Err(Error::Dimension(format!("channel must be non-empty, got {m}x{k}")));
    }
    // Both draws happen for every entry so the stream position does not
    // depend on the mask.
    let h = CMatrix::from_fn(m, k, |_, _| {
        let on = rng.random::<f64>() < theta;
        let g = complex_gaussian(rng);
        if on {
            g
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Ok(ChannelRealization::new(h, ChannelModel::BernoulliGaussian))
}

/// `U_Mᴴ·Y`.
pub fn to_angular(y: &CMatrix, u_m: &CMatrix) -> Result<CMatrix> {
    check_shape("steering matrix", u_m.shape(), (y.nrows(), y.nrows()))?;
    Ok(u_m.ad_mul(y))
}
