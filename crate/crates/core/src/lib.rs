//! Blind data detection for uplink massive MIMO with sparse angular-domain
//! channels.
//!
//! The receiver never sees pilots. It projects the angular-domain signal
//! `Ȳ` onto a `T×K` frame `A` with orthonormal columns and maximizes the
//! cubed ℓ3 norm `‖Ȳ·A·G^{-1/2}‖₃³`. Sparse channels make the maximizer
//! line up with `Xᴴ`, up to a per-user phase and a user permutation, which a
//! single reference symbol and a short user-ID header remove.
//!
//! Modules:
//!
//! * [`manifold`]: complex Stiefel primitives (Haar sampling, polar
//!   retraction, tangent projection).
//! * [`channel`]: clustered mmWave and Bernoulli-Gaussian channels, DFT
//!   steering matrix.
//! * [`signal`]: constellations, frames with reference/ID headers, noisy
//!   received signal, data concentration.
//! * [`detector`]: the polar-iteration solver, ambiguity resolution,
//!   preconditioning and baselines.
//! * [`metrics`]: EVM, achievable rates, error rates, closed-form objective
//!   levels.

pub mod channel;
pub mod detector;
pub mod error;
pub mod manifold;
pub mod metrics;
pub mod signal;

pub use error::{Error, Result};

pub use nalgebra::Complex;
use nalgebra::DMatrix;

/// Complex double.
pub type C64 = Complex<f64>;

/// Dense complex matrix used throughout the crate.
pub type CMatrix = DMatrix<C64>;

/// Draws a circularly-symmetric standard complex Gaussian, `E|z|² = 1`.
pub fn complex_gaussian<R: rand::Rng + ?Sized>(rng: &mut R) -> C64 {
    use rand_distr::{Distribution, StandardNormal};
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix with i.i.d. standard complex Gaussian entries, filled column-major.
pub fn gaussian_matrix<R: rand::Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Real inner product `Re tr(aᴴ b)`.
pub fn real_inner(a: &CMatrix, b: &CMatrix) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}
