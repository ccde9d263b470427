use serde::{Deserialize, Serialize};

use crate::signal::Constellation;
use crate::CMatrix;

/// Hard decisions for a `K×T` estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Demodulated {
    /// `labels[k][t]`, Gray labels.
    pub labels: Vec<Vec<usize>>,
    /// Decided points, unscaled.
    pub symbols: CMatrix,
}

impl Demodulated {
    /// Bits of user `k` from column `start` on, MSB first per symbol.
    pub fn bits(&self, c: &Constellation, k: usize, start: usize) -> Vec<u8> {
        self.labels[k][start..].iter().flat_map(|&l| c.label_bits(l)).collect()
    }
}

/// Nearest-point decisions on `√T·x_hat`.
pub fn demodulate(x_hat: &CMatrix, c: &Constellation) -> Demodulated {
    let (k, t) = x_hat.shape();
    let scale = (t as f64).sqrt();
    let labels: Vec<Vec<usize>> =
        (0..k).map(|i| (0..t).map(|j| c.nearest_label(x_hat[(i, j)] * scale)).collect()).collect();
    let symbols = CMatrix::from_fn(k, t, |i, j| c.points[labels[i][j]]);
    Demodulated { labels, symbols }
}

/// Nearest point by exhaustive search over the alphabet, for tests.
#[cfg(test)]
fn exhaustive_nearest(z: crate::C64, c: &Constellation) -> usize {
    let d: Vec<f64> = c.points.iter().map(|p| (z - p).norm()).collect();
    let best = d.iter().cloned().fold(f64::INFINITY, f64::min);
    d.iter().position(|&x| x == best).unwrap()
}
