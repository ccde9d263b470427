//! Removal of the phase-permutation ambiguity `Ξ = Σ·Π`.
//!
//! Row `k` of the estimate is rotated so its first symbol has the phase of
//! the shared reference symbol. The rotated ID headers are then matched to
//! the known user IDs by minimum total ℓ2 distance.

use serde::{Deserialize, Serialize};

use super::assignment::min_cost_assignment;
use crate::error::{Error, Result};
use crate::manifold::StiefelPoint;
use crate::signal::HeaderCodebook;
use crate::{CMatrix, C64};

/// First-column magnitude below which a row's phase cannot be read.
const PHASE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbiguityResolution {
    /// Unit-modulus correction applied to row `i` of the raw estimate.
    pub phase_corrections: Vec<C64>,
    /// `permutation[k]` is the raw row assigned to user `k`.
    pub permutation: Vec<usize>,
    /// Header distance of each user's assigned row.
    pub match_distances: Vec<f64>,
    /// Raw rows whose reference entry was too small to read a phase from.
    pub phase_failures: Vec<usize>,
}

/// Resolves the ambiguity of a solver output `A`, whose adjoint estimates `X`.
pub fn resolve_ambiguity(a_final: &StiefelPoint, codebook: &HeaderCodebook) -> Result<(CMatrix, AmbiguityResolution)> {
    resolve_ambiguity_rows(&a_final.matrix().adjoint(), codebook)
}

/// Resolves the ambiguity of a `K×T` row estimate of `X`.
pub fn resolve_ambiguity_rows(x_est: &CMatrix, codebook: &HeaderCodebook) -> Result<(CMatrix, AmbiguityResolution)> {
    let (k, t) = x_est.shape();
    let hlen = codebook.header_len();
    if codebook.id_headers.len() != k {
        return Err(Error::Dimension(format!(
            "codebook has {} users, estimate has {k} rows",
            codebook.id_headers.len()
        )));
    }
    if t < 1 + hlen {
        return Err(Error::Dimension(format!("estimate has {t} columns, header needs {}", 1 + hlen)));
    }
    if codebook.ref_value.norm() == 0.0 {
        return Err(Error::InvalidParameter("reference symbol must be non-zero".into()));
    }

    let ref_phase = codebook.ref_value / codebook.ref_value.norm();
    let mut phase_corrections = Vec::with_capacity(k);
    let mut phase_failures = Vec::new();
    let mut rotated = x_est.clone();
    for i in 0..k {
        let first = x_est[(i, 0)];
        let c = if first.norm() > PHASE_FLOOR {
            ref_phase * first.norm() / first
        } else {
            phase_failures.push(i);
            C64::new(1.0, 0.0)
        };
        let mut row = rotated.row_mut(i);
        row *= c;
        phase_corrections.push(c);
    }

    let scale = 1.0 / (t as f64).sqrt();
    let cost: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            codebook
                .id_headers
                .iter()
                .map(|id| {
                    id.iter().enumerate().map(|(j, s)| (rotated[(i, 1 + j)] - s * scale).norm_sqr()).sum::<f64>().sqrt()
                })
                .collect()
        })
        .collect();
    let permutation = min_cost_assignment(&cost);
    let match_distances = permutation.iter().enumerate().map(|(user, &row)| cost[row][user]).collect();

    let mut x_hat = CMatrix::zeros(k, t);
    for (user, &row) in permutation.iter().enumerate() {
        x_hat.set_row(user, &rotated.row(row));
    }
    Ok((x_hat, AmbiguityResolution { phase_corrections, permutation, match_distances, phase_failures }))
}
