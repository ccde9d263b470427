//! Transmit frames, received-signal synthesis and data concentration.
//!
//! A frame is the `K×T` matrix `X` scaled by `1/√T`. Column 0 carries a
//! reference symbol shared by all users; the next `⌈log_|S| K⌉` columns
//! carry each user's index in base `|S|`; the rest is uniform payload.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelRealization;
use crate::error::{check_shape, Error, Result};
use crate::{complex_gaussian, CMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstellationKind {
    #[serde(rename = "qpsk", alias = "QPSK")]
    Qpsk,
    #[serde(rename = "qam16", alias = "QAM16")]
    Qam16,
}

impl std::str::FromStr for ConstellationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qpsk" => Ok(Self::Qpsk),
            "qam16" | "16qam" => Ok(Self::Qam16),
            other => Err(Error::InvalidParameter(format!("unknown constellation `{other}`"))),
        }
    }
}

/// Unit-power, zero-mean alphabet indexed by Gray label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constellation {
    pub kind: ConstellationKind,
    /// `points[label]` is the symbol carrying bit pattern `label`.
    pub points: Vec<C64>,
    pub bits_per_symbol: u32,
}

/// Binary-reflected Gray code of `n`.
fn gray(n: usize) -> usize {
    n ^ (n >> 1)
}

impl Constellation {
    pub fn new(kind: ConstellationKind) -> Self {
        match kind {
            ConstellationKind::Qpsk => {
                // Bit 1 selects the in-phase sign, bit 0 the quadrature sign.
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let points = (0..4)
                    .map(|label| {
                        let i = if label & 2 == 0 { s } else { -s };
                        let q = if label & 1 == 0 { s } else { -s };
                        C64::new(i, q)
                    })
                    .collect();
                Self { kind, points, bits_per_symbol: 2 }
            }
            ConstellationKind::Qam16 => {
                let levels = [-3.0, -1.0, 1.0, 3.0];
                let scale = 1.0 / 10f64.sqrt();
                let mut points = vec![C64::new(0.0, 0.0); 16];
                for i in 0..4 {
                    for q in 0..4 {
                        let label = (gray(i) << 2) | gray(q);
                        points[label] = C64::new(levels[i] * scale, levels[q] * scale);
                    }
                }
                Self { kind, points, bits_per_symbol: 4 }
            }
        }
    }

    /// Alphabet size `|S|`.
    pub fn size(&self) -> usize {
        self.points.len()
    }

    /// Largest symbol magnitude `S_∞`.
    pub fn peak_amplitude(&self) -> f64 {
        self.points.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    /// Symbol used as the common reference: Gray label 0.
    pub fn reference_symbol(&self) -> C64 {
        self.points[0]
    }

    /// Number of header symbols needed to give `k_users` distinct IDs,
    /// `⌈log_|S| K⌉`.
    pub fn id_length(&self, k_users: usize) -> usize {
        let base = self.size();
        let mut len = 0;
        let mut cap = 1usize;
        while cap < k_users {
            cap = cap.saturating_mul(base);
            len += 1;
        }
        len
    }

    /// Big-endian base-|S| digits of `user`, as Gray labels.
    pub fn id_labels(&self, user: usize, len: usize) -> Vec<usize> {
        let base = self.size();
        let mut digits = vec![0; len];
        let mut rest = user;
        for d in digits.iter_mut().rev() {
            *d = rest % base;
            rest /= base;
        }
        digits
    }

    /// Nearest point; ties go to the smaller label.
    pub fn nearest_label(&self, z: C64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (label, p) in self.points.iter().enumerate() {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = label;
            }
        }
        best
    }

    /// Bits of `label`, most significant first.
    pub fn label_bits(&self, label: usize) -> impl Iterator<Item = u8> + '_ {
        (0..self.bits_per_symbol).rev().map(move |b| ((label >> b) & 1) as u8)
    }

    /// Minimum distance between two distinct points.
    pub fn min_distance(&self) -> f64 {
        let mut d = f64::INFINITY;
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                d = d.min((a - b).norm());
            }
        }
        d
    }
}

/// Transmitted symbols plus header metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DataFrame {
    /// `K×T`, scaled by `1/√T`.
    pub x: CMatrix,
    /// Common reference symbol before scaling.
    pub ref_value: C64,
    /// `id_headers[k]` is user `k`'s ID sequence before scaling.
    pub id_headers: Vec<Vec<C64>>,
    /// Gray labels of every symbol, `labels[k][t]`.
    pub labels: Vec<Vec<usize>>,
    pub constellation: Constellation,
}

impl DataFrame {
    pub fn k_users(&self) -> usize {
        self.x.nrows()
    }

    pub fn t_len(&self) -> usize {
        self.x.ncols()
    }

    pub fn header_len(&self) -> usize {
        self.id_headers.first().map_or(0, Vec::len)
    }

    /// First payload column.
    pub fn payload_start(&self) -> usize {
        1 + self.header_len()
    }

    /// Payload bits of user `k`.
    pub fn payload_bits(&self, k: usize) -> Vec<u8> {
        self.labels[k][self.payload_start()..].iter().flat_map(|&l| self.constellation.label_bits(l)).collect()
    }

    pub fn header_codebook(&self) -> HeaderCodebook {
        HeaderCodebook { ref_value: self.ref_value, id_headers: self.id_headers.clone() }
    }
}

/// What the receiver knows about the frame layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeaderCodebook {
    pub ref_value: C64,
    pub id_headers: Vec<Vec<C64>>,
}

impl HeaderCodebook {
    pub fn for_users(c: &Constellation, k_users: usize) -> Self {
        let len = c.id_length(k_users);
        let id_headers = (0..k_users).map(|k| c.id_labels(k, len).into_iter().map(|l| c.points[l]).collect()).collect();
        Self { ref_value: c.reference_symbol(), id_headers }
    }

    pub fn header_len(&self) -> usize {
        self.id_headers.first().map_or(0, Vec::len)
    }
}

/// Builds a `K×T` frame: reference column, ID header, uniform payload.
pub fn build_frame<R: Rng + ?Sized>(k_users: usize, t_len: usize, c: &Constellation, rng: &mut R) -> Result<DataFrame> {
    if k_users == 0 {
        return Err(Error::Dimension("frame needs at least one user".into()));
    }
    let id_len = c.id_length(k_users);
    if t_len <= 1 + id_len {
        return Err(Error::InvalidParameter(format!(
            "frame length {t_len} leaves no payload after {} header symbols",
            1 + id_len
        )));
    }
    let scale = 1.0 / (t_len as f64).sqrt();
    let codebook = HeaderCodebook::for_users(c, k_users);
    let mut labels = vec![vec![0usize; t_len]; k_users];
    for (k, row) in labels.iter_mut().enumerate() {
        row[0] = 0;
        row[1..1 + id_len].copy_from_slice(&c.id_labels(k, id_len));
    }
    // Payload is drawn column by column so that a frame's prefix does not
    // depend on K.
    for t in 1 + id_len..t_len {
        for row in labels.iter_mut() {
            row[t] = rng.random_range(0..c.size());
        }
    }
    let x = CMatrix::from_fn(k_users, t_len, |k, t| c.points[labels[k][t]] * scale);
    Ok(DataFrame {
        x,
        ref_value: codebook.ref_value,
        id_headers: codebook.id_headers,
        labels,
        constellation: c.clone(),
    })
}

/// Noisy angular-domain observation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReceivedSignal {
    /// `M×T`.
    pub y_bar: CMatrix,
    pub noise_variance: f64,
    pub g_diag: Vec<f64>,
    pub p_diag: Vec<f64>,
}

/// Noise variance `K/(SNR·T)` for a linear SNR.
pub fn noise_variance_for_snr(k_users: usize, t_len: usize, snr_db: f64) -> f64 {
    let snr = 10f64.powf(snr_db / 10.0);
    k_users as f64 / (snr * t_len as f64)
}

/// `Ȳ = H̄·G^{1/2}·P^{1/2}·X + Z̄` with `Z̄` i.i.d. `CN(0, σ²)`.
pub fn synthesize_received<R: Rng + ?Sized>(
    channel: &ChannelRealization,
    x: &CMatrix,
    g_diag: &[f64],
    p_diag: &[f64],
    sigma_z2: f64,
    rng: &mut R,
) -> Result<ReceivedSignal> {
    let (m, k) = channel.h_bar.shape();
    if x.nrows() != k {
        return Err(Error::Dimension(format!("channel has {k} users but frame has {} rows", x.nrows())));
    }
    if g_diag.len() != k || p_diag.len() != k {
        return Err(Error::Dimension(format!(
            "expected {k} fading/power entries, got {}/{}",
            g_diag.len(),
            p_diag.len()
        )));
    }
    if g_diag.iter().chain(p_diag).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidParameter("fading and power must be strictly positive".into()));
    }
    if !(sigma_z2 >= 0.0) {
        return Err(Error::InvalidParameter(format!("noise variance must be non-negative, got {sigma_z2}")));
    }
    let mut hgp = channel.h_bar.clone();
    for (mut col, (g, p)) in hgp.column_iter_mut().zip(g_diag.iter().zip(p_diag)) {
        col *= C64::new((g * p).sqrt(), 0.0);
    }
    let mut y_bar = hgp * x;
    if sigma_z2 > 0.0 {
        let sigma = sigma_z2.sqrt();
        for z in y_bar.iter_mut() {
            *z += complex_gaussian(rng) * sigma;
        }
    }
    check_shape("received signal", y_bar.shape(), (m, x.ncols()))?;
    Ok(ReceivedSignal { y_bar, noise_variance: sigma_z2, g_diag: g_diag.to_vec(), p_diag: p_diag.to_vec() })
}

/// `‖XXᴴ − I_K‖_F / √K`.
pub fn concentration_statistic(x: &CMatrix) -> f64 {
    let k = x.nrows();
    if k == 0 {
        return 0.0;
    }
    (x * x.adjoint() - CMatrix::identity(k, k)).norm() / (k as f64).sqrt()
}

/// Right-hand side `2·exp(−(δ√T/C − √K)²)` of the concentration tail bound.
pub fn concentration_tail_bound(k_users: usize, t_len: usize, delta: f64, c: f64) -> f64 {
    let arg = delta * (t_len as f64).sqrt() / c - (k_users as f64).sqrt();
    2.0 * (-arg * arg).exp()
}
