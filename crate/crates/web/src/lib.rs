//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each exported call simulates one seeded scenario and hands plain numeric
//! arrays to JavaScript. The `*_data` functions hold the logic and are
//! usable (and tested) natively.

use l3blind::channel::{bernoulli_gaussian_channel, random_clustered_channel, ArrayGeometry, ChannelRealization};
use l3blind::detector::{detect, objective, solve_from, SolverOptions};
use l3blind::manifold::{polar_retract, random_stiefel};
use l3blind::metrics::{evm, symbol_error_rate, theoretical_objective_bound};
use l3blind::signal::{build_frame, noise_variance_for_snr, synthesize_received, Constellation, ConstellationKind};
use l3blind::Result;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

fn rng(seed: u32) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed as u64)
}

fn draw_channel(
    clustered: bool,
    k_users: usize,
    n_h: usize,
    n_v: usize,
    theta: f64,
    n_paths: usize,
    rng: &mut ChaCha8Rng,
) -> Result<ChannelRealization> {
    if clustered {
        random_clustered_channel(k_users, n_paths, &ArrayGeometry::new(n_h, n_v)?, rng)
    } else {
        bernoulli_gaussian_channel(n_h * n_v, k_users, theta, rng)
    }
}

fn js(e: l3blind::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Magnitudes of the angular-domain channel `|H̄|`.
#[wasm_bindgen]
pub struct Heatmap {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    theta_effective: f64,
}

#[wasm_bindgen]
impl Heatmap {
    /// Number of angular bins `M`.
    #[wasm_bindgen(getter)]
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of users `K`.
    #[wasm_bindgen(getter)]
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row-major `M×K`.
    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }

    #[wasm_bindgen(getter, js_name = thetaEffective)]
    pub fn theta_effective(&self) -> f64 {
        self.theta_effective
    }
}

pub fn channel_heatmap_data(
    clustered: bool,
    k_users: usize,
    n_h: usize,
    n_v: usize,
    theta: f64,
    n_paths: usize,
    seed: u32,
) -> Result<Heatmap> {
    let ch = draw_channel(clustered, k_users, n_h, n_v, theta, n_paths, &mut rng(seed))?;
    let (m, k) = ch.h_bar.shape();
    let values = (0..m).flat_map(|i| (0..k).map(move |j| (i, j))).map(|(i, j)| ch.h_bar[(i, j)].norm()).collect();
    Ok(Heatmap { rows: m, cols: k, values, theta_effective: ch.theta_effective })
}

#[wasm_bindgen(js_name = channelHeatmap)]
pub fn channel_heatmap(
    clustered: bool,
    k_users: usize,
    n_h: usize,
    n_v: usize,
    theta: f64,
    n_paths: usize,
    seed: u32,
) -> std::result::Result<Heatmap, JsError> {
    channel_heatmap_data(clustered, k_users, n_h, n_v, theta, n_paths, seed).map_err(js)
}

/// ℓ3 objective along the ℓ3 and ℓ4 iterations from one shared start,
/// divided by the planted-solution level.
#[wasm_bindgen]
pub struct Traces {
    l3: Vec<f64>,
    l4: Vec<f64>,
    planted: f64,
}

#[wasm_bindgen]
impl Traces {
    pub fn l3(&self) -> Vec<f64> {
        self.l3.clone()
    }

    pub fn l4(&self) -> Vec<f64> {
        self.l4.clone()
    }

    /// Same normalization at the Stiefel factor of the true frame.
    #[wasm_bindgen(getter)]
    pub fn planted(&self) -> f64 {
        self.planted
    }
}

pub fn convergence_traces_data(
    k_users: usize,
    m: usize,
    t_len: usize,
    theta: f64,
    snr_db: f64,
    seed: u32,
) -> Result<Traces> {
    let mut r = rng(seed);
    let g = vec![1.0; k_users];
    let ch = bernoulli_gaussian_channel(m, k_users, theta, &mut r)?;
    let frame = build_frame(k_users, t_len, &Constellation::new(ConstellationKind::Qpsk), &mut r)?;
    let sigma2 = noise_variance_for_snr(k_users, t_len, snr_db);
    let y = synthesize_received(&ch, &frame.x, &g, &g, sigma2, &mut r)?.y_bar;
    let (_, upper) = theoretical_objective_bound(m, k_users, theta, &vec![sigma2; k_users])?;
    let init = random_stiefel(t_len, k_users, &mut r)?;
    let run = |p: u32| -> Result<Vec<f64>> {
        let mut values = Vec::new();
        let opts = SolverOptions { p_exponent: p, max_iters: 60, ..SolverOptions::default() };
        solve_from(&y, &g, &opts, init.clone(), &mut |_, a| {
            values.push(objective(&y, a, &g, 3).map_or(f64::NAN, |v| v / upper));
        })?;
        Ok(values)
    };
    let planted = objective(&y, &polar_retract(&frame.x.adjoint())?, &g, 3)? / upper;
    Ok(Traces { l3: run(3)?, l4: run(4)?, planted })
}

#[wasm_bindgen(js_name = convergenceTraces)]
pub fn convergence_traces(
    k_users: usize,
    m: usize,
    t_len: usize,
    theta: f64,
    snr_db: f64,
    seed: u32,
) -> std::result::Result<Traces, JsError> {
    convergence_traces_data(k_users, m, t_len, theta, snr_db, seed).map_err(js)
}

/// Payload symbols after blind detection, scaled back to the alphabet.
#[wasm_bindgen]
pub struct Detection {
    points: Vec<f64>,
    users: Vec<u32>,
    evm: f64,
    ser: f64,
    iters: usize,
}

#[wasm_bindgen]
impl Detection {
    /// Interleaved `re, im` pairs.
    pub fn points(&self) -> Vec<f64> {
        self.points.clone()
    }

    /// User index of each point.
    pub fn users(&self) -> Vec<u32> {
        self.users.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn evm(&self) -> f64 {
        self.evm
    }

    #[wasm_bindgen(getter)]
    pub fn ser(&self) -> f64 {
        self.ser
    }

    #[wasm_bindgen(getter)]
    pub fn iters(&self) -> usize {
        self.iters
    }
}

#[allow(clippy::too_many_arguments)]
pub fn detect_constellation_data(
    clustered: bool,
    qam16: bool,
    k_users: usize,
    n_h: usize,
    n_v: usize,
    t_len: usize,
    theta: f64,
    snr_db: f64,
    precondition: bool,
    seed: u32,
) -> Result<Detection> {
    let mut r = rng(seed);
    let c = Constellation::new(if qam16 { ConstellationKind::Qam16 } else { ConstellationKind::Qpsk });
    let g = vec![1.0; k_users];
    let ch = draw_channel(clustered, k_users, n_h, n_v, theta, 5, &mut r)?;
    let frame = build_frame(k_users, t_len, &c, &mut r)?;
    let sigma2 = noise_variance_for_snr(k_users, t_len, snr_db);
    let y = synthesize_received(&ch, &frame.x, &g, &g, sigma2, &mut r)?.y_bar;
    let opts = SolverOptions { precondition, ..SolverOptions::default() };
    let det = detect(&y, &g, &frame.header_codebook(), &c, &opts, &mut r)?;
    let start = frame.payload_start();
    let scale = (t_len as f64).sqrt();
    let mut points = Vec::with_capacity(2 * k_users * (t_len - start));
    let mut users = Vec::with_capacity(k_users * (t_len - start));
    for k in 0..k_users {
        for t in start..t_len {
            let z = det.x_hat[(k, t)] * scale;
            points.extend([z.re, z.im]);
            users.push(k as u32);
        }
    }
    let payload = |rows: &[Vec<usize>]| -> Vec<Vec<usize>> { rows.iter().map(|r| r[start..].to_vec()).collect() };
    Ok(Detection {
        points,
        users,
        evm: evm(&det.x_hat, &frame.x)?,
        ser: symbol_error_rate(&payload(&det.symbols.labels), &payload(&frame.labels))?,
        iters: det.trace.iters_run,
    })
}

#[allow(clippy::too_many_arguments)]
#[wasm_bindgen(js_name = detectConstellation)]
pub fn detect_constellation(
    clustered: bool,
    qam16: bool,
    k_users: usize,
    n_h: usize,
    n_v: usize,
    t_len: usize,
    theta: f64,
    snr_db: f64,
    precondition: bool,
    seed: u32,
) -> std::result::Result<Detection, JsError> {
    detect_constellation_data(clustered, qam16, k_users, n_h, n_v, t_len, theta, snr_db, precondition, seed).map_err(js)
}
