//! One Monte Carlo trial: scenario generation and every requested detector.

use std::time::Instant;

use l3blind::channel::{
    bernoulli_gaussian_channel, random_clustered_channel, ArrayGeometry, ChannelModel, ChannelRealization,
};
use l3blind::detector::{
    demodulate, detect, objective, pilot_zf_baseline, resolve_ambiguity_rows, riemannian_gd_baseline, SolverOptions,
    StopReason,
};
use l3blind::manifold::polar_retract;
use l3blind::metrics::{
    achievable_rate_blind, achievable_rate_training, bit_error_rate, symbol_error_rate, theoretical_objective_bound,
    TrialMetrics,
};
use l3blind::signal::{build_frame, synthesize_received, Constellation, DataFrame};
use l3blind::{CMatrix, C64};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::config::{FadingModel, Method, SystemConfig};
use crate::error::Result;
use crate::seeds;

/// Per-user large-scale gain in dB at distance `d` metres, 28 GHz.
pub fn log_distance_gain_db(d: f64, shadowing_db: f64) -> f64 {
    -32.4 - 18.5 * d.log10() - 20.0 * 28f64.log10() + shadowing_db
}

/// Draws `G_kk`: distance uniform on (20, 200) m and shadowing taken as the
/// real part of a `CN(0, 4.2)` draw.
pub fn draw_fading<R: Rng + ?Sized>(model: FadingModel, k: usize, rng: &mut R) -> Vec<f64> {
    match model {
        FadingModel::Identity => vec![1.0; k],
        FadingModel::LogDistance => {
            let shadow = Normal::new(0.0, 2.1f64.sqrt()).expect("valid normal");
            (0..k)
                .map(|_| {
                    let d = rng.random_range(20.0..200.0);
                    10f64.powf(log_distance_gain_db(d, shadow.sample(rng)) / 10.0)
                })
                .collect()
        }
    }
}

/// Everything a trial shares across methods.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub channel: ChannelRealization,
    pub frame: DataFrame,
    pub g_diag: Vec<f64>,
    pub p_diag: Vec<f64>,
    pub sigma2: f64,
    pub y_bar: CMatrix,
    pub pilots: CMatrix,
    pub y_pilot: CMatrix,
}

impl Scenario {
    /// Sparsity level used for normalization: `θ` for the Bernoulli-Gaussian
    /// model, the measured level otherwise.
    pub fn theta(&self, cfg: &SystemConfig) -> f64 {
        match self.channel.model {
            ChannelModel::BernoulliGaussian => cfg.theta,
            ChannelModel::Clustered => self.channel.theta_effective.max(f64::MIN_POSITIVE),
        }
    }

    /// Effective per-user gains `G_kk·P_kk` seen by the detector.
    pub fn gains(&self) -> Vec<f64> {
        self.g_diag.iter().zip(&self.p_diag).map(|(g, p)| g * p).collect()
    }
}

/// Noise variance `Σ_k G_kk / (T·SNR)`.
pub fn noise_variance(g_diag: &[f64], t_len: usize, snr_db: f64) -> f64 {
    g_diag.iter().sum::<f64>() / (t_len as f64 * 10f64.powf(snr_db / 10.0))
}

/// Draws a scenario. The stream order is fixed so that the same seed gives
/// the same channel, frame and noise whichever methods run.
pub fn draw_scenario(cfg: &SystemConfig, seed: u64) -> Result<Scenario> {
    let mut rng = seeds::rng(seed);
    let k = cfg.k_users;
    let channel = match cfg.channel_model {
        ChannelModel::BernoulliGaussian => bernoulli_gaussian_channel(cfg.m(), k, cfg.theta, &mut rng)?,
        ChannelModel::Clustered => {
            let geom = ArrayGeometry::new(cfg.n_h, cfg.n_v)?;
            random_clustered_channel(k, cfg.n_paths, &geom, &mut rng)?
        }
    };
    let c = Constellation::new(cfg.constellation);
    let frame = build_frame(k, cfg.t_len, &c, &mut rng)?;
    let g_diag = draw_fading(cfg.fading_model, k, &mut rng);
    let p_diag = cfg.power_vec();
    let sigma2 = noise_variance(&g_diag, cfg.t_len, cfg.snr_db);
    let y_bar = synthesize_received(&channel, &frame.x, &g_diag, &p_diag, sigma2, &mut rng)?.y_bar;
    let scale = 1.0 / (cfg.t_len as f64).sqrt();
    let pilots = CMatrix::from_fn(k, cfg.pilot_len, |_, _| c.points[rng.random_range(0..c.size())] * scale);
    let y_pilot = synthesize_received(&channel, &pilots, &g_diag, &p_diag, sigma2, &mut rng)?.y_bar;
    Ok(Scenario { channel, frame, g_diag, p_diag, sigma2, y_bar, pilots, y_pilot })
}

/// Solver output of one method before metrics.
struct Estimate {
    x_hat: CMatrix,
    labels: Vec<Vec<usize>>,
    iters: usize,
    stop_reason: Option<StopReason>,
    final_eta: Option<f64>,
}

fn run_method(cfg: &SystemConfig, sc: &Scenario, method: Method, seed: u64) -> Result<Estimate> {
    let mut rng = seeds::rng(seed);
    let c = Constellation::new(cfg.constellation);
    let book = sc.frame.header_codebook();
    let gains = sc.gains();
    let with_p = |p| SolverOptions { p_exponent: p, ..cfg.solver.clone() };
    match method {
        Method::L3 | Method::L4 => {
            let opts = with_p(if method == Method::L3 { 3 } else { 4 });
            let det = detect(&sc.y_bar, &gains, &book, &c, &opts, &mut rng)?;
            Ok(Estimate {
                x_hat: det.x_hat,
                labels: det.symbols.labels,
                iters: det.trace.iters_run,
                stop_reason: det.trace.stop_reason,
                final_eta: Some(det.trace.final_eta()),
            })
        }
        Method::Rgd => {
            let (a, trace) = riemannian_gd_baseline(&sc.y_bar, &gains, &with_p(3), &mut rng)?;
            let (x_hat, _) = resolve_ambiguity_rows(&a.matrix().adjoint(), &book)?;
            let labels = demodulate(&x_hat, &c).labels;
            Ok(Estimate {
                x_hat,
                labels,
                iters: trace.iters_run,
                stop_reason: trace.stop_reason,
                final_eta: Some(trace.final_eta()),
            })
        }
        Method::Pilot => {
            let x_hat = pilot_zf_baseline(&sc.y_pilot, &sc.pilots, &sc.y_bar, &gains, &cfg.pilot)?;
            let labels = demodulate(&x_hat, &c).labels;
            Ok(Estimate { x_hat, labels, iters: 0, stop_reason: None, final_eta: None })
        }
    }
}

/// ℓ3 objective at the estimate's Stiefel factor over the expected value at
/// the planted solution.
fn normalized_objective(cfg: &SystemConfig, sc: &Scenario, x_hat: &CMatrix) -> Result<f64> {
    let gains = sc.gains();
    let a = polar_retract(&x_hat.adjoint())?;
    let value = objective(&sc.y_bar, &a, &gains, 3)?;
    let inv_snr: Vec<f64> = gains.iter().map(|g| sc.sigma2 / g).collect();
    let (_, upper) = theoretical_objective_bound(cfg.m(), cfg.k_users, sc.theta(cfg), &inv_snr)?;
    Ok(value / upper)
}

fn compute_metrics(cfg: &SystemConfig, sc: &Scenario, method: Method, est: &Estimate) -> Result<TrialMetrics> {
    let f = &sc.frame;
    let start = f.payload_start();
    let payload = |rows: &[Vec<usize>]| -> Vec<Vec<usize>> { rows.iter().map(|r| r[start..].to_vec()).collect() };
    let ser = symbol_error_rate(&payload(&est.labels), &payload(&f.labels))?;
    let bits = |rows: &[Vec<usize>]| -> Vec<u8> {
        rows.iter()
            .flat_map(|r| r[start..].iter().flat_map(|&l| f.constellation.label_bits(l)).collect::<Vec<_>>())
            .collect()
    };
    let ber = bit_error_rate(&bits(&est.labels), &bits(&f.labels))?;
    let rate_training = match method {
        Method::Pilot => Some(achievable_rate_training(&est.x_hat, &f.x, cfg.t_len, cfg.pilot_len)?),
        _ => None,
    };
    Ok(TrialMetrics {
        evm: l3blind::metrics::evm(&est.x_hat, &f.x)?,
        ser,
        ber,
        rate_blind: achievable_rate_blind(&est.x_hat, &f.x, cfg.t_len)?,
        rate_training,
        normalized_objective: normalized_objective(cfg, sc, &est.x_hat)?,
        iters: est.iters,
        wall_time: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub fingerprint: String,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sweep_axis: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sweep_value: Option<f64>,
    pub sweep_index: usize,
    pub trial: usize,
    /// Seed of the scenario shared by every method of this trial.
    pub seed: u64,
    pub solver_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub metrics: Option<TrialMetrics>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub stop_reason: Option<StopReason>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub final_eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

/// Where a trial sits in a sweep.
#[derive(Debug, Clone)]
pub struct TrialCoords {
    pub fingerprint: String,
    pub sweep_axis: Option<String>,
    pub sweep_value: Option<f64>,
    pub sweep_index: usize,
    pub trial: usize,
    pub seed: u64,
}

/// Runs every configured method on one scenario. Failures become records
/// with `error` set.
pub fn run_trial(cfg: &SystemConfig, coords: &TrialCoords) -> Vec<TrialRecord> {
    let scenario = draw_scenario(cfg, coords.seed);
    cfg.methods
        .iter()
        .map(|&method| {
            let solver_seed = seeds::solver_seed(coords.seed, method);
            let mut rec = TrialRecord {
                fingerprint: coords.fingerprint.clone(),
                method,
                sweep_axis: coords.sweep_axis.clone(),
                sweep_value: coords.sweep_value,
                sweep_index: coords.sweep_index,
                trial: coords.trial,
                seed: coords.seed,
                solver_seed,
                metrics: None,
                stop_reason: None,
                final_eta: None,
                error: None,
            };
            let sc = match &scenario {
                Ok(sc) => sc,
                Err(e) => {
                    rec.error = Some(format!("scenario: {e}"));
                    return rec;
                }
            };
            let started = Instant::now();
            let outcome = run_method(cfg, sc, method, solver_seed).and_then(|est| {
                let elapsed = started.elapsed().as_secs_f64();
                let mut m = compute_metrics(cfg, sc, method, &est)?;
                if cfg.record_timing {
                    m.wall_time = Some(elapsed);
                }
                Ok((m, est))
            });
            match outcome {
                Ok((m, est)) => {
                    rec.metrics = Some(m);
                    rec.stop_reason = est.stop_reason;
                    rec.final_eta = est.final_eta;
                }
                Err(e) => rec.error = Some(e.to_string()),
            }
            rec
        })
        .collect()
}

/// Unit-modulus noise-free frame symbols, for experiments that only need `X`.
pub fn random_symbol_matrix<R: Rng + ?Sized>(k: usize, t: usize, c: &Constellation, rng: &mut R) -> CMatrix {
    let s = C64::new(1.0 / (t as f64).sqrt(), 0.0);
    CMatrix::from_fn(k, t, |_, _| c.points[rng.random_range(0..c.size())] * s)
}
