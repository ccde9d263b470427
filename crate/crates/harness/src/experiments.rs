//! Frame concentration and convergence-speed experiments.

use l3blind::channel::bernoulli_gaussian_channel;
use l3blind::detector::{objective, solve, SolverOptions};
use l3blind::manifold::polar_retract;
use l3blind::metrics::theoretical_objective_bound;
use l3blind::signal::{
    build_frame, concentration_statistic, concentration_tail_bound, synthesize_received, Constellation,
    ConstellationKind,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ConcentrationSettings, ConvergenceVariant, Method};
use crate::error::{HarnessError, Result};
use crate::seeds;
use crate::trial::random_symbol_matrix;

/// Tail-bound parameter `δ` whose event threshold
/// `(1/ln2)·S∞²·max(δ, δ²)` equals `threshold`.
pub fn bound_delta(threshold: f64, s_inf: f64) -> f64 {
    let d = threshold * std::f64::consts::LN_2 / (s_inf * s_inf);
    if d <= 1.0 {
        d
    } else {
        d.sqrt()
    }
}

/// Frame length from which the tail bound decays,
/// `(√K + √ln2)²·C² / (δ²·ln²2)` for a threshold `δ` on the statistic.
pub fn bound_onset(k: usize, c: f64, threshold: f64) -> f64 {
    let ln2 = std::f64::consts::LN_2;
    ((k as f64).sqrt() + ln2.sqrt()).powi(2) * c * c / (threshold * threshold * ln2 * ln2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRow {
    pub k_users: usize,
    pub c: f64,
    pub t_len: usize,
    pub trials: usize,
    pub exceedances: usize,
    pub frequency: f64,
    pub theory: f64,
    /// `T` at and beyond which the bound applies.
    pub onset: f64,
}

impl ConcentrationRow {
    /// Binomial standard deviation of `frequency` under the bound.
    pub fn bound_sigma(&self) -> f64 {
        let p = self.theory.clamp(0.0, 1.0);
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

/// Empirical `Pr[‖XXᴴ − I‖_F²/K > δ²]` over random frames against the tail
/// bound, for every `(K, T)`.
pub fn run_concentration_experiment(
    s: &ConcentrationSettings,
    constellation: ConstellationKind,
    base_seed: u64,
) -> Result<Vec<ConcentrationRow>> {
    if s.k_list.len() != s.c_list.len() {
        return Err(HarnessError::Config(format!("{} values of K but {} constants C", s.k_list.len(), s.c_list.len())));
    }
    if s.trials == 0 || !(s.delta2 > 0.0) || s.k_list.contains(&0) || s.t_list.contains(&0) {
        return Err(HarnessError::Config("concentration settings must be positive".into()));
    }
    let c = Constellation::new(constellation);
    let threshold = s.delta2.sqrt();
    let delta = bound_delta(threshold, c.peak_amplitude());
    let mut points = Vec::new();
    for (ki, (&k, &cc)) in s.k_list.iter().zip(&s.c_list).enumerate() {
        for (ti, &t) in s.t_list.iter().enumerate() {
            points.push((ki, k, cc, ti, t));
        }
    }
    Ok(points
        .par_iter()
        .map(|&(ki, k, cc, ti, t)| {
            let exceedances = (0..s.trials)
                .filter(|&trial| {
                    let seed = seeds::scenario_seed(base_seed, ki * s.t_list.len() + ti, trial);
                    let x = random_symbol_matrix(k, t, &c, &mut seeds::rng(seed));
                    concentration_statistic(&x).powi(2) > s.delta2
                })
                .count();
            ConcentrationRow {
                k_users: k,
                c: cc,
                t_len: t,
                trials: s.trials,
                exceedances,
                frequency: exceedances as f64 / s.trials as f64,
                theory: concentration_tail_bound(k, t, delta, cc),
                onset: bound_onset(k, cc, threshold),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantResult {
    pub variant: ConvergenceVariant,
    pub upper_bound: f64,
    /// Per-iteration mean of objective / upper bound; traces that stopped
    /// early hold their final value.
    pub mean_trace: Vec<f64>,
    pub median_trace: Vec<f64>,
    /// First iteration at or above the target per trial; `max_iters + 1`
    /// when never reached.
    pub crossings: Vec<usize>,
    pub median_crossing: f64,
    /// Mean normalized objective at the Stiefel factor of the true frame.
    pub planted_mean: f64,
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

struct ConvergenceTrial {
    normalized: Vec<f64>,
    planted: f64,
}

fn convergence_trial(
    v: &ConvergenceVariant,
    c: &Constellation,
    opts: &SolverOptions,
    upper: f64,
    seed: u64,
) -> Result<ConvergenceTrial> {
    let mut rng = seeds::rng(seed);
    let g = vec![1.0; v.k_users];
    let ch = bernoulli_gaussian_channel(v.m, v.k_users, v.theta, &mut rng)?;
    let frame = build_frame(v.k_users, v.t_len, c, &mut rng)?;
    let y = synthesize_received(&ch, &frame.x, &g, &g, v.sigma2, &mut rng)?.y_bar;
    let planted = objective(&y, &polar_retract(&frame.x.adjoint())?, &g, 3)? / upper;
    let (_, trace) = solve(&y, &g, opts, &mut seeds::rng(seeds::solver_seed(seed, Method::L3)))?;
    Ok(ConvergenceTrial { normalized: trace.objective_per_iter.iter().map(|o| o / upper).collect(), planted })
}

/// Normalized-objective traces of the polar iteration per variant. Trial
/// `i` uses the same seed in every variant.
pub fn run_convergence_experiment(
    variants: &[ConvergenceVariant],
    constellation: ConstellationKind,
    opts: &SolverOptions,
    target: f64,
    trials: usize,
    base_seed: u64,
) -> Result<Vec<VariantResult>> {
    opts.validate()?;
    if trials == 0 {
        return Err(HarnessError::Config("trials must be positive".into()));
    }
    let c = Constellation::new(constellation);
    let opts = SolverOptions { p_exponent: 3, precondition: false, ..opts.clone() };
    variants
        .iter()
        .map(|v| {
            if v.k_users == 0 || v.m < v.k_users || v.t_len <= 1 + c.id_length(v.k_users) || !(v.sigma2 >= 0.0) {
                return Err(HarnessError::Config(format!("invalid convergence variant {v:?}")));
            }
            let inv_snr = vec![v.sigma2; v.k_users];
            let (_, upper) = theoretical_objective_bound(v.m, v.k_users, v.theta, &inv_snr)?;
            let runs: Vec<ConvergenceTrial> = (0..trials)
                .into_par_iter()
                .map(|i| convergence_trial(v, &c, &opts, upper, seeds::scenario_seed(base_seed, 0, i)))
                .collect::<Result<_>>()?;
            let len = runs.iter().map(|r| r.normalized.len()).max().unwrap_or(0);
            let column = |j: usize| -> Vec<f64> {
                runs.iter().map(|r| *r.normalized.get(j).unwrap_or_else(|| r.normalized.last().unwrap())).collect()
            };
            let mean_trace = (0..len).map(|j| column(j).iter().sum::<f64>() / trials as f64).collect();
            let median_trace = (0..len).map(|j| median(&column(j))).collect();
            let crossings: Vec<usize> = runs
                .iter()
                .map(|r| r.normalized.iter().position(|&x| x >= target).unwrap_or(opts.max_iters + 1))
                .collect();
            let as_f64: Vec<f64> = crossings.iter().map(|&c| c as f64).collect();
            Ok(VariantResult {
                variant: v.clone(),
                upper_bound: upper,
                mean_trace,
                median_trace,
                median_crossing: median(&as_f64),
                crossings,
                planted_mean: runs.iter().map(|r| r.planted).sum::<f64>() / trials as f64,
            })
        })
        .collect()
}
