//! ℓp-norm maximization over the Stiefel manifold and the detection
//! pipeline around it.
//!
//! The solver maximizes `Ψ(A) = Σ |Ȳ·A·G^{-1/2}|^p` (p = 3 by default) with
//! the step `A ← Polar(∇Ψ(A))`. Because `Ψ` is convex, the linear maximizer
//! on the manifold is also the best point on the segment towards it, so
//! the iteration needs no step size and `Ψ` never decreases.

mod ambiguity;
mod assignment;
mod baselines;
mod demod;
mod precondition;

pub use ambiguity::{resolve_ambiguity, resolve_ambiguity_rows, AmbiguityResolution};
pub use assignment::min_cost_assignment;
pub use baselines::{
    estimate_sparse_channel, pilot_zf_baseline, riemannian_gd_baseline, soft_threshold, zero_forcing, PilotOptions,
};
pub use demod::{demodulate, Demodulated};
pub use precondition::{least_squares_reproject, postprocess, precondition};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_shape, Error, Result};
use crate::manifold::{polar_decompose, random_stiefel, StiefelPoint};
use crate::signal::{Constellation, HeaderCodebook};
use crate::{real_inner, CMatrix, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// 3 for the ℓ3 objective, 4 for ℓ4.
    pub p_exponent: u32,
    pub max_iters: usize,
    /// Stop once `η(Aʲ) < eta_tol · max(η(A⁰), 1)`.
    pub eta_tol: f64,
    /// Stop once the relative objective change falls below this.
    pub obj_rel_tol: f64,
    pub precondition: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { p_exponent: 3, max_iters: 200, eta_tol: 1e-6, obj_rel_tol: 1e-10, precondition: false }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !matches!(self.p_exponent, 3 | 4) {
            return Err(Error::InvalidParameter(format!("p_exponent must be 3 or 4, got {}", self.p_exponent)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        if !(self.eta_tol >= 0.0 && self.obj_rel_tol >= 0.0) {
            return Err(Error::InvalidParameter("tolerances must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    EtaTol,
    ObjTol,
    MaxIters,
}

/// Objective and optimality metric per iterate; entry `j` belongs to `Aʲ`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    pub objective_per_iter: Vec<f64>,
    pub eta_per_iter: Vec<f64>,
    /// Number of updates performed.
    pub iters_run: usize,
    pub stop_reason: Option<StopReason>,
    pub restarts: u32,
    pub objective_evals: usize,
    pub gradient_evals: usize,
}

impl SolveTrace {
    pub fn final_objective(&self) -> f64 {
        self.objective_per_iter.last().copied().unwrap_or(0.0)
    }

    pub fn final_eta(&self) -> f64 {
        self.eta_per_iter.last().copied().unwrap_or(f64::NAN)
    }

    /// Largest drop between consecutive objective values (0 when monotone).
    pub fn max_decrease(&self) -> f64 {
        self.objective_per_iter.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max)
    }
}

fn inv_sqrt_fading(g_diag: &[f64], k: usize) -> Result<Vec<f64>> {
    if g_diag.len() != k {
        return Err(Error::Dimension(format!("expected {k} fading coefficients, got {}", g_diag.len())));
    }
    g_diag
        .iter()
        .map(|&g| {
            if g > 0.0 {
                Ok(1.0 / g.sqrt())
            } else {
                Err(Error::InvalidParameter(format!("fading coefficients must be positive, got {g}")))
            }
        })
        .collect()
}

/// `W = Ȳ·A·G^{-1/2}`.
fn projected(y_bar: &CMatrix, a: &CMatrix, inv_sqrt_g: &[f64]) -> CMatrix {
    let mut w = y_bar * a;
    for (mut col, s) in w.column_iter_mut().zip(inv_sqrt_g) {
        col *= C64::new(*s, 0.0);
    }
    w
}

fn power_sum(w: &CMatrix, p: u32) -> f64 {
    match p {
        3 => w.iter().map(|z| z.norm().powi(3)).sum(),
        4 => w.iter().map(|z| z.norm_sqr().powi(2)).sum(),
        _ => w.iter().map(|z| z.norm().powi(p as i32)).sum(),
    }
}

/// Objective and Euclidean gradient sharing one projection.
struct Evaluation {
    objective: f64,
    grad: CMatrix,
}

fn evaluate(y_bar: &CMatrix, a: &CMatrix, inv_sqrt_g: &[f64], p: u32) -> Evaluation {
    let mut w = projected(y_bar, a, inv_sqrt_g);
    let objective = power_sum(&w, p);
    let pf = p as f64;
    for z in w.iter_mut() {
        let mag = z.norm();
        *z *= pf * mag.powi(p as i32 - 2);
    }
    for (mut col, s) in w.column_iter_mut().zip(inv_sqrt_g) {
        col *= C64::new(*s, 0.0);
    }
    Evaluation { objective, grad: y_bar.ad_mul(&w) }
}

fn check_problem(y_bar: &CMatrix, t: usize, k: usize, g_diag: &[f64]) -> Result<Vec<f64>> {
    if y_bar.ncols() != t {
        return Err(Error::Dimension(format!("Ȳ has {} columns but the frame has T={t}", y_bar.ncols())));
    }
    inv_sqrt_fading(g_diag, k)
}

/// `Σ |Ȳ·A·G^{-1/2}|^p` for any `T×K` matrix `A`, on the manifold or not.
pub fn objective_matrix(y_bar: &CMatrix, a: &CMatrix, g_diag: &[f64], p_exponent: u32) -> Result<f64> {
    let s = check_problem(y_bar, a.nrows(), a.ncols(), g_diag)?;
    Ok(power_sum(&projected(y_bar, a, &s), p_exponent))
}

/// `Σ |Ȳ·A·G^{-1/2}|^p`.
pub fn objective(y_bar: &CMatrix, a: &StiefelPoint, g_diag: &[f64], p_exponent: u32) -> Result<f64> {
    objective_matrix(y_bar, a.matrix(), g_diag, p_exponent)
}

/// `p·Ȳᴴ(|W|^{p-2} ⊙ W)·G^{-1/2}` with `W = Ȳ·A·G^{-1/2}`.
///
/// Under the real inner product `Re tr(ΔᴴM)`, `Re⟨∇, Δ⟩` is the first-order
/// change of the objective along `Δ`.
pub fn euclid_grad(y_bar: &CMatrix, a: &CMatrix, g_diag: &[f64], p_exponent: u32) -> Result<CMatrix> {
    let s = check_problem(y_bar, a.nrows(), a.ncols(), g_diag)?;
    Ok(evaluate(y_bar, a, &s, p_exponent).grad)
}

/// First-order optimality metric `max_{A ∈ St} Re⟨A − a, ∇⟩ = ‖∇‖_* − Re⟨a, ∇⟩`.
pub fn optimality_eta(a: &StiefelPoint, grad: &CMatrix) -> Result<f64> {
    check_shape("gradient", grad.shape(), a.matrix().shape())?;
    Ok((crate::manifold::nuclear_norm(grad) - real_inner(a.matrix(), grad)).max(0.0))
}

/// One update `A ← Polar(∇Ψ(A))`.
pub fn iterate(a: &StiefelPoint, y_bar: &CMatrix, g_diag: &[f64], p_exponent: u32) -> Result<StiefelPoint> {
    let grad = euclid_grad(y_bar, a.matrix(), g_diag, p_exponent)?;
    crate::manifold::polar_retract(&grad)
}

/// Runs the polar iteration from `init`, calling `observer` on every iterate
/// (including `init`) before it is evaluated.
pub fn solve_from(
    y_bar: &CMatrix,
    g_diag: &[f64],
    opts: &SolverOptions,
    init: StiefelPoint,
    observer: &mut dyn FnMut(usize, &StiefelPoint),
) -> Result<(StiefelPoint, SolveTrace)> {
    opts.validate()?;
    let s = check_problem(y_bar, init.t_dim(), init.k_dim(), g_diag)?;
    let p = opts.p_exponent;

    let mut trace = SolveTrace::default();
    let mut a = init;
    observer(0, &a);
    let mut eval = evaluate(y_bar, a.matrix(), &s, p);
    trace.objective_evals += 1;
    trace.gradient_evals += 1;
    let mut eta_threshold = f64::NAN;
    let mut obj_converged = false;

    loop {
        let j = trace.iters_run;
        let (next, sv) = polar_decompose(&eval.grad)?;
        let eta = (sv.sum() - real_inner(a.matrix(), &eval.grad)).max(0.0);
        trace.objective_per_iter.push(eval.objective);
        trace.eta_per_iter.push(eta);
        if j == 0 {
            eta_threshold = opts.eta_tol * eta.max(1.0);
        }
        if eta < eta_threshold {
            trace.stop_reason = Some(StopReason::EtaTol);
            break;
        }
        if obj_converged {
            trace.stop_reason = Some(StopReason::ObjTol);
            break;
        }
        if j >= opts.max_iters {
            trace.stop_reason = Some(StopReason::MaxIters);
            break;
        }
        observer(j + 1, &next);
        let next_eval = evaluate(y_bar, next.matrix(), &s, p);
        trace.objective_evals += 1;
        trace.gradient_evals += 1;
        let rel = (next_eval.objective - eval.objective).abs() / eval.objective.abs().max(f64::MIN_POSITIVE);
        obj_converged = rel < opts.obj_rel_tol;
        a = next;
        eval = next_eval;
        trace.iters_run += 1;
    }
    Ok((a, trace))
}

/// Solves from a Haar-random start, restarting once on a degenerate gradient.
pub fn solve<R: Rng + ?Sized>(
    y_bar: &CMatrix,
    g_diag: &[f64],
    opts: &SolverOptions,
    rng: &mut R,
) -> Result<(StiefelPoint, SolveTrace)> {
    solve_observed(y_bar, g_diag, opts, rng, &mut |_, _| {})
}

/// [`solve`] with an iterate observer.
pub fn solve_observed<R: Rng + ?Sized>(
    y_bar: &CMatrix,
    g_diag: &[f64],
    opts: &SolverOptions,
    rng: &mut R,
    observer: &mut dyn FnMut(usize, &StiefelPoint),
) -> Result<(StiefelPoint, SolveTrace)> {
    let k = g_diag.len();
    let t = y_bar.ncols();
    if k == 0 || t < k {
        return Err(Error::Dimension(format!("need 1 ≤ K ≤ T, got K={k}, T={t}")));
    }
    if y_bar.iter().all(|z| z.norm_sqr() == 0.0) {
        return Err(Error::Degenerate("received signal is identically zero".into()));
    }
    let init = random_stiefel(t, k, rng)?;
    match solve_from(y_bar, g_diag, opts, init, observer) {
        Err(Error::Degenerate(first)) => {
            let init = random_stiefel(t, k, rng)?;
            match solve_from(y_bar, g_diag, opts, init, observer) {
                Ok((a, mut trace)) => {
                    trace.restarts = 1;
                    Ok((a, trace))
                }
                Err(Error::Degenerate(second)) => {
                    Err(Error::SolverFailed(format!("degenerate gradient twice: {first}; {second}")))
                }
                Err(e) => Err(e),
            }
        }
        other => other,
    }
}

/// Final output of the blind detection pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectionResult {
    /// Estimate of `X` after phase and permutation correction, `K×T`.
    pub x_hat: CMatrix,
    pub symbols: Demodulated,
    pub trace: SolveTrace,
    pub resolution: AmbiguityResolution,
}

/// Solve, optionally with preconditioning, then resolve the ambiguity and
/// demodulate.
pub fn detect<R: Rng + ?Sized>(
    y_bar: &CMatrix,
    g_diag: &[f64],
    codebook: &HeaderCodebook,
    constellation: &Constellation,
    opts: &SolverOptions,
    rng: &mut R,
) -> Result<DetectionResult> {
    let k = g_diag.len();
    let (x_est, trace) = if opts.precondition {
        let y_pre = precondition(y_bar, k)?;
        let (a, trace) = solve(&y_pre, g_diag, opts, rng)?;
        let x_pre = a.matrix().adjoint();
        (postprocess(&y_pre, &x_pre, y_bar)?, trace)
    } else {
        let (a, trace) = solve(y_bar, g_diag, opts, rng)?;
        (a.matrix().adjoint(), trace)
    };
    let (x_hat, resolution) = resolve_ambiguity_rows(&x_est, codebook)?;
    let symbols = demodulate(&x_hat, constellation);
    Ok(DetectionResult { x_hat, symbols, trace, resolution })
}
