use l3blind::channel::bernoulli_gaussian_channel;
use l3blind::detector::{detect, pilot_zf_baseline, riemannian_gd_baseline, solve, PilotOptions, SolverOptions};
use l3blind::metrics::{evm, symbol_error_rate};
use l3blind::signal::{build_frame, noise_variance_for_snr, synthesize_received, Constellation, ConstellationKind};
use l3blind::{CMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[test]
fn noiseless_frames_are_recovered_exactly() {
    let c = Constellation::new(ConstellationKind::Qpsk);
    let (k, t, m) = (4, 100, 256);
    let g = vec![1.0; k];
    let mut exact = 0;
    for seed in 0..10 {
        let mut r = rng(seed);
        let ch = bernoulli_gaussian_channel(m, k, 0.1, &mut r).unwrap();
        let f = build_frame(k, t, &c, &mut r).unwrap();
        let y = synthesize_received(&ch, &f.x, &g, &g, 0.0, &mut r).unwrap().y_bar;
        let det = detect(&y, &g, &f.header_codebook(), &c, &SolverOptions::default(), &mut r).unwrap();
        assert!(det.trace.max_decrease() <= 1e-12);
        if symbol_error_rate(&det.symbols.labels, &f.labels).unwrap() == 0.0 {
            exact += 1;
        }
    }
    assert!(exact >= 9, "{exact}/10 exact");
}

#[test]
fn qam16_frames_are_recovered_at_high_snr() {
    let c = Constellation::new(ConstellationKind::Qam16);
    let (k, t, m) = (4, 200, 256);
    let g = vec![1.0; k];
    let mut r = rng(40);
    let ch = bernoulli_gaussian_channel(m, k, 0.1, &mut r).unwrap();
    let f = build_frame(k, t, &c, &mut r).unwrap();
    let sigma2 = noise_variance_for_snr(k, t, 40.0);
    let y = synthesize_received(&ch, &f.x, &g, &g, sigma2, &mut r).unwrap().y_bar;
    let det = detect(&y, &g, &f.header_codebook(), &c, &SolverOptions::default(), &mut r).unwrap();
    assert!(evm(&det.x_hat, &f.x).unwrap() < 0.05);
}

#[test]
fn preconditioning_helps_short_frames() {
    let c = Constellation::new(ConstellationKind::Qpsk);
    let (k, t, m) = (8, 40, 256);
    let g = vec![1.0; k];
    let sigma2 = noise_variance_for_snr(k, t, 30.0);
    let (mut plain, mut pre) = (Vec::new(), Vec::new());
    for seed in 0..20 {
        let mut r = rng(100 + seed);
        let ch = bernoulli_gaussian_channel(m, k, 0.1, &mut r).unwrap();
        let f = build_frame(k, t, &c, &mut r).unwrap();
        let y = synthesize_received(&ch, &f.x, &g, &g, sigma2, &mut r).unwrap().y_bar;
        let book = f.header_codebook();
        for (flag, out) in [(false, &mut plain), (true, &mut pre)] {
            let opts = SolverOptions { precondition: flag, ..Default::default() };
            let det = detect(&y, &g, &book, &c, &opts, &mut rng(7 + seed)).unwrap();
            out.push(evm(&det.x_hat, &f.x).unwrap());
        }
    }
    let (a, b) = (median(plain), median(pre));
    assert!(b < a, "preconditioned {b} vs plain {a}");
}

/// Random unit-modulus pilots, `K×T_t`, scaled like a frame of length `t`.
fn pilots(k: usize, tt: usize, t: usize, r: &mut ChaCha8Rng) -> CMatrix {
    let c = Constellation::new(ConstellationKind::Qpsk);
    let s = 1.0 / (t as f64).sqrt();
    CMatrix::from_fn(k, tt, |_, _| c.points[r.random_range(0..4)] * s)
}

#[test]
fn sparsity_regularization_helps_at_low_snr() {
    let c = Constellation::new(ConstellationKind::Qpsk);
    let (k, t, m, tt) = (8, 240, 256, 6);
    let g = vec![1.0; k];
    let sigma2 = noise_variance_for_snr(k, t, 0.0);
    let (mut plain, mut lasso) = (0.0, 0.0);
    for seed in 0..10 {
        let mut r = rng(200 + seed);
        let ch = bernoulli_gaussian_channel(m, k, 0.1, &mut r).unwrap();
        let f = build_frame(k, t, &c, &mut r).unwrap();
        let xt = pilots(k, tt, t, &mut r);
        let yt = synthesize_received(&ch, &xt, &g, &g, sigma2, &mut r).unwrap().y_bar;
        let y = synthesize_received(&ch, &f.x, &g, &g, sigma2, &mut r).unwrap().y_bar;
        for (lambda, acc) in [(0.0, &mut plain), (2.0, &mut lasso)] {
            let opts = PilotOptions { lambda, ..Default::default() };
            let x = pilot_zf_baseline(&yt, &xt, &y, &g, &opts).unwrap();
            *acc += evm(&x, &f.x).unwrap();
        }
    }
    assert!(lasso < plain, "λ=2: {lasso}, λ=0: {plain}");
}

#[test]
fn gradient_ascent_needs_more_gradients_than_the_polar_iteration() {
    let c = Constellation::new(ConstellationKind::Qpsk);
    let (k, t, m) = (8, 240, 256);
    let g = vec![1.0; k];
    let sigma2 = noise_variance_for_snr(k, t, 30.0);
    let (mut gd_evals, mut polar_evals) = (0, 0);
    for seed in 0..5 {
        let mut r = rng(300 + seed);
        let ch = bernoulli_gaussian_channel(m, k, 0.1, &mut r).unwrap();
        let f = build_frame(k, t, &c, &mut r).unwrap();
        let y = synthesize_received(&ch, &f.x, &g, &g, sigma2, &mut r).unwrap().y_bar;
        let opts = SolverOptions::default();
        let (_, gd) = riemannian_gd_baseline(&y, &g, &opts, &mut rng(seed)).unwrap();
        let (_, polar) = solve(&y, &g, &opts, &mut rng(seed)).unwrap();
        assert!(gd.max_decrease() <= 0.0);
        gd_evals += gd.gradient_evals;
        polar_evals += polar.gradient_evals;
    }
    assert!(gd_evals > polar_evals, "gd {gd_evals} vs polar {polar_evals}");
}

#[test]
fn phase_rotated_inputs_give_rotated_estimates() {
    // Rotating a user's whole row only changes the phase the resolver removes.
    let c = Constellation::new(ConstellationKind::Qpsk);
    let (k, t, m) = (3, 80, 128);
    let g = vec![1.0; k];
    let mut r = rng(400);
    let ch = bernoulli_gaussian_channel(m, k, 0.15, &mut r).unwrap();
    let f = build_frame(k, t, &c, &mut r).unwrap();
    let mut rotated = ch.clone();
    for (j, mut col) in rotated.h_bar.column_iter_mut().enumerate() {
        col *= C64::from_polar(1.0, 0.7 * j as f64 + 0.3);
    }
    let book = f.header_codebook();
    let opts = SolverOptions::default();
    for channel in [&ch, &rotated] {
        let y = synthesize_received(channel, &f.x, &g, &g, 0.0, &mut r).unwrap().y_bar;
        let det = detect(&y, &g, &book, &c, &opts, &mut rng(5)).unwrap();
        assert_eq!(det.symbols.labels, f.labels);
    }
}
