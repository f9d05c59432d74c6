//! Acceptance suite: one test per criterion, each printing a pass line with
//! the measured numbers. Tolerances are fixed here, not tuned elsewhere.

use std::f64::consts::FRAC_PI_4;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use skinwalk::channels::{
    amplitude_damping, compose_damping_loss, dephasing_channel, dephasing_channel_projector_form,
    DampingOrder,
};
use skinwalk::evolution::{
    classical_markov_evolve, estimate_drift, evolve, evolve_density, linear_fit,
};
use skinwalk::mat2::Mat2;
use skinwalk::spectral::{
    bloch_operator, closed_form_velocities, coherent_drift_spectral, crossover_gamma,
    incoherent_drift_spectral, k_grid, quasienergy_bands, IncoherentRegime,
};
use skinwalk::state::DensityMatrix;
use skinwalk::walk::{step_density, StepChannel, WalkParams};

fn drift_of(params: &WalkParams, window: (usize, usize)) -> f64 {
    let traj = evolve(params).expect("evolution must succeed");
    estimate_drift(&traj, window)
        .expect("fit must succeed")
        .velocity
}

#[test]
fn criterion_1_closed_form_reproduction() {
    // independent arithmetic by direct substitution
    let eq1 = |gamma: f64, theta: f64| {
        let g = (1.0 - gamma).sqrt();
        (1.0 + g) * theta.cos()
            / (4.0 * g + (1.0 - g) * (1.0 - g) * theta.cos() * theta.cos()).sqrt()
    };
    let eq2 = |gamma: f64, theta: f64| {
        let (s, c) = theta.sin_cos();
        gamma * c * c / (4.0 * (1.0 - gamma) * s.powi(4) + gamma * gamma * c.powi(4)).sqrt()
    };
    let eq3 = |gamma: f64, theta: f64| {
        let (s, c) = theta.sin_cos();
        (c * c - (1.0 - gamma) * s * s) / (1.0 - gamma * s * s)
    };
    let cases = [
        (0.4, (0.7100, 0.2500, 0.2500)),
        (0.93, (0.7757, 0.8692, 0.8692)),
    ];
    for (gamma, (c_ref, d_ref, a_ref)) in cases {
        let v = closed_form_velocities(gamma, FRAC_PI_4).unwrap();
        for (label, got, reference, substituted) in [
            ("coherent", v.coherent, c_ref, eq1(gamma, FRAC_PI_4)),
            ("dephased", v.dephased, d_ref, eq2(gamma, FRAC_PI_4)),
            (
                "damped-after",
                v.damped_after_loss,
                a_ref,
                eq3(gamma, FRAC_PI_4),
            ),
        ] {
            assert!(
                (got - reference).abs() <= 1e-4,
                "gamma={gamma} {label}: {got} vs reference {reference}"
            );
            assert!(
                (got - substituted).abs() <= 1e-12,
                "gamma={gamma} {label}: {got} vs substitution {substituted}"
            );
        }
        println!(
            "criterion 1 at gamma={gamma}: ({:.4}, {:.4}, {:.4})",
            v.coherent, v.dephased, v.damped_after_loss
        );
    }
    println!("acceptance criterion 1 (closed-form reproduction): PASS");
}

#[test]
fn criterion_2_spectral_vs_closed_form_grid() {
    let gammas: Vec<f64> = (1..=19).map(|i| 0.05 * i as f64).collect();
    let thetas: Vec<f64> = (1..=15).map(|i| 0.1 * i as f64).collect();
    let mut worst = (0.0f64, String::new());
    for &gamma in &gammas {
        for &theta in &thetas {
            let r = coherent_drift_spectral(gamma, theta).unwrap();
            let dev = (r.v_spectral - r.v_closed).abs();
            if dev > worst.0 {
                worst = (dev, format!("coherent gamma={gamma} theta={theta}"));
            }
            for regime in [
                IncoherentRegime::Dephased,
                IncoherentRegime::DampedAfterLoss,
            ] {
                let r = incoherent_drift_spectral(gamma, theta, regime).unwrap();
                let dev = (r.v_spectral - r.v_closed).abs();
                if dev > worst.0 {
                    worst = (dev, format!("{regime:?} gamma={gamma} theta={theta}"));
                }
            }
        }
    }
    assert!(
        worst.0 <= 1e-6,
        "worst |v_spectral - v_closed| = {:.3e} at {}",
        worst.0,
        worst.1
    );
    println!(
        "criterion 2 worst deviation over 19x15 grid x 3 regimes: {:.3e} ({})",
        worst.0, worst.1
    );
    println!("acceptance criterion 2 (spectral vs closed form): PASS");
}

#[test]
fn criterion_3_real_space_convergence() {
    let window = (40, 60);
    for gamma in [0.4, 0.854, 0.93] {
        let closed = closed_form_velocities(gamma, FRAC_PI_4).unwrap();

        let coherent = WalkParams::coherent(gamma, FRAC_PI_4, 60);
        let traj = evolve_density(&coherent).unwrap();
        let v_coh = estimate_drift(&traj, window).unwrap().velocity;
        assert!(
            (v_coh - closed.coherent).abs() <= 0.02,
            "coherent gamma={gamma}: {v_coh} vs {}",
            closed.coherent
        );

        let dephased = WalkParams::dephasing(gamma, FRAC_PI_4, 1.0, 60);
        let traj = classical_markov_evolve(&dephased).unwrap();
        let v_inc = estimate_drift(&traj, window).unwrap().velocity;
        assert!(
            (v_inc - closed.dephased).abs() <= 0.02,
            "dephased gamma={gamma}: {v_inc} vs {}",
            closed.dephased
        );

        // the numerical band route must sit on the same values
        let spectral = coherent_drift_spectral(gamma, FRAC_PI_4).unwrap();
        assert!((spectral.v_spectral - v_coh).abs() <= 0.02);
        let spectral =
            incoherent_drift_spectral(gamma, FRAC_PI_4, IncoherentRegime::Dephased).unwrap();
        assert!((spectral.v_spectral - v_inc).abs() <= 0.02);
        println!(
            "criterion 3 gamma={gamma}: coherent {v_coh:.4} (closed {:.4}), \
             dephased {v_inc:.4} (closed {:.4})",
            closed.coherent, closed.dephased
        );
    }
    println!("acceptance criterion 3 (real-space convergence): PASS");
}

#[test]
fn criterion_4_crossover_location() {
    let gamma_star = crossover_gamma(FRAC_PI_4)
        .unwrap()
        .expect("crossover exists");
    assert!((gamma_star - 0.854).abs() <= 1e-3, "gamma* = {gamma_star}");
    println!("criterion 4 crossover gamma* = {gamma_star:.6}");
    println!("acceptance criterion 4 (crossover location): PASS");
}

#[test]
fn criterion_5_dephasing_monotonicity() {
    let etas = [0.0, 0.25, 0.5, 0.75, 1.0];
    let fit = |gamma: f64, eta: f64| {
        drift_of(&WalkParams::dephasing(gamma, FRAC_PI_4, eta, 60), (40, 60))
    };
    let strong: Vec<f64> = etas.iter().map(|&eta| fit(0.93, eta)).collect();
    for pair in strong.windows(2) {
        assert!(
            pair[1] >= pair[0],
            "drift not nondecreasing at gamma=0.93: {strong:?}"
        );
    }
    assert!(
        strong[4] - strong[0] >= 0.08,
        "v(1) - v(0) = {} at gamma=0.93",
        strong[4] - strong[0]
    );
    let weak_0 = fit(0.4, 0.0);
    let weak_1 = fit(0.4, 1.0);
    assert!(
        weak_1 < weak_0,
        "below the crossover dephasing must suppress: {weak_1} vs {weak_0}"
    );
    println!(
        "criterion 5 drifts at gamma=0.93 over eta {etas:?}: {:?}; gamma=0.4: {weak_0:.4} -> {weak_1:.4}",
        strong.iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>()
    );
    println!("acceptance criterion 5 (dephasing monotonicity): PASS");
}

#[test]
fn criterion_6_damping_order_dependence() {
    for gamma in [0.4, 0.93] {
        // damping before the loss: drift dies, spreading turns diffusive
        let params = WalkParams::damping(gamma, FRAC_PI_4, 1.0, DampingOrder::BeforeLoss, 60);
        let traj = evolve(&params).unwrap();
        let v = estimate_drift(&traj, (40, 60)).unwrap().velocity;
        assert!(v.abs() <= 0.01, "gamma={gamma}: drift {v} should vanish");
        let ts: Vec<f64> = (30..=60).map(|t| t as f64).collect();
        let vars: Vec<f64> = (30..=60).map(|t| traj.variance()[t]).collect();
        let fit = linear_fit(&ts, &vars);
        assert!(
            fit.r_squared >= 0.99,
            "gamma={gamma}: variance growth not linear (R^2 = {})",
            fit.r_squared
        );

        // damping after the loss: drift survives at the closed-form value
        let params = WalkParams::damping(gamma, FRAC_PI_4, 1.0, DampingOrder::AfterLoss, 60);
        let v_after = drift_of(&params, (40, 60));
        let closed = closed_form_velocities(gamma, FRAC_PI_4)
            .unwrap()
            .damped_after_loss;
        assert!(
            (v_after - closed).abs() <= 0.02,
            "gamma={gamma}: {v_after} vs closed {closed}"
        );
        println!(
            "criterion 6 gamma={gamma}: before-loss drift {v:.4} (R^2 {:.5}), \
             after-loss drift {v_after:.4} (closed {closed:.4})",
            fit.r_squared
        );
    }
    println!("acceptance criterion 6 (damping order dependence): PASS");
}

#[test]
fn criterion_7_damping_strength_trends() {
    let drift_at = |gamma: f64, mu: f64| {
        let params = if mu == 0.0 {
            WalkParams::coherent(gamma, FRAC_PI_4, 60)
        } else {
            WalkParams::damping(gamma, FRAC_PI_4, mu, DampingOrder::AfterLoss, 60)
        };
        drift_of(&params, (40, 60))
    };
    let mus = [0.0, 0.2, 0.6, 1.0];

    let weak: Vec<f64> = mus.iter().map(|&mu| drift_at(0.4, mu)).collect();
    for pair in weak.windows(2) {
        assert!(
            pair[1] < pair[0],
            "gamma=0.4 should be decreasing: {weak:?}"
        );
    }
    assert!(
        (weak[3] - 0.25).abs() <= 0.02,
        "gamma=0.4 endpoint {} should approach 0.25",
        weak[3]
    );

    let strong: Vec<f64> = mus.iter().map(|&mu| drift_at(0.93, mu)).collect();
    for pair in strong.windows(2) {
        assert!(
            pair[1] > pair[0],
            "gamma=0.93 should be increasing: {strong:?}"
        );
    }
    assert!(
        (strong[3] - 0.869).abs() <= 0.02,
        "gamma=0.93 endpoint {} should approach 0.869",
        strong[3]
    );
    println!("criterion 7 drifts over mu {mus:?}: gamma=0.4 {weak:?}, gamma=0.93 {strong:?}");
    println!("acceptance criterion 7 (damping strength trends): PASS");
}

fn random_density(half_width: usize, seed: u64) -> DensityMatrix {
    let mut rng = StdRng::seed_from_u64(seed);
    let dim = 2 * (2 * half_width + 1);
    let mut raw: Array2<C64> = Array2::zeros((dim, dim));
    for i in 0..dim {
        for j in 0..dim {
            raw[[i, j]] = C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        }
    }
    let psd = raw.dot(&raw.t().mapv(|v: C64| v.conj()));
    let trace: C64 = psd.diag().sum();
    DensityMatrix::from_entries(half_width, psd.mapv(|v| v / trace)).unwrap()
}

#[test]
fn criterion_8_channel_identities() {
    // dephasing mixture form vs projector form on random states (5 sites)
    let eta = 0.37;
    let mixture = dephasing_channel(eta).unwrap();
    let projectors = dephasing_channel_projector_form(eta).unwrap();
    for seed in [3, 17, 99] {
        let rho = random_density(2, seed);
        let mut a = rho.clone();
        a.apply_coin_ops(&mixture.coin_ops().collect::<Vec<_>>());
        let mut b = rho;
        b.apply_coin_ops(&projectors.coin_ops().collect::<Vec<_>>());
        let worst = a
            .entries()
            .iter()
            .zip(b.entries().iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0f64, f64::max);
        assert!(worst <= 1e-12, "dephasing forms differ by {worst:e}");
    }
    println!("criterion 8: dephasing forms agree to 1e-12 on random states");

    // coin projectors and sigma_z commute with the loss operator exactly
    for gamma in [0.0, 0.4, 0.93, 1.0] {
        let loss = skinwalk::build_loss(gamma).unwrap();
        let m = Mat2::diag(C64::new(loss[0], 0.0), C64::new(loss[1], 0.0));
        for (k, _) in dephasing_channel_projector_form(1.0).unwrap().coin_ops() {
            assert_eq!((k * m).0, (m * k).0, "K M != M K at gamma={gamma}");
        }
        for (k, _) in dephasing_channel(1.0).unwrap().coin_ops() {
            assert_eq!((k * m).0, (m * k).0, "D M != M D at gamma={gamma}");
        }
    }
    println!("criterion 8: dephasing operators commute with the loss exactly");

    // Kraus completeness of amplitude damping
    for mu in [0.0, 0.2, 0.6, 1.0] {
        let dev = amplitude_damping(mu)
            .unwrap()
            .completeness_sum()
            .max_abs_diff(&Mat2::identity());
        assert!(dev <= 1e-15, "mu={mu}: completeness deviation {dev:e}");
    }
    println!("criterion 8: amplitude damping is complete to 1e-15");

    // total transmission of the composed damping + loss pairs, as stated:
    // sum_i M_i† M_i = diag(1, 1 - gamma) for both orderings
    for order in [DampingOrder::AfterLoss, DampingOrder::BeforeLoss] {
        for gamma in [0.2, 0.4, 0.93] {
            for mu in [0.2, 0.6, 1.0] {
                let sum = compose_damping_loss(gamma, mu, order)
                    .unwrap()
                    .completeness_sum();
                let stated = Mat2::diag(C64::new(1.0, 0.0), C64::new(1.0 - gamma, 0.0));
                let dev = sum.max_abs_diff(&stated);
                assert!(
                    dev <= 1e-14,
                    "{order:?} gamma={gamma} mu={mu}: sum_i Mi†Mi = diag(1, {:.12}) \
                     deviates {dev:.3e} from diag(1, {:.12}); damping placed before \
                     the loss conserves 1 - gamma(1 - mu) on coin 1, not 1 - gamma",
                    sum.0[1][1].re,
                    1.0 - gamma,
                );
            }
        }
        println!("criterion 8: total transmission diag(1, 1-gamma) holds for {order:?}");
    }
    println!("acceptance criterion 8 (channel identities): PASS");
}

#[test]
fn criterion_9_structural_invariants() {
    // trajectory invariants across every regime
    let mut runs = vec![
        WalkParams::coherent(0.0, FRAC_PI_4, 12),
        WalkParams::coherent(0.4, 0.6, 12),
        WalkParams::coherent(0.93, FRAC_PI_4, 12),
        WalkParams::dephasing(0.4, FRAC_PI_4, 0.37, 12),
        WalkParams::dephasing(0.93, 0.6, 1.0, 12),
        WalkParams::damping(0.4, FRAC_PI_4, 0.6, DampingOrder::BeforeLoss, 12),
        WalkParams::damping(0.4, 0.6, 1.0, DampingOrder::BeforeLoss, 12),
        WalkParams::damping(0.93, FRAC_PI_4, 0.6, DampingOrder::AfterLoss, 12),
        WalkParams::damping(0.93, 0.6, 1.0, DampingOrder::AfterLoss, 12),
    ];
    for params in &mut runs {
        let traj = evolve(params).unwrap();
        for t in 0..=traj.steps() {
            let row = traj.distribution(t);
            let sum: f64 = row.iter().sum();
            assert!(
                (sum - 1.0).abs() <= 1e-10,
                "{params:?}: row {t} sums to {sum}"
            );
            assert!(
                row.iter().all(|p| *p >= 0.0),
                "{params:?}: negative P at t={t}"
            );
            for x in traj.positions() {
                if x.unsigned_abs() as usize > t {
                    assert_eq!(traj.probability(t, x), 0.0, "{params:?}: light-cone leak");
                }
            }
        }
        for pair in traj.survival().windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12, "{params:?}: survival increased");
        }
        let est = estimate_drift(&traj, (0, traj.steps())).unwrap();
        assert!(est.velocity.abs() <= 1.0 + 1e-12);
    }
    println!("criterion 9: distributions, light cone, survival monotone on 9 regimes");

    // density-matrix invariants, spot-checked on a small lattice
    for params in [
        WalkParams::dephasing(0.5, FRAC_PI_4, 0.37, 8),
        WalkParams::damping(0.5, 0.9, 0.6, DampingOrder::AfterLoss, 8),
    ] {
        let channel = StepChannel::for_params(&params).unwrap();
        let mut rho = DensityMatrix::initial(params.half_width);
        let mut prev = rho.trace_re();
        for _ in 0..params.steps {
            rho = step_density(&rho, &params, &channel).unwrap();
            assert!(rho.hermiticity_deviation() <= 1e-12);
            assert!(rho.min_eigenvalue() >= -1e-10);
            let tr = rho.trace_re();
            assert!(tr <= prev + 1e-12);
            prev = tr;
        }
    }
    println!("criterion 9: Hermiticity, positivity, trace monotonicity on small lattices");

    // Bloch-operator invariants
    for gamma in [0.1, 0.4, 0.854, 0.93] {
        for theta in [0.2, FRAC_PI_4, 1.3] {
            for k in k_grid(64) {
                let u = bloch_operator(gamma, theta, k).unwrap();
                assert!(
                    (u.det().norm() - (1.0 - gamma).sqrt()).abs() <= 1e-12,
                    "det magnitude off at gamma={gamma} theta={theta} k={k}"
                );
            }
            let expected = 0.5 * (1.0f64 - gamma).ln();
            for p in quasienergy_bands(gamma, theta, &k_grid(257)).unwrap() {
                assert!(
                    (p.im_sum() - expected).abs() <= 1e-10,
                    "gain sum rule off at gamma={gamma} theta={theta} k={}",
                    p.k
                );
            }
        }
    }
    println!("criterion 9: |det U_k| and band-gain sum rule verified");
    println!("acceptance criterion 9 (structural invariants): PASS");
}
