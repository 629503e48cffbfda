//! Estimator-level guarantees: scheduler independence, stationarity of the
//! uniform start, Monte-Carlo vs exact-enumeration agreement, and the
//! algebraic identity tying the bound constants together.

use std::f64::consts::TAU;

use chain_simulator::{
    deviation_probability, exact_deviation, ldt_constants, run_chain, trial_rng, ChainConfig,
    SkewState, StartMode,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use torus_measure::{TorusMeasure, TorusPoint};

fn cos_theta(state: &SkewState) -> f64 {
    (TAU * state.theta().coord(0)).cos()
}

#[test]
fn worker_count_does_not_change_a_single_bit() {
    let cfg = ChainConfig {
        mu: TorusMeasure::two_atom_golden(),
        initial: StartMode::Stationary,
        n_steps: 50,
        n_trials: 20_000,
        seed: 2024,
        window_w: 0,
    };
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| deviation_probability(&cfg, &cos_theta, 0.0, 0.2))
    };
    let single = run(1);
    let multi = run(4);
    assert_eq!(single.p_hat.to_bits(), multi.p_hat.to_bits());
    assert_eq!(single.ci_halfwidth.to_bits(), multi.ci_halfwidth.to_bits());
}

#[test]
fn uniform_start_stays_uniform() {
    // theta_n under a stationary start must be uniform at every n; a
    // 64-bin chi-square at the 1e-4 level over 1e5 trials checks n = 1, 10.
    const TRIALS: u64 = 100_000;
    const BINS: usize = 64;
    let critical = ChiSquared::new((BINS - 1) as f64)
        .unwrap()
        .inverse_cdf(1.0 - 1e-4);
    for n_steps in [1u64, 10] {
        let cfg = ChainConfig {
            mu: TorusMeasure::lebesgue(1),
            initial: StartMode::Stationary,
            n_steps,
            n_trials: TRIALS,
            seed: 31,
            window_w: 0,
        };
        let mut counts = [0u64; BINS];
        for trial in 0..TRIALS {
            let mut rng = trial_rng(cfg.seed, trial);
            let mut last = 0.0;
            run_chain(&cfg, &mut rng, |j, state| {
                if j == n_steps {
                    last = state.theta().coord(0);
                }
            });
            counts[((last * BINS as f64) as usize).min(BINS - 1)] += 1;
        }
        let expected = TRIALS as f64 / BINS as f64;
        let chi2: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        assert!(
            chi2 < critical,
            "n = {n_steps}: chi2 = {chi2} >= critical {critical}"
        );
    }
}

#[test]
fn monte_carlo_tracks_the_enumeration_oracle() {
    // 10 randomized scenarios with enumerable path spaces (m^n <= 1e5).
    let mut scenario_rng = ChaCha8Rng::seed_from_u64(424_242);
    for scenario in 0..10u64 {
        let m = if scenario_rng.gen::<bool>() { 2 } else { 3 };
        let atoms: Vec<(TorusPoint, f64)> = {
            let raw: Vec<f64> = (0..m).map(|_| scenario_rng.gen_range(0.2..1.0)).collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter()
                .map(|w| (TorusPoint::scalar(scenario_rng.gen::<f64>()), w / total))
                .collect()
        };
        let mu = TorusMeasure::atomic(atoms).unwrap();
        let n = if m == 2 {
            scenario_rng.gen_range(6..=16)
        } else {
            scenario_rng.gen_range(5..=10)
        };
        let epsilon = scenario_rng.gen_range(0.15..0.5);
        let theta0 = TorusPoint::scalar(0.0);
        let exact = exact_deviation(&mu, &cos_theta, &theta0, 0.0, epsilon, n).unwrap();
        let cfg = ChainConfig {
            mu,
            initial: StartMode::Fixed(theta0),
            n_steps: n,
            n_trials: 20_000,
            seed: 7_000 + scenario,
            window_w: 0,
        };
        let mc = deviation_probability(&cfg, &cos_theta, 0.0, epsilon);
        assert!(
            (mc.p_hat - exact.p_hat).abs() <= 3.5 * mc.ci_halfwidth,
            "scenario {scenario}: mc {} vs exact {} (ci {})",
            mc.p_hat,
            exact.p_hat,
            mc.ci_halfwidth
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// c_bar * n_bar telescopes to 1/(9 C L^2) for any admissible data.
    #[test]
    fn bound_constants_satisfy_the_product_identity(
        c in 1.34f64..50.0,
        l in 0.01f64..20.0,
        p in 0.2f64..5.0,
    ) {
        let k = ldt_constants(c, l, p);
        let want = 1.0 / (9.0 * k.c * k.l * k.l);
        let got = k.c_bar * k.n_bar;
        prop_assert!((got - want).abs() <= 1e-12 * want, "{got} vs {want}");
    }

    /// Estimates are probabilities with sane half-widths.
    #[test]
    fn estimates_stay_in_range(seed in 0u64..1 << 32, eps in 0.05f64..1.0) {
        let cfg = ChainConfig {
            mu: TorusMeasure::two_atom_golden(),
            initial: StartMode::Stationary,
            n_steps: 8,
            n_trials: 400,
            seed,
            window_w: 0,
        };
        let est = deviation_probability(&cfg, &cos_theta, 0.0, eps);
        prop_assert!((0.0..=1.0).contains(&est.p_hat));
        prop_assert!(est.ci_halfwidth >= 1.0 / 400.0);
    }
}
