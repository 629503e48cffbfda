//! Operator-level invariants on randomized observables and measures.

use num_complex::Complex64;
use proptest::prelude::*;
use spectral_operator::{
    apply_markov, deviation_after_n, deviation_bound, FourierObservable,
};
use torus_measure::{TorusMeasure, TorusPoint};

fn observable_strategy() -> impl Strategy<Value = FourierObservable> {
    // Coefficients for k = 1..=radius; Hermitian completion is implied.
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..=6).prop_map(|half| {
        let mut pairs = vec![(vec![0i64], Complex64::new(0.3, 0.0))];
        for (i, (re, im)) in half.into_iter().enumerate() {
            let c = Complex64::new(re, im);
            pairs.push((vec![(i + 1) as i64], c));
            pairs.push((vec![-(i as i64) - 1], c.conj()));
        }
        FourierObservable::from_pairs(1, &pairs).unwrap()
    })
}

fn measure_strategy() -> impl Strategy<Value = TorusMeasure> {
    prop::collection::vec((0.0f64..1.0, 0.05f64..1.0), 1..=5).prop_map(|raw| {
        let total: f64 = raw.iter().map(|(_, w)| *w).sum();
        let atoms = raw
            .into_iter()
            .map(|(x, w)| (TorusPoint::scalar(x), w / total))
            .collect();
        TorusMeasure::atomic(atoms).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// The operator acts on each coefficient by exact multiplication.
    #[test]
    fn diagonal_action_is_bitwise(phi in observable_strategy(), mu in measure_strategy()) {
        let q_phi = apply_markov(&phi, &mu);
        phi.for_each_coeff(|k, c| {
            let want = mu.fourier_coefficient(k) * c;
            assert_eq!(q_phi.coeff(k), want, "k={k:?}");
        });
    }

    /// Iterating the operator n times matches the implicit power used by
    /// the deviation bound.
    #[test]
    fn semigroup_matches_direct_iteration(
        phi in observable_strategy(),
        mu in measure_strategy(),
        n in 1usize..=16,
    ) {
        let mut iterated = phi.clone();
        for _ in 0..n {
            iterated = apply_markov(&iterated, &mu);
        }
        let mut osc = 0.0f64;
        iterated.for_each_coeff(|k, c| {
            if k[0] != 0 {
                osc += c.norm();
            }
        });
        // The bound uses |mu_hat|^n directly; direct iteration accumulates
        // n complex multiplications, so allow n ulp-scale slack.
        let bound = deviation_bound(&phi, &mu, n as u64);
        prop_assert!(
            (bound - osc).abs() <= 1e-12 * osc.max(1.0),
            "n={n} bound={bound} iterated={osc}"
        );
    }

    /// Deviation bounds never increase with n.
    #[test]
    fn contraction_in_n(phi in observable_strategy(), mu in measure_strategy()) {
        let mut prev = f64::INFINITY;
        for n in 1..=40u64 {
            let b = deviation_bound(&phi, &mu, n);
            prop_assert!(b <= prev);
            prev = b;
        }
    }

    /// The mean coefficient survives the operator unchanged.
    #[test]
    fn mean_is_preserved(phi in observable_strategy(), mu in measure_strategy()) {
        let q_phi = apply_markov(&phi, &mu);
        prop_assert!((q_phi.mean() - phi.mean()).abs() <= 1e-11 * phi.mean().abs().max(1.0));
    }

    /// The coefficient bound dominates the sampled sup.
    #[test]
    fn bound_dominates_grid_sup(
        phi in observable_strategy(),
        mu in measure_strategy(),
        n in 1u64..=32,
    ) {
        let (bound, grid_sup) = deviation_after_n(&phi, &mu, n, 257);
        prop_assert!(bound >= grid_sup - 1e-9, "bound={bound} sup={grid_sup}");
    }
}
