//! Invariants every measure must satisfy, checked on randomized instances.

use num_complex::Complex64;
use proptest::prelude::*;
use torus_measure::{
    check_mixing_dc, MixingDCParams, TorusMeasure, TorusPoint,
};

/// Random atomic measure in dimension `dim` with 1..=6 atoms, weights
/// renormalized exactly.
fn atomic_strategy(dim: usize) -> impl Strategy<Value = TorusMeasure> {
    prop::collection::vec((prop::collection::vec(0.0f64..1.0, dim), 0.05f64..1.0), 1..=6)
        .prop_map(|raw| {
            let total: f64 = raw.iter().map(|(_, w)| *w).sum();
            let atoms = raw
                .into_iter()
                .map(|(c, w)| (TorusPoint::new(c), w / total))
                .collect();
            TorusMeasure::atomic(atoms).unwrap()
        })
}

fn density_strategy() -> impl Strategy<Value = TorusMeasure> {
    prop::collection::vec(0.01f64..2.0, 8..=32).prop_map(|mut vals| {
        let n = vals.len();
        let mean = vals.iter().sum::<f64>() / n as f64;
        for v in &mut vals {
            *v /= mean;
        }
        TorusMeasure::density(vec![n], vals).unwrap()
    })
}

fn measure_strategy() -> impl Strategy<Value = TorusMeasure> {
    prop_oneof![
        atomic_strategy(1),
        atomic_strategy(2),
        density_strategy(),
        (atomic_strategy(1), density_strategy(), 0.0f64..=1.0)
            .prop_map(|(a, b, t)| TorusMeasure::mixture(t, a, b).unwrap()),
    ]
}

fn lattice_for(mu: &TorusMeasure, seed: u64) -> Vec<Vec<i64>> {
    let d = mu.dim();
    // Deterministic spread of frequencies, including mixed signs in 2D.
    (0..100)
        .map(|i| {
            (0..d)
                .map(|axis| {
                    let x = (seed
                        .wrapping_mul(6364136223846793005)
                        .wrapping_add(((i * d + axis) as u64).wrapping_mul(1442695040888963407)))
                        >> 33;
                    (x % 41) as i64 - 20
                })
                .collect()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Coefficients of a real measure come in conjugate pairs.
    #[test]
    fn fourier_is_hermitian(mu in measure_strategy(), seed in 0u64..1 << 48) {
        for k in lattice_for(&mu, seed) {
            let neg: Vec<i64> = k.iter().map(|&x| -x).collect();
            let a = mu.fourier_coefficient(&k);
            let b = mu.fourier_coefficient(&neg).conj();
            prop_assert!((a - b).norm() <= 1e-12, "k={k:?} a={a} conj b={b}");
        }
    }

    /// A probability measure has coefficients in the closed unit disc and
    /// coefficient 1 at the zero frequency.
    #[test]
    fn fourier_bounded_by_one(mu in measure_strategy(), seed in 0u64..1 << 48) {
        let zero = vec![0i64; mu.dim()];
        prop_assert!((mu.fourier_coefficient(&zero) - Complex64::new(1.0, 0.0)).norm() <= 1e-12);
        for k in lattice_for(&mu, seed) {
            prop_assert!(mu.fourier_coefficient(&k).norm() <= 1.0 + 1e-12);
        }
    }

    /// Mixture coefficients interpolate linearly between the components.
    #[test]
    fn mixture_is_linear(
        a in atomic_strategy(1),
        b in density_strategy(),
        t in 0.0f64..=1.0,
        seed in 0u64..1 << 48,
    ) {
        let mix = TorusMeasure::mixture(t, a.clone(), b.clone()).unwrap();
        for k in lattice_for(&mix, seed) {
            let want = a.fourier_coefficient(&k) * t + b.fourier_coefficient(&k) * (1.0 - t);
            let got = mix.fourier_coefficient(&k);
            prop_assert!((got - want).norm() <= 1e-12);
        }
    }

    /// Weakening gamma can only help the decay condition: if the bound holds
    /// at gamma it holds at any smaller gamma.
    #[test]
    fn dc_monotone_in_gamma(
        mu in measure_strategy(),
        gamma in 0.001f64..0.9,
        shrink in 0.05f64..1.0,
        tau in 1.0f64..3.0,
    ) {
        let k_max = 12;
        let strong = check_mixing_dc(&mu, &MixingDCParams::new(gamma, tau, k_max).unwrap());
        let weak =
            check_mixing_dc(&mu, &MixingDCParams::new(gamma * shrink, tau, k_max).unwrap());
        prop_assert!(!strong.holds_up_to_kmax || weak.holds_up_to_kmax);
        // Margins move the same way: smaller gamma never hurts.
        prop_assert!(weak.worst_margin >= strong.worst_margin - 1e-15);
    }
}
