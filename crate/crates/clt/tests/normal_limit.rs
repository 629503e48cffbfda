use chain_simulator::{ChainConfig, StartMode};
use clt::{clt_experiment, gordin_livsic_sigma2, VarianceMethod};
use num_complex::Complex64;
use spectral_operator::{observable_preset, FourierObservable};
use torus_measure::TorusMeasure;

fn base_cfg(mu: TorusMeasure, seed: u64) -> ChainConfig {
    ChainConfig {
        mu,
        initial: StartMode::Stationary,
        n_steps: 1,
        n_trials: 1,
        seed,
        window_w: 0,
    }
}

fn sqrt2_cos() -> FourierObservable {
    FourierObservable::from_fn(1, 1, |k| {
        if k[0] == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
        }
    })
    .unwrap()
}

#[test]
fn iid_normalized_sums_look_normal() {
    // Lebesgue steps make the summands iid, and sqrt(2) cos has unit
    // variance, so S_n / sqrt(n) should be close to N(0,1) already at
    // moderate n.
    let phi = sqrt2_cos();
    let mu = TorusMeasure::lebesgue(1);
    let sigma2 = gordin_livsic_sigma2(&phi, &mu, VarianceMethod::ClosedForm)
        .unwrap()
        .sigma2;
    assert!((sigma2 - 1.0).abs() < 1e-12);
    let report = clt_experiment(&base_cfg(mu, 20_260_816), &phi, sigma2, 4096, 20000);
    assert!(report.ks_statistic < 0.02, "ks = {}", report.ks_statistic);
    assert!(
        report.sample_variance > 0.95 && report.sample_variance < 1.05,
        "variance = {}",
        report.sample_variance
    );
    assert!(report.sample_mean.abs() < 0.03, "mean = {}", report.sample_mean);
}

#[test]
fn dependent_chain_satisfies_the_clt() {
    // Golden-mean two-atom steps give genuinely dependent summands; the
    // normalization must come from the chain variance, not the marginal one.
    let phi = observable_preset("cos", 1).unwrap();
    let mu = TorusMeasure::two_atom_golden();
    let sigma2 = gordin_livsic_sigma2(&phi, &mu, VarianceMethod::ClosedForm)
        .unwrap()
        .sigma2;
    assert!(sigma2 > 0.0);
    let report = clt_experiment(&base_cfg(mu, 8_161_993), &phi, sigma2, 4096, 20000);
    assert!(report.ks_statistic < 0.02, "ks = {}", report.ks_statistic);
    assert!(
        (report.sample_variance - 1.0).abs() < 0.05,
        "variance = {}",
        report.sample_variance
    );
}

#[test]
fn mis_scaled_sigma_is_detected() {
    // Negative control: doubling sigma shrinks the sample variance to ~1/4
    // and the KS distance must blow up well past any acceptance threshold.
    let phi = sqrt2_cos();
    let mu = TorusMeasure::lebesgue(1);
    let report = clt_experiment(&base_cfg(mu, 99), &phi, 4.0, 1024, 5000);
    assert!(report.ks_statistic > 0.1, "ks = {}", report.ks_statistic);
    assert!(
        (report.sample_variance - 0.25).abs() < 0.02,
        "variance = {}",
        report.sample_variance
    );
}
