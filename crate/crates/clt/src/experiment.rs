use chain_simulator::{birkhoff_sum, trial_rng, with_start, ChainConfig, SkewState, StartMode};
use rayon::prelude::*;
use spectral_operator::FourierObservable;
use statrs::distribution::{ContinuousCDF, Normal};

/// One empirical CLT run: Kolmogorov-Smirnov distance of the normalized
/// Birkhoff sums against N(0,1), plus the first two sample moments.
#[derive(Debug, Clone, PartialEq)]
pub struct CltReport {
    pub n: u64,
    pub trials: u64,
    pub ks_statistic: f64,
    pub sample_mean: f64,
    pub sample_variance: f64,
}

/// KS distance to the standard normal by the sorted-sample sup formula
/// D = max_i max(i/m - Phi(x_i), Phi(x_i) - (i-1)/m). Sorts in place.
pub fn ks_against_normal(samples: &mut [f64]) -> f64 {
    assert!(!samples.is_empty(), "KS distance needs at least one sample");
    samples.sort_by(f64::total_cmp);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let m = samples.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in samples.iter().enumerate() {
        let cdf = normal.cdf(x);
        d = d.max((i + 1) as f64 / m - cdf).max(cdf - i as f64 / m);
    }
    d
}

/// Draw `trials` values of S_n phi / (sigma sqrt(n)), each from its own
/// generator stream, and compare them to the standard normal. The start is
/// forced stationary: the limit theorem under test is a statement about the
/// stationary chain. `sigma2` is taken as given (normally the closed-form
/// value) and never re-estimated from the sample, so a wrong variance
/// formula surfaces as a failed fit instead of being absorbed.
pub fn clt_experiment(
    cfg: &ChainConfig,
    phi: &FourierObservable,
    sigma2: f64,
    n: u64,
    trials: u64,
) -> CltReport {
    assert!(sigma2 > 0.0, "normalization needs sigma2 > 0");
    assert!(n >= 1 && trials >= 1, "need at least one step and one trial");
    assert_eq!(phi.dim(), cfg.mu.dim(), "observable and chain dimension mismatch");
    let mut run_cfg = with_start(cfg, StartMode::Stationary);
    run_cfg.n_steps = n;
    run_cfg.n_trials = trials;
    let scale = 1.0 / (sigma2.sqrt() * (n as f64).sqrt());
    let observe = |state: &SkewState| phi.evaluate(state.theta());
    let mut samples: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(run_cfg.seed, trial);
            scale * birkhoff_sum(&run_cfg, &observe, &mut rng)
        })
        .collect();
    let ks_statistic = ks_against_normal(&mut samples);
    // Moments over the sorted sample, so the result cannot depend on how
    // the parallel map was scheduled.
    let m = trials as f64;
    let sample_mean = samples.iter().sum::<f64>() / m;
    let sample_variance = if trials > 1 {
        samples.iter().map(|x| (x - sample_mean).powi(2)).sum::<f64>() / (m - 1.0)
    } else {
        0.0
    };
    CltReport { n, trials, ks_statistic, sample_mean, sample_variance }
}

#[cfg(test)]
mod tests {
    use super::*;
    use spectral_operator::observable_preset;
    use torus_measure::TorusMeasure;

    fn small_cfg(seed: u64) -> ChainConfig {
        ChainConfig {
            mu: TorusMeasure::two_atom_golden(),
            initial: StartMode::Stationary,
            n_steps: 1,
            n_trials: 1,
            seed,
            window_w: 0,
        }
    }

    #[test]
    fn ks_of_a_single_median_sample_is_half() {
        let mut xs = vec![0.0];
        assert_eq!(ks_against_normal(&mut xs), 0.5);
    }

    #[test]
    fn ks_of_perfect_quantiles_is_half_spacing() {
        let normal = Normal::new(0.0, 1.0).unwrap();
        let m = 1000usize;
        let mut xs: Vec<f64> = (0..m)
            .map(|i| normal.inverse_cdf((i as f64 + 0.5) / m as f64))
            .collect();
        let d = ks_against_normal(&mut xs);
        assert!((d - 0.5 / m as f64).abs() < 1e-7, "d = {d}");
    }

    #[test]
    fn single_trial_report_is_degenerate_but_defined() {
        let phi = observable_preset("cos", 1).unwrap();
        let report = clt_experiment(&small_cfg(5), &phi, 0.5, 32, 1);
        // With one sample the KS distance is max(Phi(x), 1 - Phi(x)).
        assert!(report.ks_statistic >= 0.5 && report.ks_statistic <= 1.0);
        assert!(report.sample_mean.is_finite());
        assert_eq!(report.sample_variance, 0.0);
    }

    #[test]
    fn repeated_runs_are_bit_identical() {
        let phi = observable_preset("cos", 1).unwrap();
        let a = clt_experiment(&small_cfg(99), &phi, 0.5, 64, 200);
        let b = clt_experiment(&small_cfg(99), &phi, 0.5, 64, 200);
        assert_eq!(a, b);
    }
}
