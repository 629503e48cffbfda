use rayon::prelude::*;
use torus_measure::{TorusMeasure, TorusPoint};

use crate::chain::{birkhoff_sum, trial_rng, ChainConfig};
use crate::error::ChainError;
use crate::state::SkewState;

/// Standard normal 97.5% quantile: half-widths are 95% two-sided.
pub const Z95: f64 = 1.959963984540054;

/// Exact enumeration refuses above this many symbol paths.
pub const EXACT_PATH_CAP: f64 = 1e7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateMethod {
    MonteCarlo,
    Exact,
}

impl std::fmt::Display for EstimateMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EstimateMethod::MonteCarlo => write!(f, "monte_carlo"),
            EstimateMethod::Exact => write!(f, "exact"),
        }
    }
}

/// Estimated (or exactly computed) probability of the deviation event
/// {|S_n/n - mean| > epsilon}.
#[derive(Debug, Clone, Copy)]
pub struct DeviationEstimate {
    pub epsilon: f64,
    pub n: u64,
    pub p_hat: f64,
    /// 95% normal-approximation half-width, floored at 1/n_trials so a zero
    /// count never claims zero uncertainty. Zero for exact enumeration.
    pub ci_halfwidth: f64,
    pub method: EstimateMethod,
}

/// Monte-Carlo frequency of the deviation event over cfg.n_trials
/// independent trajectories. `mean_value` is supplied by the caller (series
/// coefficient or exact atom sum), never re-estimated here.
///
/// Trial i draws from stream i of cfg.seed and contributes an integer hit
/// count; counts are summed, so the result is bit-identical for any worker
/// count or scheduling order.
pub fn deviation_probability(
    cfg: &ChainConfig,
    phi: &(dyn Fn(&SkewState) -> f64 + Sync),
    mean_value: f64,
    epsilon: f64,
) -> DeviationEstimate {
    cfg.assert_valid();
    assert!(epsilon > 0.0, "threshold must be positive");
    let n = cfg.n_steps;
    let hits: u64 = (0..cfg.n_trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(cfg.seed, trial);
            let s = birkhoff_sum(cfg, phi, &mut rng);
            u64::from((s / n as f64 - mean_value).abs() > epsilon)
        })
        .sum();
    let trials = cfg.n_trials as f64;
    let p_hat = hits as f64 / trials;
    let ci_halfwidth = (Z95 * (p_hat * (1.0 - p_hat) / trials).sqrt()).max(1.0 / trials);
    DeviationEstimate {
        epsilon,
        n,
        p_hat,
        ci_halfwidth,
        method: EstimateMethod::MonteCarlo,
    }
}

/// Exact probability of the deviation event for a finitely supported
/// increment measure, by weighted enumeration of symbol paths from the
/// fixed start theta0 (plain chain, window 0).
///
/// S_n depends on the first n-1 increments only, so m^{n-1} paths are
/// walked; the documented cap stays at m^n <= 10^7.
pub fn exact_deviation(
    mu: &TorusMeasure,
    phi: &(dyn Fn(&SkewState) -> f64 + Sync),
    theta0: &TorusPoint,
    mean_value: f64,
    epsilon: f64,
    n: u64,
) -> Result<DeviationEstimate, ChainError> {
    assert!(n >= 1, "need at least one step");
    assert!(epsilon > 0.0, "threshold must be positive");
    let TorusMeasure::Atomic { atoms } = mu else {
        return Err(ChainError::NotAtomic);
    };
    if (atoms.len() as f64).powi(n as i32) > EXACT_PATH_CAP {
        return Err(ChainError::StateSpaceTooLarge);
    }

    fn walk(
        atoms: &[(TorusPoint, f64)],
        phi: &(dyn Fn(&SkewState) -> f64 + Sync),
        state: &SkewState,
        partial_sum: f64,
        weight: f64,
        levels_left: u64,
        n: f64,
        mean: f64,
        epsilon: f64,
        acc: &mut f64,
    ) {
        let sum = partial_sum + phi(state);
        if levels_left == 0 {
            if (sum / n - mean).abs() > epsilon {
                *acc += weight;
            }
            return;
        }
        for (omega, w) in atoms {
            let mut next = state.clone();
            next.advance(omega);
            walk(
                atoms,
                phi,
                &next,
                sum,
                weight * w,
                levels_left - 1,
                n,
                mean,
                epsilon,
                acc,
            );
        }
    }

    let mut acc = 0.0;
    walk(
        atoms,
        phi,
        &SkewState::new(theta0.clone(), 0),
        0.0,
        1.0,
        n - 1,
        n as f64,
        mean_value,
        epsilon,
        &mut acc,
    );
    Ok(DeviationEstimate {
        epsilon,
        n,
        p_hat: acc.clamp(0.0, 1.0),
        ci_halfwidth: 0.0,
        method: EstimateMethod::Exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::StartMode;
    use std::f64::consts::TAU;

    fn cos_theta(state: &SkewState) -> f64 {
        (TAU * state.theta().coord(0)).cos()
    }

    #[test]
    fn period_two_start_never_deviates() {
        let cfg = ChainConfig {
            mu: TorusMeasure::dirac(TorusPoint::scalar(0.5)),
            initial: StartMode::Fixed(TorusPoint::scalar(0.0)),
            n_steps: 10,
            n_trials: 500,
            seed: 3,
            window_w: 0,
        };
        let est = deviation_probability(&cfg, &cos_theta, 0.0, 0.1);
        assert_eq!(est.p_hat, 0.0);
        assert_eq!(est.ci_halfwidth, 1.0 / 500.0);
    }

    #[test]
    fn thresholds_beyond_the_sup_are_never_hit() {
        let cfg = ChainConfig {
            mu: TorusMeasure::lebesgue(1),
            initial: StartMode::Stationary,
            n_steps: 16,
            n_trials: 2_000,
            seed: 11,
            window_w: 0,
        };
        let est = deviation_probability(&cfg, &cos_theta, 0.0, 2.1);
        assert_eq!(est.p_hat, 0.0);
    }

    #[test]
    fn hand_enumerated_two_step_case() {
        // Increments 0 or 1/2 with weight 1/2: S_2 = 2 on the frozen branch,
        // 0 on the flipped branch, so P{|S_2/2| > 1/2} = 1/2.
        let mu = TorusMeasure::two_atom(0.5);
        let est =
            exact_deviation(&mu, &cos_theta, &TorusPoint::scalar(0.0), 0.0, 0.5, 2).unwrap();
        assert_eq!(est.p_hat, 0.5);
        assert_eq!(est.method, EstimateMethod::Exact);
    }

    #[test]
    fn dirac_deviates_with_certainty_when_the_gap_exceeds_epsilon() {
        let mu = TorusMeasure::dirac(TorusPoint::scalar(0.0));
        // phi(theta0) = 1, mean 0: any epsilon below 1 must report 1.
        let est =
            exact_deviation(&mu, &cos_theta, &TorusPoint::scalar(0.0), 0.0, 0.9, 5).unwrap();
        assert_eq!(est.p_hat, 1.0);
    }

    #[test]
    fn the_path_cap_is_enforced() {
        let mu = TorusMeasure::two_atom_golden();
        let err = exact_deviation(&mu, &cos_theta, &TorusPoint::scalar(0.0), 0.0, 0.5, 24)
            .unwrap_err();
        assert_eq!(err.to_string(), "state space too large");

        let err = exact_deviation(
            &TorusMeasure::lebesgue(1),
            &cos_theta,
            &TorusPoint::scalar(0.0),
            0.0,
            0.5,
            2,
        )
        .unwrap_err();
        assert!(err.to_string().contains("atomic"), "{err}");
    }

    #[test]
    fn monte_carlo_matches_exact_enumeration_on_a_small_case() {
        let mu = TorusMeasure::two_atom_golden();
        let exact =
            exact_deviation(&mu, &cos_theta, &TorusPoint::scalar(0.0), 0.0, 0.25, 12).unwrap();
        let cfg = ChainConfig {
            mu,
            initial: StartMode::Fixed(TorusPoint::scalar(0.0)),
            n_steps: 12,
            n_trials: 50_000,
            seed: 99,
            window_w: 0,
        };
        let mc = deviation_probability(&cfg, &cos_theta, 0.0, 0.25);
        assert!(
            (mc.p_hat - exact.p_hat).abs() <= 3.0 * mc.ci_halfwidth,
            "mc {} vs exact {} (ci {})",
            mc.p_hat,
            exact.p_hat,
            mc.ci_halfwidth
        );
    }

    #[test]
    fn estimates_are_deterministic() {
        let cfg = ChainConfig {
            mu: TorusMeasure::two_atom_golden(),
            initial: StartMode::Stationary,
            n_steps: 20,
            n_trials: 4_000,
            seed: 123,
            window_w: 0,
        };
        let a = deviation_probability(&cfg, &cos_theta, 0.0, 0.3);
        let b = deviation_probability(&cfg, &cos_theta, 0.0, 0.3);
        assert_eq!(a.p_hat.to_bits(), b.p_hat.to_bits());
    }
}
