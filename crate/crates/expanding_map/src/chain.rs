use crate::error::ExpandingMapError;
use crate::grid::{DensityGrid, DensitySampler};
use crate::model::CircleMapModel;
use chain_simulator::{trial_rng, DeviationEstimate, EstimateMethod, Z95};
use clt::{ks_against_normal, CltReport};
use rand::Rng;
use rayon::prelude::*;

/// One backward-chain trajectory x_0, x_1, ..., x_n: each step picks a
/// preimage of the current point with probability g(y) / (g(x) |f'(y)|),
/// normalized at the point. Returns n + 1 values.
pub fn backward_chain<R: Rng + ?Sized>(
    model: &CircleMapModel,
    g: &DensityGrid,
    x0: f64,
    n: usize,
    rng: &mut R,
) -> Result<Vec<f64>, ExpandingMapError> {
    let mut path = Vec::with_capacity(n + 1);
    let mut x = torus_measure::fract_unit(x0);
    path.push(x);
    for _ in 0..n {
        x = backward_step(model, g, x, rng)?;
        path.push(x);
    }
    Ok(path)
}

fn backward_step<R: Rng + ?Sized>(
    model: &CircleMapModel,
    g: &DensityGrid,
    x: f64,
    rng: &mut R,
) -> Result<f64, ExpandingMapError> {
    let preimages = model.preimages(x)?;
    let weights: Vec<f64> =
        preimages.iter().map(|&y| g.eval(y) / model.derivative_at(y).abs()).collect();
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (&y, &w) in preimages.iter().zip(&weights) {
        if u < w {
            return Ok(y);
        }
        u -= w;
    }
    Ok(*preimages.last().expect("degree >= 2 guarantees a branch"))
}

/// Monte-Carlo frequency of {|S_n phi / n - mean| > epsilon} along backward
/// chains started at the stationary density. Trial i draws from stream i of
/// the seed (start point first, then the steps), and integer hit counts are
/// reduced in trial order, so the estimate is identical for any worker
/// count.
pub fn expanding_deviation(
    model: &CircleMapModel,
    g: &DensityGrid,
    phi: &DensityGrid,
    mean: f64,
    epsilon: f64,
    n: u64,
    trials: u64,
    seed: u64,
) -> Result<DeviationEstimate, ExpandingMapError> {
    assert!(trials > 0 && n > 0);
    let sampler = DensitySampler::new(g);
    let hits: Vec<Result<u64, ExpandingMapError>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let x0 = sampler.draw(&mut rng);
            let path = backward_chain(model, g, x0, n as usize, &mut rng)?;
            let sum: f64 = path[..n as usize].iter().map(|&x| phi.eval(x)).sum();
            Ok(u64::from((sum / n as f64 - mean).abs() > epsilon))
        })
        .collect();
    let mut count = 0u64;
    for h in hits {
        count += h?;
    }
    let p_hat = count as f64 / trials as f64;
    let half = Z95 * (p_hat * (1.0 - p_hat) / trials as f64).sqrt();
    Ok(DeviationEstimate {
        epsilon,
        n,
        p_hat,
        ci_halfwidth: half.max(1.0 / trials as f64),
        method: EstimateMethod::MonteCarlo,
    })
}

/// Empirical CLT for the backward chain: `trials` draws of
/// S_n phi / sqrt(sigma2 n) from stationary starts, compared to N(0, 1).
/// `phi` must already be centered (mean zero against g dm) and `sigma2` is
/// taken as given, so a wrong variance shows up as a failed fit.
pub fn expanding_clt(
    model: &CircleMapModel,
    g: &DensityGrid,
    phi: &DensityGrid,
    sigma2: f64,
    n: u64,
    trials: u64,
    seed: u64,
) -> Result<CltReport, ExpandingMapError> {
    assert!(sigma2 > 0.0, "CLT normalization needs sigma2 > 0");
    assert!(trials > 1 && n > 0);
    let sampler = DensitySampler::new(g);
    let scale = 1.0 / (sigma2 * n as f64).sqrt();
    let results: Vec<Result<f64, ExpandingMapError>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let x0 = sampler.draw(&mut rng);
            let path = backward_chain(model, g, x0, n as usize, &mut rng)?;
            let sum: f64 = path[..n as usize].iter().map(|&x| phi.eval(x)).sum();
            Ok(sum * scale)
        })
        .collect();
    let mut samples = Vec::with_capacity(trials as usize);
    for r in results {
        samples.push(r?);
    }
    let ks = ks_against_normal(&mut samples);
    let m = trials as f64;
    let mean = samples.iter().sum::<f64>() / m;
    let variance = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    Ok(CltReport { n, trials, ks_statistic: ks, sample_mean: mean, sample_variance: variance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{invariant_density, markov_sigma2};
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    use std::f64::consts::TAU;

    #[test]
    fn doubling_step_from_zero_picks_both_halves_evenly() {
        let model = CircleMapModel::doubling(512);
        let g = invariant_density(&model, 1e-10, 50).unwrap();
        let trials = 40_000usize;
        let mut low = 0usize;
        for trial in 0..trials {
            let mut rng = trial_rng(7, trial as u64);
            let path = backward_chain(&model, &g, 0.0, 1, &mut rng).unwrap();
            assert!(path[1] == 0.0 || path[1] == 0.5, "preimage of 0 is {{0, 1/2}}");
            if path[1] == 0.0 {
                low += 1;
            }
        }
        let p = low as f64 / trials as f64;
        let sd = (0.25 / trials as f64).sqrt();
        assert!((p - 0.5).abs() < 3.0 * sd, "p = {p}");
    }

    #[test]
    fn doubling_chain_equidistributes_from_a_point_start() {
        // After 20 backward doubling steps the law is uniform on a dyadic
        // lattice; bin frequencies against a chi-square bound at 64 bins.
        let model = CircleMapModel::doubling(512);
        let g = invariant_density(&model, 1e-10, 50).unwrap();
        let trials = 100_000u64;
        let bins = 64usize;
        let counts: Vec<usize> = (0..trials)
            .into_par_iter()
            .fold(
                || vec![0usize; bins],
                |mut acc, trial| {
                    let mut rng = trial_rng(11, trial);
                    let path = backward_chain(&model, &g, 0.37, 20, &mut rng).unwrap();
                    let idx = ((path[20] * bins as f64) as usize).min(bins - 1);
                    acc[idx] += 1;
                    acc
                },
            )
            .reduce(
                || vec![0usize; bins],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    a
                },
            );
        let expected = trials as f64 / bins as f64;
        let chi2: f64 =
            counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        let cutoff = ChiSquared::new((bins - 1) as f64).unwrap().inverse_cdf(0.9999);
        assert!(chi2 < cutoff, "chi2 = {chi2:.1}, cutoff = {cutoff:.1}");
    }

    #[test]
    fn stationary_start_stays_stationary_one_step_back() {
        let model = CircleMapModel::perturbed2(0.5, 1024).unwrap();
        let g = invariant_density(&model, 1e-9, 2000).unwrap();
        let sampler = DensitySampler::new(&g);
        let trials = 30_000u64;
        let mut starts = Vec::with_capacity(trials as usize);
        let mut stepped = Vec::with_capacity(trials as usize);
        for trial in 0..trials {
            let mut rng = trial_rng(23, trial);
            let x0 = sampler.draw(&mut rng);
            starts.push(x0);
            stepped.push(backward_step(&model, &g, x0, &mut rng).unwrap());
        }
        let d = crate::grid::ks_two_sample(&mut starts, &mut stepped);
        assert!(d < 0.015, "KS = {d:.4}");
    }

    #[test]
    fn pushing_a_stationary_sample_forward_keeps_the_law() {
        let model = CircleMapModel::perturbed2(0.5, 1024).unwrap();
        let g = invariant_density(&model, 1e-9, 2000).unwrap();
        let sampler = DensitySampler::new(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let n = 30_000;
        let mut fresh = Vec::with_capacity(n);
        let mut pushed = Vec::with_capacity(n);
        for _ in 0..n {
            fresh.push(sampler.draw(&mut rng));
            pushed.push(model.map(sampler.draw(&mut rng)));
        }
        let d = crate::grid::ks_two_sample(&mut fresh, &mut pushed);
        assert!(d < 0.015, "KS = {d:.4}");
    }

    #[test]
    fn doubling_clt_matches_the_variance_form() {
        let model = CircleMapModel::doubling(1024);
        let g = invariant_density(&model, 1e-10, 50).unwrap();
        let phi = DensityGrid::from_fn(1024, |x| (TAU * x).cos());
        let sigma2 = markov_sigma2(&model, &g, &phi).unwrap();
        let report = expanding_clt(&model, &g, &phi, sigma2, 256, 2000, 31).unwrap();
        assert!(report.ks_statistic < 0.05, "KS = {:.4}", report.ks_statistic);
        assert!((report.sample_variance - 1.0).abs() < 0.15);
    }

    #[test]
    fn deviation_estimates_are_reproducible() {
        let model = CircleMapModel::doubling(512);
        let g = invariant_density(&model, 1e-10, 50).unwrap();
        let phi = DensityGrid::from_fn(512, |x| (TAU * x).cos());
        let a = expanding_deviation(&model, &g, &phi, 0.0, 0.2, 16, 4000, 41).unwrap();
        let b = expanding_deviation(&model, &g, &phi, 0.0, 0.2, 16, 4000, 41).unwrap();
        assert_eq!(a.p_hat.to_bits(), b.p_hat.to_bits());
        assert_eq!(a.method, EstimateMethod::MonteCarlo);
        assert!(a.p_hat > 0.0 && a.p_hat < 1.0);
    }
}
