//! Projection of arbitrary (Hölder) functions onto trigonometric
//! polynomials: equispaced sampling, FFT, and a Jackson-kernel taper.
//!
//! The taper weights are the Fourier coefficients of the classical Jackson
//! kernel of degree N, i.e. the normalized autocorrelation of the
//! triangular (Fejér) coefficient sequence of order m = floor(N/2)+1:
//!
//! ```text
//! t(j) = max(0, 1 - |j|/m),   R(k) = sum_j t(j) t(j+k),   w_k = R(k)/R(0)
//! ```
//!
//! Convolving with this kernel keeps the coefficient bound
//! `|c_k| <= const · ‖f‖_α |k|^{-α}` that the decay estimates need, at the
//! cost of shrinking each retained coefficient by the known factor `w_k`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use torus_measure::TorusPoint;

use crate::error::SpectralError;
use crate::observable::FourierObservable;

/// Sup-norm factor in the recorded truncation bound `const · L · N^{-α}`
/// for the degree-N Jackson approximation of a Hölder-α function.
pub const TRUNCATION_CONST: f64 = 6.0;

/// Random pairs drawn for the Hölder seminorm estimate.
pub const SEMINORM_PAIRS: usize = 10_000;

/// Fixed stream for the seminorm pairs: the estimate is part of the
/// deterministic output contract, so it must not depend on caller RNG state.
const SEMINORM_SEED: u64 = 0x4a61636b736f6e;

/// Taper weights `w_0..=w_N`. `w_0` is exactly 1; weights are nonnegative
/// and nonincreasing; for odd N the last weight is 0 (the kernel of order
/// m = floor(N/2)+1 supports frequencies up to 2m-2).
pub fn jackson_taper_weights(radius: usize) -> Vec<f64> {
    let m = (radius / 2 + 1) as i64;
    let t = |j: i64| -> f64 {
        if j.abs() < m {
            1.0 - j.abs() as f64 / m as f64
        } else {
            0.0
        }
    };
    let autocorr = |k: i64| -> f64 {
        let mut acc = 0.0;
        for j in -(m - 1)..m {
            acc += t(j) * t(j + k);
        }
        acc
    };
    let r0 = autocorr(0);
    (0..=radius as i64).map(|k| autocorr(k) / r0).collect()
}

/// Sample `f` on an equispaced grid, take the DFT, and taper to a
/// trigonometric polynomial of the given radius. Records the Hölder
/// exponent, an estimated norm bound `L = sup_sampled + seminorm_sampled`,
/// and the truncation bound `TRUNCATION_CONST · L · radius^{-α}`.
///
/// The seminorm is a random-pair under-estimate (max difference quotient
/// over [`SEMINORM_PAIRS`] pairs from a fixed stream); it is metadata for
/// bound formulas, not an exact norm.
pub fn holder_to_fourier(
    f: &dyn Fn(&TorusPoint) -> f64,
    dim: usize,
    alpha: f64,
    radius: usize,
    sample_resolution: usize,
) -> Result<FourierObservable, SpectralError> {
    assert!(dim == 1 || dim == 2, "sampling supports d <= 2, got {dim}");
    assert!(
        0.0 < alpha && alpha <= 1.0,
        "Hölder exponent must lie in (0, 1]"
    );
    assert!(radius >= 1);
    if sample_resolution <= 2 * radius {
        return Err(SpectralError::ResolutionTooLow);
    }

    let r = sample_resolution;
    let mut samples: Vec<f64> = Vec::with_capacity(r.pow(dim as u32));
    match dim {
        1 => {
            for i in 0..r {
                samples.push(f(&TorusPoint::scalar(i as f64 / r as f64)));
            }
        }
        _ => {
            for i in 0..r {
                for j in 0..r {
                    samples.push(f(&TorusPoint::new(vec![
                        i as f64 / r as f64,
                        j as f64 / r as f64,
                    ])));
                }
            }
        }
    }
    let sup_sampled = samples.iter().fold(0.0f64, |a, &s| a.max(s.abs()));

    let mut freq: Vec<Complex64> = samples
        .iter()
        .map(|&s| Complex64::new(s, 0.0))
        .collect();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(r);
    if dim == 1 {
        fft.process(&mut freq);
    } else {
        for row in freq.chunks_mut(r) {
            fft.process(row);
        }
        let mut col = vec![Complex64::new(0.0, 0.0); r];
        for j in 0..r {
            for (i, slot) in col.iter_mut().enumerate() {
                *slot = freq[i * r + j];
            }
            fft.process(&mut col);
            for (i, &v) in col.iter().enumerate() {
                freq[i * r + j] = v;
            }
        }
    }

    let scale = 1.0 / (r as f64).powi(dim as i32);
    let w = jackson_taper_weights(radius);
    let mut phi = FourierObservable::from_fn(dim, radius, |k| {
        let mut idx = 0usize;
        let mut taper = 1.0f64;
        for &ki in k {
            idx = idx * r + ki.rem_euclid(r as i64) as usize;
            taper *= w[ki.unsigned_abs() as usize];
        }
        freq[idx] * scale * taper
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(SEMINORM_SEED);
    let mut seminorm = 0.0f64;
    for _ in 0..SEMINORM_PAIRS {
        let x = TorusPoint::new((0..dim).map(|_| rng.gen::<f64>()).collect());
        let y = TorusPoint::new((0..dim).map(|_| rng.gen::<f64>()).collect());
        let dist = x.circle_distance_sup(&y);
        if dist < 1e-9 {
            continue;
        }
        seminorm = seminorm.max((f(&x) - f(&y)).abs() / dist.powf(alpha));
    }
    let norm_bound = sup_sampled + seminorm;
    phi.holder_alpha = Some(alpha);
    phi.holder_norm_bound = Some(norm_bound);
    phi.truncation_error_bound =
        Some(TRUNCATION_CONST * norm_bound * (radius as f64).powf(-alpha));
    Ok(phi)
}
