//! Mixing Diophantine condition: scan, fit, and the ergodicity criterion.
//!
//! The condition reads |mu_hat(k)| <= 1 - gamma/|k|^tau for all lattice
//! vectors 0 < |k| <= k_max, with |k| the sup-norm (a declared convention:
//! it makes the scan region a box).

use crate::error::TorusMeasureError;
use crate::measure::TorusMeasure;

/// Fourier magnitudes closer to 1 than this are treated as non-decaying when
/// fitting; a fitted gamma below it carries no information at double precision.
pub const DC_DEGENERACY_FLOOR: f64 = 1e-9;

/// "mu_hat(k) = 1" in the ergodicity criterion means within this distance.
pub const ERGODIC_EQUALITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct MixingDCParams {
    pub gamma: f64,
    pub tau: f64,
    pub k_max: u32,
}

impl MixingDCParams {
    pub fn new(gamma: f64, tau: f64, k_max: u32) -> Result<Self, TorusMeasureError> {
        if !(gamma > 0.0) || !(tau > 0.0) || k_max < 1 {
            return Err(TorusMeasureError::InvalidMeasure(format!(
                "mixing DC parameters need gamma > 0, tau > 0, k_max >= 1 (got {gamma}, {tau}, {k_max})"
            )));
        }
        Ok(Self { gamma, tau, k_max })
    }
}

/// Result of a DC scan. `worst_margin` is the minimum over the scanned
/// lattice of (1 - |mu_hat(k)|) * |k|^tau - gamma; the condition holds up to
/// k_max exactly when that minimum is >= 0.
#[derive(Debug, Clone)]
pub struct DCReport {
    pub holds_up_to_kmax: bool,
    pub worst_k: Vec<i64>,
    pub worst_margin: f64,
}

/// Visit every lattice vector with 0 < |k|_sup <= k_max, in odometer order.
fn for_each_lattice_point(d: usize, k_max: u32, mut visit: impl FnMut(&[i64])) {
    let m = k_max as i64;
    let mut k = vec![-m; d];
    loop {
        if k.iter().any(|&c| c != 0) {
            visit(&k);
        }
        // Increment the odometer, last axis fastest.
        let mut axis = d;
        loop {
            if axis == 0 {
                return;
            }
            axis -= 1;
            if k[axis] < m {
                k[axis] += 1;
                break;
            }
            k[axis] = -m;
        }
    }
}

fn sup_norm(k: &[i64]) -> f64 {
    k.iter().map(|&c| c.abs()).max().unwrap() as f64
}

pub fn check_mixing_dc(mu: &TorusMeasure, params: &MixingDCParams) -> DCReport {
    let d = mu.dim();
    let mut worst_margin = f64::INFINITY;
    let mut worst_k = vec![0i64; d];
    for_each_lattice_point(d, params.k_max, |k| {
        let mag = mu.fourier_coefficient(k).norm();
        let margin = (1.0 - mag) * sup_norm(k).powf(params.tau) - params.gamma;
        if margin < worst_margin {
            worst_margin = margin;
            worst_k.copy_from_slice(k);
        }
    });
    DCReport {
        holds_up_to_kmax: worst_margin >= 0.0,
        worst_k,
        worst_margin,
    }
}

/// Fit (gamma*, tau*) over a tau grid: gamma(tau) is the largest gamma for
/// which the DC holds up to k_max, i.e. min_k (1 - |mu_hat(k)|)|k|^tau. Among
/// taus with gamma(tau) above the degeneracy floor the smallest tau wins
/// (it maximizes the predicted mixing exponent proxy 1/tau); duplicate grid
/// entries therefore tie-break to the same, smaller tau.
pub fn fit_mixing_dc(
    mu: &TorusMeasure,
    k_max: u32,
    tau_grid: &[f64],
) -> Result<(f64, f64), TorusMeasureError> {
    if tau_grid.is_empty() || tau_grid.iter().any(|&t| !(t > 0.0)) {
        return Err(TorusMeasureError::InvalidMeasure(
            "tau grid must be nonempty with positive entries".into(),
        ));
    }
    let d = mu.dim();
    // One Fourier scan, reused for every tau.
    let mut modes: Vec<(f64, f64)> = Vec::new(); // (|k|_sup, |mu_hat(k)|)
    for_each_lattice_point(d, k_max, |k| {
        modes.push((sup_norm(k), mu.fourier_coefficient(k).norm()));
    });
    let mut taus: Vec<f64> = tau_grid.to_vec();
    taus.sort_by(|a, b| a.partial_cmp(b).unwrap());
    taus.dedup();
    for &tau in &taus {
        let gamma = modes
            .iter()
            .map(|&(norm, mag)| (1.0 - mag) * norm.powf(tau))
            .fold(f64::INFINITY, f64::min);
        if gamma > DC_DEGENERACY_FLOOR {
            return Ok((gamma, tau));
        }
    }
    Err(TorusMeasureError::DegenerateMeasure)
}

/// True iff mu_hat(k) stays away from 1 (distance > 1e-12) for every
/// 0 < |k| <= k_max: the random translation chain has no nonconstant
/// invariant character up to that frequency.
pub fn is_ergodic_condition(mu: &TorusMeasure, k_max: u32) -> bool {
    let d = mu.dim();
    let mut ergodic = true;
    for_each_lattice_point(d, k_max, |k| {
        let c = mu.fourier_coefficient(k);
        if (c - 1.0).norm() <= ERGODIC_EQUALITY_TOL {
            ergodic = false;
        }
    });
    ergodic
}
