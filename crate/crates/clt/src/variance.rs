use num_complex::Complex64;
use spectral_operator::FourierObservable;
use torus_measure::TorusMeasure;

use crate::error::CltError;

/// Summability gate: every supported frequency needs |mu_hat(k)| < 1 minus
/// this margin, which is the geometric form of sum_n ||Q^n phi||_2 < inf for
/// trigonometric polynomials.
pub const SUMMABILITY_TOL: f64 = 1e-9;

/// Centering gate on the zero-frequency coefficient.
pub const MEAN_TOL: f64 = 1e-12;

/// A variance at or below this for a non-constant observable is reported as
/// an internal error, not as a degenerate limit.
pub const POSITIVITY_TOL: f64 = 1e-12;

/// Truncation horizon used when the caller does not pick one.
pub const DEFAULT_SERIES_TERMS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarianceMethod {
    ClosedForm,
    TruncatedSeries,
}

/// Asymptotic variance of n^{-1/2} S_n phi for the stationary chain.
#[derive(Debug, Clone)]
pub struct VarianceResult {
    pub sigma2: f64,
    pub method: VarianceMethod,
    /// Truncation horizon T (series method only).
    pub series_terms: Option<usize>,
    /// Rigorous bound on the distance to the untruncated value; zero for
    /// the closed form, which is exact.
    pub residual_bound: f64,
}

/// One supported frequency: |phi_hat(k)|^2 and mu_hat(k).
struct Mode {
    weight: f64,
    factor: Complex64,
}

fn supported_modes(
    phi: &FourierObservable,
    mu: &TorusMeasure,
) -> Result<Vec<Mode>, CltError> {
    assert_eq!(phi.dim(), mu.dim(), "observable and measure dimension mismatch");
    let mean = phi.mean();
    if mean.abs() > MEAN_TOL {
        return Err(CltError::NonzeroMean { mean });
    }
    let mut modes = Vec::new();
    let mut violation = None;
    phi.for_each_coeff(|k, c| {
        if k.iter().all(|&ki| ki == 0) || c == Complex64::new(0.0, 0.0) {
            return;
        }
        let factor = mu.fourier_coefficient(k);
        if factor.norm() >= 1.0 - SUMMABILITY_TOL && violation.is_none() {
            violation = Some(CltError::SummabilityViolated {
                k: k.to_vec(),
                magnitude: factor.norm(),
            });
        }
        modes.push(Mode { weight: c.norm_sqr(), factor });
    });
    match violation {
        Some(e) => Err(e),
        None => Ok(modes),
    }
}

/// Contribution of one frequency to the closed form:
/// |phi_hat(k)|^2 (1 - |mu_hat(k)|^2) / |1 - mu_hat(k)|^2, which is
/// |psi_hat(k)|^2 - |mu_hat(k) psi_hat(k)|^2 for psi_hat = phi_hat/(1-mu_hat).
fn closed_mode_term(m: &Mode) -> f64 {
    let one_minus = Complex64::new(1.0 - m.factor.re, -m.factor.im);
    m.weight * (1.0 - m.factor.norm_sqr()) / one_minus.norm_sqr()
}

/// Exact asymptotic variance, summed mode by mode in a fixed order. Every
/// term is nonnegative under the summability gate, so the result is too.
pub fn sigma2_closed(phi: &FourierObservable, mu: &TorusMeasure) -> Result<f64, CltError> {
    Ok(supported_modes(phi, mu)?.iter().map(closed_mode_term).sum())
}

/// sigma^2_T = ||psi_T||_2^2 - ||Q psi_T||_2^2 for psi_T = sum_{n<=T} Q^n phi.
///
/// The partial geometric sums are accumulated by explicit multiplication,
/// not through the closed-form quotient, so this is an independent check of
/// [`sigma2_closed`]. The residual uses S_T/S_inf = 1 - z with
/// z = mu_hat(k)^{T+1}: per mode the error is term * |2 Re z - |z|^2|, at
/// most 3 |z| times the closed-form term.
pub fn sigma2_series(
    phi: &FourierObservable,
    mu: &TorusMeasure,
    terms: usize,
) -> Result<VarianceResult, CltError> {
    let modes = supported_modes(phi, mu)?;
    let mut norm_psi = 0.0;
    let mut norm_q_psi = 0.0;
    let mut residual = 0.0;
    for m in &modes {
        let mut partial = Complex64::new(0.0, 0.0);
        let mut power = Complex64::new(1.0, 0.0);
        for _ in 0..=terms {
            partial += power;
            power *= m.factor;
        }
        norm_psi += m.weight * partial.norm_sqr();
        norm_q_psi += m.weight * (partial * m.factor).norm_sqr();
        // After the loop, power = mu_hat(k)^{T+1}.
        residual += closed_mode_term(m) * 3.0 * power.norm();
    }
    let sigma2 = norm_psi - norm_q_psi;
    assert!(sigma2 >= -1e-12, "truncated variance must be nonnegative");
    Ok(VarianceResult {
        sigma2,
        method: VarianceMethod::TruncatedSeries,
        series_terms: Some(terms),
        residual_bound: residual,
    })
}

/// Asymptotic variance of the centered observable `phi` along the chain
/// driven by `mu`, by either method. The closed form is exact; the series
/// method reports its truncation horizon and a rigorous residual bound.
pub fn gordin_livsic_sigma2(
    phi: &FourierObservable,
    mu: &TorusMeasure,
    method: VarianceMethod,
) -> Result<VarianceResult, CltError> {
    match method {
        VarianceMethod::ClosedForm => Ok(VarianceResult {
            sigma2: sigma2_closed(phi, mu)?,
            method,
            series_terms: None,
            residual_bound: 0.0,
        }),
        VarianceMethod::TruncatedSeries => sigma2_series(phi, mu, DEFAULT_SERIES_TERMS),
    }
}

/// For a non-constant centered observable under the summability gate every
/// closed-form mode term is strictly positive, so sigma^2 > 0 and the CLT is
/// non-degenerate. A nonpositive value therefore indicates a broken formula
/// and is reported as an internal error rather than returned as `false`.
pub fn positivity_check(
    phi: &FourierObservable,
    mu: &TorusMeasure,
) -> Result<bool, CltError> {
    let mut constant = true;
    phi.for_each_coeff(|k, c| {
        if k.iter().any(|&ki| ki != 0) && c != Complex64::new(0.0, 0.0) {
            constant = false;
        }
    });
    if constant {
        return Err(CltError::ConstantObservable);
    }
    let sigma2 = sigma2_closed(phi, mu)?;
    if sigma2 > POSITIVITY_TOL {
        Ok(true)
    } else {
        Err(CltError::Internal(format!(
            "sigma2 = {sigma2} for a non-constant observable"
        )))
    }
}
