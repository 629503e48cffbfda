use crate::error::SpectralError;
use crate::markov::DecayTrace;

/// Entries at or below this are treated as exact zeros and excluded from
/// log-log fits.
pub const FIT_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Declared,
    Fitted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MixingRate {
    /// `C · n^{-p}`
    Power { p: f64 },
    /// `C · sigma^n`
    Exponential { sigma: f64 },
}

/// A mixing speed claim: `‖Q^n φ − mean‖ ≤ bound_at(n) · ‖φ‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingProfile {
    pub c: f64,
    pub rate: MixingRate,
    pub provenance: Provenance,
}

impl MixingProfile {
    pub fn power(c: f64, p: f64, provenance: Provenance) -> Self {
        assert!(c > 0.0, "mixing constant must be positive");
        assert!(p > 0.0, "power exponent must be positive");
        Self {
            c,
            rate: MixingRate::Power { p },
            provenance,
        }
    }

    pub fn exponential(c: f64, sigma: f64, provenance: Provenance) -> Self {
        assert!(c > 0.0, "mixing constant must be positive");
        assert!(0.0 < sigma && sigma < 1.0, "rate must lie in (0,1)");
        Self {
            c,
            rate: MixingRate::Exponential { sigma },
            provenance,
        }
    }

    pub fn bound_at(&self, n: u64) -> f64 {
        assert!(n >= 1);
        match self.rate {
            MixingRate::Power { p } => self.c * (n as f64).powf(-p),
            MixingRate::Exponential { sigma } => self.c * sigma.powi(n as i32),
        }
    }
}

/// Least-squares line through (log n, log bound) over trace rows with
/// `n_lo <= n <= n_hi`; the fitted profile is `C n^{-p}` with `p` the
/// negated slope. Rows with bound at or below [`FIT_FLOOR`] are excluded;
/// fewer than 3 usable rows is an error.
pub fn fit_power_rate(
    trace: &DecayTrace,
    n_lo: u64,
    n_hi: u64,
) -> Result<MixingProfile, SpectralError> {
    let pts: Vec<(f64, f64)> = trace
        .rows
        .iter()
        .filter(|r| r.n >= n_lo && r.n <= n_hi && r.bound_value > FIT_FLOOR)
        .map(|r| ((r.n as f64).ln(), r.bound_value.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(SpectralError::InsufficientPoints);
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    assert!(denom > 0.0, "fit window must span at least two distinct n");
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    Ok(MixingProfile {
        c: intercept.exp(),
        rate: MixingRate::Power { p: -slope },
        provenance: Provenance::Fitted,
    })
}

/// Truncation degree for approximating a Hölder observable before driving
/// it through n steps of a chain whose measure satisfies the decay
/// condition with constants (gamma, tau): `floor((n·gamma)^{9/(10·tau)})`,
/// at least 1.
///
/// The tiny nudge before flooring absorbs one ulp of `powf` error so that
/// arguments with an exact integer power (e.g. 1024^{0.3} = 8) floor to it.
pub fn jackson_degree(n: u64, gamma: f64, tau: f64) -> usize {
    assert!(n >= 1, "need at least one step");
    assert!(gamma > 0.0 && tau > 0.0, "decay constants must be positive");
    let raw = (n as f64 * gamma).powf(0.9 / tau) + 1e-9;
    (raw.floor() as usize).max(1)
}
