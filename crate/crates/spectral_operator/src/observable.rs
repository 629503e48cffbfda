use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use torus_measure::TorusPoint;

use crate::error::SpectralError;

/// Tolerance on `coeff(-k) == conj(coeff(k))` accepted at construction.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Real trigonometric polynomial on the d-torus, stored as a dense block of
/// Fourier coefficients over the box `|k|_inf <= radius`.
///
/// Construction symmetrizes the block exactly, so `coeff(-k)` is bitwise the
/// conjugate of `coeff(k)` and evaluation returns an exactly real `f64`.
#[derive(Debug, Clone)]
pub struct FourierObservable {
    dim: usize,
    radius: usize,
    /// Row-major over the coefficient box, last axis fastest.
    coeffs: Vec<Complex64>,
    /// Hölder exponent of the sampled source function, when known.
    pub holder_alpha: Option<f64>,
    /// Estimated `sup + seminorm` of the sampled source function.
    pub holder_norm_bound: Option<f64>,
    /// Sup-norm bound on (source function) - (this polynomial).
    pub truncation_error_bound: Option<f64>,
}

fn box_cells(dim: usize, radius: usize) -> usize {
    (2 * radius + 1).pow(dim as u32)
}

fn encode(k: &[i64], radius: usize) -> usize {
    let side = 2 * radius + 1;
    let mut idx = 0usize;
    for &ki in k {
        idx = idx * side + (ki + radius as i64) as usize;
    }
    idx
}

fn decode(mut idx: usize, dim: usize, radius: usize, out: &mut [i64]) {
    let side = 2 * radius + 1;
    for slot in out[..dim].iter_mut().rev() {
        *slot = (idx % side) as i64 - radius as i64;
        idx /= side;
    }
}

/// True when the first nonzero coordinate is positive: picks one
/// representative from each conjugate pair `{k, -k}`.
fn leads_positive(k: &[i64]) -> bool {
    for &ki in k {
        if ki != 0 {
            return ki > 0;
        }
    }
    false
}

impl FourierObservable {
    /// Build from explicit coefficients. `get(k)` is consulted once per
    /// lattice point in the box. Coefficients must be Hermitian within
    /// [`HERMITIAN_TOL`]; the stored block is the exact symmetrization.
    pub fn from_fn(
        dim: usize,
        radius: usize,
        mut get: impl FnMut(&[i64]) -> Complex64,
    ) -> Result<Self, SpectralError> {
        assert!(dim >= 1, "observable needs at least one dimension");
        let cells = box_cells(dim, radius);
        let mut raw = vec![Complex64::new(0.0, 0.0); cells];
        let mut k = vec![0i64; dim];
        for (idx, slot) in raw.iter_mut().enumerate() {
            decode(idx, dim, radius, &mut k);
            *slot = get(&k);
            if !slot.re.is_finite() || !slot.im.is_finite() {
                return Err(SpectralError::InvalidObservable(format!(
                    "non-finite coefficient at k={k:?}"
                )));
            }
        }
        let mut coeffs = raw.clone();
        let mut neg = vec![0i64; dim];
        for (idx, slot) in coeffs.iter_mut().enumerate() {
            decode(idx, dim, radius, &mut k);
            for (n, &ki) in neg.iter_mut().zip(&k) {
                *n = -ki;
            }
            let mirror = raw[encode(&neg, radius)];
            if (*slot - mirror.conj()).norm() > HERMITIAN_TOL {
                return Err(SpectralError::InvalidObservable(format!(
                    "coefficients not Hermitian at k={k:?}"
                )));
            }
            *slot = (*slot + mirror.conj()) * 0.5;
        }
        Ok(Self {
            dim,
            radius,
            coeffs,
            holder_alpha: None,
            holder_norm_bound: None,
            truncation_error_bound: None,
        })
    }

    /// Build from a sparse list of `(lattice point, value)` pairs; unlisted
    /// points are zero. The radius is the largest listed `|k|_inf`.
    pub fn from_pairs(
        dim: usize,
        pairs: &[(Vec<i64>, Complex64)],
    ) -> Result<Self, SpectralError> {
        let mut radius = 0usize;
        for (k, _) in pairs {
            if k.len() != dim {
                return Err(SpectralError::InvalidObservable(format!(
                    "lattice point {k:?} is not {dim}-dimensional"
                )));
            }
            for &ki in k {
                radius = radius.max(ki.unsigned_abs() as usize);
            }
        }
        let mut raw = vec![Complex64::new(0.0, 0.0); box_cells(dim, radius)];
        for (k, v) in pairs {
            raw[encode(k, radius)] += v;
        }
        Self::from_fn(dim, radius, |k| raw[encode(k, radius)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Coefficient at `k`; zero outside the stored box.
    pub fn coeff(&self, k: &[i64]) -> Complex64 {
        assert_eq!(k.len(), self.dim);
        if k.iter().any(|ki| ki.unsigned_abs() as usize > self.radius) {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[encode(k, self.radius)]
    }

    /// Mean against Lebesgue: the zero-frequency coefficient (exactly real
    /// after symmetrization).
    pub fn mean(&self) -> f64 {
        self.coeffs[encode(&vec![0i64; self.dim], self.radius)].re
    }

    /// Visit every stored coefficient in a fixed row-major order.
    pub fn for_each_coeff(&self, mut visit: impl FnMut(&[i64], Complex64)) {
        let mut k = vec![0i64; self.dim];
        for (idx, &c) in self.coeffs.iter().enumerate() {
            decode(idx, self.dim, self.radius, &mut k);
            visit(&k, c);
        }
    }

    /// Map every coefficient through `f(k, c)`, keeping metadata. The caller
    /// must preserve Hermitian symmetry; the result is re-checked in debug
    /// builds only.
    pub(crate) fn map_coeffs(
        &self,
        mut f: impl FnMut(&[i64], Complex64) -> Complex64,
    ) -> Self {
        let mut out = self.clone();
        let mut k = vec![0i64; self.dim];
        for (idx, slot) in out.coeffs.iter_mut().enumerate() {
            decode(idx, self.dim, self.radius, &mut k);
            *slot = f(&k, *slot);
        }
        out
    }

    /// Evaluate at a point. Conjugate pairs are folded into `2 Re(...)`
    /// terms, so the result is exactly real.
    pub fn evaluate(&self, theta: &TorusPoint) -> f64 {
        assert_eq!(theta.dim(), self.dim);
        let mut acc = self.mean();
        let mut k = vec![0i64; self.dim];
        for (idx, &c) in self.coeffs.iter().enumerate() {
            decode(idx, self.dim, self.radius, &mut k);
            if !leads_positive(&k) {
                continue;
            }
            let mut phase = 0.0f64;
            for (ki, xi) in k.iter().zip(theta.coords()) {
                phase += *ki as f64 * xi;
            }
            let (s, co) = (TAU * phase).sin_cos();
            acc += 2.0 * (c.re * co - c.im * s);
        }
        acc
    }

    /// `sum_{k != 0} |coeff(k)|`: sup-norm bound on the oscillating part.
    pub fn oscillation_bound(&self) -> f64 {
        let zero = encode(&vec![0i64; self.dim], self.radius);
        self.coeffs
            .iter()
            .enumerate()
            .filter(|&(idx, _)| idx != zero)
            .map(|(_, c)| c.norm())
            .sum()
    }
}

/// Named observables accepted by definition files and configs.
///
/// `cos` is cos(2π θ); `sum_cos_k2` is Σ_{k=1..K} cos(2πkθ)/k²;
/// `triangle` is the degree-K Fourier truncation of 1 − 4|θ − ½|, whose
/// exact coefficients are −4/(π²k²) at odd k.
pub fn observable_preset(name: &str, k_max: usize) -> Option<FourierObservable> {
    let one_d = |radius: usize, c: &dyn Fn(i64) -> f64| {
        FourierObservable::from_fn(1, radius, |k| Complex64::new(c(k[0]), 0.0)).unwrap()
    };
    match name {
        "cos" => Some(one_d(1, &|k| if k.abs() == 1 { 0.5 } else { 0.0 })),
        "sum_cos_k2" => {
            assert!(k_max >= 1, "sum_cos_k2 needs a positive radius");
            Some(one_d(k_max, &|k| {
                if k == 0 {
                    0.0
                } else {
                    0.5 / ((k * k) as f64)
                }
            }))
        }
        "triangle" => {
            assert!(k_max >= 1, "triangle needs a positive radius");
            Some(one_d(k_max, &|k| {
                if k.rem_euclid(2) == 1 {
                    -4.0 / (PI * PI * (k * k) as f64)
                } else {
                    0.0
                }
            }))
        }
        _ => None,
    }
}
