//! The measure type: atomic, gridded density, or mixture.

use std::f64::consts::TAU;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::Rng;

use crate::error::TorusMeasureError;
use crate::point::TorusPoint;

/// Atom weights must sum to 1 within this tolerance (a few ulps of slack for
/// sums of O(10) doubles).
pub const ATOM_WEIGHT_SUM_TOL: f64 = 1e-12;

/// Midpoint-quadrature integral of a density grid must be 1 within this
/// tolerance (roundoff across up to ~10^6 cells).
pub const DENSITY_INTEGRAL_TOL: f64 = 1e-10;

/// Default grid resolution per axis for d = 1 densities.
pub const DEFAULT_GRID_1D: usize = 1024;
/// Default grid resolution per axis for d = 2 densities.
pub const DEFAULT_GRID_2D: usize = 128;

/// g = (sqrt 5 - 1)/2, the fractional part of the golden ratio.
pub const GOLDEN_MEAN_CONJUGATE: f64 = 0.618033988749894848;

/// Gridded density data: `values[cell]` on midpoints of a uniform partition,
/// row-major over `dims`. The sampling CDF is built lazily on first draw.
#[derive(Debug)]
pub struct DensityData {
    dims: Vec<usize>,
    values: Vec<f64>,
    cdf: OnceLock<Vec<f64>>,
}

impl Clone for DensityData {
    fn clone(&self) -> Self {
        DensityData {
            dims: self.dims.clone(),
            values: self.values.clone(),
            cdf: OnceLock::new(),
        }
    }
}

/// A probability measure on T^d.
#[derive(Debug, Clone)]
pub enum TorusMeasure {
    /// Finitely many atoms with strictly positive weights summing to 1.
    Atomic { atoms: Vec<(TorusPoint, f64)> },
    /// Haar (uniform) measure, represented exactly: every coefficient off
    /// k = 0 is identically zero rather than quadrature noise.
    Lebesgue { dim: usize },
    /// Nonnegative density values on grid midpoints, integral 1 under the
    /// midpoint rule.
    DensityGrid(DensityData),
    /// t * first + (1-t) * second with t in (0, 1].
    Mixture {
        t: f64,
        first: Box<TorusMeasure>,
        second: Box<TorusMeasure>,
    },
}

impl TorusMeasure {
    pub fn atomic(atoms: Vec<(TorusPoint, f64)>) -> Result<Self, TorusMeasureError> {
        if atoms.is_empty() {
            return Err(TorusMeasureError::InvalidMeasure("no atoms".into()));
        }
        let d = atoms[0].0.dim();
        if atoms.iter().any(|(p, _)| p.dim() != d) {
            return Err(TorusMeasureError::InvalidMeasure(
                "atoms of mixed dimension".into(),
            ));
        }
        if atoms.iter().any(|&(_, w)| !(w > 0.0) || !w.is_finite()) {
            return Err(TorusMeasureError::InvalidMeasure(
                "atom weights must be strictly positive".into(),
            ));
        }
        let total: f64 = atoms.iter().map(|&(_, w)| w).sum();
        if (total - 1.0).abs() > ATOM_WEIGHT_SUM_TOL {
            return Err(TorusMeasureError::InvalidMeasure(format!(
                "atom weights sum to {total}, not 1"
            )));
        }
        Ok(TorusMeasure::Atomic { atoms })
    }

    pub fn density(dims: Vec<usize>, values: Vec<f64>) -> Result<Self, TorusMeasureError> {
        if dims.is_empty() || dims.iter().any(|&n| n == 0) {
            return Err(TorusMeasureError::InvalidMeasure(
                "density grid needs positive resolution per axis".into(),
            ));
        }
        let cells: usize = dims.iter().product();
        if values.len() != cells {
            return Err(TorusMeasureError::InvalidMeasure(format!(
                "density grid expects {cells} values, got {}",
                values.len()
            )));
        }
        if values.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(TorusMeasureError::InvalidMeasure(
                "density values must be nonnegative and finite".into(),
            ));
        }
        // Cell volume is 1/cells, so the midpoint integral is the mean value.
        let integral: f64 = values.iter().sum::<f64>() / cells as f64;
        if (integral - 1.0).abs() > DENSITY_INTEGRAL_TOL {
            return Err(TorusMeasureError::InvalidMeasure(format!(
                "density integrates to {integral}, not 1"
            )));
        }
        Ok(TorusMeasure::DensityGrid(DensityData {
            dims,
            values,
            cdf: OnceLock::new(),
        }))
    }

    pub fn mixture(t: f64, first: TorusMeasure, second: TorusMeasure) -> Result<Self, TorusMeasureError> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(TorusMeasureError::InvalidMeasure(format!(
                "mixture weight t = {t} outside (0, 1]"
            )));
        }
        if first.dim() != second.dim() {
            return Err(TorusMeasureError::InvalidMeasure(
                "mixture components of different dimension".into(),
            ));
        }
        Ok(TorusMeasure::Mixture {
            t,
            first: Box::new(first),
            second: Box::new(second),
        })
    }

    /// Dirac mass at a point.
    pub fn dirac(p: TorusPoint) -> Self {
        TorusMeasure::Atomic { atoms: vec![(p, 1.0)] }
    }

    /// Lebesgue (Haar) measure on T^d, exact.
    pub fn lebesgue(d: usize) -> Self {
        assert!(d >= 1);
        TorusMeasure::Lebesgue { dim: d }
    }

    /// Lebesgue as a constant density grid: same distribution, but carried
    /// through the quadrature representation (coefficients vanish only up
    /// to roundoff). Useful for exercising the grid pathway.
    pub fn lebesgue_with_resolution(d: usize, res: usize) -> Self {
        assert!(d >= 1 && res >= 1);
        let dims = vec![res; d];
        let cells: usize = dims.iter().product();
        TorusMeasure::DensityGrid(DensityData {
            dims,
            values: vec![1.0; cells],
            cdf: OnceLock::new(),
        })
    }

    /// The two-atom measure (delta_0 + delta_beta)/2 on T^1.
    pub fn two_atom(beta: f64) -> Self {
        TorusMeasure::Atomic {
            atoms: vec![
                (TorusPoint::scalar(0.0), 0.5),
                (TorusPoint::scalar(beta), 0.5),
            ],
        }
    }

    /// (delta_0 + delta_g)/2 with g = (sqrt 5 - 1)/2.
    pub fn two_atom_golden() -> Self {
        Self::two_atom(GOLDEN_MEAN_CONJUGATE)
    }

    pub fn dim(&self) -> usize {
        match self {
            TorusMeasure::Atomic { atoms } => atoms[0].0.dim(),
            TorusMeasure::Lebesgue { dim } => *dim,
            TorusMeasure::DensityGrid(d) => d.dims.len(),
            TorusMeasure::Mixture { first, .. } => first.dim(),
        }
    }

    /// mu_hat(k) = integral of exp(2 pi i <k, x>) dmu(x).
    ///
    /// Atomic measures are exact weighted sums of unit-modulus exponentials;
    /// density grids use the midpoint rule (exact up to aliasing for |k|
    /// below half the resolution); mixtures combine linearly.
    pub fn fourier_coefficient(&self, k: &[i64]) -> Complex64 {
        assert_eq!(k.len(), self.dim(), "lattice vector dimension mismatch");
        match self {
            TorusMeasure::Atomic { atoms } => atoms
                .iter()
                .map(|(p, w)| {
                    let phase: f64 = k
                        .iter()
                        .zip(p.coords())
                        .map(|(&ki, &xi)| ki as f64 * xi)
                        .sum();
                    Complex64::from_polar(*w, TAU * phase)
                })
                .sum(),
            TorusMeasure::Lebesgue { .. } => {
                if k.iter().all(|&ki| ki == 0) {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            TorusMeasure::DensityGrid(data) => {
                let cells = data.values.len() as f64;
                let mut acc = Complex64::new(0.0, 0.0);
                for (cell, &v) in data.values.iter().enumerate() {
                    if v == 0.0 {
                        continue;
                    }
                    let mut rem = cell;
                    let mut phase = 0.0;
                    // Row-major decode, last axis fastest.
                    for (axis, &n) in data.dims.iter().enumerate().rev() {
                        let idx = rem % n;
                        rem /= n;
                        phase += k[axis] as f64 * (idx as f64 + 0.5) / n as f64;
                    }
                    acc += Complex64::from_polar(v, TAU * phase);
                }
                acc / cells
            }
            TorusMeasure::Mixture { t, first, second } => {
                first.fourier_coefficient(k) * *t + second.fourier_coefficient(k) * (1.0 - *t)
            }
        }
    }

    /// Draw one point. Deterministic given the generator state.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> TorusPoint {
        match self {
            TorusMeasure::Atomic { atoms } => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for (p, w) in atoms {
                    acc += w;
                    if u < acc {
                        return p.clone();
                    }
                }
                // u landed in the roundoff sliver past the last cumulative sum.
                atoms.last().unwrap().0.clone()
            }
            TorusMeasure::Lebesgue { dim } => {
                TorusPoint::new((0..*dim).map(|_| rng.gen::<f64>()).collect())
            }
            TorusMeasure::DensityGrid(data) => {
                let cdf = data.cdf.get_or_init(|| {
                    let cells = data.values.len() as f64;
                    let mut acc = 0.0;
                    data.values
                        .iter()
                        .map(|&v| {
                            acc += v / cells;
                            acc
                        })
                        .collect()
                });
                let u: f64 = rng.gen::<f64>() * cdf.last().unwrap();
                let cell = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
                // Uniform draw inside the selected cell, one coordinate per axis.
                let mut rem = cell;
                let mut idx = vec![0usize; data.dims.len()];
                for (axis, &n) in data.dims.iter().enumerate().rev() {
                    idx[axis] = rem % n;
                    rem /= n;
                }
                let coords = data
                    .dims
                    .iter()
                    .zip(&idx)
                    .map(|(&n, &i)| (i as f64 + rng.gen::<f64>()) / n as f64)
                    .collect();
                TorusPoint::new(coords)
            }
            TorusMeasure::Mixture { t, first, second } => {
                if rng.gen::<f64>() < *t {
                    first.sample(rng)
                } else {
                    second.sample(rng)
                }
            }
        }
    }

    /// Exact mean of an atomic measure against a pointwise function, used as
    /// an externally supplied mean for deviation estimators.
    pub fn atomic_mean(&self, f: impl Fn(&TorusPoint) -> f64) -> Option<f64> {
        match self {
            TorusMeasure::Atomic { atoms } => {
                Some(atoms.iter().map(|(p, w)| w * f(p)).sum())
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dirac_coefficients_have_unit_modulus() {
        let mu = TorusMeasure::dirac(TorusPoint::scalar(0.0));
        let c = mu.fourier_coefficient(&[5]);
        assert_eq!(c, Complex64::new(1.0, 0.0));
        let mu = TorusMeasure::dirac(TorusPoint::scalar(0.37));
        assert!((mu.fourier_coefficient(&[9]).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn half_atoms_alternate_between_zero_and_one() {
        // (delta_0 + delta_{1/2})/2: coefficient (1 + (-1)^k)/2.
        let mu = TorusMeasure::two_atom(0.5);
        for k in 1..10i64 {
            let c = mu.fourier_coefficient(&[k]);
            let want = if k % 2 == 0 { 1.0 } else { 0.0 };
            assert!((c.re - want).abs() < 1e-15 && c.im.abs() < 1e-15, "k={k} c={c}");
        }
    }

    #[test]
    fn lebesgue_coefficients_vanish_off_zero() {
        let mu = TorusMeasure::lebesgue(1);
        assert_eq!(mu.fourier_coefficient(&[3]), Complex64::new(0.0, 0.0));
        assert_eq!(mu.fourier_coefficient(&[0]), Complex64::new(1.0, 0.0));

        // The gridded representation agrees up to quadrature roundoff.
        let grid = TorusMeasure::lebesgue_with_resolution(1, 256);
        assert!(grid.fourier_coefficient(&[3]).norm() < 1e-12);
        assert!((grid.fourier_coefficient(&[0]).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_dimensional_grid_coefficient_indexing_is_consistent() {
        // Density 1 + cos(2 pi x1) on T^2 has mu_hat((0,1)) = 1/2 and
        // mu_hat((1,0)) = 0; a row-major indexing bug would swap them.
        let n = 64;
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let _x0 = (i as f64 + 0.5) / n as f64;
                let x1 = (j as f64 + 0.5) / n as f64;
                values.push(1.0 + (TAU * x1).cos());
            }
        }
        let mu = TorusMeasure::density(vec![n, n], values).unwrap();
        let c01 = mu.fourier_coefficient(&[0, 1]);
        let c10 = mu.fourier_coefficient(&[1, 0]);
        assert!((c01.re - 0.5).abs() < 1e-12, "c01 = {c01}");
        assert!(c10.norm() < 1e-12, "c10 = {c10}");
    }

    #[test]
    fn atomic_constructor_rejects_bad_weights() {
        let p = TorusPoint::scalar(0.1);
        assert!(TorusMeasure::atomic(vec![(p.clone(), 0.6), (p.clone(), 0.6)]).is_err());
        assert!(TorusMeasure::atomic(vec![(p.clone(), -0.5), (p, 1.5)]).is_err());
    }

    #[test]
    fn density_constructor_rejects_unnormalized_values() {
        assert!(TorusMeasure::density(vec![4], vec![2.0, 2.0, 2.0, 2.0]).is_err());
        assert!(TorusMeasure::density(vec![4], vec![1.0, 1.0, 1.0, -1.0]).is_err());
        assert!(TorusMeasure::density(vec![4], vec![1.0; 3]).is_err());
    }

    #[test]
    fn mixture_coefficient_is_convex_combination() {
        let a = TorusMeasure::two_atom_golden();
        let b = TorusMeasure::dirac(TorusPoint::scalar(0.25));
        let m = TorusMeasure::mixture(0.3, a.clone(), b.clone()).unwrap();
        for k in [-7i64, 1, 4] {
            let want = a.fourier_coefficient(&[k]) * 0.3 + b.fourier_coefficient(&[k]) * 0.7;
            let got = m.fourier_coefficient(&[k]);
            assert!((want - got).norm() < 1e-15);
        }
    }

    #[test]
    fn dirac_sampling_returns_the_atom() {
        let mu = TorusMeasure::dirac(TorusPoint::scalar(0.3));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            assert_eq!(mu.sample(&mut rng).coord(0), 0.3);
        }
    }

    #[test]
    fn two_atom_sampling_frequencies_match_weights() {
        let mu = TorusMeasure::two_atom_golden();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 100_000;
        let mut zeros = 0usize;
        for _ in 0..n {
            if mu.sample(&mut rng).coord(0) == 0.0 {
                zeros += 1;
            }
        }
        // Bernoulli(1/2): 3 sigma = 3 * sqrt(0.25 * n).
        let dev = (zeros as f64 - n as f64 / 2.0).abs();
        assert!(dev < 3.0 * (0.25 * n as f64).sqrt(), "zeros = {zeros}");
    }

    #[test]
    fn lebesgue_sampling_puts_two_percent_in_a_two_percent_window() {
        let mu = TorusMeasure::lebesgue(1);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let mut hits = 0usize;
        for _ in 0..n {
            let x = mu.sample(&mut rng).coord(0);
            if (0.49..0.51).contains(&x) {
                hits += 1;
            }
        }
        let p = 0.02;
        let sigma = (p * (1.0 - p) * n as f64).sqrt();
        assert!((hits as f64 - p * n as f64).abs() < 3.0 * sigma, "hits = {hits}");
    }

    #[test]
    fn sampling_is_deterministic_for_a_fixed_seed() {
        let mu = TorusMeasure::mixture(
            0.5,
            TorusMeasure::lebesgue(1),
            TorusMeasure::two_atom_golden(),
        )
        .unwrap();
        let draw = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..32).map(|_| mu.sample(&mut rng).coord(0)).collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
        assert_ne!(draw(9), draw(10));
    }

    #[test]
    fn atomic_mean_is_the_weighted_sum() {
        let mu = TorusMeasure::two_atom(0.5);
        let mean = mu.atomic_mean(|p| (TAU * p.coord(0)).cos()).unwrap();
        assert!((mean - 0.0).abs() < 1e-15);
        assert!(TorusMeasure::lebesgue(1).atomic_mean(|_| 1.0).is_none());
    }
}
