use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use torus_measure::fract_unit;

use crate::error::ExpandingMapError;

/// Resolution of the validation grid for expansion and periodicity checks.
pub const VALIDATION_GRID: usize = 4096;
/// Every solved preimage must map back this close to its target.
pub const PREIMAGE_RESIDUAL_TOL: f64 = 1e-12;
/// Preimages of one point must be separated at least this much.
pub const PREIMAGE_GAP: f64 = 1e-9;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Uniformly expanding, orientation-preserving circle map, supplied as a
/// lift to the reals so branch inversion has no mod-1 ambiguity.
pub struct CircleMapModel {
    name: String,
    lift: RealFn,
    derivative: RealFn,
    degree: u32,
    lambda_star: f64,
    grid: usize,
    preimage_cache: Mutex<HashMap<usize, Arc<Vec<Vec<(f64, f64)>>>>>,
}

impl fmt::Debug for CircleMapModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CircleMapModel")
            .field("name", &self.name)
            .field("degree", &self.degree)
            .field("lambda_star", &self.lambda_star)
            .field("grid", &self.grid)
            .finish_non_exhaustive()
    }
}

impl CircleMapModel {
    /// Validate and wrap a lift. On a 4096-point grid the derivative must
    /// be positive (orientation-preserving) and at least lambda_star - 1e-9,
    /// and the lift must satisfy lift(x + 1) = lift(x) + degree within 1e-9.
    pub fn new(
        name: impl Into<String>,
        degree: u32,
        lambda_star: f64,
        grid: usize,
        lift: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self, ExpandingMapError> {
        let invalid = |msg: String| Err(ExpandingMapError::InvalidModel(msg));
        if degree < 2 {
            return invalid(format!("degree {degree} is below 2"));
        }
        if !(lambda_star > 1.0) {
            return invalid(format!("lambda_star {lambda_star} does not exceed 1"));
        }
        if grid < 16 {
            return invalid(format!("density grid {grid} is too coarse"));
        }
        for i in 0..VALIDATION_GRID {
            let x = i as f64 / VALIDATION_GRID as f64;
            let slope = derivative(x);
            if slope <= 0.0 {
                return invalid(format!("derivative {slope} at x = {x}: orientation-reversing or critical maps are rejected"));
            }
            if slope < lambda_star - 1e-9 {
                return invalid(format!("derivative {slope} at x = {x} is below lambda_star = {lambda_star}"));
            }
            let gap = lift(x + 1.0) - lift(x) - degree as f64;
            if gap.abs() > 1e-9 {
                return invalid(format!("lift(x + 1) - lift(x) = degree + {gap:e} at x = {x}"));
            }
        }
        Ok(CircleMapModel {
            name: name.into(),
            lift: Arc::new(lift),
            derivative: Arc::new(derivative),
            degree,
            lambda_star,
            grid,
            preimage_cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn doubling(grid: usize) -> Self {
        Self::new("doubling", 2, 2.0, grid, |x| 2.0 * x, |_| 2.0)
            .expect("linear degree-2 lift is always valid")
    }

    pub fn tripling(grid: usize) -> Self {
        Self::new("tripling", 3, 3.0, grid, |x| 3.0 * x, |_| 3.0)
            .expect("linear degree-3 lift is always valid")
    }

    /// f(x) = 2x + eps sin(2 pi x) / (2 pi), uniformly expanding for
    /// |eps| < 1 with derivative bound 2 - |eps|.
    pub fn perturbed2(eps: f64, grid: usize) -> Result<Self, ExpandingMapError> {
        let tau = std::f64::consts::TAU;
        Self::new(
            format!("perturbed2 {eps}"),
            2,
            2.0 - eps.abs(),
            grid,
            move |x| 2.0 * x + eps * (tau * x).sin() / tau,
            move |x| 2.0 + eps * (tau * x).cos(),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn lambda_star(&self) -> f64 {
        self.lambda_star
    }

    /// Density-grid resolution carried by the model.
    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn lift_at(&self, x: f64) -> f64 {
        (self.lift)(x)
    }

    pub fn derivative_at(&self, x: f64) -> f64 {
        (self.derivative)(x)
    }

    /// The circle map itself: lift reduced mod 1.
    pub fn map(&self, x: f64) -> f64 {
        fract_unit((self.lift)(x))
    }

    /// All preimages of x, ascending. One per branch: the lift is solved on
    /// [0, 1] for each integer offset by bracketed bisection to 1e-13 plus
    /// one Newton polish, and the result must map back within 1e-12.
    pub fn preimages(&self, x: f64) -> Result<Vec<f64>, ExpandingMapError> {
        let x = fract_unit(x);
        let l0 = (self.lift)(0.0);
        let first = (l0 - x).ceil();
        let mut out = Vec::with_capacity(self.degree as usize);
        for b in 0..self.degree {
            out.push(self.solve_branch(x + first + b as f64)?);
        }
        out.sort_by(f64::total_cmp);
        let distinct = out.windows(2).all(|w| w[1] - w[0] > PREIMAGE_GAP)
            && out[0] + 1.0 - out[out.len() - 1] > PREIMAGE_GAP;
        if !distinct {
            return Err(ExpandingMapError::BranchSolveFailed);
        }
        Ok(out)
    }

    fn solve_branch(&self, target: f64) -> Result<f64, ExpandingMapError> {
        let g = |y: f64| (self.lift)(y) - target;
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        if g(lo) > 1e-9 || g(hi) < -1e-9 {
            return Err(ExpandingMapError::BranchSolveFailed);
        }
        while hi - lo > 1e-13 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mid = 0.5 * (lo + hi);
        let y = (mid - g(mid) / (self.derivative)(mid)).clamp(0.0, 1.0);
        if g(y).abs() >= PREIMAGE_RESIDUAL_TOL {
            return Err(ExpandingMapError::BranchSolveFailed);
        }
        Ok(y)
    }

    /// Preimages and derivatives at every midpoint of a resolution-g grid,
    /// solved once and cached per resolution.
    pub(crate) fn preimage_table(
        &self,
        g: usize,
    ) -> Result<Arc<Vec<Vec<(f64, f64)>>>, ExpandingMapError> {
        if let Some(hit) = self.preimage_cache.lock().unwrap().get(&g) {
            return Ok(Arc::clone(hit));
        }
        let mut table = Vec::with_capacity(g);
        for i in 0..g {
            let x = (i as f64 + 0.5) / g as f64;
            let ys = self.preimages(x)?;
            table.push(ys.into_iter().map(|y| (y, (self.derivative)(y))).collect());
        }
        let table = Arc::new(table);
        self.preimage_cache.lock().unwrap().insert(g, Arc::clone(&table));
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn doubling_preimages_split_the_circle() {
        let model = CircleMapModel::doubling(64);
        let ys = model.preimages(0.5).unwrap();
        assert_eq!(ys.len(), 2);
        assert_abs_diff_eq!(ys[0], 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(ys[1], 0.75, epsilon = 1e-12);

        let at_zero = model.preimages(0.0).unwrap();
        assert_abs_diff_eq!(at_zero[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(at_zero[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn perturbed_preimages_verify_forward() {
        let model = CircleMapModel::perturbed2(0.5, 64).unwrap();
        let x = 0.3;
        let ys = model.preimages(x).unwrap();
        assert_eq!(ys.len(), 2);
        for y in ys {
            let back = model.map(y);
            let dist = (back - x).abs().min(1.0 - (back - x).abs());
            assert!(dist < 1e-12, "residual {dist:e} at y = {y}");
        }
    }

    #[test]
    fn tripling_covers_three_branches() {
        let model = CircleMapModel::tripling(64);
        let ys = model.preimages(0.9).unwrap();
        assert_eq!(ys.len(), 3);
        for w in ys.windows(2) {
            assert!(w[1] - w[0] > PREIMAGE_GAP);
        }
    }

    #[test]
    fn degree_mismatch_is_rejected() {
        let err = CircleMapModel::new("bad", 2, 1.2, 64, |x| 1.5 * x, |_| 1.5).unwrap_err();
        assert!(err.to_string().contains("lift(x + 1)"));
    }

    #[test]
    fn orientation_reversing_maps_are_rejected() {
        let err =
            CircleMapModel::new("reversed", 2, 1.5, 64, |x| -2.0 * x, |_| -2.0).unwrap_err();
        assert!(err.to_string().contains("orientation-reversing"));
    }

    #[test]
    fn insufficient_expansion_is_rejected() {
        // eps = 1.5 drives the derivative to 0.5 < 1 somewhere.
        let err = CircleMapModel::perturbed2(1.5, 64).unwrap_err();
        assert!(err.to_string().contains("does not exceed 1"));
    }
}
