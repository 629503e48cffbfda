use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use torus_measure::TorusPoint;

use crate::error::HolonomyError;
use crate::sequence::SkewBiState;

/// Tolerance for the construction spot-check that symbols outside the
/// declared window do not move the value.
pub const WINDOW_CHECK_TOL: f64 = 1e-12;
const WINDOW_CHECK_TRIALS: usize = 100;
const WINDOW_CHECK_SEED: u64 = 0x57494e444f57;

/// Real observable of (omega_{-w..w}, theta): a function of finitely many
/// symbol coordinates and the fiber point.
///
/// The evaluator receives exactly the window slice (length 2w + 1, centered
/// at index w) plus theta, so dependence outside the window is impossible by
/// construction; the constructor still spot-checks the claim through the
/// state-based evaluation path.
#[derive(Clone)]
pub struct WindowObservable {
    dim: usize,
    window: usize,
    alpha: f64,
    eval: Arc<dyn Fn(&[TorusPoint], &TorusPoint) -> f64 + Send + Sync>,
}

impl fmt::Debug for WindowObservable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WindowObservable")
            .field("dim", &self.dim)
            .field("window", &self.window)
            .field("alpha", &self.alpha)
            .finish_non_exhaustive()
    }
}

impl WindowObservable {
    pub fn new(
        dim: usize,
        window: usize,
        alpha: f64,
        eval: impl Fn(&[TorusPoint], &TorusPoint) -> f64 + Send + Sync + 'static,
    ) -> Self {
        assert!(dim >= 1, "symbols need at least one dimension");
        assert!(alpha > 0.0 && alpha <= 1.0, "Holder exponent must lie in (0, 1]");
        let obs = WindowObservable { dim, window, alpha, eval: Arc::new(eval) };
        obs.spot_check_window();
        obs
    }

    /// Alter symbols outside |j| <= w at random states and demand the value
    /// stays put. Structural for slice evaluators, but it exercises the
    /// whole state-extraction path and catches non-deterministic closures.
    fn spot_check_window(&self) {
        let mut rng = ChaCha8Rng::seed_from_u64(WINDOW_CHECK_SEED);
        let depth = self.window + 2;
        for _ in 0..WINDOW_CHECK_TRIALS {
            let state = crate::sequence::uniform_state(self.dim, depth, &mut rng);
            let before = self.evaluate_state(&state);
            let mut tweaked = state.clone();
            let outside = self.window as i64 + rng.gen_range(1..=2i64);
            let j = if rng.gen::<bool>() { outside } else { -outside };
            let p = TorusPoint::new((0..self.dim).map(|_| rng.gen::<f64>()).collect());
            tweaked.seq.set(j, p);
            let after = self.evaluate_state(&tweaked);
            assert!(
                (before - after).abs() <= WINDOW_CHECK_TOL,
                "evaluator reads symbol {j}, outside its window {}",
                self.window
            );
        }
    }

    /// Constant observable (window 0).
    pub fn constant(dim: usize, value: f64) -> Self {
        Self::new(dim, 0, 1.0, move |_, _| value)
    }

    /// Observable of the fiber coordinate only (window 0).
    pub fn from_theta_fn(
        dim: usize,
        alpha: f64,
        f: impl Fn(&TorusPoint) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::new(dim, 0, alpha, move |_, theta| f(theta))
    }

    /// Tensor-basis observable over a finite alphabet: each combination of
    /// window symbols (snapped to the nearest atom) selects a row of
    /// trigonometric coefficients [a_0, a_1, b_1, ..., a_K, b_K] in theta.
    /// Rows are ordered lexicographically in (omega_{-w}, ..., omega_w) with
    /// the leftmost position most significant.
    pub fn tabular(
        alphabet: Vec<TorusPoint>,
        window: usize,
        harmonics: usize,
        table: Vec<Vec<f64>>,
        alpha: f64,
    ) -> Result<Self, HolonomyError> {
        if alphabet.is_empty() {
            return Err(HolonomyError::InvalidObservable("empty alphabet".into()));
        }
        if alphabet.iter().any(|p| p.dim() != 1) {
            return Err(HolonomyError::InvalidObservable(
                "tabular observables use a one-dimensional alphabet".into(),
            ));
        }
        let m = alphabet.len();
        let positions = 2 * window + 1;
        let rows = m
            .checked_pow(positions as u32)
            .filter(|&r| r <= 1_000_000)
            .ok_or_else(|| HolonomyError::InvalidObservable("table too large".into()))?;
        if table.len() != rows {
            return Err(HolonomyError::InvalidObservable(format!(
                "need {rows} table rows, got {}",
                table.len()
            )));
        }
        let width = 2 * harmonics + 1;
        if let Some(bad) = table.iter().find(|row| row.len() != width) {
            return Err(HolonomyError::InvalidObservable(format!(
                "rows need {width} coefficients, got {}",
                bad.len()
            )));
        }
        let snap = move |p: &TorusPoint, alphabet: &[TorusPoint]| -> usize {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (i, atom) in alphabet.iter().enumerate() {
                let d = p.circle_distance_sup(atom);
                if d < best_d {
                    best_d = d;
                    best = i;
                }
            }
            best
        };
        Ok(Self::new(1, window, alpha, move |symbols, theta| {
            let mut row = 0usize;
            for s in symbols {
                row = row * m + snap(s, &alphabet);
            }
            let coeffs = &table[row];
            let x = std::f64::consts::TAU * theta.coord(0);
            let mut value = coeffs[0];
            for h in 1..=harmonics {
                let (sin, cos) = (h as f64 * x).sin_cos();
                value += coeffs[2 * h - 1] * cos + coeffs[2 * h] * sin;
            }
            value
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Evaluate on an explicit window slice, length exactly 2w + 1 with the
    /// origin symbol at index w.
    pub fn evaluate_slice(&self, symbols: &[TorusPoint], theta: &TorusPoint) -> f64 {
        assert_eq!(symbols.len(), 2 * self.window + 1, "window slice length mismatch");
        assert_eq!(theta.dim(), self.dim);
        (self.eval)(symbols, theta)
    }

    /// Evaluate at a state, reading the window slice through the sequence's
    /// fill conventions.
    pub fn evaluate_state(&self, state: &SkewBiState) -> f64 {
        assert_eq!(state.seq.dim(), self.dim);
        let w = self.window as i64;
        let symbols: Vec<TorusPoint> = (-w..=w).map(|j| state.seq.get(j).clone()).collect();
        (self.eval)(&symbols, &state.theta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::{uniform_state, BiSequence};

    #[test]
    fn slice_indexing_centers_the_origin() {
        let phi = WindowObservable::new(1, 1, 1.0, |s, _| s[2].coord(0));
        let mut state = uniform_state(1, 3, &mut ChaCha8Rng::seed_from_u64(1));
        state.seq.set(1, TorusPoint::scalar(0.125));
        assert_eq!(phi.evaluate_state(&state), 0.125);
    }

    #[test]
    fn tabular_selects_rows_lexicographically() {
        let alphabet = vec![TorusPoint::scalar(0.0), TorusPoint::scalar(0.5)];
        // Window 0, one position: row index equals the snapped atom index.
        let table = vec![vec![1.0, 0.0, 0.0], vec![2.0, 0.0, 0.0]];
        let phi = WindowObservable::tabular(alphabet, 0, 1, table, 1.0).unwrap();
        let at = |x: f64| {
            let seq = BiSequence::from_slice(vec![TorusPoint::scalar(x)]);
            phi.evaluate_state(&SkewBiState::new(seq, TorusPoint::zero(1)))
        };
        assert_eq!(at(0.05), 1.0);
        assert_eq!(at(0.47), 2.0);
        // Snapping wraps around the circle.
        assert_eq!(at(0.97), 1.0);
    }

    #[test]
    fn tabular_validates_row_counts() {
        let alphabet = vec![TorusPoint::scalar(0.0), TorusPoint::scalar(0.5)];
        let err =
            WindowObservable::tabular(alphabet, 1, 1, vec![vec![0.0; 3]; 7], 1.0).unwrap_err();
        assert!(err.to_string().contains("need 8 table rows"));
    }

    #[test]
    #[should_panic(expected = "outside its window")]
    fn constructor_rejects_unstable_evaluators() {
        // An evaluator whose value drifts between calls violates the window
        // contract (the same slice must give the same value); the
        // construction spot-check reports it as out-of-window dependence.
        use std::sync::Mutex;
        let counter: Arc<Mutex<f64>> = Arc::new(Mutex::new(0.0));
        let counter_in = Arc::clone(&counter);
        let _phi = WindowObservable::new(1, 0, 1.0, move |_, _| {
            let mut v = counter_in.lock().unwrap();
            *v += 1.0;
            *v
        });
    }
}
