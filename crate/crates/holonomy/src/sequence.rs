use rand::Rng;
use torus_measure::{TorusMeasure, TorusPoint};

use crate::error::HolonomyError;

/// Coordinate tolerance for exact symbol equality in the shift metric and
/// the fiber precondition.
pub const COORD_EQ_TOL: f64 = 1e-15;

/// Finite two-sided symbol sequence with a canonical fill beyond the stored
/// range and a designated constant future for the projector.
///
/// Logical index j reads original index j + origin; shifts move `origin`
/// instead of the data. After a projection, every original index at or past
/// `future_from` reads the future symbol, stored or not.
#[derive(Debug, Clone)]
pub struct BiSequence {
    /// data[i] holds the symbol at original index i - half.
    data: Vec<TorusPoint>,
    half: i64,
    origin: i64,
    fill: TorusPoint,
    future: TorusPoint,
    future_from: Option<i64>,
}

impl BiSequence {
    /// Symbols for original indices -half..=half, centered at the origin.
    /// Fill and future both default to 0 in T^d; see [`Self::with_fill`].
    pub fn from_slice(symbols: Vec<TorusPoint>) -> Self {
        let d = symbols
            .first()
            .map(TorusPoint::dim)
            .expect("a sequence needs at least the origin symbol");
        Self::with_fill(symbols, TorusPoint::zero(d), TorusPoint::zero(d))
    }

    pub fn with_fill(symbols: Vec<TorusPoint>, fill: TorusPoint, future: TorusPoint) -> Self {
        assert!(symbols.len() % 2 == 1, "stored range must be symmetric");
        assert!(symbols.iter().all(|p| p.dim() == fill.dim()));
        assert_eq!(fill.dim(), future.dim());
        let half = (symbols.len() / 2) as i64;
        BiSequence { data: symbols, half, origin: 0, fill, future, future_from: None }
    }

    /// All-zero sequence of the given stored half-width.
    pub fn zeros(dim: usize, half: usize) -> Self {
        Self::from_slice(vec![TorusPoint::zero(dim); 2 * half + 1])
    }

    pub fn dim(&self) -> usize {
        self.fill.dim()
    }

    /// Largest |j| the stored range can still reach from the current origin.
    pub fn reach(&self) -> i64 {
        self.half + self.origin.abs()
    }

    fn stored(&self, j: i64) -> Option<&TorusPoint> {
        let o = j + self.origin;
        if let Some(cut) = self.future_from {
            if o >= cut {
                return Some(&self.future);
            }
        }
        if o.abs() <= self.half {
            Some(&self.data[(o + self.half) as usize])
        } else {
            None
        }
    }

    /// Symbol at logical index j, substituting the canonical fill beyond the
    /// stored range.
    pub fn get(&self, j: i64) -> &TorusPoint {
        self.stored(j).unwrap_or(&self.fill)
    }

    /// Overwrite the stored symbol at logical index j (must be stored).
    pub fn set(&mut self, j: i64, p: TorusPoint) {
        assert_eq!(p.dim(), self.dim());
        let o = j + self.origin;
        assert!(o.abs() <= self.half, "index {j} is outside the stored range");
        self.data[(o + self.half) as usize] = p;
    }
}

fn points_equal(p: &TorusPoint, q: &TorusPoint) -> bool {
    p.circle_distance_sup(q) <= COORD_EQ_TOL
}

/// d(x, y) = 2^{-m} with m the smallest |j| where the sequences differ;
/// 0 when they agree everywhere, fills and futures included. Values beyond
/// every stored range are constant per side, so scanning one index past the
/// larger reach decides equality.
pub fn shift_metric(x: &BiSequence, y: &BiSequence) -> f64 {
    assert_eq!(x.dim(), y.dim(), "sequence dimension mismatch");
    let reach = x.reach().max(y.reach()) + 1;
    for m in 0..=reach {
        if !points_equal(x.get(m), y.get(m)) || !points_equal(x.get(-m), y.get(-m)) {
            return 0.5f64.powi(m as i32);
        }
    }
    0.0
}

/// Point of the skew product: two-sided environment plus fiber coordinate.
#[derive(Debug, Clone)]
pub struct SkewBiState {
    pub seq: BiSequence,
    pub theta: TorusPoint,
}

impl SkewBiState {
    pub fn new(seq: BiSequence, theta: TorusPoint) -> Self {
        assert_eq!(seq.dim(), theta.dim());
        SkewBiState { seq, theta }
    }
}

/// f(omega, theta) = (sigma omega, theta + omega_0). The consumed symbol
/// must be stored: dynamics never read the fill.
pub fn skew_forward(state: &SkewBiState) -> Result<SkewBiState, HolonomyError> {
    let omega = state.seq.stored(0).ok_or(HolonomyError::WindowExhausted)?.clone();
    let mut seq = state.seq.clone();
    seq.origin += 1;
    Ok(SkewBiState { seq, theta: state.theta.translate(&omega) })
}

/// f^{-1}(omega, theta) = (sigma^{-1} omega, theta - omega_{-1}), the unique
/// inverse of [`skew_forward`] under this sign convention.
pub fn skew_inverse(state: &SkewBiState) -> Result<SkewBiState, HolonomyError> {
    let omega = state.seq.stored(-1).ok_or(HolonomyError::WindowExhausted)?.clone();
    let mut seq = state.seq.clone();
    seq.origin -= 1;
    Ok(SkewBiState { seq, theta: state.theta.sub(&omega) })
}

/// P(omega^-; omega^+; theta) = (omega^-; p^+; theta): replace every symbol
/// at logical index >= 1 by the designated future, keep past and fiber.
pub fn future_project(state: &SkewBiState) -> SkewBiState {
    let mut seq = state.seq.clone();
    let cut = seq.origin + 1;
    seq.future_from = Some(match seq.future_from {
        Some(existing) => existing.min(cut),
        None => cut,
    });
    SkewBiState { seq, theta: state.theta.clone() }
}

/// True when the states lie on one local unstable fiber: identical symbols
/// at every logical index <= 0 (fills included) and identical theta.
pub fn same_fiber(a: &SkewBiState, b: &SkewBiState) -> bool {
    if a.theta.circle_distance_sup(&b.theta) > COORD_EQ_TOL {
        return false;
    }
    let reach = a.seq.reach().max(b.seq.reach()) + 1;
    (0..=reach).all(|m| points_equal(a.seq.get(-m), b.seq.get(-m)))
}

/// State with iid uniform symbols and uniform fiber coordinate.
pub fn uniform_state<R: Rng + ?Sized>(dim: usize, half: usize, rng: &mut R) -> SkewBiState {
    let point = |rng: &mut R| TorusPoint::new((0..dim).map(|_| rng.gen::<f64>()).collect());
    let symbols = (0..2 * half + 1).map(|_| point(rng)).collect();
    let theta = point(rng);
    SkewBiState::new(BiSequence::from_slice(symbols), theta)
}

/// State with symbols iid from `mu` and uniform fiber coordinate: one draw
/// from the stationary product law restricted to the stored range.
pub fn sampled_state<R: Rng + ?Sized>(
    mu: &TorusMeasure,
    half: usize,
    rng: &mut R,
) -> SkewBiState {
    let symbols = (0..2 * half + 1).map(|_| mu.sample(rng)).collect();
    let theta = TorusPoint::new((0..mu.dim()).map(|_| rng.gen::<f64>()).collect());
    SkewBiState::new(BiSequence::from_slice(symbols), theta)
}
