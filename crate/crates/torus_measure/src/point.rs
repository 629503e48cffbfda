//! Points on T^d stored as fractional coordinates in [0,1).

/// Reduce a real number to the half-open unit interval [0, 1).
///
/// `rem_euclid(1.0)` alone is not enough: for a tiny negative input the exact
/// result 1 - eps rounds to 1.0, which would violate the [0,1) invariant.
pub fn fract_unit(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// A point of the d-torus. Every coordinate is kept in [0,1) after every
/// arithmetic operation; d >= 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusPoint {
    coords: Vec<f64>,
}

impl TorusPoint {
    /// Build a point, reducing each coordinate mod 1. Panics on d = 0 or
    /// non-finite input; those are programming errors, not data errors.
    pub fn new(coords: Vec<f64>) -> Self {
        assert!(!coords.is_empty(), "torus point needs at least one coordinate");
        assert!(
            coords.iter().all(|c| c.is_finite()),
            "torus point coordinates must be finite"
        );
        Self {
            coords: coords.into_iter().map(fract_unit).collect(),
        }
    }

    /// One-dimensional convenience constructor.
    pub fn scalar(x: f64) -> Self {
        Self::new(vec![x])
    }

    /// The origin of T^d.
    pub fn zero(d: usize) -> Self {
        assert!(d >= 1);
        Self { coords: vec![0.0; d] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.coords[i]
    }

    /// Translation on the torus: (self + other) mod 1 per axis.
    pub fn translate(&self, other: &TorusPoint) -> TorusPoint {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        TorusPoint {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| fract_unit(a + b))
                .collect(),
        }
    }

    /// (self - other) mod 1 per axis.
    pub fn sub(&self, other: &TorusPoint) -> TorusPoint {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        TorusPoint {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| fract_unit(a - b))
                .collect(),
        }
    }

    /// Largest per-axis circle distance, min(|a-b|, 1-|a-b|) maximized over axes.
    pub fn circle_distance_sup(&self, other: &TorusPoint) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| {
                let d = (a - b).abs();
                d.min(1.0 - d)
            })
            .fold(0.0, f64::max)
    }
}
