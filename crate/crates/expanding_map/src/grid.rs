use rand::Rng;

/// Function on the circle sampled at the midpoints (i + 1/2)/G of a uniform
/// partition, integrated by the midpoint rule and evaluated off-grid by
/// linear interpolation with wraparound. Densities keep the values
/// nonnegative; operator inputs and outputs may be signed.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityGrid {
    values: Vec<f64>,
}

impl DensityGrid {
    pub fn from_values(values: Vec<f64>) -> Self {
        assert!(!values.is_empty(), "a grid needs at least one cell");
        assert!(values.iter().all(|v| v.is_finite()), "grid values must be finite");
        DensityGrid { values }
    }

    pub fn from_fn(resolution: usize, f: impl Fn(f64) -> f64) -> Self {
        Self::from_values(
            (0..resolution).map(|i| f((i as f64 + 0.5) / resolution as f64)).collect(),
        )
    }

    pub fn uniform(resolution: usize) -> Self {
        Self::from_values(vec![1.0; resolution])
    }

    pub fn resolution(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Midpoint coordinate of cell i.
    pub fn midpoint(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.values.len() as f64
    }

    /// Linear interpolation between the two nearest midpoints, wrapping
    /// around the circle.
    pub fn eval(&self, x: f64) -> f64 {
        let g = self.values.len() as f64;
        let u = x * g - 0.5;
        let base = u.floor();
        let t = u - base;
        let n = self.values.len() as i64;
        let j0 = (base as i64).rem_euclid(n) as usize;
        let j1 = (j0 + 1) % self.values.len();
        self.values[j0] * (1.0 - t) + self.values[j1] * t
    }

    /// Midpoint-rule integral over the circle.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Rescale to unit integral.
    pub fn normalize(&mut self) {
        let total = self.integral();
        assert!(total > 0.0, "cannot normalize a grid with nonpositive mass");
        for v in &mut self.values {
            *v /= total;
        }
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sup_distance(&self, other: &DensityGrid) -> f64 {
        assert_eq!(self.values.len(), other.values.len());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Largest deviation from a constant c over the grid.
    pub fn sup_distance_to(&self, c: f64) -> f64 {
        self.values.iter().map(|v| (v - c).abs()).fold(0.0, f64::max)
    }
}

/// Inverse-CDF draw from a normalized density: mass is piecewise constant
/// per cell, so the CDF is piecewise linear and inversion is exact.
pub fn sample_from_density<R: Rng + ?Sized>(g: &DensityGrid, rng: &mut R) -> f64 {
    let n = g.values().len();
    debug_assert!(g.values().iter().all(|&v| v >= 0.0));
    let mut cumulative = Vec::with_capacity(n);
    let mut acc = 0.0;
    for &v in g.values() {
        acc += v;
        cumulative.push(acc);
    }
    let u = rng.gen::<f64>() * acc;
    let i = cumulative.partition_point(|&c| c <= u).min(n - 1);
    let prev = if i == 0 { 0.0 } else { cumulative[i - 1] };
    let mass = cumulative[i] - prev;
    let frac = if mass > 0.0 { (u - prev) / mass } else { 0.5 };
    (i as f64 + frac) / n as f64
}

/// Cached inverse-CDF sampler for repeated draws from one density.
pub struct DensitySampler {
    cumulative: Vec<f64>,
}

impl DensitySampler {
    pub fn new(g: &DensityGrid) -> Self {
        assert!(g.values().iter().all(|&v| v >= 0.0), "densities must be nonnegative");
        let mut acc = 0.0;
        let cumulative = g
            .values()
            .iter()
            .map(|&v| {
                acc += v;
                acc
            })
            .collect();
        DensitySampler { cumulative }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let n = self.cumulative.len();
        let total = self.cumulative[n - 1];
        let u = rng.gen::<f64>() * total;
        let i = self.cumulative.partition_point(|&c| c <= u).min(n - 1);
        let prev = if i == 0 { 0.0 } else { self.cumulative[i - 1] };
        let mass = self.cumulative[i] - prev;
        let frac = if mass > 0.0 { (u - prev) / mass } else { 0.5 };
        (i as f64 + frac) / n as f64
    }
}

/// Two-sample Kolmogorov-Smirnov statistic, sorting both samples in place.
/// Tied values advance both empirical CDFs together before the gap is read.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty());
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut ia, mut ib) = (0usize, 0usize);
    let mut d = 0.0f64;
    while ia < a.len() && ib < b.len() {
        let v = a[ia].min(b[ib]);
        while ia < a.len() && a[ia] <= v {
            ia += 1;
        }
        while ib < b.len() && b[ib] <= v {
            ib += 1;
        }
        d = d.max((ia as f64 / na - ib as f64 / nb).abs());
    }
    // One side is exhausted; the widest remaining gap is at the first
    // unconsumed point of the other.
    d.max(1.0 - ia as f64 / na).max(1.0 - ib as f64 / nb)
}
