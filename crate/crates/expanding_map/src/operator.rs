use crate::error::ExpandingMapError;
use crate::grid::DensityGrid;
use crate::model::CircleMapModel;

/// Floor below which decay-trace values are floating-point noise.
pub const DECAY_FLOOR: f64 = 1e-12;

/// Transfer operator on grid functions: (L h)(x) = sum over f(y) = x of
/// h(y) / |f'(y)|, with h read by circle interpolation. Not renormalized.
pub fn transfer_apply(
    h: &DensityGrid,
    model: &CircleMapModel,
) -> Result<DensityGrid, ExpandingMapError> {
    let table = model.preimage_table(h.resolution())?;
    let values = table
        .iter()
        .map(|branches| branches.iter().map(|&(y, dy)| h.eval(y) / dy.abs()).sum())
        .collect();
    Ok(DensityGrid::from_values(values))
}

/// Invariant density by power iteration h <- normalize(L h) from h = 1,
/// stopping when the direct residual sup |L g - g| drops below tol. The
/// result is normalized and strictly positive.
pub fn invariant_density(
    model: &CircleMapModel,
    tol: f64,
    max_iter: usize,
) -> Result<DensityGrid, ExpandingMapError> {
    assert!(tol > 0.0);
    let mut h = DensityGrid::uniform(model.grid());
    for _ in 0..max_iter {
        let image = transfer_apply(&h, model)?;
        if image.sup_distance(&h) < tol {
            assert!(h.min_value() > 0.0, "invariant density must be positive");
            return Ok(h);
        }
        let mut next = image;
        next.normalize();
        h = next;
    }
    Err(ExpandingMapError::NoConvergence)
}

/// Backward-kernel weights at x: w_i = g(y_i) / (g(x) |f'(y_i)|) over the
/// preimages y_i of x, ascending in y. Sums to 1 up to interpolation error
/// because L g = g; callers sampling from the kernel normalize the sum.
pub fn markov_kernel_weights(
    model: &CircleMapModel,
    g: &DensityGrid,
    x: f64,
) -> Result<Vec<(f64, f64)>, ExpandingMapError> {
    let gx = g.eval(x);
    assert!(gx > 0.0, "kernel weights need a positive density");
    Ok(model
        .preimages(x)?
        .into_iter()
        .map(|y| (y, g.eval(y) / (gx * model.derivative_at(y).abs())))
        .collect())
}

/// Markov operator of the backward chain: the conditional expectation
/// (Q h)(x) = sum_i w_i h(y_i) with the kernel weights normalized per
/// point, the grid version of Q h = L(h g) / g. Normalization makes Q
/// exactly unital and positive; the unnormalized identity holds up to
/// interpolation error and is checked by tests instead.
pub fn markov_apply(
    h: &DensityGrid,
    model: &CircleMapModel,
    g: &DensityGrid,
) -> Result<DensityGrid, ExpandingMapError> {
    assert_eq!(h.resolution(), g.resolution());
    let table = model.preimage_table(h.resolution())?;
    let values = table
        .iter()
        .map(|branches| {
            let mut num = 0.0;
            let mut den = 0.0;
            for &(y, dy) in branches.iter() {
                let w = g.eval(y) / dy.abs();
                num += w * h.eval(y);
                den += w;
            }
            num / den
        })
        .collect();
    Ok(DensityGrid::from_values(values))
}

/// Decay of Q^n phi toward the stationary mean, plus a fitted exponential
/// rate when the trace supports one.
#[derive(Clone, Debug)]
pub struct DecayTrace {
    /// delta_n = sup |Q^n phi - mean| for n = 1, 2, ... until n_max or the
    /// noise floor.
    pub deltas: Vec<f64>,
    /// Geometric-mean ratio delta_{n+1} / delta_n over n >= 5 above the
    /// noise floor; None when the trace bottomed out before a fit was
    /// possible (mixing faster than measurable).
    pub sigma: Option<f64>,
}

/// Iterate Q on phi and measure sup-distance to the invariant mean
/// integral(phi g). Errors with "no decay measured" when the trace neither
/// collapses nor yields at least 3 usable ratios.
pub fn mixing_rate_exp(
    model: &CircleMapModel,
    g: &DensityGrid,
    phi: &DensityGrid,
    n_max: usize,
) -> Result<DecayTrace, ExpandingMapError> {
    assert!(n_max >= 5, "need at least 5 iterates to fit a rate");
    let product = DensityGrid::from_values(
        phi.values().iter().zip(g.values()).map(|(p, gv)| p * gv).collect(),
    );
    let mean = product.integral();
    let mut h = phi.clone();
    let mut deltas = Vec::with_capacity(n_max);
    let mut floored = false;
    for _ in 0..n_max {
        h = markov_apply(&h, model, g)?;
        let delta = h.sup_distance_to(mean);
        deltas.push(delta);
        if delta < DECAY_FLOOR {
            floored = true;
            break;
        }
    }
    // deltas[i] holds delta_{i+1}; ratios fitted from delta_5 onward.
    let mut log_sum = 0.0;
    let mut used = 0usize;
    for i in 4..deltas.len().saturating_sub(1) {
        if deltas[i] > DECAY_FLOOR && deltas[i + 1] > DECAY_FLOOR {
            log_sum += (deltas[i + 1] / deltas[i]).ln();
            used += 1;
        }
    }
    let sigma = if used >= 3 {
        let fitted = (log_sum / used as f64).exp();
        assert!(fitted < 1.0, "fitted ratio {fitted} does not contract");
        Some(fitted)
    } else if floored {
        None
    } else {
        return Err(ExpandingMapError::NoDecayMeasured);
    };
    Ok(DecayTrace { deltas, sigma })
}

/// Asymptotic variance of Birkhoff sums of phi along the backward chain:
/// sigma^2 = ||psi||^2 - ||Q psi||^2 in L^2(g dm) with psi = sum Q^n phi_c,
/// phi_c the centering of phi by the operator's own constant limit. The
/// series is accumulated term by term until the sup norm falls below 1e-13.
pub fn markov_sigma2(
    model: &CircleMapModel,
    g: &DensityGrid,
    phi: &DensityGrid,
) -> Result<f64, ExpandingMapError> {
    const TAIL_TOL: f64 = 1e-13;
    const MAX_TERMS: usize = 2000;
    // Push phi far enough forward that only its constant limit remains.
    let mut limit = phi.clone();
    let mut osc = f64::INFINITY;
    for _ in 0..MAX_TERMS {
        limit = markov_apply(&limit, model, g)?;
        let mean = limit.integral();
        osc = limit.sup_distance_to(mean);
        if osc < TAIL_TOL {
            break;
        }
    }
    if osc >= TAIL_TOL {
        return Err(ExpandingMapError::NoConvergence);
    }
    let centered = DensityGrid::from_values(
        phi.values().iter().zip(limit.values()).map(|(p, c)| p - c).collect(),
    );

    let mut term = centered;
    let mut psi = term.clone();
    let mut converged = false;
    for _ in 0..MAX_TERMS {
        term = markov_apply(&term, model, g)?;
        if term.sup_distance_to(0.0) < TAIL_TOL {
            converged = true;
            break;
        }
        psi = DensityGrid::from_values(
            psi.values().iter().zip(term.values()).map(|(a, b)| a + b).collect(),
        );
    }
    if !converged {
        return Err(ExpandingMapError::NoConvergence);
    }
    let q_psi = markov_apply(&psi, model, g)?;
    let weighted_norm = |h: &DensityGrid| {
        h.values().iter().zip(g.values()).map(|(v, gv)| v * v * gv).sum::<f64>()
            / g.resolution() as f64
    };
    let sigma2 = weighted_norm(&psi) - weighted_norm(&q_psi);
    assert!(sigma2 > -1e-10, "variance form came out negative: {sigma2}");
    Ok(sigma2.max(0.0))
}
