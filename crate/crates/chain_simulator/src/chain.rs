use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use torus_measure::{TorusMeasure, TorusPoint};

use crate::state::SkewState;

#[derive(Debug, Clone)]
pub enum StartMode {
    /// Deterministic theta_0. For windowed chains the symbol buffer is still
    /// pre-filled with mu-draws: the window is part of the random
    /// environment, not of the chosen start point.
    Fixed(TorusPoint),
    /// theta_0 uniform on T^d, symbol buffer pre-filled with mu-draws.
    Stationary,
}

#[derive(Debug, Clone)]
pub struct ChainConfig {
    pub mu: TorusMeasure,
    pub initial: StartMode,
    pub n_steps: u64,
    pub n_trials: u64,
    pub seed: u64,
    pub window_w: usize,
}

impl ChainConfig {
    pub fn dim(&self) -> usize {
        self.mu.dim()
    }

    pub fn assert_valid(&self) {
        assert!(self.n_steps >= 1, "need at least one step");
        assert!(self.n_trials >= 1, "need at least one trial");
        if let StartMode::Fixed(p) = &self.initial {
            assert_eq!(p.dim(), self.mu.dim(), "start point dimension mismatch");
        }
    }
}

/// Generator for one trial. Trial i always uses stream i of the config
/// seed, so estimates are bit-identical however trials are scheduled.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Draw Z_0. Consumption order is fixed (theta if stationary, then the w
/// window pre-fill draws) and must never change: recorded outputs depend on
/// it.
pub fn initial_state<R: Rng + ?Sized>(cfg: &ChainConfig, rng: &mut R) -> SkewState {
    let theta = match &cfg.initial {
        StartMode::Fixed(p) => p.clone(),
        StartMode::Stationary => {
            TorusPoint::new((0..cfg.dim()).map(|_| rng.gen::<f64>()).collect())
        }
    };
    let mut state = SkewState::new(theta, cfg.window_w);
    for _ in 0..cfg.window_w {
        let omega = cfg.mu.sample(rng);
        state.push_symbol(omega);
    }
    state
}

/// Drive one trajectory, visiting Z_0, ..., Z_{n_steps} in order (n_steps
/// transitions, n_steps + 1 visits).
pub fn run_chain<R: Rng + ?Sized>(
    cfg: &ChainConfig,
    rng: &mut R,
    mut visit: impl FnMut(u64, &SkewState),
) {
    cfg.assert_valid();
    let mut state = initial_state(cfg, rng);
    for j in 0..cfg.n_steps {
        visit(j, &state);
        let omega = cfg.mu.sample(rng);
        state.advance(&omega);
    }
    visit(cfg.n_steps, &state);
}

/// Birkhoff sum S_n = sum_{j=0}^{n-1} phi(Z_j) along one trajectory.
pub fn birkhoff_sum<R: Rng + ?Sized>(
    cfg: &ChainConfig,
    phi: &(dyn Fn(&SkewState) -> f64 + Sync),
    rng: &mut R,
) -> f64 {
    let mut s = 0.0;
    run_chain(cfg, rng, |j, state| {
        if j < cfg.n_steps {
            s += phi(state);
        }
    });
    s
}
