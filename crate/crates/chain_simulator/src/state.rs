use std::collections::VecDeque;

use torus_measure::TorusPoint;

/// State of the windowed random-translation chain: the current torus point
/// together with the last `window` drawn increments (most recent last).
///
/// `window = 0` is the plain chain on T^d; `window = w >= 1` is the chain on
/// (symbol window) x T^d whose transition draws one increment, translates
/// theta by it, and shifts it into the buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewState {
    symbols: VecDeque<TorusPoint>,
    window: usize,
    theta: TorusPoint,
}

impl SkewState {
    pub fn new(theta: TorusPoint, window: usize) -> Self {
        SkewState {
            symbols: VecDeque::with_capacity(window),
            window,
            theta,
        }
    }

    pub fn theta(&self) -> &TorusPoint {
        &self.theta
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Buffered increments, oldest first; fewer than `window` right after a
    /// cold start.
    pub fn symbols(&self) -> impl Iterator<Item = &TorusPoint> {
        self.symbols.iter()
    }

    /// The increment drawn `back + 1` transitions ago (`back = 0` is the most
    /// recent), if still buffered.
    pub fn symbol_from_end(&self, back: usize) -> Option<&TorusPoint> {
        self.symbols.iter().rev().nth(back)
    }

    /// Push an increment into the buffer without moving theta. Used to
    /// pre-fill the window for stationary starts.
    pub fn push_symbol(&mut self, omega: TorusPoint) {
        if self.window == 0 {
            return;
        }
        if self.symbols.len() == self.window {
            self.symbols.pop_front();
        }
        self.symbols.push_back(omega);
    }

    /// One transition: translate theta by `omega` and shift `omega` into the
    /// buffer.
    pub fn advance(&mut self, omega: &TorusPoint) {
        self.theta = self.theta.translate(omega);
        self.push_symbol(omega.clone());
    }
}

/// Pure transition: [`SkewState::advance`] on a copy.
pub fn step(state: &SkewState, omega: &TorusPoint) -> SkewState {
    let mut next = state.clone();
    next.advance(omega);
    next
}
