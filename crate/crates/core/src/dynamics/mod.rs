//! Graphical construction of the exclusion process: Poisson clocks on bonds,
//! coins splitting rings into right and left moves, and everything built on
//! top of them.
//!
//! Bond `z` joins sites `z` and `z + 1` and rings at rate 1. A ring with coin
//! below `p` is a right ring: the pair is sorted so that the value with
//! priority ends up on the right. Otherwise it is a left ring and the pair is
//! sorted the other way. A pair with priority on the left therefore swaps at
//! rate `p` and a pair with priority on the right at rate `q`, and the
//! coupling preserves the height order between particle configurations.

mod chain;
mod environment;
mod evolve;
mod line;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub use chain::{poisson_weights, SegmentChain, DEFAULT_STATE_CAP};
pub use environment::{
    sample_environment, window_margin, BondEvent, CouplingEnvironment, EnvironmentSpec,
    EventStream, BLOCK_LEN,
};
pub use evolve::{
    coalescence_time, coupled_evolve, evolve, evolve_between, evolve_recorded, hitting_time,
    TrajectoryRecord,
};
pub use line::{evolve_line, line_hitting_time, LineState};

/// Jump rates: right at `p`, left at `q = 1 - p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationParams {
    p: f64,
}

impl SimulationParams {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.5 && p <= 1.0) {
            return invalid(format!("p = {p} must lie in (1/2, 1]"));
        }
        Ok(Self { p })
    }

    /// Parameters with the given ratio `Q = q/p`.
    pub fn from_ratio(ratio: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&ratio) {
            return invalid(format!("Q = {ratio} must lie in [0, 1)"));
        }
        Self::new(1.0 / (1.0 + ratio))
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        1.0 - self.p
    }

    /// `Q = q/p`.
    pub fn ratio(&self) -> f64 {
        self.q() / self.p
    }

    /// Drift `p - q`.
    pub fn drift(&self) -> f64 {
        self.p - self.q()
    }
}

/// Outcome of a hitting or coalescence time computation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum HitOutcome {
    Hit(f64),
    /// Not reached by the cap.
    Timeout,
}

impl HitOutcome {
    pub fn time(self) -> Option<f64> {
        match self {
            HitOutcome::Hit(t) => Some(t),
            HitOutcome::Timeout => None,
        }
    }

    /// Whether the time is known to exceed `t`. A timeout at a cap `>= t`
    /// counts as exceeding.
    pub fn exceeds(self, t: f64) -> bool {
        match self {
            HitOutcome::Hit(h) => h > t,
            HitOutcome::Timeout => true,
        }
    }
}

/// Clock rate of every bond.
pub const RING_RATE: f64 = 1.0;

/// The swap decision at a ringing bond with coin `coin`.
#[inline]
pub fn should_swap<V: Ord>(left: &V, right: &V, coin: f64, p: f64) -> bool {
    match left.cmp(right) {
        std::cmp::Ordering::Less => coin < p,
        std::cmp::Ordering::Greater => coin >= p,
        std::cmp::Ordering::Equal => false,
    }
}
