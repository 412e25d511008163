//! Shared randomness of the basic coupling.
//!
//! Time is cut into blocks of length [`BLOCK_LEN`]. The clock rings of bond
//! `z` inside block `b` come from their own stream seeded by `(seed, z, b)`,
//! so any finite piece of the environment is a deterministic function of the
//! seed. Extending a horizon, covering more bonds, or materialising the
//! environment eagerly versus lazily all produce the same events.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{SimulationParams, RING_RATE};
use crate::error::{invalid, Result};
use crate::rng::{derive2, rng_from};

pub const BLOCK_LEN: f64 = 4.0;

/// One ring of a bond clock together with its coin in `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BondEvent {
    pub time: f64,
    pub bond: i64,
    pub coin: f64,
}

fn block_events(seed: u64, rate: f64, bond: i64, block: u64, out: &mut Vec<BondEvent>) {
    let mut rng = rng_from(derive2(seed, bond as u64, block));
    let end = (block + 1) as f64 * BLOCK_LEN;
    let mut time = block as f64 * BLOCK_LEN;
    loop {
        let u: f64 = rng.gen();
        time += -(1.0 - u).ln() / rate;
        if time >= end {
            break;
        }
        out.push(BondEvent {
            time,
            bond,
            coin: rng.gen(),
        });
    }
}

fn by_time(a: &BondEvent, b: &BondEvent) -> Ordering {
    a.time.total_cmp(&b.time).then(a.bond.cmp(&b.bond))
}

/// Parameters sufficient to replay an environment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentSpec {
    pub bond_lo: i64,
    pub bond_hi: i64,
    pub p: f64,
    pub horizon: f64,
    pub seed: u64,
}

/// All clock rings on bonds `[bond_lo;bond_hi]` during `[0, horizon]`, in
/// time order.
#[derive(Clone, Debug)]
pub struct CouplingEnvironment {
    bond_lo: i64,
    bond_hi: i64,
    params: SimulationParams,
    seed: u64,
    horizon: f64,
    events: Vec<BondEvent>,
}

/// Sample the environment on bonds `[bond_lo;bond_hi]` (empty when
/// `bond_hi < bond_lo`) up to `t_max`.
pub fn sample_environment(
    bond_lo: i64,
    bond_hi: i64,
    params: SimulationParams,
    t_max: f64,
    seed: u64,
) -> Result<CouplingEnvironment> {
    if !(t_max >= 0.0) || !t_max.is_finite() {
        return invalid(format!("horizon {t_max} must be finite and nonnegative"));
    }
    let mut env = CouplingEnvironment {
        bond_lo,
        bond_hi,
        params,
        seed,
        horizon: 0.0,
        events: Vec::new(),
    };
    env.extend_to(t_max)?;
    Ok(env)
}

impl CouplingEnvironment {
    pub fn from_spec(spec: &EnvironmentSpec) -> Result<Self> {
        sample_environment(
            spec.bond_lo,
            spec.bond_hi,
            SimulationParams::new(spec.p)?,
            spec.horizon,
            spec.seed,
        )
    }

    pub fn spec(&self) -> EnvironmentSpec {
        EnvironmentSpec {
            bond_lo: self.bond_lo,
            bond_hi: self.bond_hi,
            p: self.params.p(),
            horizon: self.horizon,
            seed: self.seed,
        }
    }

    pub fn params(&self) -> SimulationParams {
        self.params
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn bonds(&self) -> (i64, i64) {
        (self.bond_lo, self.bond_hi)
    }

    pub fn events(&self) -> &[BondEvent] {
        &self.events
    }

    pub fn covers(&self, lo: i64, hi: i64) -> bool {
        hi < lo || (self.bond_lo <= lo && hi <= self.bond_hi)
    }

    /// Append the rings in `(horizon, t_max]`. Earlier events are untouched.
    pub fn extend_to(&mut self, t_max: f64) -> Result<()> {
        if !t_max.is_finite() {
            return invalid("horizon must be finite");
        }
        if t_max <= self.horizon && !(self.horizon == 0.0 && self.events.is_empty() && t_max == 0.0)
        {
            return Ok(());
        }
        let old = self.horizon;
        let first_block = (old / BLOCK_LEN).floor() as u64;
        let last_block = (t_max / BLOCK_LEN).ceil() as u64;
        let mut fresh = Vec::new();
        let mut scratch = Vec::new();
        for bond in self.bond_lo..=self.bond_hi {
            for block in first_block..last_block.max(first_block) {
                scratch.clear();
                block_events(self.seed, RING_RATE, bond, block, &mut scratch);
                fresh.extend(scratch.iter().filter(|e| e.time > old && e.time <= t_max));
            }
        }
        fresh.sort_by(by_time);
        self.events.extend(fresh);
        self.horizon = t_max;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
struct Pending(BondEvent);

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        by_time(&self.0, &other.0) == Ordering::Equal
    }
}
impl Eq for Pending {}
impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Pending {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        by_time(&other.0, &self.0)
    }
}

/// Lazily generated environment over an unbounded set of bonds.
///
/// Only covered bonds deliver events; the caller must cover every bond on
/// which a ring could change some tracked configuration. Rings of uncovered
/// bonds are dropped, which is exact as long as they would have been no-ops.
#[derive(Debug)]
pub struct EventStream {
    seed: u64,
    rate: f64,
    block: u64,
    lo: i64,
    hi: i64,
    now: f64,
    heap: BinaryHeap<Pending>,
    scratch: Vec<BondEvent>,
}

impl EventStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rate: RING_RATE,
            block: 0,
            lo: 0,
            hi: -1,
            now: 0.0,
            heap: BinaryHeap::new(),
            scratch: Vec::new(),
        }
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn covered(&self) -> Option<(i64, i64)> {
        (self.lo <= self.hi).then_some((self.lo, self.hi))
    }

    fn load(&mut self, bond: i64) {
        self.scratch.clear();
        block_events(self.seed, self.rate, bond, self.block, &mut self.scratch);
        let now = self.now;
        self.heap.extend(
            self.scratch
                .iter()
                .filter(|e| e.time > now)
                .map(|&e| Pending(e)),
        );
    }

    /// Make sure the bonds `[lo;hi]` deliver events from now on.
    pub fn cover(&mut self, lo: i64, hi: i64) {
        if hi < lo {
            return;
        }
        if self.lo > self.hi {
            self.lo = lo;
            self.hi = lo - 1;
            for b in lo..=hi {
                self.load(b);
            }
            self.hi = hi;
            return;
        }
        for b in lo..self.lo {
            self.load(b);
        }
        for b in (self.hi + 1)..=hi {
            self.load(b);
        }
        self.lo = self.lo.min(lo);
        self.hi = self.hi.max(hi);
    }

    /// Next event with time at most `t`. Returns `None` once the stream has
    /// been advanced to `t`.
    pub fn next_until(&mut self, t: f64) -> Option<BondEvent> {
        loop {
            if let Some(top) = self.heap.peek() {
                if top.0.time <= t {
                    let ev = self.heap.pop().map(|p| p.0);
                    if let Some(e) = ev {
                        self.now = e.time;
                    }
                    return ev;
                }
                self.now = self.now.max(t);
                return None;
            }
            let block_end = (self.block + 1) as f64 * BLOCK_LEN;
            if block_end > t || self.lo > self.hi {
                self.now = self.now.max(t);
                return None;
            }
            self.block += 1;
            self.now = self.now.max(block_end);
            for b in self.lo..=self.hi {
                self.load(b);
            }
        }
    }
}

/// Smallest `d` with `(rate * t)^d / d! <= eps`: the number of sites beyond
/// which influence along increasing chains of clock rings is below `eps`.
pub fn window_margin(rate: f64, t: f64, eps: f64) -> usize {
    let x = rate * t;
    if x <= 0.0 {
        return 0;
    }
    let target = eps.ln();
    let mut log_term = 0.0;
    let mut d = 0usize;
    while log_term > target {
        d += 1;
        log_term += x.ln() - (d as f64).ln();
    }
    d
}
