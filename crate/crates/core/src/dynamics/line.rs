//! Dynamics on the whole line.
//!
//! A configuration with constant tails only changes on its active region:
//! bonds from one left of the first non-tail site to the last non-tail site.
//! Rings elsewhere are no-ops, so running clocks only on that region is exact.

use rand::Rng;

use super::{should_swap, HitOutcome, SimulationParams, RING_RATE};
use crate::error::{invalid, Result};
use crate::lattice::{Cell, LineConfig};
use crate::rng::SimRng;

const NONE_LO: i64 = i64::MAX / 4;
const NONE_HI: i64 = i64::MIN / 4;

/// A line configuration in a growable buffer, with its active region kept
/// up to date.
#[derive(Clone, Debug)]
pub struct LineState {
    base: i64,
    cells: Vec<Cell>,
    left_tail: Cell,
    right_tail: Cell,
    first: i64,
    last: i64,
}

impl LineState {
    pub fn from_config(c: &LineConfig) -> Self {
        let (lo, hi) = c.window();
        let (left_tail, right_tail) = c.tails();
        let mut first = NONE_LO;
        let mut last = NONE_HI;
        for i in lo..=hi {
            if c.get(i) != left_tail {
                first = i;
                break;
            }
        }
        for i in (lo..=hi).rev() {
            if c.get(i) != right_tail {
                last = i;
                break;
            }
        }
        let mut s = Self {
            base: lo,
            cells: c.window_cells().to_vec(),
            left_tail,
            right_tail,
            first,
            last,
        };
        s.reserve();
        s
    }

    pub fn to_config(&self) -> LineConfig {
        match self.active_sites() {
            Some((a, b)) => {
                let cells = (a..=b).map(|i| self.get(i)).collect();
                LineConfig::new(a, cells, self.left_tail, self.right_tail)
            }
            None => {
                let at = if self.first == NONE_LO {
                    self.base
                } else {
                    self.first
                };
                LineConfig::new(at, Vec::new(), self.left_tail, self.right_tail)
            }
        }
    }

    #[inline]
    pub fn get(&self, i: i64) -> Cell {
        let off = i - self.base;
        if off < 0 {
            self.left_tail
        } else if off >= self.cells.len() as i64 {
            self.right_tail
        } else {
            self.cells[off as usize]
        }
    }

    pub fn tails(&self) -> (Cell, Cell) {
        (self.left_tail, self.right_tail)
    }

    /// Sites that differ from the nearer tail, as `[first;last]`.
    pub fn active_sites(&self) -> Option<(i64, i64)> {
        (self.first <= self.last).then_some((self.first, self.last))
    }

    /// Bonds on which a ring can change the configuration.
    pub fn active_bonds(&self) -> Option<(i64, i64)> {
        if self.first == NONE_LO && self.last == NONE_HI {
            return None;
        }
        let lo = self.first.min(self.last + 1) - 1;
        let hi = self.last.max(self.first - 1);
        Some((lo, hi))
    }

    fn reserve(&mut self) {
        let Some((lo, hi)) = self.active_bonds() else {
            return;
        };
        let need_lo = lo - 2;
        let need_hi = hi + 3;
        if need_lo < self.base {
            let extra = ((self.base - need_lo) as usize).max(self.cells.len());
            let mut cells = vec![self.left_tail; extra];
            cells.extend_from_slice(&self.cells);
            self.cells = cells;
            self.base -= extra as i64;
        }
        let top = self.base + self.cells.len() as i64 - 1;
        if need_hi > top {
            let extra = ((need_hi - top) as usize).max(self.cells.len());
            self.cells
                .extend(std::iter::repeat_n(self.right_tail, extra));
        }
    }

    /// Apply a ring of bond `z`; returns whether a swap happened.
    pub fn apply(&mut self, z: i64, coin: f64, p: f64) -> bool {
        let Some((lo, hi)) = self.active_bonds() else {
            return false;
        };
        if z < lo || z > hi {
            return false;
        }
        let off = (z - self.base) as usize;
        if !should_swap(&self.cells[off], &self.cells[off + 1], coin, p) {
            return false;
        }
        self.cells.swap(off, off + 1);
        self.refresh(z);
        true
    }

    fn refresh(&mut self, z: i64) {
        let scan_hi = self.last.max(z + 1);
        let scan_lo = self.first.min(z);
        if self.first >= z {
            let mut i = z;
            while i <= scan_hi && self.get(i) == self.left_tail {
                i += 1;
            }
            self.first = if i > scan_hi && self.left_tail == self.right_tail {
                NONE_LO
            } else {
                i
            };
        }
        if self.last <= z + 1 {
            let mut i = z + 1;
            while i >= scan_lo && self.get(i) == self.right_tail {
                i -= 1;
            }
            self.last = if i < scan_lo && self.left_tail == self.right_tail {
                NONE_HI
            } else {
                i
            };
        }
        self.reserve();
    }

    /// Run the dynamics for `dt` time units with exact Gillespie sampling on
    /// the active region, calling `on_swap(self, z)` after each swap at bond `z`.
    /// Stops early, returning the time, when `on_swap` returns `true`.
    pub fn run(
        &mut self,
        rng: &mut SimRng,
        params: SimulationParams,
        dt: f64,
        mut on_swap: impl FnMut(&Self, i64) -> bool,
    ) -> Option<f64> {
        let p = params.p();
        let mut t = 0.0;
        loop {
            let (lo, hi) = self.active_bonds()?;
            let n = (hi - lo + 1) as f64;
            let u: f64 = rng.gen();
            t += -(1.0 - u).ln() / (RING_RATE * n);
            if t > dt {
                return None;
            }
            let z = lo + rng.gen_range(0..(hi - lo + 1));
            let coin: f64 = if p < 1.0 { rng.gen() } else { 0.0 };
            if self.apply(z, coin, p) && on_swap(self, z) {
                return Some(t);
            }
        }
    }
}

/// Sample the configuration at time `t` started from `c`.
pub fn evolve_line(
    c: &LineConfig,
    params: SimulationParams,
    t: f64,
    rng: &mut SimRng,
) -> Result<LineConfig> {
    if !(t >= 0.0) || !t.is_finite() {
        return invalid(format!("time {t} must be finite and nonnegative"));
    }
    let mut s = LineState::from_config(c);
    s.run(rng, params, t, |_, _| false);
    Ok(s.to_config())
}

/// First time the line process started from `start` equals `target`.
pub fn line_hitting_time(
    start: &LineConfig,
    target: &LineConfig,
    params: SimulationParams,
    rng: &mut SimRng,
    t_cap: f64,
) -> Result<HitOutcome> {
    if start.tails() != target.tails() {
        return Ok(HitOutcome::Timeout);
    }
    if !(t_cap >= 0.0) || !t_cap.is_finite() {
        return invalid(format!("time cap {t_cap} must be finite and nonnegative"));
    }
    let (a, b) = start.window();
    let (c, d) = target.window();
    let mut miss = (a.min(c)..=b.max(d))
        .filter(|&i| start.get(i) != target.get(i))
        .count();
    if miss == 0 {
        return Ok(HitOutcome::Hit(0.0));
    }
    let mut s = LineState::from_config(start);
    let hit = s.run(rng, params, t_cap, |st, z| {
        let after =
            (st.get(z) != target.get(z)) as usize + (st.get(z + 1) != target.get(z + 1)) as usize;
        let before =
            (st.get(z + 1) != target.get(z)) as usize + (st.get(z) != target.get(z + 1)) as usize;
        miss = miss + after - before;
        miss == 0
    });
    Ok(hit.map_or(HitOutcome::Timeout, HitOutcome::Hit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{make_named_config, ConfigName};
    use crate::rng::rng_from;

    fn line(s: &str) -> LineConfig {
        s.parse().unwrap()
    }

    #[test]
    fn active_region_of_step() {
        let s = LineState::from_config(&line("...(1)|10|(0)...@-1"));
        assert_eq!(s.active_sites(), None);
        assert_eq!(s.active_bonds(), Some((-1, -1)));
        assert!(s.to_config().same_state(&line("...(1)|10|(0)...@-1")));
        let s = LineState::from_config(&line("...(0)|0010110|(1)...@1"));
        assert_eq!(s.active_sites(), Some((3, 7)));
        assert_eq!(s.active_bonds(), Some((2, 7)));
        let s = LineState::from_config(&line("...(0)|000|(0)..."));
        assert_eq!(s.active_bonds(), None);
    }

    #[test]
    fn state_stays_consistent_with_full_recompute() {
        let mut rng = rng_from(3);
        let p = SimulationParams::from_ratio(0.5).unwrap();
        let mut s = LineState::from_config(&line("...(1)|0110|(0)..."));
        for _ in 0..2000 {
            let (lo, hi) = s.active_bonds().unwrap();
            let z = rng.gen_range(lo - 2..=hi + 2);
            s.apply(z, rng.gen(), p.p());
            let fresh = LineState::from_config(&s.to_config());
            assert_eq!(fresh.active_bonds(), s.active_bonds());
        }
    }

    #[test]
    fn step_conserves_charge_and_moves_right() {
        let step = make_named_config(ConfigName::Step, 1, 1)
            .unwrap()
            .into_line()
            .unwrap();
        let p = SimulationParams::new(1.0).unwrap();
        let mut rng = rng_from(1);
        let out = evolve_line(&step, p, 20.0, &mut rng).unwrap();
        // with p = 1 particles only move right: everything left of the
        // leftmost hole is occupied
        let (lo, hi) = out.window();
        let first_hole = (lo - 1..=hi + 1)
            .find(|&i| !out.get(i).is_particle())
            .unwrap();
        assert!(first_hole <= 0);
        assert!(
            (first_hole..=hi)
                .filter(|&i| out.get(i).is_particle())
                .count()
                > 0
        );
    }

    #[test]
    fn two_site_hitting_on_the_line() {
        // ...000|10|111... at p = 1: only bond 0 can move anything.
        let p = SimulationParams::new(1.0).unwrap();
        let start = line("...(0)|10|(1)...@0");
        let target = line("...(0)|01|(1)...@0");
        let reps = 20_000u64;
        let mut sum = 0.0;
        let mut rng = rng_from(7);
        for _ in 0..reps {
            sum += line_hitting_time(&start, &target, p, &mut rng, 1e6)
                .unwrap()
                .time()
                .unwrap();
        }
        let mean = sum / reps as f64;
        let expected = 1.0;
        assert!(
            (mean - expected).abs() < 4.0 * expected / (reps as f64).sqrt(),
            "{mean}"
        );
    }
}
