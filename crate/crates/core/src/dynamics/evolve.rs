use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{
    sample_environment, should_swap, BondEvent, CouplingEnvironment, HitOutcome, SimulationParams,
    BLOCK_LEN,
};
use crate::error::{invalid, Error, Result};
use crate::lattice::Lattice;

fn check_coverage<L: Lattice>(c: &L, env: &CouplingEnvironment, t: f64) -> Result<()> {
    if t > env.horizon() {
        return Err(Error::HorizonExceeded {
            requested: t,
            horizon: env.horizon(),
        });
    }
    let (lo, hi) = (c.lo(), c.hi() - 1);
    if !env.covers(lo, hi) {
        let (blo, bhi) = env.bonds();
        return Err(Error::BondRange {
            lo: blo,
            hi: bhi,
            need_lo: lo,
            need_hi: hi,
        });
    }
    Ok(())
}

/// Apply one ring; returns whether the configuration changed.
#[inline]
fn ring<L: Lattice>(c: &mut L, e: &BondEvent, p: f64) -> bool {
    let off = e.bond - c.lo();
    if off < 0 || off + 1 >= c.values().len() as i64 {
        return false;
    }
    let off = off as usize;
    let v = c.values();
    if should_swap(&v[off], &v[off + 1], e.coin, p) {
        c.swap_offset(off);
        true
    } else {
        false
    }
}

/// The configuration at time `t` when started from `c` at time 0.
pub fn evolve<L: Lattice + Clone>(c: &L, env: &CouplingEnvironment, t: f64) -> Result<L> {
    let mut out = c.clone();
    evolve_between(&mut out, env, 0.0, t)?;
    Ok(out)
}

/// Apply the rings in `(from, to]` to `c` in place.
pub fn evolve_between<L: Lattice>(
    c: &mut L,
    env: &CouplingEnvironment,
    from: f64,
    to: f64,
) -> Result<()> {
    if to < from {
        return invalid(format!("time interval ({from}, {to}] is reversed"));
    }
    check_coverage(c, env, to)?;
    let p = env.params().p();
    let events = env.events();
    let start = events.partition_point(|e| e.time <= from);
    for e in events[start..].iter().take_while(|e| e.time <= to) {
        ring(c, e, p);
    }
    Ok(())
}

/// Evolve several configurations under the same environment.
pub fn coupled_evolve<L: Lattice>(cs: &mut [L], env: &CouplingEnvironment, t: f64) -> Result<()> {
    for c in cs.iter() {
        check_coverage(c, env, t)?;
    }
    let p = env.params().p();
    for e in env.events().iter().take_while(|e| e.time <= t) {
        for c in cs.iter_mut() {
            ring(c, e, p);
        }
    }
    Ok(())
}

/// One line of a trajectory dump.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub time: f64,
    pub bond: i64,
    pub coin: f64,
    pub swapped: bool,
}

/// Like [`evolve`], writing every ring inside the configuration as a JSON line.
pub fn evolve_recorded<L: Lattice + Clone>(
    c: &L,
    env: &CouplingEnvironment,
    t: f64,
    out: &mut impl Write,
) -> Result<L> {
    check_coverage(c, env, t)?;
    let p = env.params().p();
    let mut cur = c.clone();
    for e in env.events().iter().take_while(|e| e.time <= t) {
        if e.bond < cur.lo() || e.bond >= cur.hi() {
            continue;
        }
        let swapped = ring(&mut cur, e, p);
        let rec = TrajectoryRecord {
            time: e.time,
            bond: e.bond,
            coin: e.coin,
            swapped,
        };
        serde_json::to_writer(&mut *out, &rec)?;
        writeln!(out)?;
    }
    Ok(cur)
}

fn mismatches<V: PartialEq>(a: &[V], b: &[V]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

#[inline]
fn pair_mismatch<V: PartialEq>(a: &[V], b: &[V], off: usize) -> usize {
    (a[off] != b[off]) as usize + (a[off + 1] != b[off + 1]) as usize
}

/// Feed rings of a growing environment to `step` until it returns `true`
/// or `t_cap` is passed.
fn drive(
    bonds: (i64, i64),
    params: SimulationParams,
    seed: u64,
    t_cap: f64,
    mut step: impl FnMut(&BondEvent) -> bool,
) -> Result<HitOutcome> {
    if !(t_cap >= 0.0) || !t_cap.is_finite() {
        return invalid(format!("time cap {t_cap} must be finite and nonnegative"));
    }
    let mut horizon = t_cap.min(2.0 * BLOCK_LEN);
    let mut env = sample_environment(bonds.0, bonds.1, params, horizon, seed)?;
    let mut next = 0;
    loop {
        while next < env.events().len() {
            let e = env.events()[next];
            next += 1;
            if step(&e) {
                return Ok(HitOutcome::Hit(e.time));
            }
        }
        if horizon >= t_cap {
            return Ok(HitOutcome::Timeout);
        }
        horizon = (2.0 * horizon).min(t_cap);
        env.extend_to(horizon)?;
    }
}

fn same_domain<L: Lattice>(a: &L, b: &L) -> Result<()> {
    if a.lo() != b.lo() || a.values().len() != b.values().len() {
        return Err(Error::DomainMismatch(format!(
            "[{};{}] versus [{};{}]",
            a.lo(),
            a.hi(),
            b.lo(),
            b.hi()
        )));
    }
    Ok(())
}

/// First time the process started from `start` equals `target`.
pub fn hitting_time<L: Lattice + Clone>(
    start: &L,
    target: &L,
    params: SimulationParams,
    seed: u64,
    t_cap: f64,
) -> Result<HitOutcome>
where
    L::Value: PartialEq,
{
    same_domain(start, target)?;
    let mut cur = start.clone();
    let mut miss = mismatches(cur.values(), target.values());
    if miss == 0 {
        return Ok(HitOutcome::Hit(0.0));
    }
    let p = params.p();
    let lo = cur.lo();
    drive((lo, cur.hi() - 1), params, seed, t_cap, |e| {
        let off = (e.bond - lo) as usize;
        let before = pair_mismatch(cur.values(), target.values(), off);
        if ring(&mut cur, e, p) {
            miss = miss + pair_mismatch(cur.values(), target.values(), off) - before;
        }
        miss == 0
    })
}

/// First time two coupled copies started from `a` and `b` agree.
pub fn coalescence_time<L: Lattice + Clone>(
    a: &L,
    b: &L,
    params: SimulationParams,
    seed: u64,
    t_cap: f64,
) -> Result<HitOutcome>
where
    L::Value: PartialEq,
{
    same_domain(a, b)?;
    let (mut x, mut y) = (a.clone(), b.clone());
    let mut miss = mismatches(x.values(), y.values());
    if miss == 0 {
        return Ok(HitOutcome::Hit(0.0));
    }
    let p = params.p();
    let lo = x.lo();
    drive((lo, x.hi() - 1), params, seed, t_cap, |e| {
        let off = (e.bond - lo) as usize;
        let before = pair_mismatch(x.values(), y.values(), off);
        let sx = ring(&mut x, e, p);
        let sy = ring(&mut y, e, p);
        if sx || sy {
            miss = miss + pair_mismatch(x.values(), y.values(), off) - before;
        }
        miss == 0
    })
}
