//! The random-walk semigroup and the exact distribution identities.

use serde::{Deserialize, Serialize};

use super::perm::{factorial, table};
use super::{left_generator, mallows_element_on, multiply, HeckeElement};
use crate::dynamics::poisson_weights;
use crate::error::{invalid, Error, Result};

/// Default cap on `n!` for exact computations.
pub const DEFAULT_WALK_CAP: u64 = 5040;

/// Poisson truncation of the uniformization series.
pub const WALK_TAIL: f64 = 1e-12;

fn check_rates(t: f64, rate: f64, q: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return invalid(format!("time {t} must be finite and nonnegative"));
    }
    if !(rate > 0.0) || !rate.is_finite() {
        return invalid(format!("rate {rate} must be positive"));
    }
    if !(0.0..1.0).contains(&q) {
        return invalid(format!("Q = {q} must lie in [0, 1)"));
    }
    Ok(())
}

/// Law of `W_{lo;hi}(t)`: every bond rings at rate `rate` and multiplies by
/// its generator from the left. Computed by uniformization at rate
/// `rate * (n - 1)` with Poisson tail at most `tail`.
pub fn walk_law(
    lo: i64,
    hi: i64,
    t: f64,
    rate: f64,
    q: f64,
    cap: u64,
    tail: f64,
) -> Result<HeckeElement> {
    check_rates(t, rate, q)?;
    if hi < lo {
        return invalid(format!("empty interval [{lo};{hi}]"));
    }
    let n = (hi - lo + 1) as usize;
    let size = factorial(n.min(20));
    if size > cap {
        return Err(Error::CapExceeded { size, cap });
    }
    let mut law = HeckeElement::identity(lo, hi)?;
    if n == 1 {
        return Ok(law);
    }
    let bonds = n - 1;
    let weights = poisson_weights(rate * bonds as f64 * t, tail);
    let tab = table(n)?;
    let mut v = law.weights.clone();
    let mut step = vec![0.0; v.len()];
    let mut next = vec![0.0; v.len()];
    law.weights.iter_mut().for_each(|x| *x = 0.0);
    for (m, &w) in weights.iter().enumerate() {
        law.weights
            .iter_mut()
            .zip(&v)
            .for_each(|(x, y)| *x += w * y);
        if m + 1 == weights.len() {
            break;
        }
        next.iter_mut().for_each(|x| *x = 0.0);
        for z in 0..bonds {
            left_generator(&tab, z, q, &v, &mut step);
            next.iter_mut().zip(&step).for_each(|(x, y)| *x += y);
        }
        let scale = 1.0 / bonds as f64;
        v.iter_mut().zip(&next).for_each(|(x, y)| *x = y * scale);
    }
    Ok(law)
}

/// Sites `[-S-R; S+M]` of the identities.
pub fn identity_interval(s: usize, r: usize, m: usize) -> (i64, i64) {
    (-((s + r) as i64), (s + m) as i64)
}

/// The two sides of the identity as laws:
/// `W M_{-S-R;0} M_{-S;S+M}` and `M_{-S;S+M} M_{-S-R;0} W` (before involution).
fn identity_sides(
    s: usize,
    r: usize,
    m: usize,
    t: f64,
    rate: f64,
    q: f64,
    cap: u64,
) -> Result<(HeckeElement, HeckeElement)> {
    let (lo, hi) = identity_interval(s, r, m);
    let w = walk_law(lo, hi, t, rate, q, cap, WALK_TAIL)?;
    let m1 = mallows_element_on(lo, hi, lo, 0, q)?;
    let m2 = mallows_element_on(lo, hi, -(s as i64), hi, q)?;
    let lhs = multiply(&multiply(&w, &m1, q)?, &m2, q)?;
    let rhs = multiply(&multiply(&m2, &m1, q)?, &w, q)?;
    Ok((lhs, rhs))
}

/// `|| W M_1 M_2 - i(M_2 M_1 W) ||_inf` on `[-S-R; S+M]`.
pub fn distribution_identity_check(
    s: usize,
    r: usize,
    m: usize,
    t: f64,
    rate: f64,
    q: f64,
    cap: u64,
) -> Result<f64> {
    let (lhs, rhs) = identity_sides(s, r, m, t, rate, q, cap)?;
    lhs.max_abs_diff(&rhs.involution())
}

/// Both sides of the event identity derived from the distribution identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorollaryReport {
    pub x: i64,
    pub y: i64,
    /// Colours of `[-S-R;0]` all sit right of `x` and colours of `(0;S+M]` at or left of `y`.
    pub lhs: f64,
    /// Sites `<= 0` carry colours above `x` and sites `> 0` colours at most `y`.
    pub rhs: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn corollary_event_check(
    s: usize,
    r: usize,
    m: usize,
    t: f64,
    rate: f64,
    q: f64,
    x: i64,
    y: i64,
    cap: u64,
) -> Result<CorollaryReport> {
    let all = corollary_sweep(s, r, m, t, rate, q, &[(x, y)], cap)?;
    Ok(all.into_iter().next().expect("one pair"))
}

/// Evaluate the event identity for every `(x, y)` in `pairs` from one pair of
/// exact laws.
#[allow(clippy::too_many_arguments)]
pub fn corollary_sweep(
    s: usize,
    r: usize,
    m: usize,
    t: f64,
    rate: f64,
    q: f64,
    pairs: &[(i64, i64)],
    cap: u64,
) -> Result<Vec<CorollaryReport>> {
    if let Some(&(x, y)) = pairs.iter().find(|(x, y)| x > y) {
        return invalid(format!("need x <= y, got x = {x}, y = {y}"));
    }
    let (lhs_law, rhs_law) = identity_sides(s, r, m, t, rate, q, cap)?;
    let (lo, hi) = identity_interval(s, r, m);
    let mut out = Vec::with_capacity(pairs.len());
    for &(x, y) in pairs {
        let mut lhs = 0.0;
        for (w, c) in lhs_law.terms() {
            let pos = w.inverse();
            let low_ok = (lo..=0).all(|col| pos.image(col) > x);
            let high_ok = (1..=hi).all(|col| pos.image(col) <= y);
            if low_ok && high_ok {
                lhs += c;
            }
        }
        let mut rhs = 0.0;
        for (w, c) in rhs_law.terms() {
            let left_ok = (lo..=0).all(|site| w.image(site) > x);
            let right_ok = (1..=hi).all(|site| w.image(site) <= y);
            if left_ok && right_ok {
                rhs += c;
            }
        }
        out.push(CorollaryReport { x, y, lhs, rhs });
    }
    Ok(out)
}

/// `|| sum_z rate (T_z M - M) ||_inf` for the Mallows element of `S_n`.
pub fn mallows_generator_residual(n: usize, rate: f64, q: f64) -> Result<f64> {
    let m = super::mallows_element(1, n as i64, q)?;
    let mut acc = vec![0.0; m.weights.len()];
    for z in 1..n as i64 {
        let moved = m.apply_generator(z, q)?;
        for ((a, x), y) in acc.iter_mut().zip(&moved.weights).zip(&m.weights) {
            *a += rate * (x - y);
        }
    }
    Ok(acc.iter().fold(0.0f64, |mx, x| mx.max(x.abs())))
}

/// One verified identity instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub identity: String,
    pub s: usize,
    pub r: usize,
    pub m: usize,
    pub t: f64,
    pub p: f64,
    pub q: f64,
    pub deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Run the distribution identity over a grid, with jump rate `p = 1/(1+Q)`.
pub fn verify_identity_grid(
    triples: &[(usize, usize, usize)],
    qs: &[f64],
    ts: &[f64],
    tolerance: f64,
    cap: u64,
) -> Result<Vec<IdentityReport>> {
    let mut out = Vec::new();
    for &(s, r, m) in triples {
        for &q in qs {
            let p = 1.0 / (1.0 + q);
            for &t in ts {
                let deviation = distribution_identity_check(s, r, m, t, p, q, cap)?;
                out.push(IdentityReport {
                    identity: "walk-mallows-involution".into(),
                    s,
                    r,
                    m,
                    t,
                    p,
                    q,
                    deviation,
                    tolerance,
                    passed: deviation <= tolerance,
                });
            }
        }
    }
    Ok(out)
}
