//! The Airy function and its derivative.
//!
//! For `|x| <= 8` the Maclaurin series is summed in double-double arithmetic,
//! which absorbs the cancellation between its two halves. Beyond that the
//! standard asymptotic expansions are used.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Documented accuracy range of [`airy`].
pub const AIRY_RANGE: f64 = 20.0;
const SWITCH: f64 = 8.0;

#[derive(Clone, Copy, Debug)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    const fn new(hi: f64, lo: f64) -> Self {
        Self { hi, lo }
    }

    fn from(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    fn quick(a: f64, b: f64) -> Self {
        let s = a + b;
        Self {
            hi: s,
            lo: b - (s - a),
        }
    }

    fn add(self, o: Dd) -> Dd {
        let s = self.hi + o.hi;
        let bb = s - self.hi;
        let e = (self.hi - (s - bb)) + (o.hi - bb) + self.lo + o.lo;
        Dd::quick(s, e)
    }

    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p) + self.hi * o.lo + self.lo * o.hi;
        Dd::quick(p, e)
    }

    fn div_f64(self, d: f64) -> Dd {
        let q1 = self.hi / d;
        let p = q1 * d;
        let e = q1.mul_add(d, -p);
        let r = (self.hi - p - e + self.lo) / d;
        Dd::quick(q1, r)
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// `Ai(0)` and `-Ai'(0)`.
const C1: Dd = Dd::new(0.3550280538878172, 2.05233632436212e-17);
const C2: Dd = Dd::new(0.2588194037928068, -2.522243111610832e-17);

fn series(x: f64) -> (f64, f64) {
    let xd = Dd::from(x);
    let x2 = xd.mul(xd);
    let x3 = x2.mul(xd);
    // f = sum t_k, f' = sum t_{k-1} x^2 / (3k - 1)
    // g = sum u_k, g' = sum v_k
    let mut t = Dd::from(1.0);
    let mut u = xd;
    let mut v = Dd::from(1.0);
    let (mut f, mut fp, mut g, mut gp) = (t, Dd::from(0.0), u, v);
    for k in 1..200 {
        let kf = k as f64;
        let fp_term = t.mul(x2).div_f64(3.0 * kf - 1.0);
        t = t.mul(x3).div_f64((3.0 * kf - 1.0) * (3.0 * kf));
        u = u.mul(x3).div_f64((3.0 * kf) * (3.0 * kf + 1.0));
        v = v.mul(x3).div_f64((3.0 * kf) * (3.0 * kf - 2.0));
        f = f.add(t);
        fp = fp.add(fp_term);
        g = g.add(u);
        gp = gp.add(v);
        let small = |term: Dd, sum: Dd| term.hi.abs() <= 1e-33 * sum.hi.abs().max(1e-300);
        if k > 3 && small(t, f) && small(fp_term, fp) && small(u, g) && small(v, gp) {
            break;
        }
    }
    let ai = C1.mul(f).add(C2.mul(g).neg());
    let aip = C1.mul(fp).add(C2.mul(gp).neg());
    (ai.to_f64(), aip.to_f64())
}

/// `(u_k, v_k)` for `k < n`.
fn asymptotic_coefficients(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![1.0];
    let mut v = vec![1.0];
    for k in 1..n {
        let kf = k as f64;
        let next = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        u.push(next);
        v.push(-(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * next);
    }
    (u, v)
}

/// Sum `sum_k sign_k c_k z^-k` over the selected indices, stopping at the
/// smallest term.
fn asym_sum(c: &[f64], zeta: f64, start: usize, step: usize, alternate: bool) -> f64 {
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut sign = 1.0;
    let mut k = start;
    while k < c.len() {
        let term = c[k] / zeta.powi(k as i32);
        if term.abs() > prev {
            break;
        }
        sum += sign * term;
        prev = term.abs();
        if alternate {
            sign = -sign;
        }
        k += step;
    }
    sum
}

fn asymptotic(x: f64) -> (f64, f64) {
    let (u, v) = asymptotic_coefficients(40);
    if x > 0.0 {
        let zeta = 2.0 / 3.0 * x.powf(1.5);
        let signed = |c: &[f64]| {
            let alt: Vec<f64> = c
                .iter()
                .enumerate()
                .map(|(k, &ck)| if k % 2 == 0 { ck } else { -ck })
                .collect();
            asym_sum_signed(&alt, zeta)
        };
        let pref = (-zeta).exp() / (2.0 * PI.sqrt());
        let ai = pref / x.powf(0.25) * signed(&u);
        let aip = -pref * x.powf(0.25) * signed(&v);
        (ai, aip)
    } else {
        let z = -x;
        let zeta = 2.0 / 3.0 * z.powf(1.5);
        let phase = zeta - PI / 4.0;
        let (s, c) = phase.sin_cos();
        let ue = asym_sum(&u, zeta, 0, 2, true);
        let uo = asym_sum(&u, zeta, 1, 2, true);
        let ve = asym_sum(&v, zeta, 0, 2, true);
        let vo = asym_sum(&v, zeta, 1, 2, true);
        let ai = (c * ue + s * uo) / (z.powf(0.25) * PI.sqrt());
        let aip = z.powf(0.25) / PI.sqrt() * (s * ve - c * vo);
        (ai, aip)
    }
}

fn asym_sum_signed(c: &[f64], zeta: f64) -> f64 {
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    for (k, &ck) in c.iter().enumerate() {
        let term = ck / zeta.powi(k as i32);
        if term.abs() > prev {
            break;
        }
        sum += term;
        prev = term.abs();
    }
    sum
}

/// `(Ai(x), Ai'(x))` without the range check. Large positive arguments
/// underflow gracefully to zero.
pub(crate) fn airy_unchecked(x: f64) -> (f64, f64) {
    if x.abs() <= SWITCH {
        series(x)
    } else {
        asymptotic(x)
    }
}

/// `(Ai(x), Ai'(x))` for `|x| <= 20`.
pub fn airy(x: f64) -> Result<(f64, f64)> {
    if !(x.abs() <= AIRY_RANGE) {
        return Err(Error::OutOfRange {
            value: x,
            lo: -AIRY_RANGE,
            hi: AIRY_RANGE,
        });
    }
    Ok(airy_unchecked(x))
}
