//! Exact Hecke-algebra arithmetic on small symmetric groups.
//!
//! Elements of `H(S_{a;b})` with `Q` as parameter are stored as dense weight
//! vectors indexed by the lexicographic rank of the image sequence. Left
//! multiplication by `T_z` swaps entries at sites `z, z+1`:
//! `T_z T_w = T_{s w}` when that adds an inversion, and
//! `T_z T_w = (1 - Q) T_w + Q T_{s w}` otherwise. This is one step of the
//! coloured exclusion process, so probability elements are laws of coloured
//! configurations.

mod identity;
mod perm;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use perm::{rank, table, PermTable};

pub use identity::{
    corollary_event_check, distribution_identity_check, identity_interval,
    mallows_generator_residual, verify_identity_grid, walk_law, CorollaryReport, IdentityReport,
    DEFAULT_WALK_CAP, WALK_TAIL,
};
pub use perm::{Permutation, MAX_TABLE_N};

/// A linear combination of basis elements `T_w`, `w` in `S_{lo;hi}`.
#[derive(Clone, Debug)]
pub struct HeckeElement {
    lo: i64,
    table: Arc<PermTable>,
    weights: Vec<f64>,
}

fn check_q(q: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&q) {
        return invalid(format!("Q = {q} must lie in [0, 1]"));
    }
    Ok(())
}

impl HeckeElement {
    pub fn zero(lo: i64, hi: i64) -> Result<Self> {
        if hi < lo {
            return invalid(format!("empty interval [{lo};{hi}]"));
        }
        let table = table((hi - lo + 1) as usize)?;
        let weights = vec![0.0; table.size];
        Ok(Self { lo, table, weights })
    }

    pub fn basis(w: &Permutation) -> Result<Self> {
        let mut h = Self::zero(w.lo(), w.hi())?;
        h.weights[rank(&w.offsets())] = 1.0;
        Ok(h)
    }

    pub fn identity(lo: i64, hi: i64) -> Result<Self> {
        Self::basis(&Permutation::identity(lo, hi))
    }

    /// Weights in lexicographic order of image sequences.
    pub fn from_weights(lo: i64, hi: i64, weights: Vec<f64>) -> Result<Self> {
        let mut h = Self::zero(lo, hi)?;
        if weights.len() != h.weights.len() {
            return invalid(format!(
                "expected {} weights, got {}",
                h.weights.len(),
                weights.len()
            ));
        }
        h.weights = weights;
        Ok(h)
    }

    pub fn from_pairs(lo: i64, hi: i64, pairs: &[(Permutation, f64)]) -> Result<Self> {
        let mut h = Self::zero(lo, hi)?;
        for (w, c) in pairs {
            if w.lo() != lo || w.hi() != hi {
                return Err(Error::DomainMismatch(format!(
                    "{w:?} is not in S_[{lo};{hi}]"
                )));
            }
            h.weights[rank(&w.offsets())] += c;
        }
        Ok(h)
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.table.n as i64 - 1
    }

    pub fn n(&self) -> usize {
        self.table.n
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, w: &Permutation) -> f64 {
        if w.lo() != self.lo || w.len() != self.n() {
            return 0.0;
        }
        self.weights[rank(&w.offsets())]
    }

    pub fn permutation(&self, index: usize) -> Permutation {
        Permutation::from_offsets(self.lo, self.table.images(index))
    }

    /// Nonzero terms.
    pub fn terms(&self) -> impl Iterator<Item = (Permutation, f64)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(i, &c)| (self.permutation(i), c))
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_probability(&self, tol: f64) -> bool {
        self.weights.iter().all(|&c| c >= -tol) && (self.total() - 1.0).abs() <= tol
    }

    fn same_space(&self, other: &Self) -> Result<()> {
        if self.lo != other.lo || self.n() != other.n() {
            return Err(Error::DomainMismatch(format!(
                "S_[{};{}] versus S_[{};{}]",
                self.lo,
                self.hi(),
                other.lo,
                other.hi()
            )));
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.same_space(other)?;
        Ok(self
            .weights
            .iter()
            .zip(&other.weights)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
    }

    pub fn l1_diff(&self, other: &Self) -> Result<f64> {
        self.same_space(other)?;
        Ok(self
            .weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .sum())
    }

    fn bond_offset(&self, z: i64) -> Result<usize> {
        if z < self.lo || z >= self.hi() {
            return invalid(format!(
                "generator {z} outside [{};{}]",
                self.lo,
                self.hi() - 1
            ));
        }
        Ok((z - self.lo) as usize)
    }

    /// `T_z h`.
    pub fn apply_generator(&self, z: i64, q: f64) -> Result<Self> {
        check_q(q)?;
        let off = self.bond_offset(z)?;
        let mut out = vec![0.0; self.weights.len()];
        left_generator(&self.table, off, q, &self.weights, &mut out);
        Ok(Self {
            lo: self.lo,
            table: self.table.clone(),
            weights: out,
        })
    }

    /// `h T_z`.
    pub fn apply_generator_right(&self, z: i64, q: f64) -> Result<Self> {
        check_q(q)?;
        let off = self.bond_offset(z)?;
        let mut out = vec![0.0; self.weights.len()];
        let (next, up) = (&self.table.right[off], &self.table.right_up[off]);
        for (i, &c) in self.weights.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let j = next[i] as usize;
            if up[i] {
                out[j] += c;
            } else {
                out[i] += (1.0 - q) * c;
                out[j] += q * c;
            }
        }
        Ok(Self {
            lo: self.lo,
            table: self.table.clone(),
            weights: out,
        })
    }

    /// The anti-automorphism `T_w -> T_{w^-1}`.
    pub fn involution(&self) -> Self {
        let mut out = vec![0.0; self.weights.len()];
        for (i, &c) in self.weights.iter().enumerate() {
            out[self.table.inverse[i] as usize] = c;
        }
        Self {
            lo: self.lo,
            table: self.table.clone(),
            weights: out,
        }
    }

    /// `T_w h`, expanding `T_w` along its leftmost-descent reduced word, or the
    /// rightmost-descent one when `rightmost` is set.
    pub fn apply_word(&self, w: &Permutation, q: f64, rightmost: bool) -> Result<Self> {
        if w.lo() != self.lo || w.len() != self.n() {
            return Err(Error::DomainMismatch(
                "permutation and element live on different intervals".into(),
            ));
        }
        let mut cur = self.clone();
        for &z in w.reduced_word(rightmost).iter().rev() {
            cur = cur.apply_generator(z, q)?;
        }
        Ok(cur)
    }

    /// Sites `[a;b]` outside of which every supported permutation is the identity.
    fn moved_range(&self) -> Option<(usize, usize)> {
        let n = self.n();
        let (mut a, mut b) = (n, 0);
        for (i, &c) in self.weights.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            for (pos, &v) in self.table.images(i).iter().enumerate() {
                if v as usize != pos {
                    a = a.min(pos);
                    b = b.max(pos);
                }
            }
        }
        (a < b).then_some((a, b))
    }

    fn scaled(&self, c: f64) -> Self {
        Self {
            lo: self.lo,
            table: self.table.clone(),
            weights: self.weights.iter().map(|x| c * x).collect(),
        }
    }
}

fn left_generator(t: &PermTable, off: usize, q: f64, src: &[f64], dst: &mut [f64]) {
    dst.iter_mut().for_each(|x| *x = 0.0);
    let (next, up) = (&t.left[off], &t.left_up[off]);
    for (i, &c) in src.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let j = next[i] as usize;
        if up[i] {
            dst[j] += c;
        } else {
            dst[i] += (1.0 - q) * c;
            dst[j] += q * c;
        }
    }
}

/// `h1 h2` by a depth-first walk over the weak-order tree of the parabolic
/// subgroup that carries `h1`: the child `s_z u` of `u` is visited from `u`
/// when `z` is its leftmost descent, so `T_{s_z u} h2 = T_z (T_u h2)` costs one
/// generator application per group element.
fn left_multiply_dfs(
    h1: &HeckeElement,
    h2: &HeckeElement,
    q: f64,
    a: usize,
    b: usize,
) -> HeckeElement {
    let t = &h1.table;
    let size = t.size;
    let mut acc = vec![0.0; size];
    let depth = (b - a + 1) * (b - a) / 2 + 2;
    let mut bufs = vec![vec![0.0; size]; depth];
    bufs[0].copy_from_slice(&h2.weights);
    let id = 0usize;

    struct Frame {
        node: usize,
        next_z: usize,
    }
    let mut stack = vec![Frame {
        node: id,
        next_z: a,
    }];
    let c = h1.weights[id];
    if c != 0.0 {
        acc.iter_mut().zip(&bufs[0]).for_each(|(x, y)| *x += c * y);
    }
    while let Some(frame) = stack.last_mut() {
        let u = frame.node;
        let mut found = None;
        while frame.next_z < b {
            let z = frame.next_z;
            frame.next_z += 1;
            if t.left_up[z][u] {
                let child = t.left[z][u] as usize;
                if t.first_descent[child] as usize == z {
                    found = Some((z, child));
                    break;
                }
            }
        }
        match found {
            Some((z, child)) => {
                let d = stack.len();
                let (lower, upper) = bufs.split_at_mut(d);
                left_generator(t, z, q, &lower[d - 1], &mut upper[0]);
                let c = h1.weights[child];
                if c != 0.0 {
                    acc.iter_mut().zip(&upper[0]).for_each(|(x, y)| *x += c * y);
                }
                stack.push(Frame {
                    node: child,
                    next_z: a,
                });
            }
            None => {
                stack.pop();
            }
        }
    }
    HeckeElement {
        lo: h1.lo,
        table: h1.table.clone(),
        weights: acc,
    }
}

/// The product `h1 h2`.
///
/// Only the parabolic subgroup carrying `h1` is traversed. When `h2` is
/// carried by a smaller one the product is computed as `i(i(h2) i(h1))`.
pub fn multiply(h1: &HeckeElement, h2: &HeckeElement, q: f64) -> Result<HeckeElement> {
    check_q(q)?;
    h1.same_space(h2)?;
    let span = |r: Option<(usize, usize)>| r.map_or(0, |(a, b)| b - a + 1);
    let (r1, r2) = (h1.moved_range(), h2.moved_range());
    if span(r2) < span(r1) {
        let flipped = multiply_left(&h2.involution(), &h1.involution(), q, r2);
        return Ok(flipped.involution());
    }
    Ok(multiply_left(h1, h2, q, r1))
}

fn multiply_left(
    h1: &HeckeElement,
    h2: &HeckeElement,
    q: f64,
    range: Option<(usize, usize)>,
) -> HeckeElement {
    match range {
        None => h2.scaled(h1.weights[0]),
        Some((a, b)) => left_multiply_dfs(h1, h2, q, a, b),
    }
}

/// The Mallows element of `S_{lo;hi}`.
pub fn mallows_element(lo: i64, hi: i64, q: f64) -> Result<HeckeElement> {
    mallows_element_on(lo, hi, lo, hi, q)
}

/// The Mallows element of the subgroup permuting `[seg_lo;seg_hi]`, as an
/// element of `H(S_{lo;hi})`.
pub fn mallows_element_on(
    lo: i64,
    hi: i64,
    seg_lo: i64,
    seg_hi: i64,
    q: f64,
) -> Result<HeckeElement> {
    if !(0.0..1.0).contains(&q) {
        return invalid(format!("Q = {q} must lie in [0, 1)"));
    }
    if seg_lo < lo || seg_hi > hi || seg_hi < seg_lo {
        return Err(Error::DomainMismatch(format!(
            "[{seg_lo};{seg_hi}] is not inside [{lo};{hi}]"
        )));
    }
    let mut h = HeckeElement::zero(lo, hi)?;
    let (a, b) = ((seg_lo - lo) as usize, (seg_hi - lo) as usize);
    let m = b - a + 1;
    let top = m * (m - 1) / 2;
    let z = crate::stationary::normalizer(m, q);
    for i in 0..h.weights.len() {
        let w = h.table.images(i);
        let fixed_outside = w
            .iter()
            .enumerate()
            .all(|(pos, &v)| (a..=b).contains(&pos) || v as usize == pos);
        if fixed_outside {
            h.weights[i] = q.powi((top - h.table.length[i] as usize) as i32) * z;
        }
    }
    Ok(h)
}

/// `M_{seg} h` by direct rearrangement: in every `w` the values on the
/// segment are sorted and the value of rank `v(i)` put at site `i`, with `v`
/// Mallows distributed.
pub fn mallows_left_rearrange(
    seg_lo: i64,
    seg_hi: i64,
    h: &HeckeElement,
    q: f64,
) -> Result<HeckeElement> {
    if seg_lo < h.lo() || seg_hi > h.hi() || seg_hi < seg_lo {
        return Err(Error::DomainMismatch(format!(
            "[{seg_lo};{seg_hi}] is not inside [{};{}]",
            h.lo(),
            h.hi()
        )));
    }
    let (a, b) = ((seg_lo - h.lo()) as usize, (seg_hi - h.lo()) as usize);
    let m = b - a + 1;
    let local = table(m)?;
    let local_mallows = mallows_element(0, m as i64 - 1, q)?;
    let mut out = vec![0.0; h.weights.len()];
    let mut buf = vec![0u8; h.n()];
    for (i, &c) in h.weights.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let w = h.table.images(i);
        let mut vals = w[a..=b].to_vec();
        vals.sort_unstable();
        buf.copy_from_slice(w);
        for (vi, &mv) in local_mallows.weights.iter().enumerate() {
            for (k, &r) in local.images(vi).iter().enumerate() {
                buf[a + k] = vals[r as usize];
            }
            out[rank(&buf)] += c * mv;
        }
    }
    Ok(HeckeElement {
        lo: h.lo,
        table: h.table.clone(),
        weights: out,
    })
}

/// Sampling view of a probability element, for reports and tests.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SparseElement {
    pub lo: i64,
    pub hi: i64,
    pub terms: Vec<(Vec<i64>, f64)>,
}

impl From<&HeckeElement> for SparseElement {
    fn from(h: &HeckeElement) -> Self {
        SparseElement {
            lo: h.lo(),
            hi: h.hi(),
            terms: h.terms().map(|(w, c)| (w.images().to_vec(), c)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from;
    use proptest::prelude::*;
    use rand::Rng;

    fn perm(lo: i64, v: &[i64]) -> Permutation {
        Permutation::new(lo, v.to_vec()).unwrap()
    }

    fn random_probability(lo: i64, hi: i64, seed: u64, sparse: bool) -> HeckeElement {
        let mut rng = rng_from(seed);
        let mut h = HeckeElement::zero(lo, hi).unwrap();
        let len = h.weights.len();
        for c in h.weights.iter_mut() {
            if !sparse || rng.gen_bool((3.0 / len as f64).min(1.0)) {
                *c = rng.gen::<f64>();
            }
        }
        if h.total() == 0.0 {
            h.weights[rng.gen_range(0..len)] = 1.0;
        }
        let s = h.total();
        h.scaled(1.0 / s)
    }

    #[test]
    fn generator_rules() {
        let id = HeckeElement::identity(1, 3).unwrap();
        let ts = id.apply_generator(1, 0.5).unwrap();
        assert_eq!(ts.weight(&perm(1, &[2, 1, 3])), 1.0);
        let tss = ts.apply_generator(1, 0.5).unwrap();
        assert!((tss.weight(&perm(1, &[2, 1, 3])) - 0.5).abs() < 1e-15);
        assert!((tss.weight(&perm(1, &[1, 2, 3])) - 0.5).abs() < 1e-15);
        // Q = 0: T_s T_s = T_s
        let h = random_probability(1, 4, 1, false);
        let once = h.apply_generator(2, 0.0).unwrap();
        let twice = once.apply_generator(2, 0.0).unwrap();
        assert!(once.max_abs_diff(&twice).unwrap() < 1e-15);
        assert!(id.apply_generator(3, 0.5).is_err());
    }

    #[test]
    fn product_examples() {
        let q = 0.25;
        let ts = HeckeElement::basis(&perm(1, &[2, 1, 3])).unwrap();
        let p = multiply(&ts, &ts, q).unwrap();
        assert!((p.weight(&perm(1, &[2, 1, 3])) - 0.75).abs() < 1e-15);
        assert!((p.weight(&perm(1, &[1, 2, 3])) - 0.25).abs() < 1e-15);
        let h = random_probability(1, 4, 2, false);
        let id = HeckeElement::identity(1, 4).unwrap();
        assert!(multiply(&id, &h, q).unwrap().max_abs_diff(&h).unwrap() < 1e-15);
        assert!(multiply(&h, &id, q).unwrap().max_abs_diff(&h).unwrap() < 1e-15);
    }

    #[test]
    fn dfs_product_matches_reduced_words() {
        let q = 0.37;
        for seed in 0..5 {
            let h1 = random_probability(0, 4, seed, false);
            let h2 = random_probability(0, 4, seed + 100, false);
            let mut expected = HeckeElement::zero(0, 4).unwrap();
            for (w, c) in h1.terms() {
                let part = h2.apply_word(&w, q, false).unwrap();
                expected
                    .weights
                    .iter_mut()
                    .zip(&part.weights)
                    .for_each(|(x, y)| *x += c * y);
            }
            let got = left_multiply_dfs(&h1, &h2, q, 0, 4);
            assert!(got.max_abs_diff(&expected).unwrap() < 1e-14);
            assert!(
                multiply(&h1, &h2, q)
                    .unwrap()
                    .max_abs_diff(&expected)
                    .unwrap()
                    < 1e-14
            );
        }
    }

    #[test]
    fn associativity_on_s3() {
        for seed in 0..50 {
            let q = rng_from(seed).gen::<f64>();
            let a = random_probability(1, 3, 3 * seed, seed % 2 == 0);
            let b = random_probability(1, 3, 3 * seed + 1, false);
            let c = random_probability(1, 3, 3 * seed + 2, seed % 3 == 0);
            let left = multiply(&multiply(&a, &b, q).unwrap(), &c, q).unwrap();
            let right = multiply(&a, &multiply(&b, &c, q).unwrap(), q).unwrap();
            assert!(left.max_abs_diff(&right).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn reduced_word_independence_on_s4() {
        let q = 0.6;
        let t = table(4).unwrap();
        let probe = random_probability(1, 4, 9, false);
        for r in 0..t.size {
            let w = Permutation::from_offsets(1, t.images(r));
            let a = probe.apply_word(&w, q, false).unwrap();
            let b = probe.apply_word(&w, q, true).unwrap();
            assert!(a.max_abs_diff(&b).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn involution_properties() {
        let q = 0.3;
        let id = HeckeElement::identity(1, 4).unwrap();
        assert_eq!(id.involution().weights, id.weights);
        let t = table(4).unwrap();
        for i in 0..t.size {
            for j in 0..t.size {
                let a = HeckeElement::basis(&Permutation::from_offsets(1, t.images(i))).unwrap();
                let b = HeckeElement::basis(&Permutation::from_offsets(1, t.images(j))).unwrap();
                let lhs = multiply(&a, &b, q).unwrap().involution();
                let rhs = multiply(&b.involution(), &a.involution(), q).unwrap();
                assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-12);
            }
        }
    }

    #[test]
    fn right_generator_is_a_right_product() {
        let q = 0.45;
        let h = random_probability(1, 5, 4, false);
        for z in 1..5 {
            let mut ts = Permutation::identity(1, 5);
            ts.swap_sites(z);
            let expected = multiply(&h, &HeckeElement::basis(&ts).unwrap(), q).unwrap();
            assert!(
                h.apply_generator_right(z, q)
                    .unwrap()
                    .max_abs_diff(&expected)
                    .unwrap()
                    < 1e-14
            );
        }
    }

    #[test]
    fn mallows_weights_match_the_stationary_module() {
        let q = 0.4;
        let m = mallows_element(1, 4, q).unwrap();
        for (w, c) in m.terms() {
            assert!((c - crate::stationary::mallows_pmf(w.images(), q).unwrap()).abs() < 1e-15);
        }
        assert!(m.is_probability(1e-12));
        assert_eq!(mallows_element(3, 3, q).unwrap().weights, vec![1.0]);
    }

    #[test]
    fn mallows_absorbs_probability_elements() {
        for n in 2..=5i64 {
            for &q in &[0.0, 0.5, 0.9] {
                let m = mallows_element(1, n, q).unwrap();
                for seed in 0..10 {
                    let h = random_probability(1, n, seed, seed % 2 == 1);
                    assert!(multiply(&h, &m, q).unwrap().l1_diff(&m).unwrap() <= 1e-12);
                    assert!(multiply(&m, &h, q).unwrap().l1_diff(&m).unwrap() <= 1e-12);
                }
                for z in 1..n {
                    assert!(m.apply_generator(z, q).unwrap().max_abs_diff(&m).unwrap() <= 1e-13);
                }
            }
        }
    }

    #[test]
    fn rearrangement_fast_path_agrees_with_product() {
        let q = 0.55;
        let h = random_probability(-2, 3, 17, false);
        for (a, b) in [(-2, 3), (-2, 0), (0, 2), (1, 1)] {
            let m = mallows_element_on(-2, 3, a, b, q).unwrap();
            let slow = multiply(&m, &h, q).unwrap();
            let fast = mallows_left_rearrange(a, b, &h, q).unwrap();
            assert!(slow.max_abs_diff(&fast).unwrap() < 1e-14, "[{a};{b}]");
        }
    }

    #[test]
    fn rearrangement_is_the_equilibration_sampler() {
        let q = 0.5;
        let start = perm(1, &[3, 1, 4, 2]);
        let exact = mallows_left_rearrange(2, 4, &HeckeElement::basis(&start).unwrap(), q).unwrap();
        let mut rng = rng_from(21);
        let reps = 60_000;
        let mut counts = std::collections::HashMap::new();
        for _ in 0..reps {
            let mut c = crate::lattice::ColoredConfig::from(&start);
            crate::stationary::q_equilibrate_colored(&mut c, 2, 4, q, &mut rng).unwrap();
            *counts.entry(c.colors().to_vec()).or_insert(0usize) += 1;
        }
        for (w, p) in exact.terms() {
            let f = *counts.get(w.images()).unwrap_or(&0) as f64 / reps as f64;
            let se = (p * (1.0 - p) / reps as f64).sqrt();
            assert!((f - p).abs() < 5.0 * se, "{w:?}");
        }
    }

    proptest! {
        #[test]
        fn involution_is_involutive(seed in 0u64..10_000) {
            let h = random_probability(0, 3, seed, false);
            prop_assert_eq!(h.involution().involution().weights, h.weights);
        }
    }
}
