use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::ColoredConfig;

/// Largest `n` for which permutation tables are built.
pub const MAX_TABLE_N: usize = 8;

/// A bijection of `[lo;hi]`, stored as its image sequence.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Permutation {
    lo: i64,
    images: Vec<i64>,
}

impl Permutation {
    pub fn new(lo: i64, images: Vec<i64>) -> Result<Self> {
        let n = images.len() as i64;
        let mut seen = vec![false; images.len()];
        for &v in &images {
            let off = v - lo;
            if off < 0 || off >= n || seen[off as usize] {
                return Err(Error::InvalidParameter(format!(
                    "{images:?} is not a permutation of [{lo};{}]",
                    lo + n - 1
                )));
            }
            seen[off as usize] = true;
        }
        Ok(Self { lo, images })
    }

    pub fn identity(lo: i64, hi: i64) -> Self {
        Self {
            lo,
            images: (lo..=hi).collect(),
        }
    }

    pub fn reversal(lo: i64, hi: i64) -> Self {
        Self {
            lo,
            images: (lo..=hi).rev().collect(),
        }
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.images.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[i64] {
        &self.images
    }

    pub fn image(&self, i: i64) -> i64 {
        self.images[(i - self.lo) as usize]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.images.len()];
        for (i, &v) in self.images.iter().enumerate() {
            inv[(v - self.lo) as usize] = self.lo + i as i64;
        }
        Self {
            lo: self.lo,
            images: inv,
        }
    }

    pub fn inversions(&self) -> usize {
        crate::stationary::inversions(&self.images)
    }

    /// Swap the entries at sites `z` and `z + 1`.
    pub fn swap_sites(&mut self, z: i64) {
        let off = (z - self.lo) as usize;
        self.images.swap(off, off + 1);
    }

    /// A reduced word `z_1, ..., z_l` with `T_w = T_{z_1} ... T_{z_l}` under left
    /// multiplication. Peels off the leftmost descent, or the rightmost one
    /// when `rightmost` is set.
    pub fn reduced_word(&self, rightmost: bool) -> Vec<i64> {
        let mut cur = self.images.clone();
        let mut word = Vec::new();
        loop {
            let mut descents = (0..cur.len().saturating_sub(1)).filter(|&i| cur[i] > cur[i + 1]);
            let d = if rightmost {
                descents.next_back()
            } else {
                descents.next()
            };
            match d {
                Some(i) => {
                    word.push(self.lo + i as i64);
                    cur.swap(i, i + 1);
                }
                None => return word,
            }
        }
    }

    pub(crate) fn offsets(&self) -> Vec<u8> {
        self.images.iter().map(|&v| (v - self.lo) as u8).collect()
    }

    pub(crate) fn from_offsets(lo: i64, offs: &[u8]) -> Self {
        Self {
            lo,
            images: offs.iter().map(|&o| lo + o as i64).collect(),
        }
    }
}

impl From<&Permutation> for ColoredConfig {
    fn from(w: &Permutation) -> Self {
        ColoredConfig::new(w.lo, w.images.clone())
            .expect("a permutation is a coloured configuration")
    }
}

impl TryFrom<&ColoredConfig> for Permutation {
    type Error = Error;
    fn try_from(c: &ColoredConfig) -> Result<Self> {
        use crate::lattice::Lattice;
        Permutation::new(c.lo(), c.colors().to_vec())
    }
}

/// Lexicographic rank of a permutation of `0..n`.
pub(crate) fn rank(offs: &[u8]) -> usize {
    let n = offs.len();
    let mut r = 0;
    for i in 0..n {
        let smaller = offs[i + 1..].iter().filter(|&&x| x < offs[i]).count();
        r = r * (n - i) + smaller;
    }
    r
}

fn unrank(mut r: usize, n: usize) -> Vec<u8> {
    let mut digits = vec![0usize; n];
    for i in (0..n).rev() {
        let base = n - i;
        digits[i] = r % base;
        r /= base;
    }
    let mut pool: Vec<u8> = (0..n as u8).collect();
    digits.iter().map(|&d| pool.remove(d)).collect()
}

pub(crate) fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Multiplication tables for `S_n`, indexed by lexicographic rank.
#[derive(Debug)]
pub(crate) struct PermTable {
    pub n: usize,
    pub size: usize,
    images: Vec<u8>,
    /// `left[z][i]`: rank of the permutation with entries `z, z+1` swapped.
    pub left: Vec<Vec<u32>>,
    /// `left_up[z][i]`: that swap adds an inversion.
    pub left_up: Vec<Vec<bool>>,
    /// `right[z][i]`: rank with values `z, z+1` swapped.
    pub right: Vec<Vec<u32>>,
    pub right_up: Vec<Vec<bool>>,
    pub inverse: Vec<u32>,
    pub length: Vec<u32>,
    /// Leftmost descent position, `n` for the identity.
    pub first_descent: Vec<u8>,
}

impl PermTable {
    fn build(n: usize) -> Self {
        let size = factorial(n) as usize;
        let mut images = Vec::with_capacity(size * n);
        for r in 0..size {
            images.extend(unrank(r, n));
        }
        let bonds = n.saturating_sub(1);
        let mut left = vec![vec![0u32; size]; bonds];
        let mut left_up = vec![vec![false; size]; bonds];
        let mut right = vec![vec![0u32; size]; bonds];
        let mut right_up = vec![vec![false; size]; bonds];
        let mut inverse = vec![0u32; size];
        let mut length = vec![0u32; size];
        let mut first_descent = vec![n as u8; size];
        let mut buf = vec![0u8; n];
        let mut pos = vec![0u8; n];
        for r in 0..size {
            let w = &images[r * n..(r + 1) * n];
            for (i, &v) in w.iter().enumerate() {
                pos[v as usize] = i as u8;
            }
            inverse[r] = rank(&pos) as u32;
            length[r] = crate::stationary::inversions(w) as u32;
            if let Some(d) = (0..bonds).find(|&z| w[z] > w[z + 1]) {
                first_descent[r] = d as u8;
            }
            for z in 0..bonds {
                buf.copy_from_slice(w);
                buf.swap(z, z + 1);
                left[z][r] = rank(&buf) as u32;
                left_up[z][r] = w[z] < w[z + 1];
                buf.copy_from_slice(w);
                let (a, b) = (pos[z] as usize, pos[z + 1] as usize);
                buf.swap(a, b);
                right[z][r] = rank(&buf) as u32;
                right_up[z][r] = a < b;
            }
        }
        Self {
            n,
            size,
            images,
            left,
            left_up,
            right,
            right_up,
            inverse,
            length,
            first_descent,
        }
    }

    pub fn images(&self, r: usize) -> &[u8] {
        &self.images[r * self.n..(r + 1) * self.n]
    }
}

/// Shared tables for `S_n`, built once per `n`.
pub(crate) fn table(n: usize) -> Result<Arc<PermTable>> {
    if n > MAX_TABLE_N {
        return Err(Error::CapExceeded {
            size: factorial(n.min(20)),
            cap: factorial(MAX_TABLE_N),
        });
    }
    static TABLES: OnceLock<Mutex<HashMap<usize, Arc<PermTable>>>> = OnceLock::new();
    let map = TABLES.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = map.lock().unwrap_or_else(|e| e.into_inner());
    Ok(guard
        .entry(n)
        .or_insert_with(|| Arc::new(PermTable::build(n)))
        .clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inversion_examples() {
        assert_eq!(Permutation::identity(1, 5).inversions(), 0);
        assert_eq!(Permutation::reversal(1, 6).inversions(), 15);
        assert_eq!(Permutation::new(1, vec![2, 1, 3]).unwrap().inversions(), 1);
        assert!(Permutation::new(1, vec![2, 2, 3]).is_err());
    }

    #[test]
    fn rank_round_trip_and_order() {
        for n in 0..=6 {
            let size = factorial(n) as usize;
            let mut prev: Option<Vec<u8>> = None;
            for r in 0..size {
                let w = unrank(r, n);
                assert_eq!(rank(&w), r);
                if let Some(p) = prev {
                    assert!(p < w);
                }
                prev = Some(w);
            }
        }
    }

    #[test]
    fn table_entries() {
        let t = table(4).unwrap();
        for r in 0..t.size {
            let w = Permutation::from_offsets(1, t.images(r));
            assert_eq!(t.length[r] as usize, w.inversions());
            assert_eq!(
                Permutation::from_offsets(1, t.images(t.inverse[r] as usize)),
                w.inverse()
            );
            for z in 0..3 {
                let l = t.left[z][r] as usize;
                let lw = Permutation::from_offsets(1, t.images(l));
                assert_eq!(t.left_up[z][r], lw.inversions() == w.inversions() + 1);
                let rr = t.right[z][r] as usize;
                assert_eq!(t.right_up[z][r], t.length[rr] == t.length[r] + 1);
                // right multiplication is conjugate to left multiplication by inversion
                assert_eq!(t.inverse[rr], t.left[z][t.inverse[r] as usize]);
            }
        }
    }

    #[test]
    fn reduced_words_rebuild_the_permutation() {
        let t = table(5).unwrap();
        for r in 0..t.size {
            let w = Permutation::from_offsets(0, t.images(r));
            for rightmost in [false, true] {
                let word = w.reduced_word(rightmost);
                assert_eq!(word.len(), w.inversions());
                let mut cur = Permutation::identity(0, 4);
                for &z in word.iter().rev() {
                    cur.swap_sites(z);
                }
                assert_eq!(cur, w);
            }
        }
    }
}
