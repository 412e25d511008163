//! The finite chain on `Omega^{N,k}`: all configurations of `k` particles on
//! `[1;N]`, with the exact generator and its transition semigroup computed by
//! uniformization.

use super::SimulationParams;
use crate::error::{invalid, Error, Result};
use crate::lattice::{Cell, SegmentConfig};

pub const DEFAULT_STATE_CAP: u64 = 1 << 20;

/// Poisson(`lambda`) weights `w_0..=w_M`, with `M` the first index past the
/// mean whose tail mass is at most `eps`.
pub fn poisson_weights(lambda: f64, eps: f64) -> Vec<f64> {
    if lambda <= 0.0 {
        return vec![1.0];
    }
    let ln_l = lambda.ln();
    let mut log_w = -lambda;
    let mut out = vec![log_w.exp()];
    let mut m = 0usize;
    loop {
        m += 1;
        log_w += ln_l - (m as f64).ln();
        out.push(log_w.exp());
        let next = log_w + ln_l - ((m + 1) as f64).ln();
        if (m as f64) > lambda && next.exp() / (1.0 - lambda / (m + 2) as f64) <= eps {
            return out;
        }
    }
}

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

#[derive(Clone, Debug)]
pub struct SegmentChain {
    n: usize,
    k: usize,
    params: SimulationParams,
    /// Bit `i - 1` set when site `i` holds a particle; sorted.
    states: Vec<u64>,
    offsets: Vec<usize>,
    moves: Vec<(usize, f64)>,
    exit: Vec<f64>,
}

impl SegmentChain {
    pub fn new(n: usize, k: usize, params: SimulationParams, cap: u64) -> Result<Self> {
        if n == 0 || n > 62 || k > n {
            return invalid(format!(
                "need 0 <= k <= N and 1 <= N <= 62, got N = {n}, k = {k}"
            ));
        }
        let size = binomial(n, k);
        if size > cap {
            return Err(Error::CapExceeded { size, cap });
        }
        let mut states = Vec::with_capacity(size as usize);
        let full: u64 = (1u64 << n) - 1;
        if k == 0 {
            states.push(0);
        } else {
            // Gosper's hack
            let mut x: u64 = (1u64 << k) - 1;
            while x <= full {
                states.push(x);
                let c = x & x.wrapping_neg();
                let r = x + c;
                x = (((r ^ x) >> 2) / c) | r;
            }
        }
        let (p, q) = (params.p(), params.q());
        let mut offsets = vec![0];
        let mut moves = Vec::new();
        let mut exit = Vec::with_capacity(states.len());
        for &s in &states {
            let mut out = 0.0;
            for z in 0..n - 1 {
                let a = (s >> z) & 1;
                let b = (s >> (z + 1)) & 1;
                if a == b {
                    continue;
                }
                let rate = if a == 1 { p } else { q };
                if rate == 0.0 {
                    continue;
                }
                let t = s ^ (0b11 << z);
                let j = states
                    .binary_search(&t)
                    .expect("particle number is conserved");
                moves.push((j, rate));
                out += rate;
            }
            exit.push(out);
            offsets.push(moves.len());
        }
        Ok(Self {
            n,
            k,
            params,
            states,
            offsets,
            moves,
            exit,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn params(&self) -> SimulationParams {
        self.params
    }

    pub fn bits(&self, idx: usize) -> u64 {
        self.states[idx]
    }

    pub fn state(&self, idx: usize) -> SegmentConfig {
        let s = self.states[idx];
        let cells = (0..self.n)
            .map(|i| {
                if (s >> i) & 1 == 1 {
                    Cell::Particle
                } else {
                    Cell::Hole
                }
            })
            .collect();
        SegmentConfig::new(1, cells).expect("nonempty")
    }

    pub fn index_of(&self, c: &SegmentConfig) -> Option<usize> {
        if c.len() != self.n {
            return None;
        }
        let bits = c
            .cells()
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, c)| acc | ((c.is_particle() as u64) << i));
        self.states.binary_search(&bits).ok()
    }

    /// `mu L` for a row vector `mu`.
    pub fn apply_generator(&self, mu: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = mu.iter().zip(&self.exit).map(|(m, e)| -m * e).collect();
        for (i, &m) in mu.iter().enumerate() {
            for &(j, r) in &self.moves[self.offsets[i]..self.offsets[i + 1]] {
                out[j] += m * r;
            }
        }
        out
    }

    fn uniform_rate(&self) -> f64 {
        (self.params.p() * (self.n.saturating_sub(1)) as f64).max(1e-300)
    }

    fn uniform_step(&self, v: &[f64], out: &mut [f64], lambda: f64) {
        for (o, (x, e)) in out.iter_mut().zip(v.iter().zip(&self.exit)) {
            *o = x * (1.0 - e / lambda);
        }
        for (i, &x) in v.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for &(j, r) in &self.moves[self.offsets[i]..self.offsets[i + 1]] {
                out[j] += x * r / lambda;
            }
        }
    }

    /// Laws at each of `times` when started from `init`, with Poisson
    /// truncation error at most `eps` per time.
    pub fn transient(&self, init: &[f64], times: &[f64], eps: f64) -> Result<Vec<Vec<f64>>> {
        if init.len() != self.len() {
            return invalid(format!(
                "initial law has {} entries, state space has {}",
                init.len(),
                self.len()
            ));
        }
        if times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
            return invalid("times must be finite and nonnegative");
        }
        let lambda = self.uniform_rate();
        let weights: Vec<Vec<f64>> = times
            .iter()
            .map(|t| poisson_weights(lambda * t, eps))
            .collect();
        let steps = weights.iter().map(Vec::len).max().unwrap_or(0);
        let mut acc = vec![vec![0.0; self.len()]; times.len()];
        let mut v = init.to_vec();
        let mut next = vec![0.0; self.len()];
        for m in 0..steps {
            for (a, w) in acc.iter_mut().zip(&weights) {
                if let Some(&wm) = w.get(m) {
                    for (x, y) in a.iter_mut().zip(&v) {
                        *x += wm * y;
                    }
                }
            }
            self.uniform_step(&v, &mut next, lambda);
            std::mem::swap(&mut v, &mut next);
        }
        Ok(acc)
    }

    pub fn point_mass(&self, c: &SegmentConfig) -> Result<Vec<f64>> {
        let idx = self.index_of(c).ok_or_else(|| {
            Error::DomainMismatch(format!("{c} is not in Omega^{{{},{}}}", self.n, self.k))
        })?;
        let mut v = vec![0.0; self.len()];
        v[idx] = 1.0;
        Ok(v)
    }
}
