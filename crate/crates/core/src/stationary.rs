//! Mallows measures and the stationary laws of the segment dynamics.
//!
//! The Mallows measure on `S_n` gives `w` mass `Q^(n(n-1)/2 - l(w)) * Z_n`
//! with `l` the inversion number, so the reversal is the most likely
//! arrangement. Projecting colours `<= k` to particles gives the product form
//! `pi(xi) = Q^(#{particle left of hole}) / [N choose k]_Q`.

use rand::Rng;

use crate::dynamics::{SegmentChain, SimulationParams};
use crate::error::{invalid, Error, Result};
use crate::lattice::{Cell, ColoredConfig, Lattice, LineConfig, SegmentConfig, TwoSpeciesConfig};
use crate::rng::{replica_rng, SimRng};

fn check_ratio(q: f64) -> Result<()> {
    if !(0.0..1.0).contains(&q) {
        return invalid(format!("Q = {q} must lie in [0, 1)"));
    }
    Ok(())
}

/// `Z_n = prod_{i=1..n} (1 - Q) / (1 - Q^i)`.
pub fn normalizer(n: usize, q: f64) -> f64 {
    (1..=n)
        .map(|i| (1.0 - q) / (1.0 - q.powi(i as i32)))
        .product()
}

/// Number of pairs `i < j` with `w[i] > w[j]`.
pub fn inversions<V: Ord>(w: &[V]) -> usize {
    let mut count = 0;
    for i in 0..w.len() {
        for j in i + 1..w.len() {
            if w[i] > w[j] {
                count += 1;
            }
        }
    }
    count
}

/// Mallows mass of the arrangement `w` (any distinct ordered values).
pub fn mallows_pmf<V: Ord>(w: &[V], q: f64) -> Result<f64> {
    check_ratio(q)?;
    let n = w.len();
    let top = n * n.saturating_sub(1) / 2;
    let l = inversions(w);
    Ok(q.powi((top - l) as i32) * normalizer(n, q))
}

/// Sample a Mallows permutation of `0..n` as an image sequence.
///
/// Values are inserted in increasing order; value `m` lands with `j` smaller
/// values to its left with probability proportional to `Q^j`.
pub fn mallows_sample(n: usize, q: f64, rng: &mut SimRng) -> Vec<usize> {
    let mut w: Vec<usize> = Vec::with_capacity(n);
    let ln_q = q.ln();
    for m in 0..n {
        let j = if q == 0.0 {
            0
        } else {
            let u: f64 = rng.gen();
            let mass = 1.0 - q.powi(m as i32 + 1);
            let j = ((1.0 - u * mass).ln() / ln_q).floor() as usize;
            j.min(m)
        };
        w.insert(j, m);
    }
    w
}

/// Gaussian-binomial coefficient `[n choose k]_Q`.
pub fn q_binomial(n: usize, k: usize, q: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    // row[j] = [i choose j]_Q
    let mut row = vec![0.0; k + 1];
    row[0] = 1.0;
    for i in 1..=n {
        for j in (1..=k.min(i)).rev() {
            // [i choose j] = [i-1 choose j-1] + Q^j [i-1 choose j]
            row[j] = row[j - 1] + q.powi(j as i32) * row[j];
        }
    }
    row[k]
}

/// Number of (particle, hole) pairs with the particle on the left.
pub fn particle_hole_pairs(cells: &[Cell]) -> usize {
    let mut particles = 0;
    let mut pairs = 0;
    for c in cells {
        if c.is_particle() {
            particles += 1;
        } else {
            pairs += particles;
        }
    }
    pairs
}

/// Stationary mass of `c` among configurations with the same window and
/// particle count.
pub fn stationary_pmf_segment(c: &SegmentConfig, q: f64) -> Result<f64> {
    check_ratio(q)?;
    let pairs = particle_hole_pairs(c.cells());
    Ok(q.powi(pairs as i32) / q_binomial(c.len(), c.particle_count(), q))
}

/// The stationary law on `Omega^{N,k}` in the state order of `chain`.
pub fn stationary_law(chain: &SegmentChain) -> Result<Vec<f64>> {
    let q = chain.params().ratio();
    (0..chain.len())
        .map(|i| stationary_pmf_segment(&chain.state(i), q))
        .collect()
}

/// `|| pi L ||_inf` for the product-form law on `Omega^{N,k}`.
pub fn generator_residual(n: usize, k: usize, params: SimulationParams) -> Result<f64> {
    let chain = SegmentChain::new(n, k, params, u64::MAX)?;
    let pi = stationary_law(&chain)?;
    Ok(chain
        .apply_generator(&pi)
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs())))
}

/// Sample from the stationary law on `Omega^{N,k}` over `[1;N]`.
pub fn sample_stationary_segment(
    n: usize,
    k: usize,
    q: f64,
    rng: &mut SimRng,
) -> Result<SegmentConfig> {
    check_ratio(q)?;
    if k > n || n == 0 {
        return invalid(format!("need 0 <= k <= N and N >= 1, got N = {n}, k = {k}"));
    }
    let w = mallows_sample(n, q, rng);
    let cells = w
        .iter()
        .map(|&c| if c < k { Cell::Particle } else { Cell::Hole })
        .collect();
    SegmentConfig::new(1, cells)
}

/// Rearrange `vals` by a Mallows permutation of their priority ranks.
///
/// After sorting by priority the value of rank `v(i)` is put at offset `i`,
/// with `v` Mallows distributed. Equal values behave as a projection.
pub fn q_equilibrate_slice<V: Ord + Copy>(vals: &mut [V], q: f64, rng: &mut SimRng) {
    let mut sorted = vals.to_vec();
    sorted.sort();
    let v = mallows_sample(vals.len(), q, rng);
    for (slot, &rank) in vals.iter_mut().zip(&v) {
        *slot = sorted[rank];
    }
}

fn range_offsets(lo: i64, hi: i64, wlo: i64, whi: i64) -> Result<(usize, usize)> {
    if lo > hi {
        return invalid(format!("empty segment [{lo};{hi}]"));
    }
    if lo < wlo || hi > whi {
        return Err(Error::DomainMismatch(format!(
            "segment [{lo};{hi}] outside window [{wlo};{whi}]"
        )));
    }
    Ok(((lo - wlo) as usize, (hi - wlo) as usize))
}

pub fn q_equilibrate_colored(
    c: &mut ColoredConfig,
    lo: i64,
    hi: i64,
    q: f64,
    rng: &mut SimRng,
) -> Result<()> {
    check_ratio(q)?;
    let (a, b) = range_offsets(lo, hi, c.lo(), c.hi())?;
    q_equilibrate_slice(&mut c.colors_mut()[a..=b], q, rng);
    Ok(())
}

pub fn q_equilibrate_segment(
    c: &mut SegmentConfig,
    lo: i64,
    hi: i64,
    q: f64,
    rng: &mut SimRng,
) -> Result<()> {
    check_ratio(q)?;
    let (a, b) = range_offsets(lo, hi, c.lo(), c.hi())?;
    q_equilibrate_slice(&mut c.cells_mut()[a..=b], q, rng);
    Ok(())
}

pub fn q_equilibrate_two_species(
    c: &mut TwoSpeciesConfig,
    lo: i64,
    hi: i64,
    q: f64,
    rng: &mut SimRng,
) -> Result<()> {
    check_ratio(q)?;
    let (wlo, whi) = c.window();
    let (a, b) = range_offsets(lo, hi, wlo, whi)?;
    q_equilibrate_slice(&mut c.species_mut()[a..=b], q, rng);
    Ok(())
}

/// Line configurations are materialised over `[lo;hi]` first.
pub fn q_equilibrate_line(
    c: &mut LineConfig,
    lo: i64,
    hi: i64,
    q: f64,
    rng: &mut SimRng,
) -> Result<()> {
    check_ratio(q)?;
    if lo > hi {
        return invalid(format!("empty segment [{lo};{hi}]"));
    }
    c.materialize(lo, hi);
    let mut vals: Vec<Cell> = (lo..=hi).map(|i| c.get(i)).collect();
    q_equilibrate_slice(&mut vals, q, rng);
    for (i, v) in (lo..=hi).zip(vals) {
        c.set(i, v);
    }
    Ok(())
}

/// `pi(A_N(l))` exactly, where `A_N(l)` is the event that the leftmost
/// particle sits left of `N - k - l`.
pub fn stationary_tail_a(n: usize, k: usize, l: usize, q: f64) -> Result<f64> {
    check_ratio(q)?;
    if k == 0 || k > n {
        return invalid(format!("need 1 <= k <= N, got N = {n}, k = {k}"));
    }
    let inside = (k + l + 1).min(n);
    Ok((1.0 - q_binomial(inside, k, q) / q_binomial(n, k, q)).max(0.0))
}

/// Whether the configuration on `[1;N]` with `k` particles lies in `A_N(l)`.
pub fn in_tail_event(c: &SegmentConfig, k: usize, l: usize) -> bool {
    let threshold = c.lo() - 1 + c.len() as i64 - k as i64 - l as i64;
    match c.particle_positions().last() {
        Some(&leftmost) => leftmost < threshold,
        None => false,
    }
}

/// Monte Carlo estimate of `pi(A_N(l))` with its standard error.
pub fn stationary_tail_a_mc(
    n: usize,
    k: usize,
    l: usize,
    q: f64,
    reps: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if reps == 0 {
        return invalid("need at least one replica");
    }
    let mut hits = 0usize;
    for r in 0..reps {
        let mut rng = replica_rng(seed, r as u64);
        let c = sample_stationary_segment(n, k, q, &mut rng)?;
        hits += in_tail_event(&c, k, l) as usize;
    }
    let p = hits as f64 / reps as f64;
    Ok((p, (p * (1.0 - p) / reps as f64).sqrt()))
}
