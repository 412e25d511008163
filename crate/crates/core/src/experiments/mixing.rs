use serde::{Deserialize, Serialize};

use super::{
    check_reps, predicted_profile, proportion, replicas, run_segment, time_order, GridPoint,
    TvEstimate,
};
use crate::dynamics::{line_hitting_time, HitOutcome, SegmentChain, SimulationParams};
use crate::error::{invalid, Error, Result};
use crate::lattice::{make_named_config, ConfigName, LineConfig, SegmentConfig};
use crate::stationary::{in_tail_event, q_binomial, stationary_law, stationary_tail_a};
use crate::tracy_widom::QuadratureSpec;

/// Default cap on `C(N, k)` for exact curves.
pub const MIXING_STATE_CAP: u64 = 12870;

/// Largest `N` for which the worst initial state is searched exhaustively.
const WORST_MAX_N: usize = 8;

/// Initial state of an exact mixing curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StartMode {
    Xi0,
    Xi1,
    /// Maximum over all initial states.
    Worst,
}

impl std::str::FromStr for StartMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "xi0" => Ok(StartMode::Xi0),
            "xi1" => Ok(StartMode::Xi1),
            "worst" => Ok(StartMode::Worst),
            other => Err(Error::UnknownName(other.to_string())),
        }
    }
}

fn check_nk(n: usize, k: usize) -> Result<()> {
    if k == 0 || k >= n {
        return invalid(format!("need 1 <= k < N, got N = {n}, k = {k}"));
    }
    Ok(())
}

fn segment(name: ConfigName, n: usize, k: usize) -> Result<SegmentConfig> {
    Ok(make_named_config(name, n, k)?
        .into_segment()
        .expect("segment configuration"))
}

fn line(name: ConfigName, n: usize, k: usize) -> Result<LineConfig> {
    Ok(make_named_config(name, n, k)?
        .into_line()
        .expect("line configuration"))
}

fn tv(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Exact `||P_t - pi||_TV` by uniformization over `Omega^{N,k}`.
pub fn exact_mixing_curve(
    n: usize,
    k: usize,
    params: SimulationParams,
    grid: &[GridPoint],
    from: StartMode,
    cap: u64,
) -> Result<Vec<TvEstimate>> {
    check_nk(n, k)?;
    let size = q_binomial(n, k, 1.0).round() as u64;
    if size > cap {
        return Err(Error::CapExceeded { size, cap });
    }
    if from == StartMode::Worst && n > WORST_MAX_N {
        return invalid(format!(
            "worst-case search needs N <= {WORST_MAX_N}, got {n}"
        ));
    }
    let chain = SegmentChain::new(n, k, params, cap)?;
    let pi = stationary_law(&chain)?;
    let times: Vec<f64> = grid.iter().map(|g| g.t).collect();
    let starts: Vec<Vec<f64>> = match from {
        StartMode::Xi0 => vec![chain.point_mass(&segment(ConfigName::Xi0, n, k)?)?],
        StartMode::Xi1 => vec![chain.point_mass(&segment(ConfigName::Xi1, n, k)?)?],
        StartMode::Worst => (0..chain.len())
            .map(|i| chain.point_mass(&chain.state(i)))
            .collect::<Result<_>>()?,
    };
    let mut best = vec![0.0f64; grid.len()];
    for init in &starts {
        let laws = chain.transient(init, &times, 1e-15)?;
        for (b, law) in best.iter_mut().zip(&laws) {
            *b = b.max(tv(law, &pi));
        }
    }
    let quad = QuadratureSpec::default();
    let alpha = k as f64 / n as f64;
    grid.iter()
        .zip(best)
        .map(|(&g, d)| {
            let mut e = TvEstimate::at(g, predicted_profile(g.c, alpha, &quad)?);
            e.exact = Some(d);
            Ok(e)
        })
        .collect()
}

/// Monte Carlo estimate of `P(H > t)` where `H` is the time the line process
/// started from `zeta^0` first equals `zeta^1`.
pub fn tv_upper_bound_mc(
    n: usize,
    k: usize,
    params: SimulationParams,
    grid: &[GridPoint],
    reps: usize,
    seed: u64,
) -> Result<Vec<TvEstimate>> {
    check_nk(n, k)?;
    check_reps(reps)?;
    let start = line(ConfigName::Zeta0, n, k)?;
    let target = line(ConfigName::Zeta1, n, k)?;
    let cap = grid.iter().map(|g| g.t).fold(0.0, f64::max);
    let hits = replicas(reps, seed, |rng, _| {
        line_hitting_time(&start, &target, params, rng, cap)
    })?;
    let censored = hits.iter().filter(|h| **h == HitOutcome::Timeout).count();
    let quad = QuadratureSpec::default();
    let alpha = k as f64 / n as f64;
    grid.iter()
        .map(|&g| {
            let above = hits.iter().filter(|h| h.exceeds(g.t)).count();
            let (m, se) = proportion(above, reps);
            let mut e = TvEstimate::at(g, predicted_profile(g.c, alpha, &quad)?);
            e.upper = Some(m);
            e.upper_se = Some(se);
            e.reps = reps;
            e.seed = seed;
            e.censored = censored;
            Ok(e)
        })
        .collect()
}

/// `ceil(N^exponent)`, clamped to `[1, N - k - 1]`.
pub fn tail_length(n: usize, k: usize, exponent: f64) -> Result<usize> {
    check_nk(n, k)?;
    if n - k < 2 {
        return invalid(format!(
            "the tail event needs N - k >= 2, got N = {n}, k = {k}"
        ));
    }
    let l = (n as f64).powf(exponent).ceil() as usize;
    Ok(l.clamp(1, n - k - 1))
}

/// Monte Carlo estimate of `P(xi^0_t in A_N(l)) - pi(A_N(l))`, clamped at 0.
pub fn tv_lower_bound_mc(
    n: usize,
    k: usize,
    params: SimulationParams,
    grid: &[GridPoint],
    l: usize,
    reps: usize,
    seed: u64,
) -> Result<Vec<TvEstimate>> {
    check_nk(n, k)?;
    check_reps(reps)?;
    if l == 0 || l + k + 1 > n {
        return invalid(format!("need 1 <= l <= N - k - 1, got l = {l}"));
    }
    let start = segment(ConfigName::Xi0, n, k)?;
    let pi_a = stationary_tail_a(n, k, l, params.ratio())?;
    let order = time_order(grid);
    let inside = replicas(reps, seed, |rng, _| {
        let mut c = start.clone();
        let mut now = 0.0;
        let mut flags = vec![false; grid.len()];
        for &i in &order {
            run_segment(&mut c, params, grid[i].t - now, rng);
            now = grid[i].t;
            flags[i] = in_tail_event(&c, k, l);
        }
        Ok(flags)
    })?;
    let quad = QuadratureSpec::default();
    let alpha = k as f64 / n as f64;
    grid.iter()
        .enumerate()
        .map(|(i, &g)| {
            let hits = inside.iter().filter(|f| f[i]).count();
            let (m, se) = proportion(hits, reps);
            let mut e = TvEstimate::at(g, predicted_profile(g.c, alpha, &quad)?);
            e.lower = Some((m - pi_a).max(0.0));
            e.lower_se = Some(se);
            e.reps = reps;
            e.seed = seed;
            Ok(e)
        })
        .collect()
}
