//! Experiments assembled from the dynamics, the stationary laws and the
//! Tracy-Widom numerics: exact and Monte Carlo mixing curves, fluctuation
//! profiles, the auxiliary-process identity and pathwise checks.
//!
//! Every Monte Carlo estimator draws replica `i` from `replica_rng(seed, i)`
//! and aggregates in replica order, so results do not depend on the number of
//! worker threads.

mod fluct;
mod identity_mc;
mod mixing;
mod pathwise;
mod report;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{should_swap, SimulationParams, RING_RATE};
use crate::error::{invalid, Result};
use crate::lattice::Lattice;
use crate::rng::{replica_rng, SimRng};
use crate::tracy_widom::{f_alpha, f_gue, g_time, QuadratureSpec, F_GUE_MIN_S};

pub use fluct::{event_b_mc, kolmogorov_distance, step_fluct_mc, EventBPoint};
pub use identity_mc::{auxiliary_identity_mc, IdentityMcParams, IdentityMcResult};
pub use mixing::{
    exact_mixing_curve, tail_length, tv_lower_bound_mc, tv_upper_bound_mc, StartMode,
    MIXING_STATE_CAP,
};
pub use pathwise::{pathwise_suite, PathwiseReport};
pub use report::{
    merge_tv, profile_report, write_event_b_csv, write_identity_csv, write_profile_csv,
    write_tv_csv, ExperimentConfig, ProfileReport,
};

/// A point of the cutoff window: `t = g(k, c)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub c: f64,
    pub t: f64,
}

/// Grid points `g(k, c)` for each `c`.
pub fn grid_from_c(
    n: usize,
    k: usize,
    params: SimulationParams,
    cs: &[f64],
) -> Result<Vec<GridPoint>> {
    cs.iter()
        .map(|&c| {
            Ok(GridPoint {
                c,
                t: g_time(n, k, c, params.p(), params.q())?,
            })
        })
        .collect()
}

/// Grid points at the given times, with `c` solved from `t = g(k, c)`.
pub fn grid_from_times(
    n: usize,
    k: usize,
    params: SimulationParams,
    ts: &[f64],
) -> Result<Vec<GridPoint>> {
    let base = g_time(n, k, 0.0, params.p(), params.q())?;
    let slope = (n as f64).cbrt() / params.drift();
    ts.iter()
        .map(|&t| {
            if !(t >= 0.0) || !t.is_finite() {
                return invalid(format!("time {t} must be finite and nonnegative"));
            }
            Ok(GridPoint {
                c: (t - base) / slope,
                t,
            })
        })
        .collect()
}

/// `1 - F_GUE(c f(alpha))`.
pub fn predicted_profile(c: f64, alpha: f64, quad: &QuadratureSpec) -> Result<f64> {
    Ok(1.0 - predicted_cdf(c, alpha, quad)?)
}

/// `F_GUE(c f(alpha))`, taken as 0 left of the documented range.
pub fn predicted_cdf(c: f64, alpha: f64, quad: &QuadratureSpec) -> Result<f64> {
    let s = c * f_alpha(alpha)?;
    if s < F_GUE_MIN_S {
        Ok(0.0)
    } else {
        f_gue(s, quad)
    }
}

/// Upper and lower Monte Carlo bounds on `d(t)` together with the exact value
/// where available.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TvEstimate {
    pub c: f64,
    pub t: f64,
    pub lower: Option<f64>,
    pub lower_se: Option<f64>,
    pub upper: Option<f64>,
    pub upper_se: Option<f64>,
    pub exact: Option<f64>,
    pub predicted: f64,
    pub reps: usize,
    pub seed: u64,
    /// Replicas whose hitting time was not reached by the time cap.
    pub censored: usize,
}

impl TvEstimate {
    fn at(point: GridPoint, predicted: f64) -> Self {
        Self {
            c: point.c,
            t: point.t,
            lower: None,
            lower_se: None,
            upper: None,
            upper_se: None,
            exact: None,
            predicted,
            reps: 0,
            seed: 0,
            censored: 0,
        }
    }
}

/// Empirical probability of the fluctuation event next to its prediction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub c: f64,
    pub t: f64,
    pub empirical: f64,
    pub se: f64,
    pub predicted: f64,
    pub gap: f64,
}

/// Mean and binomial standard error of `hits` successes in `reps` trials.
pub fn proportion(hits: usize, reps: usize) -> (f64, f64) {
    if reps == 0 {
        return (f64::NAN, f64::NAN);
    }
    let p = hits as f64 / reps as f64;
    (p, (p * (1.0 - p) / reps as f64).sqrt())
}

/// Run `f` on every replica in parallel, collecting results in replica order.
pub(crate) fn replicas<T, F>(reps: usize, seed: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut SimRng, usize) -> Result<T> + Sync,
{
    (0..reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = replica_rng(seed, i as u64);
            f(&mut rng, i)
        })
        .collect()
}

/// Run the dynamics on a finite segment for `dt` time units by Gillespie
/// sampling over its bonds.
pub fn run_segment<L: Lattice>(c: &mut L, params: SimulationParams, dt: f64, rng: &mut SimRng) {
    let bonds = c.values().len().saturating_sub(1);
    if bonds == 0 {
        return;
    }
    let p = params.p();
    let rate = RING_RATE * bonds as f64;
    let mut t = 0.0;
    loop {
        let u: f64 = rng.gen();
        t += -(1.0 - u).ln() / rate;
        if t > dt {
            return;
        }
        let i = rng.gen_range(0..bonds);
        let coin: f64 = if p < 1.0 { rng.gen() } else { 0.0 };
        let v = c.values();
        if should_swap(&v[i], &v[i + 1], coin, p) {
            c.swap_offset(i);
        }
    }
}

pub(crate) fn check_reps(reps: usize) -> Result<()> {
    if reps == 0 {
        return invalid("need at least one replica");
    }
    Ok(())
}

/// Indices of `grid` in increasing time order.
fn time_order(grid: &[GridPoint]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| grid[a].t.total_cmp(&grid[b].t));
    order
}
