use serde::{Deserialize, Serialize};

use super::{
    check_reps, grid_from_c, predicted_cdf, proportion, replicas, time_order, GridPoint,
    ProfilePoint,
};
use crate::dynamics::{LineState, SimulationParams};
use crate::error::{invalid, Result};
use crate::lattice::{
    leftmost_particle, make_named_config, rightmost_hole, ConfigName, LineConfig, Site,
};
use crate::tracy_widom::{corollary_rescale, QuadratureSpec, RescaleParams};

/// Estimate of `P(B_N(c))` next to `F_GUE(c f(alpha))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventBPoint {
    pub c: f64,
    pub t: f64,
    pub estimate: f64,
    pub se: f64,
    pub predicted: f64,
}

fn site_gt(s: Site, x: f64) -> bool {
    match s {
        Site::At(i) => i as f64 > x,
        Site::PosInfinity => true,
        Site::NegInfinity => false,
    }
}

fn site_le(s: Site, y: f64) -> bool {
    match s {
        Site::At(i) => i as f64 <= y,
        Site::PosInfinity => false,
        Site::NegInfinity => true,
    }
}

/// Run one line trajectory through the grid times, calling `probe` at each.
fn sample_path<T>(
    start: &LineConfig,
    params: SimulationParams,
    grid: &[GridPoint],
    order: &[usize],
    rng: &mut crate::rng::SimRng,
    probe: impl Fn(&LineConfig, usize) -> T,
) -> Vec<Option<T>> {
    let mut state = LineState::from_config(start);
    let mut now = 0.0;
    let mut out: Vec<Option<T>> = (0..grid.len()).map(|_| None).collect();
    for &i in order {
        state.run(rng, params, grid[i].t - now, |_, _| false);
        now = grid[i].t;
        out[i] = Some(probe(&state.to_config(), i));
    }
    out
}

/// Monte Carlo estimate of `P(L(zeta^0_t) > N-k-N^w, R(zeta^0_t) <= N-k+N^w)`
/// at `t = g(k, c)`.
#[allow(clippy::too_many_arguments)]
pub fn event_b_mc(
    n: usize,
    k: usize,
    params: SimulationParams,
    cs: &[f64],
    window_exponent: f64,
    reps: usize,
    seed: u64,
) -> Result<Vec<EventBPoint>> {
    check_reps(reps)?;
    if !(0.0..1.0).contains(&window_exponent) {
        return invalid(format!(
            "window exponent {window_exponent} must lie in [0, 1)"
        ));
    }
    let grid = grid_from_c(n, k, params, cs)?;
    let start = make_named_config(ConfigName::Zeta0, n, k)?
        .into_line()
        .expect("line configuration");
    let width = (n as f64).powf(window_exponent);
    let centre = (n - k) as f64;
    let order = time_order(&grid);
    let flags = replicas(reps, seed, |rng, _| {
        Ok(sample_path(&start, params, &grid, &order, rng, |c, _| {
            site_gt(leftmost_particle(c), centre - width)
                && site_le(rightmost_hole(c), centre + width)
        }))
    })?;
    let quad = QuadratureSpec::default();
    let alpha = k as f64 / n as f64;
    grid.iter()
        .enumerate()
        .map(|(i, g)| {
            let hits = flags.iter().filter(|f| f[i] == Some(true)).count();
            let (estimate, se) = proportion(hits, reps);
            Ok(EventBPoint {
                c: g.c,
                t: g.t,
                estimate,
                se,
                predicted: predicted_cdf(g.c, alpha, &quad)?,
            })
        })
        .collect()
}

/// Monte Carlo estimate of `P(x^step_{k + c'N^kappa}(g(k, c)) <= N - 2k + c''N^kappa')`
/// for each `c`, next to `1 - F_GUE(c f(k/N))`. The particle index is rounded
/// to the nearest label `>= 1`; `rescale.c` is ignored in favour of `cs`.
#[allow(clippy::too_many_arguments)]
pub fn step_fluct_mc(
    n: usize,
    k: usize,
    params: SimulationParams,
    cs: &[f64],
    rescale: &RescaleParams,
    reps: usize,
    seed: u64,
) -> Result<Vec<ProfilePoint>> {
    check_reps(reps)?;
    let grid = grid_from_c(n, k, params, cs)?;
    let quad = QuadratureSpec::default();
    let events = cs
        .iter()
        .map(|&c| {
            corollary_rescale(
                n,
                k,
                params.p(),
                params.q(),
                &RescaleParams { c, ..*rescale },
                &quad,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let labels: Vec<usize> = events
        .iter()
        .map(|e| e.particle_index.round().max(1.0) as usize)
        .collect();
    let start = make_named_config(ConfigName::Step, n, k)?
        .into_line()
        .expect("line configuration");
    let order = time_order(&grid);
    let flags = replicas(reps, seed, |rng, _| {
        Ok(sample_path(&start, params, &grid, &order, rng, |c, i| {
            let x = c
                .particle_from_right(labels[i])
                .expect("step data has particles to the left");
            x as f64 <= events[i].threshold
        }))
    })?;
    Ok(grid
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let hits = flags.iter().filter(|f| f[i] == Some(true)).count();
            let (empirical, se) = proportion(hits, reps);
            let predicted = events[i].predicted;
            ProfilePoint {
                c: g.c,
                t: g.t,
                empirical,
                se,
                predicted,
                gap: empirical - predicted,
            }
        })
        .collect())
}

/// `max |empirical - predicted|` over the profile.
pub fn kolmogorov_distance(points: &[ProfilePoint]) -> f64 {
    points.iter().map(|p| p.gap.abs()).fold(0.0, f64::max)
}
