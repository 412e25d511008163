use serde::{Deserialize, Serialize};

use super::{check_reps, proportion, replicas, run_segment};
use crate::dynamics::SimulationParams;
use crate::error::{invalid, Result};
use crate::hecke::identity_interval;
use crate::lattice::{Cell, Lattice, SegmentConfig, Species, TwoSpeciesConfig};
use crate::stationary::{q_equilibrate_segment, q_equilibrate_two_species};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityMcParams {
    pub s: usize,
    pub r: usize,
    pub m: usize,
    pub t: f64,
    pub x: i64,
    pub y: i64,
    pub reps: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityMcResult {
    pub lhs: f64,
    pub lhs_se: f64,
    pub rhs: f64,
    pub rhs_se: f64,
}

impl IdentityMcResult {
    /// `|lhs - rhs|` in units of the combined standard error.
    pub fn z_score(&self) -> f64 {
        let se = (self.lhs_se.powi(2) + self.rhs_se.powi(2)).sqrt();
        let diff = (self.lhs - self.rhs).abs();
        if se == 0.0 {
            if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            diff / se
        }
    }
}

/// Both sides of the auxiliary-process identity on `[-S-R; S+M]`.
///
/// Left: particles on `[-S-R;0]`, equilibrate `[-S;S+M]` then `[-S-R;0]`, run
/// for `t`, and test whether the leftmost particle is right of `x` and the
/// rightmost hole at or left of `y`. Right: first class particles at `<= x`,
/// second class on `(x;y]`, holes beyond; run for `t`, equilibrate
/// `[-S-R;0]` then `[-S;S+M]`, and test whether every first class particle is
/// right of 0 and every hole at or left of 0. The two sides draw from
/// different replica streams.
pub fn auxiliary_identity_mc(
    params: SimulationParams,
    p: &IdentityMcParams,
) -> Result<IdentityMcResult> {
    check_reps(p.reps)?;
    if !(p.t >= 0.0) || !p.t.is_finite() {
        return invalid(format!("time {} must be finite and nonnegative", p.t));
    }
    let (lo, hi) = identity_interval(p.s, p.r, p.m);
    if !(lo <= p.x && p.x <= p.y && p.y <= hi) {
        return invalid(format!(
            "need {lo} <= x <= y <= {hi}, got x = {}, y = {}",
            p.x, p.y
        ));
    }
    let q = params.ratio();
    let s = p.s as i64;
    let lhs_seed = crate::rng::derive(p.seed, 0);
    let rhs_seed = crate::rng::derive(p.seed, 1);

    let left = replicas(p.reps, lhs_seed, |rng, _| {
        let occ = (lo..=hi)
            .map(|i| if i <= 0 { Cell::Particle } else { Cell::Hole })
            .collect();
        let mut c = SegmentConfig::new(lo, occ)?;
        q_equilibrate_segment(&mut c, -s, hi, q, rng)?;
        q_equilibrate_segment(&mut c, lo, 0, q, rng)?;
        run_segment(&mut c, params, p.t, rng);
        let cells = c.cells();
        let leftmost = cells
            .iter()
            .position(|x| x.is_particle())
            .map_or(i64::MAX, |i| lo + i as i64);
        let rightmost_hole = cells
            .iter()
            .rposition(|x| !x.is_particle())
            .map_or(i64::MIN, |i| lo + i as i64);
        Ok(leftmost > p.x && rightmost_hole <= p.y)
    })?;

    let right = replicas(p.reps, rhs_seed, |rng, _| {
        let occ = (lo..=hi)
            .map(|i| {
                if i <= p.x {
                    Species::First
                } else if i <= p.y {
                    Species::Second
                } else {
                    Species::Hole
                }
            })
            .collect();
        let mut c = TwoSpeciesConfig::new(lo, occ, Species::First, Species::Hole)?;
        run_segment(&mut c, params, p.t, rng);
        q_equilibrate_two_species(&mut c, lo, 0, q, rng)?;
        q_equilibrate_two_species(&mut c, -s, hi, q, rng)?;
        let ok = c.values().iter().enumerate().all(|(i, &sp)| {
            let site = lo + i as i64;
            match sp {
                Species::First => site > 0,
                Species::Hole => site <= 0,
                Species::Second => true,
            }
        });
        Ok(ok)
    })?;

    let (lhs, lhs_se) = proportion(left.iter().filter(|&&b| b).count(), p.reps);
    let (rhs, rhs_se) = proportion(right.iter().filter(|&&b| b).count(), p.reps);
    Ok(IdentityMcResult {
        lhs,
        lhs_se,
        rhs,
        rhs_se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hecke::{corollary_event_check, DEFAULT_WALK_CAP};

    #[test]
    fn time_zero_is_deterministic_at_q_zero() {
        // Q = 0: both equilibrations sort particles to the right
        let params = SimulationParams::new(1.0).unwrap();
        let base = IdentityMcParams {
            s: 2,
            r: 1,
            m: 1,
            t: 0.0,
            x: 0,
            y: 1,
            reps: 20,
            seed: 1,
        };
        let r = auxiliary_identity_mc(params, &base).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        // the left side starts with particles on [0;3] and holes on [-3;-1]
        let r = auxiliary_identity_mc(
            params,
            &IdentityMcParams {
                x: -2,
                y: 1,
                ..base
            },
        )
        .unwrap();
        assert_eq!((r.lhs, r.rhs), (1.0, 1.0));
    }

    #[test]
    fn small_case_matches_exact_oracle() {
        let params = SimulationParams::from_ratio(0.5).unwrap();
        let (s, r, m, t) = (1, 1, 1, 0.8);
        for (x, y) in [(-1, 0), (-1, 1), (0, 1)] {
            let exact =
                corollary_event_check(s, r, m, t, params.p(), 0.5, x, y, DEFAULT_WALK_CAP).unwrap();
            let mc = auxiliary_identity_mc(
                params,
                &IdentityMcParams {
                    s,
                    r,
                    m,
                    t,
                    x,
                    y,
                    reps: 20000,
                    seed: 7,
                },
            )
            .unwrap();
            assert!(
                (mc.lhs - exact.lhs).abs() <= 4.0 * mc.lhs_se.max(1e-3),
                "{x},{y}: {mc:?} vs {exact:?}"
            );
            assert!(
                (mc.rhs - exact.rhs).abs() <= 4.0 * mc.rhs_se.max(1e-3),
                "{x},{y}: {mc:?} vs {exact:?}"
            );
        }
    }
}
