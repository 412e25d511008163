use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{
    event_b_mc, exact_mixing_curve, grid_from_c, kolmogorov_distance, step_fluct_mc, tail_length,
    tv_lower_bound_mc, tv_upper_bound_mc, EventBPoint, IdentityMcResult, ProfilePoint, StartMode,
    TvEstimate, MIXING_STATE_CAP,
};
use crate::dynamics::SimulationParams;
use crate::error::{invalid, Error, Result};
use crate::rng::derive;
use crate::stationary::q_binomial;
use crate::tracy_widom::RescaleParams;

fn default_lower_exponent() -> f64 {
    0.25
}

fn default_window_exponent() -> f64 {
    0.1
}

fn default_tolerance() -> f64 {
    0.08
}

fn default_true() -> bool {
    true
}

/// A full sweep over the cutoff window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub k: usize,
    pub p: f64,
    pub c_grid: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    #[serde(default = "default_lower_exponent")]
    pub lower_exponent: f64,
    #[serde(default = "default_window_exponent")]
    pub window_exponent: f64,
    #[serde(default)]
    pub kappa: f64,
    #[serde(default)]
    pub c_prime: f64,
    #[serde(default)]
    pub kappa_prime: f64,
    #[serde(default)]
    pub c_double_prime: f64,
    /// Include exact curves when `C(N, k)` is within the state cap.
    #[serde(default = "default_true")]
    pub exact: bool,
    /// Kolmogorov tolerance recorded with the profile.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<SimulationParams> {
        let params = SimulationParams::new(self.p)?;
        if self.k == 0 || self.k >= self.n {
            return invalid(format!(
                "need 1 <= k < N, got N = {}, k = {}",
                self.n, self.k
            ));
        }
        if self.reps == 0 {
            return invalid("need at least one replica");
        }
        if self.c_grid.iter().any(|c| !c.is_finite()) {
            return invalid("c grid must be finite");
        }
        for (name, e) in [("kappa", self.kappa), ("kappa'", self.kappa_prime)] {
            if !(0.0..1.0 / 3.0).contains(&e) {
                return invalid(format!("{name} = {e} must lie in [0, 1/3)"));
            }
        }
        Ok(params)
    }

    pub fn rescale(&self) -> RescaleParams {
        RescaleParams {
            c: 0.0,
            kappa: self.kappa,
            c_prime: self.c_prime,
            kappa_prime: self.kappa_prime,
            c_double_prime: self.c_double_prime,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileReport {
    pub config: ExperimentConfig,
    pub tail_length: usize,
    pub tv_curve: Vec<TvEstimate>,
    pub profile: Vec<ProfilePoint>,
    pub event_b: Vec<EventBPoint>,
    pub kolmogorov: f64,
    pub within_tolerance: bool,
}

/// Combine estimates of the same grid, taking each field from whichever part
/// provides it.
pub fn merge_tv(parts: &[Vec<TvEstimate>]) -> Result<Vec<TvEstimate>> {
    let Some(first) = parts.first() else {
        return Ok(Vec::new());
    };
    let mut out = first.clone();
    for part in &parts[1..] {
        if part.len() != out.len() {
            return Err(Error::DomainMismatch(
                "estimates over different grids".into(),
            ));
        }
        for (o, e) in out.iter_mut().zip(part) {
            if o.t != e.t {
                return Err(Error::DomainMismatch(format!(
                    "time {} against {}",
                    o.t, e.t
                )));
            }
            o.lower = o.lower.or(e.lower);
            o.lower_se = o.lower_se.or(e.lower_se);
            o.upper = o.upper.or(e.upper);
            o.upper_se = o.upper_se.or(e.upper_se);
            o.exact = o.exact.or(e.exact);
            if o.reps == 0 && e.reps > 0 {
                o.reps = e.reps;
                o.seed = e.seed;
            }
            o.censored = o.censored.max(e.censored);
        }
    }
    Ok(out)
}

/// Run the configured sweep: Monte Carlo bounds on `d(t)`, exact values when
/// feasible, the step fluctuation profile and the event `B_N(c)`.
pub fn profile_report(config: &ExperimentConfig) -> Result<ProfileReport> {
    let params = config.validate()?;
    let (n, k) = (config.n, config.k);
    let l = tail_length(n, k, config.lower_exponent)?;
    if config.c_grid.is_empty() {
        return Ok(ProfileReport {
            config: config.clone(),
            tail_length: l,
            tv_curve: Vec::new(),
            profile: Vec::new(),
            event_b: Vec::new(),
            kolmogorov: 0.0,
            within_tolerance: true,
        });
    }
    let grid = grid_from_c(n, k, params, &config.c_grid)?;
    let seed = config.seed;
    let mut parts = vec![
        tv_upper_bound_mc(n, k, params, &grid, config.reps, derive(seed, 1))?,
        tv_lower_bound_mc(n, k, params, &grid, l, config.reps, derive(seed, 2))?,
    ];
    if config.exact && q_binomial(n, k, 1.0) <= MIXING_STATE_CAP as f64 {
        parts.push(exact_mixing_curve(
            n,
            k,
            params,
            &grid,
            StartMode::Xi0,
            MIXING_STATE_CAP,
        )?);
    }
    let tv_curve = merge_tv(&parts)?;
    let profile = step_fluct_mc(
        n,
        k,
        params,
        &config.c_grid,
        &config.rescale(),
        config.reps,
        derive(seed, 3),
    )?;
    let event_b = event_b_mc(
        n,
        k,
        params,
        &config.c_grid,
        config.window_exponent,
        config.reps,
        derive(seed, 4),
    )?;
    let kolmogorov = kolmogorov_distance(&profile);
    Ok(ProfileReport {
        config: config.clone(),
        tail_length: l,
        tv_curve,
        profile,
        event_b,
        kolmogorov,
        within_tolerance: kolmogorov <= config.tolerance,
    })
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// `c,t,lower,lower_se,upper,upper_se,exact,predicted`; missing values are empty.
pub fn write_tv_csv(w: &mut impl Write, rows: &[TvEstimate]) -> Result<()> {
    writeln!(w, "c,t,lower,lower_se,upper,upper_se,exact,predicted")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.c,
            r.t,
            opt(r.lower),
            opt(r.lower_se),
            opt(r.upper),
            opt(r.upper_se),
            opt(r.exact),
            r.predicted
        )?;
    }
    Ok(())
}

/// `c,empirical,predicted,gap`.
pub fn write_profile_csv(w: &mut impl Write, rows: &[ProfilePoint]) -> Result<()> {
    writeln!(w, "c,empirical,predicted,gap")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.c, r.empirical, r.predicted, r.gap)?;
    }
    Ok(())
}

/// `c,t,estimate,se,predicted`.
pub fn write_event_b_csv(w: &mut impl Write, rows: &[EventBPoint]) -> Result<()> {
    writeln!(w, "c,t,estimate,se,predicted")?;
    for r in rows {
        writeln!(w, "{},{},{},{},{}", r.c, r.t, r.estimate, r.se, r.predicted)?;
    }
    Ok(())
}

/// `lhs,lhs_se,rhs,rhs_se`.
pub fn write_identity_csv(w: &mut impl Write, rows: &[IdentityMcResult]) -> Result<()> {
    writeln!(w, "lhs,lhs_se,rhs,rhs_se")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.lhs, r.lhs_se, r.rhs, r.rhs_se)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(c_grid: Vec<f64>) -> ExperimentConfig {
        serde_json::from_value(serde_json::json!({
            "n": 8, "k": 4, "p": 0.75, "c_grid": c_grid, "reps": 200, "seed": 5
        }))
        .unwrap()
    }

    #[test]
    fn empty_grid_gives_empty_report() {
        let r = profile_report(&config(vec![])).unwrap();
        assert!(r.tv_curve.is_empty() && r.profile.is_empty() && r.within_tolerance);
    }

    #[test]
    fn report_is_reproducible_and_complete() {
        let cfg = config(vec![-2.0, 0.0, 2.0]);
        let a = profile_report(&cfg).unwrap();
        let b = profile_report(&cfg).unwrap();
        let mut ja = Vec::new();
        let mut jb = Vec::new();
        serde_json::to_writer(&mut ja, &a).unwrap();
        serde_json::to_writer(&mut jb, &b).unwrap();
        assert_eq!(ja, jb);
        for e in &a.tv_curve {
            assert!(e.lower.is_some() && e.upper.is_some() && e.exact.is_some());
            assert!((0.0..=1.0).contains(&e.predicted));
        }
        let mut csv = Vec::new();
        write_tv_csv(&mut csv, &a.tv_curve).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("c,t,lower,lower_se,upper,upper_se,exact,predicted\n"));
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn config_validation() {
        let mut cfg = config(vec![0.0]);
        cfg.k = 8;
        assert!(profile_report(&cfg).is_err());
        let bad: std::result::Result<ExperimentConfig, _> = serde_json::from_str(
            r#"{"n":8,"k":4,"p":0.75,"c_grid":[],"reps":1,"seed":0,"bogus":1}"#,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn merge_rejects_mismatched_grids() {
        let a = vec![TvEstimate::at(
            super::super::GridPoint { c: 0.0, t: 1.0 },
            0.5,
        )];
        let b = vec![TvEstimate::at(
            super::super::GridPoint { c: 0.0, t: 2.0 },
            0.5,
        )];
        assert!(merge_tv(&[a.clone(), b]).is_err());
        assert_eq!(merge_tv(std::slice::from_ref(&a)).unwrap(), a);
    }
}
