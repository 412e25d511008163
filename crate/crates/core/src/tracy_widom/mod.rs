//! The GUE Tracy-Widom distribution and the scaling functions that place the
//! cutoff window.

mod airy;
mod fredholm;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub use airy::{airy, AIRY_RANGE};
pub use fredholm::{
    airy_kernel, f_gue, f_gue_series, gauss_legendre, kernel_eigenvalues, nystrom_matrix,
    series_remainder_bound, DomainMap, QuadratureSpec, F_GUE_MIN_S, MAX_SERIES_TERMS,
};

/// `f(a) = (a(1-a))^{1/6} / (sqrt(a) + sqrt(1-a))^{4/3}`.
pub fn f_alpha(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return invalid(format!("density {alpha} must lie in (0, 1)"));
    }
    let d = alpha.sqrt() + (1.0 - alpha).sqrt();
    Ok((alpha * (1.0 - alpha)).powf(1.0 / 6.0) / d.powf(4.0 / 3.0))
}

/// `g(k, c) = ((sqrt(k) + sqrt(N-k))^2 + c N^{1/3}) / (p - q)`.
pub fn g_time(n: usize, k: usize, c: f64, p: f64, q: f64) -> Result<f64> {
    if k == 0 || k > n {
        return invalid(format!("need 1 <= k <= N, got k = {k}, N = {n}"));
    }
    if !(p > q) {
        return invalid(format!("need p > q, got p = {p}, q = {q}"));
    }
    let (nf, kf) = (n as f64, k as f64);
    let d = kf.sqrt() + (nf - kf).sqrt();
    Ok((d * d + c * nf.cbrt()) / (p - q))
}

/// Constants of the step initial condition's particle fluctuations at
/// macroscopic label ratio `sigma = m/t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepScaling {
    pub gamma: f64,
    pub sigma: f64,
    pub c1: f64,
    pub c2: f64,
}

impl StepScaling {
    pub fn new(p: f64, q: f64, sigma: f64) -> Result<Self> {
        if !(p > q) {
            return invalid(format!("need p > q, got p = {p}, q = {q}"));
        }
        if !(sigma > 0.0 && sigma < 1.0) {
            return invalid(format!("sigma = {sigma} must lie in (0, 1)"));
        }
        let r = sigma.sqrt();
        Ok(Self {
            gamma: p - q,
            sigma,
            c1: 1.0 - 2.0 * r,
            c2: sigma.powf(-1.0 / 6.0) * (1.0 - r).powf(2.0 / 3.0),
        })
    }

    /// Scaling for particle label `m` at time `t`.
    pub fn from_label(p: f64, q: f64, m: f64, t: f64) -> Result<Self> {
        Self::new(p, q, m / t)
    }
}

/// Parameters of the particle-position event for step initial data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RescaleParams {
    pub c: f64,
    pub kappa: f64,
    pub c_prime: f64,
    pub kappa_prime: f64,
    pub c_double_prime: f64,
}

impl RescaleParams {
    pub fn plain(c: f64) -> Self {
        Self {
            c,
            kappa: 0.0,
            c_prime: 0.0,
            kappa_prime: 0.0,
            c_double_prime: 0.0,
        }
    }
}

/// The event `x_{index}(g(k, c)) <= threshold` for step initial data and the
/// predicted limit of its probability, with intermediate quantities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorollaryScaling {
    pub particle_index: f64,
    pub threshold: f64,
    pub predicted: f64,
    /// `DN + cN^{1/3} = g(k, c)(p - q)`.
    pub n_tilde: f64,
    pub d: f64,
    pub sigma: f64,
    pub c1: f64,
    pub c2: f64,
    /// `((1-2a)/D^{4/3} + sqrt(a)/D^{5/6}) / c2`, the factor multiplying `c`.
    pub ratio: f64,
    /// The finite-`N` value of `c * ratio`: the threshold's centred and scaled
    /// distance from the law of large numbers.
    pub effective_c: f64,
}

/// Package the step-fluctuation event at `g(k, c)`.
pub fn corollary_rescale(
    n: usize,
    k: usize,
    p: f64,
    q: f64,
    rp: &RescaleParams,
    quad: &QuadratureSpec,
) -> Result<CorollaryScaling> {
    for (name, e) in [("kappa", rp.kappa), ("kappa'", rp.kappa_prime)] {
        if !(0.0..1.0 / 3.0).contains(&e) {
            return invalid(format!("{name} = {e} must lie in [0, 1/3)"));
        }
    }
    if k == 0 || k >= n {
        return invalid(format!("need 1 <= k < N, got k = {k}, N = {n}"));
    }
    let nf = n as f64;
    let a = k as f64 / nf;
    let d = (a.sqrt() + (1.0 - a).sqrt()).powi(2);
    let n_tilde = g_time(n, k, rp.c, p, q)? * (p - q);
    let particle_index = k as f64 + rp.c_prime * nf.powf(rp.kappa);
    let threshold = nf - 2.0 * k as f64 + rp.c_double_prime * nf.powf(rp.kappa_prime);
    let scaling = StepScaling::new(p, q, particle_index / n_tilde)?;
    let ratio = ((1.0 - 2.0 * a) / d.powf(4.0 / 3.0) + a.sqrt() / d.powf(5.0 / 6.0)) / scaling.c2;
    let effective_c = (scaling.c1 * n_tilde - threshold) / (scaling.c2 * n_tilde.cbrt());
    let cf = rp.c * f_alpha(a)?;
    let predicted = if cf < F_GUE_MIN_S {
        1.0
    } else {
        1.0 - f_gue(cf, quad)?
    };
    Ok(CorollaryScaling {
        particle_index,
        threshold,
        predicted,
        n_tilde,
        d,
        sigma: scaling.sigma,
        c1: scaling.c1,
        c2: scaling.c2,
        ratio,
        effective_c,
    })
}
