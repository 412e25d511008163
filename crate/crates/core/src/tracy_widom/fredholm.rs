//! `F_GUE(s) = det(I - K_2)` on `L^2(s, inf)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::airy::{airy_unchecked, AIRY_RANGE};
use crate::error::{invalid, Error, Result};

/// Left end of the documented range of [`f_gue`].
pub const F_GUE_MIN_S: f64 = -10.0;

/// The Airy kernel `K_2(x, y)`.
pub fn airy_kernel(x: f64, y: f64) -> f64 {
    let (ax, dx) = airy_unchecked(x);
    if x == y {
        return dx * dx - x * ax * ax;
    }
    let (ay, dy) = airy_unchecked(y);
    kernel_from(x, ax, dx, y, ay, dy)
}

fn kernel_from(x: f64, ax: f64, dx: f64, y: f64, ay: f64, dy: f64) -> f64 {
    if x == y {
        dx * dx - x * ax * ax
    } else if (x - y).abs() < NEAR_DIAGONAL {
        near_diagonal(x, y)
    } else {
        (ax * dy - ay * dx) / (x - y)
    }
}

const NEAR_DIAGONAL: f64 = 1e-4;

/// Expansion of `K_2(m + h/2, m - h/2)` to second order in `h`, using
/// `Ai'' = x Ai`.
fn near_diagonal(x: f64, y: f64) -> f64 {
    let m = 0.5 * (x + y);
    let h = x - y;
    let (f, d) = airy_unchecked(m);
    let diag = d * d - m * f * f;
    diag + h * h * (f * d / 12.0 + m * diag / 6.0)
}

/// How `(s, inf)` is turned into a finite quadrature rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum DomainMap {
    /// `x = s - scale * ln(1 - u)` for Gauss-Legendre nodes `u` on `(0, 1)`.
    Exponential { scale: f64 },
    /// Gauss-Legendre on `[s, upper]`, dropping the super-exponentially small tail.
    Truncated { upper: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub m: usize,
    pub map: DomainMap,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            m: 60,
            map: DomainMap::Truncated { upper: 16.0 },
        }
    }
}

impl QuadratureSpec {
    pub fn with_nodes(m: usize) -> Self {
        Self {
            m,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 4 {
            return invalid(format!("quadrature needs at least 4 nodes, got {}", self.m));
        }
        match self.map {
            DomainMap::Exponential { scale } if !(scale > 0.0 && scale.is_finite()) => {
                invalid(format!("exponential map scale {scale} must be positive"))
            }
            DomainMap::Truncated { upper } if !(upper > 0.0 && upper <= AIRY_RANGE) => invalid(
                format!("truncation point {upper} must lie in (0, {AIRY_RANGE}]"),
            ),
            _ => Ok(()),
        }
    }

    /// Nodes and weights for `(s, inf)`. Empty when the truncated interval is empty.
    pub fn rule(&self, s: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        self.validate()?;
        let (u, w) = gauss_legendre(self.m);
        Ok(match self.map {
            DomainMap::Truncated { upper } => {
                if s >= upper {
                    return Ok((Vec::new(), Vec::new()));
                }
                let half = 0.5 * (upper - s);
                let x = u.iter().map(|&t| s + half * (t + 1.0)).collect();
                let w = w.iter().map(|&wi| wi * half).collect();
                (x, w)
            }
            DomainMap::Exponential { scale } => {
                let mut xs = Vec::with_capacity(self.m);
                let mut ws = Vec::with_capacity(self.m);
                for (&t, &wi) in u.iter().zip(&w) {
                    let v = 0.5 * (t + 1.0);
                    xs.push(s - scale * (1.0 - v).ln());
                    ws.push(0.5 * wi * scale / (1.0 - v));
                }
                (xs, ws)
            }
        })
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=m {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let pm = if m == 1 { z } else { p1 };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            dp = m as f64 * (z * pm - pm1) / (z * z - 1.0);
            let dz = pm / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[m - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[m - 1 - i] = wi;
    }
    (x, w)
}

/// The symmetrized Nyström matrix `sqrt(w_i) K_2(x_i, x_j) sqrt(w_j)`.
pub fn nystrom_matrix(s: f64, quad: &QuadratureSpec) -> Result<DMatrix<f64>> {
    let (x, w) = quad.rule(s)?;
    let m = x.len();
    let vals: Vec<(f64, f64)> = x.iter().map(|&xi| airy_unchecked(xi)).collect();
    let sw: Vec<f64> = w.iter().map(|wi| wi.sqrt()).collect();
    let mut k = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..=i {
            let (ai, di) = vals[i];
            let (aj, dj) = vals[j];
            let kij = if i == j {
                di * di - x[i] * ai * ai
            } else {
                kernel_from(x[i], ai, di, x[j], aj, dj)
            };
            let v = sw[i] * kij * sw[j];
            if !v.is_finite() {
                return Err(Error::Quadrature(m));
            }
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(k)
}

/// `F_GUE(s)` by Nyström discretization of the Fredholm determinant.
pub fn f_gue(s: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !(s >= F_GUE_MIN_S) {
        return Err(Error::OutOfRange {
            value: s,
            lo: F_GUE_MIN_S,
            hi: f64::INFINITY,
        });
    }
    let k = nystrom_matrix(s, quad)?;
    let n = k.nrows();
    let det = (DMatrix::identity(n, n) - k).determinant();
    if !det.is_finite() {
        return Err(Error::Quadrature(quad.m));
    }
    Ok(det.clamp(0.0, 1.0))
}

/// Eigenvalues of the discretized kernel on `(s, inf)`, ascending.
pub fn kernel_eigenvalues(s: f64, quad: &QuadratureSpec) -> Result<Vec<f64>> {
    let k = nystrom_matrix(s, quad)?;
    let mut ev: Vec<f64> = k.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Largest term count accepted by [`f_gue_series`].
pub const MAX_SERIES_TERMS: usize = 4;

/// Truncation of `sum_n (-1)^n/n! int det[K_2(x_i, x_j)] dx` after `max_terms`
/// terms beyond `n = 0`.
///
/// The `n`-fold tensor quadrature sum vanishes on tuples with a repeated node
/// and is symmetric in the rest, so it equals `n!` times the sum over node
/// subsets of size `n`, which is what is evaluated here.
pub fn f_gue_series(s: f64, max_terms: usize, quad: &QuadratureSpec) -> Result<f64> {
    if max_terms > MAX_SERIES_TERMS {
        return invalid(format!(
            "at most {MAX_SERIES_TERMS} series terms, got {max_terms}"
        ));
    }
    let (x, w) = quad.rule(s)?;
    let m = x.len();
    let mut kw = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..m {
            kw[i][j] = airy_kernel(x[i], x[j]) * w[j];
        }
    }
    let mut total = 1.0;
    let mut subset = Vec::with_capacity(max_terms);
    for n in 1..=max_terms {
        let mut sum = 0.0;
        subset.clear();
        subset_sum(&kw, n, 0, &mut subset, &mut sum);
        if n % 2 == 1 {
            total -= sum;
        } else {
            total += sum;
        }
    }
    Ok(total)
}

fn subset_sum(kw: &[Vec<f64>], n: usize, from: usize, subset: &mut Vec<usize>, acc: &mut f64) {
    if subset.len() == n {
        *acc += small_det(kw, subset);
        return;
    }
    let need = n - subset.len();
    for i in from..=kw.len().saturating_sub(need) {
        if kw.len() < need {
            return;
        }
        subset.push(i);
        subset_sum(kw, n, i + 1, subset, acc);
        subset.pop();
    }
}

/// Determinant of the principal submatrix on `idx`, by Gaussian elimination
/// with partial pivoting.
fn small_det(kw: &[Vec<f64>], idx: &[usize]) -> f64 {
    let n = idx.len();
    let mut a = [[0.0f64; MAX_SERIES_TERMS]; MAX_SERIES_TERMS];
    for (r, &i) in idx.iter().enumerate() {
        for (c, &j) in idx.iter().enumerate() {
            a[r][c] = kw[i][j];
        }
    }
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))
            .unwrap_or(col);
        if a[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det *= a[col][col];
        let pivot = a[col];
        for row in a.iter_mut().skip(col + 1) {
            let f = row[col] / pivot[col];
            for (x, p) in row[col..].iter_mut().zip(&pivot[col..]) {
                *x -= f * p;
            }
        }
    }
    det
}

/// Bound on the error of the `n`-term series: the tail is dominated by
/// `tr(K)^(n+1) / (n+1)!` for a positive trace-class kernel.
pub fn series_remainder_bound(s: f64, n: usize, quad: &QuadratureSpec) -> Result<f64> {
    let (x, w) = quad.rule(s)?;
    let trace: f64 = x
        .iter()
        .zip(&w)
        .map(|(&xi, &wi)| airy_kernel(xi, xi) * wi)
        .sum();
    let mut bound = 1.0;
    for j in 1..=n + 1 {
        bound *= trace / j as f64;
    }
    Ok(bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tracy_widom::airy;

    fn oracle_quad() -> QuadratureSpec {
        QuadratureSpec {
            m: 40,
            map: DomainMap::Truncated { upper: 14.0 },
        }
    }

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        for deg in 0..14 {
            let num: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg)).sum();
            let exact = if deg % 2 == 1 {
                0.0
            } else {
                2.0 / (deg as f64 + 1.0)
            };
            assert!((num - exact).abs() < 1e-14, "degree {deg}");
        }
        let (x, _) = gauss_legendre(60);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn kernel_symmetry_and_diagonal() {
        let pts = [-7.3, -2.0, -0.4, 0.0, 1.1, 3.7, 9.2];
        for &a in &pts {
            for &b in &pts {
                assert!((airy_kernel(a, b) - airy_kernel(b, a)).abs() <= 1e-12);
            }
        }
        let d = airy::airy(0.0).unwrap().1;
        assert!((airy_kernel(0.0, 0.0) - d * d).abs() < 1e-15);
        for &x in &pts {
            let near = airy_kernel(x, x + 1e-6);
            assert!((near - airy_kernel(x, x)).abs() <= 1e-6, "x = {x}");
        }
    }

    #[test]
    fn near_diagonal_expansion() {
        for &m in &[-6.0, -1.5, 0.0, 0.7, 4.0] {
            let h = 1e-3;
            let (x, y) = (m + h / 2.0, m - h / 2.0);
            let (ax, dx) = airy_unchecked(x);
            let (ay, dy) = airy_unchecked(y);
            let direct = (ax * dy - ay * dx) / (x - y);
            assert!((near_diagonal(x, y) - direct).abs() < 1e-10, "m = {m}");
        }
    }

    #[test]
    fn nystrom_matches_series_oracle() {
        let quad = QuadratureSpec::default();
        for s in [0.0, 1.0, 2.0] {
            let a = f_gue(s, &quad).unwrap();
            let b = f_gue_series(s, 4, &oracle_quad()).unwrap();
            assert!(series_remainder_bound(s, 4, &oracle_quad()).unwrap() < 1e-7);
            assert!((a - b).abs() <= 1e-6, "s = {s}: {a} vs {b}");
        }
    }

    #[test]
    fn series_basics() {
        let quad = oracle_quad();
        assert_eq!(f_gue_series(2.0, 0, &quad).unwrap(), 1.0);
        let one = f_gue_series(2.0, 1, &quad).unwrap();
        let two = f_gue_series(2.0, 2, &quad).unwrap();
        assert!(one < two && two - one <= 1e-4);
        assert!(f_gue_series(0.0, 5, &quad).is_err());
    }

    #[test]
    fn self_convergence_and_maps_agree() {
        for s in [-2.0, 0.0, 2.0] {
            let a = f_gue(s, &QuadratureSpec::with_nodes(60)).unwrap();
            let b = f_gue(s, &QuadratureSpec::with_nodes(120)).unwrap();
            assert!((a - b).abs() <= 1e-8, "s = {s}");
            let e = f_gue(
                s,
                &QuadratureSpec {
                    m: 120,
                    map: DomainMap::Exponential { scale: 2.0 },
                },
            )
            .unwrap();
            assert!((a - e).abs() <= 1e-8, "s = {s}: {a} vs {e}");
        }
    }

    #[test]
    fn monotone_with_tails() {
        let quad = QuadratureSpec::default();
        let mut prev = 0.0;
        for i in 0..=120 {
            let s = -8.0 + 0.1 * i as f64;
            let f = f_gue(s, &quad).unwrap();
            assert!((0.0..=1.0).contains(&f));
            assert!(f >= prev - 1e-12, "s = {s}");
            prev = f;
        }
        assert!(f_gue(4.0, &quad).unwrap() >= 0.999);
        assert!(f_gue(-8.0, &quad).unwrap() <= 0.01);
        assert!(f_gue(-10.5, &quad).is_err());
        assert_eq!(f_gue(17.0, &quad).unwrap(), 1.0);
    }

    #[test]
    fn kernel_spectrum_in_unit_interval() {
        for s in [-6.0, -3.0, 0.0, 2.0] {
            let ev = kernel_eigenvalues(s, &QuadratureSpec::default()).unwrap();
            assert!(
                ev[0] >= -1e-8 && *ev.last().unwrap() <= 1.0 + 1e-8,
                "s = {s}: {ev:?}"
            );
        }
    }
}
