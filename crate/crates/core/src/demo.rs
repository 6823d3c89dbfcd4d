//! Polynomial approximants of `1/(z^2+1)` on the regions
//! `K_m = {|Re z| <= m, |Im z| <= 1, |z - i| >= 1/m, |z + i| >= 1/m}` and the
//! growth of the `e3`-coefficient of `e2 * f(e1)` on `[1/m, 1]` in the Euclidean algebra.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use crate::catalog;
use crate::ncfunc::commutation_rule;
use crate::pbw::{MultiIndex, PbwAlgebra};
use crate::poly::Polynomial;
use crate::scalar::Scalar;

/// Settings of the approximation run.
#[derive(Clone, Debug)]
pub struct DemoConfig {
    pub ms: Vec<u32>,
    /// Fixed degrees in `z`, one per entry of `ms`; adaptive when empty.
    pub degrees: Vec<u32>,
    pub tolerance: f64,
    /// Points of the first fitting grid (both halves of the boundary).
    pub start_points: usize,
    pub max_points: usize,
    /// Degree in `z` up to which the exact commutation identity is checked.
    pub identity_degree: u32,
}

impl Default for DemoConfig {
    fn default() -> Self {
        DemoConfig { ms: vec![2, 4, 8], degrees: Vec::new(), tolerance: 1e-3, start_points: 400, max_points: 25_000, identity_degree: 128 }
    }
}

/// One line of the demo table.
#[derive(Clone, Debug, Serialize)]
pub struct DemoRow {
    pub m: u32,
    /// Degree of `f_n` in `z`.
    pub degree: u32,
    pub grid_points: usize,
    /// Sup of `|f_n - f|` over the fitting and check grids on the boundary of `K_m`.
    pub fit_residual: f64,
    pub sup_g: f64,
    pub sup_target: f64,
    pub sup_error: f64,
    pub relative_gap: f64,
    pub within_10_percent: bool,
    pub converged: bool,
    /// Largest imaginary part of `g_n` on the interval.
    pub imaginary_leak: f64,
    /// Exact check of the commutation identity on the rational rounding of `f_n`.
    pub identity_exact: Option<bool>,
    pub seconds: f64,
}

fn cosine_nodes(n: usize) -> Vec<f64> {
    (0..n).map(|j| (1.0 - (PI * j as f64 / (n - 1) as f64).cos()) / 2.0).collect()
}

fn cosine_midpoints(n: usize) -> Vec<f64> {
    (0..n - 1).map(|j| (1.0 - (PI * (j as f64 + 0.5) / (n - 1) as f64).cos()) / 2.0).collect()
}

/// Boundary of `K_m` in the closed first quadrant: right edge, top edge, quarter arc.
fn boundary(m: f64, ts: &[f64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(3 * ts.len());
    for &t in ts {
        out.push(Complex64::new(m, t));
    }
    for &t in ts {
        out.push(Complex64::new(1.0 / m + (m - 1.0 / m) * t, 1.0));
    }
    for &t in ts {
        out.push(Complex64::i() + Complex64::from_polar(1.0 / m, -PI / 2.0 * t));
    }
    out
}

fn target(z: Complex64) -> Complex64 {
    1.0 / (z * z + 1.0)
}

/// Least-squares fit `p(w) ~ 1/(w+1)` with `w = z^2` in an Arnoldi basis.
/// Points come in conjugate pairs; only one half is stored and inner products
/// are `2 Re <u, v>` so the recurrence and coefficients stay real.
struct ArnoldiFit {
    w: Vec<Complex64>,
    rhs: Vec<Complex64>,
    basis: Vec<Vec<Complex64>>,
    hess: Vec<Vec<f64>>,
    coeffs: Vec<f64>,
    residual: Vec<Complex64>,
    total: f64,
}

impl ArnoldiFit {
    fn new(points: &[Complex64]) -> Self {
        let w: Vec<Complex64> = points.iter().map(|z| z * z).collect();
        let rhs: Vec<Complex64> = points.iter().map(|&z| target(z)).collect();
        let total = 2.0 * w.len() as f64;
        let q0 = vec![Complex64::new(1.0, 0.0); w.len()];
        let mut fit = ArnoldiFit { residual: rhs.clone(), w, rhs, basis: vec![q0], hess: Vec::new(), coeffs: Vec::new(), total };
        fit.absorb(0);
        fit
    }

    fn inner(&self, u: &[Complex64], v: &[Complex64]) -> f64 {
        2.0 * u.iter().zip(v).map(|(a, b)| a.re * b.re + a.im * b.im).sum::<f64>() / self.total
    }

    fn absorb(&mut self, k: usize) {
        let c = self.inner(&self.basis[k], &self.rhs);
        for (r, q) in self.residual.iter_mut().zip(&self.basis[k]) {
            *r -= q * c;
        }
        self.coeffs.push(c);
    }

    fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    fn extend(&mut self) {
        let k = self.degree();
        let mut v: Vec<Complex64> = self.w.iter().zip(&self.basis[k]).map(|(w, q)| w * q).collect();
        let mut col = Vec::with_capacity(k + 2);
        for j in 0..=k {
            let h = self.inner(&self.basis[j], &v);
            for (x, q) in v.iter_mut().zip(&self.basis[j]) {
                *x -= q * h;
            }
            col.push(h);
        }
        let norm = self.inner(&v, &v).sqrt();
        col.push(norm);
        for x in v.iter_mut() {
            *x /= norm;
        }
        self.hess.push(col);
        self.basis.push(v);
        self.absorb(k + 1);
    }

    fn max_residual(&self) -> f64 {
        self.residual.iter().map(|r| r.norm()).fold(0.0, f64::max)
    }

    /// `p(z^2)` via the stored recurrence.
    fn eval(&self, z: Complex64) -> Complex64 {
        let w = z * z;
        let n = self.degree();
        let mut vals = Vec::with_capacity(n + 1);
        vals.push(Complex64::new(1.0, 0.0));
        let mut acc = vals[0] * self.coeffs[0];
        for k in 0..n {
            let col = &self.hess[k];
            let mut v = w * vals[k];
            for (j, val) in vals.iter().enumerate() {
                v -= val * col[j];
            }
            v /= col[k + 1];
            acc += v * self.coeffs[k + 1];
            vals.push(v);
        }
        acc
    }

    /// Monomial coefficients of `p` in `w`, by running the recurrence on coefficient vectors.
    fn monomial(&self) -> Vec<f64> {
        let n = self.degree();
        let mut polys: Vec<Vec<f64>> = vec![vec![1.0]];
        for k in 0..n {
            let col = &self.hess[k];
            let mut next = vec![0.0; k + 2];
            for (i, c) in polys[k].iter().enumerate() {
                next[i + 1] += c;
            }
            for (j, p) in polys.iter().enumerate() {
                for (i, c) in p.iter().enumerate() {
                    next[i] -= col[j] * c;
                }
            }
            for c in next.iter_mut() {
                *c /= col[k + 1];
            }
            polys.push(next);
        }
        let mut out = vec![0.0; n + 1];
        for (p, c) in polys.iter().zip(&self.coeffs) {
            for (i, v) in p.iter().enumerate() {
                out[i] += c * v;
            }
        }
        out
    }
}

fn check_error(fit: &ArnoldiFit, check: &[Complex64]) -> f64 {
    check.iter().map(|&z| (fit.eval(z) - target(z)).norm()).fold(fit.max_residual(), f64::max)
}

/// `(f(lambda - i) - f(lambda + i)) / 2i`.
fn g_value(fit: &ArnoldiFit, lambda: f64) -> Complex64 {
    let i = Complex64::i();
    (fit.eval(Complex64::new(lambda, 0.0) - i) - fit.eval(Complex64::new(lambda, 0.0) + i)) / (2.0 * i)
}

/// `2 / (lambda^3 + 4 lambda)`.
pub fn rational_target(lambda: f64) -> f64 {
    2.0 / (lambda.powi(3) + 4.0 * lambda)
}

const INTERVAL_POINTS: usize = 2001;

/// Exact identity between the commutation expansion and the shifted difference on a rational polynomial.
pub fn commutation_identity_holds(f: &Polynomial) -> bool {
    let alg = PbwAlgebra::new(catalog::euclidean()).expect("split exists");
    let order = 1;
    let e = commutation_rule(&alg, 1, f, order);
    let i = Scalar::i();
    let minus = f.shift(&[-&i]);
    let plus = f.shift(&[i.clone()]);
    let two_i = &Scalar::from_int(2) * &i;
    let odd = minus.sub(&plus).scale(&two_i.recip().expect("nonzero"));
    let even = minus.add(&plus).scale(&Scalar::from_int(2).recip().expect("nonzero"));
    let get = |beta: Vec<u32>| e.coefficient(&MultiIndex(beta)).and_then(|c| c.as_poly().cloned()).unwrap_or_else(|| Polynomial::zero(1));
    get(vec![0, 1]) == odd && get(vec![1, 0]) == even
}

fn fit_for(m: u32, cfg: &DemoConfig, fixed: Option<u32>) -> (ArnoldiFit, usize, f64, bool) {
    let mf = m as f64;
    let mut per_piece = (cfg.start_points / 6).max(8);
    loop {
        let fit_grid = boundary(mf, &cosine_nodes(per_piece));
        let check_grid = boundary(mf, &cosine_midpoints(per_piece));
        let mut fit = ArnoldiFit::new(&fit_grid);
        let cap = ((3 * per_piece) as f64 / 1.5) as usize;
        let points = 2 * fit_grid.len();
        if let Some(d) = fixed {
            let wd = (d / 2) as usize;
            if wd <= cap || 6 * per_piece * 2 > cfg.max_points {
                while fit.degree() < wd.min(cap) {
                    fit.extend();
                }
                let err = check_error(&fit, &check_grid);
                return (fit, points, err, err < cfg.tolerance);
            }
        } else {
            let mut next_check = 1;
            while fit.degree() < cap {
                fit.extend();
                if fit.degree() >= next_check && fit.max_residual() < 0.5 * cfg.tolerance {
                    let err = check_error(&fit, &check_grid);
                    if err < cfg.tolerance {
                        return (fit, points, err, true);
                    }
                    next_check = fit.degree() + fit.degree() / 10 + 1;
                }
            }
            if 2 * points > cfg.max_points {
                let err = check_error(&fit, &check_grid);
                return (fit, points, err, false);
            }
        }
        per_piece *= 2;
    }
}

/// Runs the approximation for each `m` and tabulates `sup |g_n|` against `sup |2/(x^3+4x)|` on `[1/m, 1]`.
pub fn demo_e2_blowup(cfg: &DemoConfig) -> Vec<DemoRow> {
    cfg.ms
        .iter()
        .enumerate()
        .map(|(idx, &m)| {
            let start = Instant::now();
            let (fit, points, fit_residual, converged) = fit_for(m, cfg, cfg.degrees.get(idx).copied());
            let lo = 1.0 / m as f64;
            let mut sup_g = 0.0f64;
            let mut sup_target = 0.0f64;
            let mut sup_error = 0.0f64;
            let mut leak = 0.0f64;
            for t in 0..INTERVAL_POINTS {
                let x = lo + (1.0 - lo) * t as f64 / (INTERVAL_POINTS - 1) as f64;
                let g = g_value(&fit, x);
                let r = rational_target(x);
                sup_g = sup_g.max(g.norm());
                sup_target = sup_target.max(r.abs());
                sup_error = sup_error.max((g - r).norm());
                leak = leak.max(g.im.abs());
            }
            let degree = 2 * fit.degree() as u32;
            let identity_exact = (degree <= cfg.identity_degree).then(|| {
                let coeffs = fit.monomial();
                let mut p = Polynomial::zero(1);
                for (i, c) in coeffs.iter().enumerate() {
                    if let Some(s) = Scalar::from_f64(*c) {
                        p.add_term(vec![2 * i as u32], &s);
                    }
                }
                commutation_identity_holds(&p)
            });
            let relative_gap = (sup_g - sup_target).abs() / sup_target;
            DemoRow {
                m,
                degree,
                grid_points: points,
                fit_residual,
                sup_g,
                sup_target,
                sup_error,
                relative_gap,
                within_10_percent: relative_gap <= 0.1,
                converged,
                imaginary_leak: leak,
                identity_exact,
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_region_fits_quickly() {
        let cfg = DemoConfig { ms: vec![2], ..DemoConfig::default() };
        let row = &demo_e2_blowup(&cfg)[0];
        assert!(row.converged && row.fit_residual < 1e-3, "{row:?}");
        assert!(row.within_10_percent);
        assert_eq!(row.identity_exact, Some(true), "{row:?}");
        assert!(row.imaginary_leak < 1e-8);
    }

    #[test]
    fn identity_on_small_polynomials() {
        let f = Polynomial::var(1, 0).pow(3).add(&Polynomial::var(1, 0));
        assert!(commutation_identity_holds(&f));
    }
}
