//! Growth and resolvent diagnostics for matrices, and functional calculus of
//! tuples of matrices by Taylor sums or Fourier quadrature.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use statrs::function::erf::erf;
use thiserror::Error;

use crate::ncfunc::{hermite, CoefficientFn, SmoothExpr};
use crate::pbw::MultiIndex;
use crate::poly::Polynomial;
use crate::seminorm_lab::MatrixNorm;

pub type NumericMatrix = DMatrix<f64>;
pub type ComplexMatrix = DMatrix<Complex64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CalculusError {
    #[error("matrix {index} is not nilpotent (||b^d|| = {residual:e})")]
    NotNilpotent { index: usize, residual: f64 },
    #[error("matrix {index} has non-real eigenvalue {re} + {im}i")]
    NonRealSpectrum { index: usize, re: f64, im: f64 },
    #[error("matrices {0} and {1} do not commute")]
    NotCommuting(usize, usize),
    #[error("quadrature did not settle within {nodes} nodes per axis (last change {change:e})")]
    TruncationBudgetExceeded { nodes: usize, change: f64 },
    #[error("resolvent requested at a real point {0}")]
    SingularSolve(f64),
    #[error("symbol has {symbol} variables but {matrices} matrices were given")]
    Arity { symbol: usize, matrices: usize },
    #[error("matrix {0} is not square")]
    NotSquare(usize),
    #[error("matrices have different sizes")]
    SizeMismatch,
    #[error("matrix entries must be finite")]
    NonFinite,
}

fn check_matrices(bs: &[NumericMatrix]) -> Result<usize, CalculusError> {
    let d = bs.first().map_or(0, |b| b.nrows());
    for (i, b) in bs.iter().enumerate() {
        if !b.is_square() {
            return Err(CalculusError::NotSquare(i));
        }
        if b.nrows() != d {
            return Err(CalculusError::SizeMismatch);
        }
        if b.iter().any(|x| !x.is_finite()) {
            return Err(CalculusError::NonFinite);
        }
    }
    Ok(d)
}

fn complexify(b: &NumericMatrix) -> ComplexMatrix {
    b.map(|x| Complex64::new(x, 0.0))
}

/// `exp(i s b)`.
pub fn exp_is(b: &NumericMatrix, s: f64) -> ComplexMatrix {
    b.map(|x| Complex64::new(0.0, s * x)).exp()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Verdict {
    Polynomial { alpha: f64 },
    Exponential,
    Inconclusive,
}

/// Fit of `||exp(isb)|| <= K (1 + |s|)^alpha`.
#[derive(Clone, Debug, Serialize)]
pub struct GrowthReport {
    pub alpha: f64,
    #[serde(rename = "K")]
    pub constant: f64,
    pub residual: f64,
    pub tail_slope: f64,
    pub overflow: bool,
    pub verdict: Verdict,
    /// `(s, max(||exp(isb)||, ||exp(-isb)||))`.
    pub samples: Vec<(f64, f64)>,
}

pub const POLY_RESIDUAL: f64 = 0.1;
pub const EXP_RESIDUAL: f64 = 0.5;
pub const TAIL_WINDOW: f64 = 0.2;
pub const EXP_TAIL_JUMP: f64 = 1.0;

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let icpt = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - icpt - slope * x).powi(2)).sum();
    (slope, icpt, (rss / n).sqrt())
}

fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![hi];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Largest number of uniform steps used for the running supremum.
pub const DENSE_CAP: usize = 8192;

/// Running maximum of `||exp(itb)||, ||exp(-itb)||` over a uniform grid of `[0, s_max]`,
/// read off at the ascending points `at`. `None` on overflow.
fn running_sup(b: &NumericMatrix, s_max: f64, at: &[f64], norm: MatrixNorm) -> Option<Vec<f64>> {
    let re: Vec<f64> = b.complex_eigenvalues().iter().map(|z| z.re).collect();
    let spread = re.iter().copied().fold(f64::NEG_INFINITY, f64::max) - re.iter().copied().fold(f64::INFINITY, f64::min);
    let ideal = PI / (4.0 * (spread.max(0.0) + 1.0));
    let steps = ((s_max / ideal).ceil() as usize).clamp(1, DENSE_CAP);
    let h = s_max / steps as f64;
    let (fwd, bwd) = (exp_is(b, h), exp_is(b, -h));
    let (mut p, mut q) = (fwd.clone(), bwd.clone());
    let mut out = Vec::with_capacity(at.len());
    let mut best = 1.0f64;
    let mut k = 0;
    for j in 1..=steps {
        let t = j as f64 * h;
        while k < at.len() && at[k] < t - 0.5 * h {
            out.push(best);
            k += 1;
        }
        let v = norm.of(&p).max(norm.of(&q));
        if !v.is_finite() || v > 1e300 {
            return None;
        }
        best = best.max(v);
        p = &p * &fwd;
        q = &q * &bwd;
    }
    out.resize(at.len(), best);
    Some(out)
}

/// Log-spaced scan of `||exp(isb)||` over `1 <= |s| <= s_max`. The fit uses the running
/// supremum over a uniform grid, so bounded oscillations do not read as growth.
pub fn exp_growth_scan(b: &NumericMatrix, s_max: f64, samples: usize, norm: MatrixNorm) -> Result<GrowthReport, CalculusError> {
    check_matrices(std::slice::from_ref(b))?;
    let s_max = s_max.max(4.0);
    let samples = samples.max(8);
    let mut pts = Vec::with_capacity(samples);
    let mut overflow = false;
    for s in logspace(1.0, s_max, samples) {
        let v = norm.of(&exp_is(b, s)).max(norm.of(&exp_is(b, -s)));
        if !v.is_finite() || v > 1e300 {
            overflow = true;
            break;
        }
        pts.push((s, v));
    }
    let at: Vec<f64> = pts.iter().map(|(s, _)| *s).collect();
    let dense = if overflow { None } else { running_sup(b, s_max, &at, norm) };
    overflow |= dense.is_none();
    let dense = dense.unwrap_or_default();
    let envelope: Vec<(f64, f64)> = pts
        .iter()
        .zip(dense.iter().chain(std::iter::repeat(&0.0)))
        .scan(0.0f64, |m, (&(s, v), &d)| {
            *m = m.max(v).max(d);
            Some((s, *m))
        })
        .collect();
    let fit_from = s_max.sqrt();
    let body: Vec<&(f64, f64)> = envelope.iter().filter(|(s, _)| *s >= fit_from).collect();
    let tail: Vec<&(f64, f64)> = envelope.iter().filter(|(s, _)| *s >= s_max / 2.0).collect();
    let fit = |set: &[&(f64, f64)]| {
        let xs: Vec<f64> = set.iter().map(|(s, _)| (1.0 + s).ln()).collect();
        let ys: Vec<f64> = set.iter().map(|(_, v)| v.max(f64::MIN_POSITIVE).ln()).collect();
        least_squares(&xs, &ys)
    };
    if overflow || body.len() < 2 {
        return Ok(GrowthReport {
            alpha: f64::INFINITY,
            constant: f64::INFINITY,
            residual: f64::INFINITY,
            tail_slope: f64::INFINITY,
            overflow: true,
            verdict: Verdict::Exponential,
            samples: pts,
        });
    }
    let (alpha, _, residual) = fit(&body);
    let tail_slope = if tail.len() >= 2 { fit(&tail).0 } else { alpha };
    let alpha_clamped = alpha.max(0.0);
    let constant = pts.iter().map(|(s, v)| v / (1.0 + s).powf(alpha_clamped)).fold(0.0, f64::max);
    let verdict = if residual > EXP_RESIDUAL || tail_slope - alpha > EXP_TAIL_JUMP {
        Verdict::Exponential
    } else if residual < POLY_RESIDUAL && (tail_slope - alpha).abs() <= TAIL_WINDOW {
        Verdict::Polynomial { alpha: alpha_clamped }
    } else {
        Verdict::Inconclusive
    };
    Ok(GrowthReport { alpha: alpha_clamped, constant, residual, tail_slope, overflow, verdict, samples: pts })
}

/// One line of a resolvent table.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ResolventRow {
    pub re: f64,
    pub im: f64,
    pub norm: f64,
}

/// Resolvent norms with exponents fitted near the real axis and far from it.
#[derive(Clone, Debug, Serialize)]
pub struct ResolventReport {
    pub rows: Vec<ResolventRow>,
    /// `gamma` in `||R(lambda)|| ~ C |Im lambda|^(-gamma)` as `Im lambda -> 0`, per real part.
    pub near_axis: Vec<(f64, f64)>,
    /// `gamma` in `||R(lambda)|| ~ C (1 + |Im lambda|)^(-gamma)` as `|Im lambda| -> infinity`.
    pub far_field: Vec<(f64, f64)>,
    pub blow_up_exponent: f64,
    pub decay_exponent: f64,
}

/// Operator norm of `(b - lambda)^{-1}`.
pub fn resolvent_norm(b: &NumericMatrix, lambda: Complex64) -> Result<f64, CalculusError> {
    if lambda.im == 0.0 {
        return Err(CalculusError::SingularSolve(lambda.re));
    }
    let d = b.nrows();
    let m = complexify(b) - ComplexMatrix::identity(d, d) * lambda;
    let smin = m.svd(false, false).singular_values.min();
    if smin == 0.0 {
        return Err(CalculusError::SingularSolve(lambda.re));
    }
    Ok(1.0 / smin)
}

/// Real parts of the spectrum, deduplicated to `1e-9`.
pub fn spectrum_real_parts(b: &NumericMatrix) -> Vec<f64> {
    let mut out: Vec<f64> = b.complex_eigenvalues().iter().map(|z| z.re).collect();
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    out
}

/// Scans `||(b - lambda)^{-1}||` along vertical lines through `re_points`
/// (the real parts of the spectrum by default).
pub fn resolvent_scan(b: &NumericMatrix, re_points: Option<&[f64]>, points: usize) -> Result<ResolventReport, CalculusError> {
    check_matrices(std::slice::from_ref(b))?;
    let res: Vec<f64> = match re_points {
        Some(r) => r.to_vec(),
        None => spectrum_real_parts(b),
    };
    let points = points.max(4);
    let near = logspace(1e-4, 1e-1, points);
    let far = logspace(1e1, 1e3, points);
    let mut rows = Vec::new();
    let mut near_axis = Vec::new();
    let mut far_field = Vec::new();
    for &re in &res {
        let mut fit_line = |ims: &[f64], far: bool| -> Result<f64, CalculusError> {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for &im in ims {
                let norm = resolvent_norm(b, Complex64::new(re, im))?;
                rows.push(ResolventRow { re, im, norm });
                xs.push(if far { (1.0 + im).ln() } else { im.ln() });
                ys.push(norm.ln());
            }
            Ok(-least_squares(&xs, &ys).0)
        };
        near_axis.push((re, fit_line(&near, false)?));
        far_field.push((re, fit_line(&far, true)?));
    }
    let blow_up_exponent = near_axis.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let decay_exponent = far_field.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    Ok(ResolventReport { rows, near_axis, far_field, blow_up_exponent, decay_exponent })
}

fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Tolerance for `b^d = 0`.
pub const NILPOTENT_TOL: f64 = 1e-12;

fn nilpotency_order(b: &NumericMatrix, index: usize) -> Result<u32, CalculusError> {
    let d = b.nrows();
    let cb = complexify(b);
    let mut p = ComplexMatrix::identity(d, d);
    for k in 1..=d {
        p = &p * &cb;
        if max_abs(&p) < NILPOTENT_TOL {
            return Ok(k as u32);
        }
    }
    Err(CalculusError::NotNilpotent { index, residual: max_abs(&p) })
}

/// `sum_alpha f^(alpha)(0) / alpha! b_1^alpha_1 ... b_m^alpha_m` for nilpotent `b_j`.
pub fn ordered_fc_taylor(f: &CoefficientFn, bs: &[NumericMatrix]) -> Result<ComplexMatrix, CalculusError> {
    let d = check_matrices(bs)?;
    if f.nvars() != bs.len() {
        return Err(CalculusError::Arity { symbol: f.nvars(), matrices: bs.len() });
    }
    let orders: Vec<u32> = bs.iter().enumerate().map(|(i, b)| nilpotency_order(b, i)).collect::<Result<_, _>>()?;
    let powers: Vec<Vec<ComplexMatrix>> = bs
        .iter()
        .zip(&orders)
        .map(|(b, &o)| {
            let cb = complexify(b);
            let mut v = vec![ComplexMatrix::identity(d, d)];
            for _ in 1..o {
                let next = v.last().expect("nonempty") * &cb;
                v.push(next);
            }
            v
        })
        .collect();
    let origin = vec![0.0; bs.len()];
    let mut out = ComplexMatrix::zeros(d, d);
    let top: u32 = orders.iter().map(|o| o - 1).sum();
    for alpha in MultiIndex::all_up_to(bs.len(), top) {
        if alpha.0.iter().zip(&orders).any(|(a, o)| a >= o) {
            continue;
        }
        let c = f.eval_deriv(&origin, &alpha.0) / alpha.factorial().to_f64();
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        let mut term = ComplexMatrix::identity(d, d);
        for (j, &a) in alpha.0.iter().enumerate() {
            term = &term * &powers[j][a as usize];
        }
        out += term * c;
    }
    Ok(out)
}

/// Width of the transition layer of the cutoff: `chi` is within `1e-12` of 1 on
/// `[-A, A]` and within `1e-12` of 0 outside `[-A - 1, A + 1]`.
pub const CUTOFF_EPS: f64 = 0.07;
pub const TAIL_TOL: f64 = 1e-12;
pub const MAX_NODES: usize = 1024;
pub const QUAD_TOL: f64 = 1e-10;

/// One-variable factor of a separable symbol.
#[derive(Clone, Debug, PartialEq)]
pub enum Factor {
    /// `x^power exp(-x^2 / (2 sigma^2))`.
    Hermite { power: u32, sigma: f64 },
    /// `x^power chi(x)` with `chi` a smoothed indicator of `[-half_width, half_width]`.
    Cutoff { power: u32, half_width: f64 },
}

impl Factor {
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            Factor::Hermite { power, sigma } => x.powi(power as i32) * (-x * x / (2.0 * sigma * sigma)).exp(),
            Factor::Cutoff { power, half_width } => x.powi(power as i32) * cutoff(x, half_width),
        }
    }

    fn power(&self) -> u32 {
        match *self {
            Factor::Hermite { power, .. } | Factor::Cutoff { power, .. } => power,
        }
    }

    /// Closed-form envelope of `|hat|` beyond `s`.
    fn envelope(&self, s: f64) -> f64 {
        match *self {
            Factor::Hermite { power, sigma } => {
                let u = sigma * s / 2f64.sqrt();
                let n = power as f64;
                sigma * (2.0 * PI).sqrt() * (sigma / 2f64.sqrt()).powi(power as i32) * (2.0 * u + 2.0).powf(n) * (-u * u).exp()
            }
            Factor::Cutoff { power, half_width } => {
                let a = half_width + 0.5;
                let n = power as i32;
                2.0 * a * (a + 1.0 + CUTOFF_EPS * CUTOFF_EPS * s).powi(n) * (1..=power).map(f64::from).product::<f64>().max(1.0)
                    * (-0.5 * (CUTOFF_EPS * s).powi(2)).exp()
            }
        }
    }

    /// Smallest `S` with envelope below [`TAIL_TOL`] (coarse upward search).
    pub fn radius(&self) -> f64 {
        let mut s = 1.0;
        let floor = match *self {
            Factor::Hermite { power, sigma } => (2.0 * (2 * power + 1) as f64).sqrt() / sigma,
            Factor::Cutoff { .. } => 0.0,
        };
        while s < floor || self.envelope(s) > TAIL_TOL {
            s *= 1.05;
        }
        s
    }
}

fn cutoff(x: f64, half_width: f64) -> f64 {
    let a = half_width + 0.5;
    let k = 1.0 / (2f64.sqrt() * CUTOFF_EPS);
    0.5 * (erf((x + a) * k) - erf((x - a) * k))
}

/// Fourier transform `int g(x) exp(-isx) dx` of one factor, prepared for many `s`.
enum FactorTransform {
    Hermite { power: u32, sigma: f64 },
    Sampled { nodes: Vec<(f64, f64)> },
}

impl FactorTransform {
    fn new(f: &Factor, s_max: f64) -> Self {
        match *f {
            Factor::Hermite { power, sigma } => FactorTransform::Hermite { power, sigma },
            Factor::Cutoff { half_width, .. } => {
                let l = half_width + 1.25;
                let n = ((1.5 * s_max * l).ceil() as usize + 64).max(64);
                let rule = GaussLegendre::new(NonZeroUsize::new(n).expect("positive"));
                let nodes = rule.as_node_weight_pairs().iter().map(|&(x, w)| (l * x, l * w * f.value(l * x))).collect();
                FactorTransform::Sampled { nodes }
            }
        }
    }

    fn at(&self, s: f64) -> Complex64 {
        match *self {
            FactorTransform::Hermite { power, sigma } => {
                let u = sigma * s / 2f64.sqrt();
                let mag = sigma * (2.0 * PI).sqrt() * (sigma / 2f64.sqrt()).powi(power as i32) * hermite(power, u) * (-u * u).exp();
                Complex64::new(0.0, -1.0).powu(power) * mag
            }
            FactorTransform::Sampled { ref nodes } => {
                nodes.iter().map(|&(x, wv)| Complex64::from_polar(wv, -s * x)).sum()
            }
        }
    }
}

/// Real symbol `sum_t c_t prod_j g_{t,j}(x_j)` with closed-form or sampled Fourier transform.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierSymbol {
    nvars: usize,
    terms: Vec<(f64, Vec<Factor>)>,
}

impl FourierSymbol {
    pub fn new(nvars: usize, terms: Vec<(f64, Vec<Factor>)>) -> Self {
        assert!(terms.iter().all(|(_, f)| f.len() == nvars), "factor count");
        FourierSymbol { nvars, terms }
    }

    /// `exp(-sum x_j^2 / (2 sigma_j^2))`.
    pub fn gaussian(sigmas: &[f64]) -> Self {
        FourierSymbol::new(sigmas.len(), vec![(1.0, sigmas.iter().map(|&sigma| Factor::Hermite { power: 0, sigma }).collect())])
    }

    /// `p(x) exp(-sum x_j^2 / (2 sigma_j^2))`; real parts of the coefficients.
    pub fn poly_gaussian(p: &Polynomial, sigmas: &[f64]) -> Self {
        let terms = p
            .terms()
            .iter()
            .map(|(e, c)| (c.to_f64(), e.iter().zip(sigmas).map(|(&power, &sigma)| Factor::Hermite { power, sigma }).collect()))
            .collect();
        FourierSymbol::new(sigmas.len(), terms)
    }

    /// `p(x) prod_j chi_j(x_j)` with cutoffs equal to 1 on `[-A_j, A_j]`.
    pub fn poly_cutoff(p: &Polynomial, half_widths: &[f64]) -> Self {
        let terms = p
            .terms()
            .iter()
            .map(|(e, c)| {
                (c.to_f64(), e.iter().zip(half_widths).map(|(&power, &half_width)| Factor::Cutoff { power, half_width }).collect())
            })
            .collect();
        FourierSymbol::new(half_widths.len(), terms)
    }

    /// Cutoff box `prod [-||b_j||, ||b_j||]`.
    pub fn spectral_box(bs: &[NumericMatrix]) -> Vec<f64> {
        bs.iter().map(|b| MatrixNorm::Operator2.of(&complexify(b))).collect()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(c, fs)| c * fs.iter().zip(x).map(|(f, &xi)| f.value(xi)).product::<f64>()).sum()
    }

    /// Same function with exact derivatives, when every factor is Gaussian.
    pub fn to_coefficient(&self) -> Option<CoefficientFn> {
        let mut parts = Vec::new();
        for (c, fs) in &self.terms {
            let mut exps = vec![0u32; self.nvars];
            let mut scale = Vec::new();
            for (j, f) in fs.iter().enumerate() {
                match *f {
                    Factor::Hermite { power, sigma } => {
                        exps[j] = power;
                        scale.push(sigma * 2f64.sqrt());
                    }
                    Factor::Cutoff { .. } => return None,
                }
            }
            let mono = Polynomial::monomial(exps, crate::scalar::Scalar::from_f64(*c)?);
            parts.push(SmoothExpr::Product(
                std::sync::Arc::new(SmoothExpr::Poly(mono)),
                std::sync::Arc::new(SmoothExpr::Gaussian { center: vec![0.0; self.nvars], scale }),
            ));
        }
        Some(CoefficientFn::smooth(self.nvars, SmoothExpr::Sum(parts)))
    }

    /// Truncation radius per axis.
    pub fn radii(&self) -> Vec<f64> {
        (0..self.nvars).map(|j| self.terms.iter().map(|(_, fs)| fs[j].radius()).fold(1.0, f64::max)).collect()
    }

    /// Documented bound on the discarded tail per axis.
    pub fn tail_estimate(&self) -> f64 {
        let radii = self.radii();
        self.terms
            .iter()
            .map(|(c, fs)| c.abs() * fs.iter().zip(&radii).map(|(f, &r)| f.envelope(r)).fold(0.0, f64::max))
            .sum()
    }

    fn max_power(&self) -> u32 {
        self.terms.iter().flat_map(|(_, fs)| fs.iter().map(Factor::power)).max().unwrap_or(0)
    }
}

/// Quadrature result with the resolution it was accepted at.
#[derive(Clone, Debug)]
pub struct QuadratureResult {
    pub value: ComplexMatrix,
    pub nodes: usize,
    pub radii: Vec<f64>,
    pub change: f64,
    pub tail_estimate: f64,
}

fn check_real_spectrum(bs: &[NumericMatrix]) -> Result<(), CalculusError> {
    for (i, b) in bs.iter().enumerate() {
        let scale = 1.0 + b.abs().max();
        for z in b.complex_eigenvalues().iter() {
            // defective eigenvalues split by about eps^(1/d)
            if z.im.abs() > 1e-5 * scale {
                return Err(CalculusError::NonRealSpectrum { index: i, re: z.re, im: z.im });
            }
        }
    }
    Ok(())
}

fn rule(n: usize, radius: f64) -> Vec<(f64, f64)> {
    GaussLegendre::new(NonZeroUsize::new(n).expect("positive"))
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (radius * x, radius * w))
        .collect()
}

fn refine(
    bs: &[NumericMatrix],
    f: &FourierSymbol,
    max_nodes: usize,
    mut eval: impl FnMut(usize, &[f64]) -> Result<ComplexMatrix, CalculusError>,
) -> Result<QuadratureResult, CalculusError> {
    check_matrices(bs)?;
    if f.nvars() != bs.len() {
        return Err(CalculusError::Arity { symbol: f.nvars(), matrices: bs.len() });
    }
    check_real_spectrum(bs)?;
    let radii = f.radii();
    let omega = radii
        .iter()
        .zip(bs)
        .map(|(r, b)| r * (MatrixNorm::Operator2.of(&complexify(b)) + 2.0))
        .fold(0.0, f64::max);
    let mut n = ((omega as usize) / 2 + 2 * f.max_power() as usize + 16).next_power_of_two().clamp(32, max_nodes.max(32));
    let mut prev = eval(n, &radii)?;
    loop {
        let next_n = 2 * n;
        if next_n > max_nodes {
            let change = f64::INFINITY;
            return Err(CalculusError::TruncationBudgetExceeded { nodes: n, change });
        }
        let cur = eval(next_n, &radii)?;
        let change = max_abs(&(&cur - &prev));
        if change <= QUAD_TOL * (1.0 + max_abs(&cur)) {
            return Ok(QuadratureResult { value: cur, nodes: next_n, radii, change, tail_estimate: f.tail_estimate() });
        }
        prev = cur;
        n = next_n;
    }
}

/// `(2 pi)^{-m} int hat f(s) exp(i s_1 b_1) ... exp(i s_m b_m) ds` by Gauss-Legendre on `[-S_j, S_j]`.
/// Separable terms reduce to ordered products of one-dimensional integrals.
pub fn ordered_fc_quadrature(f: &FourierSymbol, bs: &[NumericMatrix]) -> Result<QuadratureResult, CalculusError> {
    ordered_fc_quadrature_with(f, bs, MAX_NODES)
}

/// Same as [`ordered_fc_quadrature`] with at most `max_nodes` nodes per axis.
pub fn ordered_fc_quadrature_with(f: &FourierSymbol, bs: &[NumericMatrix], max_nodes: usize) -> Result<QuadratureResult, CalculusError> {
    let d = bs.first().map_or(0, |b| b.nrows());
    refine(bs, f, max_nodes.min(MAX_NODES), |n, radii| {
        let nodes: Vec<Vec<(f64, f64)>> = radii.iter().map(|&r| rule(n, r)).collect();
        let exps: Vec<Vec<ComplexMatrix>> = nodes.iter().zip(bs).map(|(ns, b)| ns.iter().map(|&(s, _)| exp_is(b, s)).collect()).collect();
        let mut out = ComplexMatrix::zeros(d, d);
        for (c, fs) in &f.terms {
            let mut acc = ComplexMatrix::identity(d, d) * Complex64::new(*c, 0.0);
            for (j, g) in fs.iter().enumerate() {
                let tr = FactorTransform::new(g, radii[j]);
                let mut one = ComplexMatrix::zeros(d, d);
                for ((s, w), e) in nodes[j].iter().zip(&exps[j]) {
                    one += e * (tr.at(*s) * *w);
                }
                acc = acc * one * Complex64::new(1.0 / (2.0 * PI), 0.0);
            }
            out += acc;
        }
        Ok(out)
    })
}

/// Largest commutator entry among the `b_j`.
pub fn max_commutator(bs: &[NumericMatrix]) -> Option<(usize, usize, f64)> {
    let mut worst = None;
    for i in 0..bs.len() {
        for j in i + 1..bs.len() {
            let c = (&bs[i] * &bs[j] - &bs[j] * &bs[i]).abs().max();
            if worst.is_none_or(|(_, _, w)| c > w) {
                worst = Some((i, j, c));
            }
        }
    }
    worst
}

pub const COMMUTE_TOL: f64 = 1e-12;
/// Cap on tensor-grid nodes for the joint exponential.
pub const MAX_GRID: usize = 1 << 18;

/// `(2 pi)^{-m} int hat f(s) exp(i (s_1 b_1 + ... + s_m b_m)) ds` for commuting `b_j`,
/// on the full tensor grid.
pub fn weyl_fc_quadrature(f: &FourierSymbol, bs: &[NumericMatrix]) -> Result<QuadratureResult, CalculusError> {
    weyl_fc_quadrature_with(f, bs, MAX_NODES)
}

pub fn weyl_fc_quadrature_with(f: &FourierSymbol, bs: &[NumericMatrix], max_nodes: usize) -> Result<QuadratureResult, CalculusError> {
    check_matrices(bs)?;
    if let Some((i, j, c)) = max_commutator(bs) {
        if c > COMMUTE_TOL {
            return Err(CalculusError::NotCommuting(i, j));
        }
    }
    let d = bs.first().map_or(0, |b| b.nrows());
    let m = bs.len();
    refine(bs, f, max_nodes.min(MAX_NODES), |n, radii| {
        if n.checked_pow(m as u32).is_none_or(|t| t > MAX_GRID) {
            return Err(CalculusError::TruncationBudgetExceeded { nodes: n, change: f64::INFINITY });
        }
        let nodes: Vec<Vec<(f64, f64)>> = radii.iter().map(|&r| rule(n, r)).collect();
        let transforms: Vec<Vec<Vec<Complex64>>> = f
            .terms
            .iter()
            .map(|(_, fs)| fs.iter().enumerate().map(|(j, g)| {
                let tr = FactorTransform::new(g, radii[j]);
                nodes[j].iter().map(|&(s, _)| tr.at(s)).collect()
            }).collect())
            .collect();
        let mut out = ComplexMatrix::zeros(d, d);
        let mut idx = vec![0usize; m];
        loop {
            let mut arg = NumericMatrix::zeros(d, d);
            let mut w = 1.0;
            for j in 0..m {
                let (s, wj) = nodes[j][idx[j]];
                arg += &bs[j] * s;
                w *= wj;
            }
            let hat: Complex64 = f
                .terms
                .iter()
                .zip(&transforms)
                .map(|((c, _), tr)| *c * (0..m).map(|j| tr[j][idx[j]]).product::<Complex64>())
                .sum();
            out += exp_is(&arg, 1.0) * (hat * w);
            let mut j = 0;
            while j < m {
                idx[j] += 1;
                if idx[j] < n {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
            if j == m {
                break;
            }
        }
        Ok(out * Complex64::new((2.0 * PI).powi(-(m as i32)), 0.0))
    })
}

/// Entry-wise value of the symbol on the joint spectrum of commuting diagonal matrices.
pub fn diagonal_calculus(f: &FourierSymbol, diagonals: &[Vec<f64>]) -> ComplexMatrix {
    let d = diagonals.first().map_or(0, Vec::len);
    ComplexMatrix::from_fn(d, d, |i, j| {
        if i == j {
            let x: Vec<f64> = diagonals.iter().map(|v| v[i]).collect();
            Complex64::new(f.value(&x), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Single nilpotent Jordan block of size `d`.
pub fn jordan_block(d: usize) -> NumericMatrix {
    NumericMatrix::from_fn(d, d, |i, j| if j == i + 1 { 1.0 } else { 0.0 })
}

/// Largest entry modulus.
pub fn max_entry(m: &ComplexMatrix) -> f64 {
    max_abs(m)
}
