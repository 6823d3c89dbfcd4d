//! Truncated elements `sum_beta Phi(f_beta) e^beta` with smooth or polynomial coefficients.
//!
//! Products of polynomial elements go through the enveloping algebra exactly. For a
//! nilpotent algebra the product of smooth elements is a finite sum of constant-coefficient
//! bidifferential operators, whose coefficients are read off from polynomial products.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pbw::{MultiIndex, PbwAlgebra, PbwError, UEAElement};
use crate::poly::{FloatPoly, Polynomial, PolynomialSpec};
use crate::scalar::{binomial, Field, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NcError {
    #[error("smooth coefficients require a nilpotent algebra")]
    SmoothUnsupported,
    #[error("smooth products need a basis adapted to the lower central series of the algebra")]
    NonAdaptedBasis,
    #[error("elements have different modes")]
    ModeMismatch,
    #[error("elements belong to different algebras or splits")]
    AlgebraMismatch,
    #[error(transparent)]
    Pbw(#[from] PbwError),
    #[error("malformed element: {0}")]
    Format(String),
}

/// Membership test used by piecewise coefficients.
pub type RegionTest = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;
/// Value oracle without derivative information.
pub type ValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Real smooth function of the complement variables with exact derivative rules.
#[derive(Clone)]
pub enum SmoothExpr {
    Poly(Polynomial),
    /// `exp(-sum ((x_i - c_i) / s_i)^2)`.
    Gaussian { center: Vec<f64>, scale: Vec<f64> },
    /// Value oracle only; derivatives by central differences.
    Numeric(ValueFn),
    Deriv(Vec<u32>, Arc<SmoothExpr>),
    Shift(Vec<f64>, Arc<SmoothExpr>),
    Scale(f64, Arc<SmoothExpr>),
    Sum(Vec<SmoothExpr>),
    Product(Arc<SmoothExpr>, Arc<SmoothExpr>),
    /// First matching region wins; NaN outside every region.
    Piecewise(Vec<(RegionTest, SmoothExpr)>),
}

impl fmt::Debug for SmoothExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SmoothExpr::Poly(p) => write!(f, "Poly({p})"),
            SmoothExpr::Gaussian { center, scale } => write!(f, "Gaussian({center:?}, {scale:?})"),
            SmoothExpr::Numeric(_) => write!(f, "Numeric"),
            SmoothExpr::Deriv(a, e) => write!(f, "D{a:?}({e:?})"),
            SmoothExpr::Shift(s, e) => write!(f, "Shift({s:?}, {e:?})"),
            SmoothExpr::Scale(c, e) => write!(f, "{c}*({e:?})"),
            SmoothExpr::Sum(v) => write!(f, "Sum{v:?}"),
            SmoothExpr::Product(a, b) => write!(f, "({a:?})*({b:?})"),
            SmoothExpr::Piecewise(v) => write!(f, "Piecewise[{}]", v.len()),
        }
    }
}

/// Physicists' Hermite polynomial `H_n(u)`.
pub(crate) fn hermite(n: u32, u: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, 2.0 * u);
    if n == 0 {
        return h0;
    }
    for k in 1..n {
        let h2 = 2.0 * u * h1 - 2.0 * k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

const FD_BASE: f64 = 1.0 / 131072.0;

fn central_difference(f: &ValueFn, x: &[f64], alpha: &[u32]) -> f64 {
    let Some(axis) = alpha.iter().position(|&a| a > 0) else {
        return f(x);
    };
    let order: u32 = alpha.iter().sum();
    let h = FD_BASE.powf(1.0 / order as f64) * x[axis].abs().max(1.0);
    let mut lower = alpha.to_vec();
    lower[axis] -= 1;
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    xp[axis] += h;
    xm[axis] -= h;
    (central_difference(f, &xp, &lower) - central_difference(f, &xm, &lower)) / (2.0 * h)
}

impl SmoothExpr {
    /// Value of the `alpha`-derivative at `x`.
    pub fn eval(&self, x: &[f64], alpha: &[u32]) -> f64 {
        match self {
            SmoothExpr::Poly(p) => p.derivative(alpha).eval_f64(x),
            SmoothExpr::Gaussian { center, scale } => {
                let mut acc = 1.0;
                for i in 0..x.len() {
                    let u = (x[i] - center[i]) / scale[i];
                    let n = alpha[i];
                    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                    acc *= sign * hermite(n, u) * (-u * u).exp() / scale[i].powi(n as i32);
                }
                acc
            }
            SmoothExpr::Numeric(f) => central_difference(f, x, alpha),
            SmoothExpr::Deriv(b, e) => {
                let total: Vec<u32> = alpha.iter().zip(b).map(|(a, b)| a + b).collect();
                e.eval(x, &total)
            }
            SmoothExpr::Shift(s, e) => {
                let y: Vec<f64> = x.iter().zip(s).map(|(a, b)| a + b).collect();
                e.eval(&y, alpha)
            }
            SmoothExpr::Scale(c, e) => c * e.eval(x, alpha),
            SmoothExpr::Sum(v) => v.iter().map(|e| e.eval(x, alpha)).sum(),
            SmoothExpr::Product(a, b) => {
                let mut acc = 0.0;
                for g in MultiIndex::all_up_to(alpha.len(), alpha.iter().sum()) {
                    if g.0.iter().zip(alpha).any(|(g, a)| g > a) {
                        continue;
                    }
                    let rest: Vec<u32> = alpha.iter().zip(&g.0).map(|(a, g)| a - g).collect();
                    let c: f64 = alpha.iter().zip(&g.0).map(|(&a, &g)| binomial(a, g).to_f64()).product();
                    acc += c * a.eval(x, &g.0) * b.eval(x, &rest);
                }
                acc
            }
            SmoothExpr::Piecewise(parts) => {
                parts.iter().find(|(r, _)| r(x)).map_or(f64::NAN, |(_, e)| e.eval(x, alpha))
            }
        }
    }

    pub fn uses_finite_differences(&self) -> bool {
        match self {
            SmoothExpr::Numeric(_) => true,
            SmoothExpr::Poly(_) | SmoothExpr::Gaussian { .. } => false,
            SmoothExpr::Deriv(_, e) | SmoothExpr::Shift(_, e) | SmoothExpr::Scale(_, e) => e.uses_finite_differences(),
            SmoothExpr::Sum(v) => v.iter().any(SmoothExpr::uses_finite_differences),
            SmoothExpr::Product(a, b) => a.uses_finite_differences() || b.uses_finite_differences(),
            SmoothExpr::Piecewise(v) => v.iter().any(|(_, e)| e.uses_finite_differences()),
        }
    }
}

/// Coefficient `f_beta`: exact polynomial or smooth expression.
#[derive(Clone, Debug)]
pub enum CoefficientFn {
    Poly(Polynomial),
    Smooth { nvars: usize, expr: Arc<SmoothExpr> },
}

impl CoefficientFn {
    pub fn smooth(nvars: usize, expr: SmoothExpr) -> Self {
        CoefficientFn::Smooth { nvars, expr: Arc::new(expr) }
    }

    pub fn gaussian(center: Vec<f64>, scale: Vec<f64>) -> Self {
        CoefficientFn::smooth(center.len(), SmoothExpr::Gaussian { center, scale })
    }

    pub fn numeric(nvars: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        CoefficientFn::smooth(nvars, SmoothExpr::Numeric(Arc::new(f)))
    }

    pub fn nvars(&self) -> usize {
        match self {
            CoefficientFn::Poly(p) => p.nvars(),
            CoefficientFn::Smooth { nvars, .. } => *nvars,
        }
    }

    pub fn as_poly(&self) -> Option<&Polynomial> {
        match self {
            CoefficientFn::Poly(p) => Some(p),
            CoefficientFn::Smooth { .. } => None,
        }
    }

    /// Only exact zeros are recognised.
    pub fn is_zero(&self) -> bool {
        self.as_poly().is_some_and(Polynomial::is_zero)
    }

    pub fn uses_finite_differences(&self) -> bool {
        match self {
            CoefficientFn::Poly(_) => false,
            CoefficientFn::Smooth { expr, .. } => expr.uses_finite_differences(),
        }
    }

    fn expr(&self) -> Arc<SmoothExpr> {
        match self {
            CoefficientFn::Poly(p) => Arc::new(SmoothExpr::Poly(p.clone())),
            CoefficientFn::Smooth { expr, .. } => expr.clone(),
        }
    }

    pub fn add(&self, o: &CoefficientFn) -> CoefficientFn {
        match (self, o) {
            (CoefficientFn::Poly(a), CoefficientFn::Poly(b)) => CoefficientFn::Poly(a.add(b)),
            _ if self.is_zero() => o.clone(),
            _ if o.is_zero() => self.clone(),
            _ => CoefficientFn::smooth(self.nvars(), SmoothExpr::Sum(vec![(*self.expr()).clone(), (*o.expr()).clone()])),
        }
    }

    pub fn mul(&self, o: &CoefficientFn) -> CoefficientFn {
        match (self, o) {
            (CoefficientFn::Poly(a), CoefficientFn::Poly(b)) => CoefficientFn::Poly(a.mul(b)),
            _ if self.is_zero() || o.is_zero() => CoefficientFn::Poly(Polynomial::zero(self.nvars())),
            _ => CoefficientFn::smooth(self.nvars(), SmoothExpr::Product(self.expr(), o.expr())),
        }
    }

    /// Smooth coefficients are real, so only the real part of `s` is used for them.
    pub fn scale(&self, s: &Scalar) -> CoefficientFn {
        match self {
            CoefficientFn::Poly(p) => CoefficientFn::Poly(p.scale(s)),
            _ if s.is_zero() => CoefficientFn::Poly(Polynomial::zero(self.nvars())),
            _ if s.is_one() => self.clone(),
            CoefficientFn::Smooth { nvars, expr } => {
                debug_assert!(s.is_real(), "smooth coefficients are real");
                CoefficientFn::smooth(*nvars, SmoothExpr::Scale(s.to_f64(), expr.clone()))
            }
        }
    }

    pub fn derivative(&self, alpha: &[u32]) -> CoefficientFn {
        match self {
            CoefficientFn::Poly(p) => CoefficientFn::Poly(p.derivative(alpha)),
            _ if alpha.iter().all(|&a| a == 0) => self.clone(),
            CoefficientFn::Smooth { nvars, expr } => CoefficientFn::smooth(*nvars, SmoothExpr::Deriv(alpha.to_vec(), expr.clone())),
        }
    }

    /// `x -> f(x + mu)`; exact binomial expansion on polynomials.
    pub fn shift(&self, mu: &[Scalar]) -> CoefficientFn {
        match self {
            CoefficientFn::Poly(p) => CoefficientFn::Poly(p.shift(mu)),
            _ if mu.iter().all(Scalar::is_zero) => self.clone(),
            CoefficientFn::Smooth { nvars, expr } => {
                CoefficientFn::smooth(*nvars, SmoothExpr::Shift(mu.iter().map(Scalar::to_f64).collect(), expr.clone()))
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.eval_deriv(x, &vec![0; x.len()])
    }

    pub fn eval_deriv(&self, x: &[f64], alpha: &[u32]) -> Complex64 {
        match self {
            CoefficientFn::Poly(p) => p.derivative(alpha).to_float().eval(x),
            CoefficientFn::Smooth { expr, .. } => Complex64::new(expr.eval(x, alpha), 0.0),
        }
    }

    /// Evaluator for the `alpha`-derivative, prepared once for repeated sampling.
    pub fn compile(&self, alpha: &[u32]) -> Evaluator {
        match self {
            CoefficientFn::Poly(p) => Evaluator::Poly(p.derivative(alpha).to_float()),
            CoefficientFn::Smooth { expr, .. } => Evaluator::Smooth(expr.clone(), alpha.to_vec()),
        }
    }

    /// Taylor polynomial of order `degree` about `center`.
    pub fn taylor(&self, center: &[f64], degree: u32) -> Polynomial {
        let n = center.len();
        let shift: Vec<Scalar> = center.iter().map(|&c| Scalar::from_f64(-c).expect("finite center")).collect();
        let mut local = Polynomial::zero(n);
        for a in MultiIndex::all_up_to(n, degree) {
            let v = self.eval_deriv(center, &a.0).re / a.factorial().to_f64();
            local.add_term(a.0.clone(), &Scalar::from_f64(v).expect("finite derivative"));
        }
        local.shift(&shift)
    }
}

/// Pre-processed coefficient used inside sampling loops.
pub enum Evaluator {
    Poly(FloatPoly),
    Smooth(Arc<SmoothExpr>, Vec<u32>),
}

impl Evaluator {
    pub fn eval(&self, x: &[f64]) -> Complex64 {
        match self {
            Evaluator::Poly(p) => p.eval(x),
            Evaluator::Smooth(e, a) => Complex64::new(e.eval(x, a), 0.0),
        }
    }
}

/// Product of closed rational intervals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompactBox {
    pub lo: Vec<Scalar>,
    pub hi: Vec<Scalar>,
}

impl CompactBox {
    pub fn new(lo: Vec<Scalar>, hi: Vec<Scalar>) -> Result<CompactBox, NcError> {
        if lo.len() != hi.len() {
            return Err(NcError::Format("box bounds differ in length".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !a.is_real() || !b.is_real() || a.re() > b.re()) {
            return Err(NcError::Format("box needs real bounds with lo <= hi".into()));
        }
        Ok(CompactBox { lo, hi })
    }

    /// Box with the same interval on each of `n` axes.
    pub fn cube(n: usize, lo: i64, hi: i64) -> CompactBox {
        CompactBox { lo: vec![Scalar::from_int(lo); n], hi: vec![Scalar::from_int(hi); n] }
    }

    pub fn interval(lo: Scalar, hi: Scalar) -> CompactBox {
        CompactBox { lo: vec![lo], hi: vec![hi] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Translate by `-mu`.
    pub fn shifted_down(&self, mu: &[Scalar]) -> CompactBox {
        CompactBox {
            lo: self.lo.iter().zip(mu).map(|(a, m)| a - m).collect(),
            hi: self.hi.iter().zip(mu).map(|(a, m)| a - m).collect(),
        }
    }

    pub fn contains_box(&self, o: &CompactBox) -> bool {
        (0..self.dim()).all(|i| self.lo[i].re() <= o.lo[i].re() && o.hi[i].re() <= self.hi[i].re())
    }

    /// Parses `a:b,c:d` (one `lo:hi` pair per axis).
    pub fn parse(text: &str) -> Result<CompactBox, NcError> {
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        for part in text.split(',') {
            let (a, b) = part.split_once(':').ok_or_else(|| NcError::Format(format!("expected lo:hi, got `{part}`")))?;
            lo.push(a.trim().parse::<Scalar>().map_err(|e| NcError::Format(e.to_string()))?);
            hi.push(b.trim().parse::<Scalar>().map_err(|e| NcError::Format(e.to_string()))?);
        }
        CompactBox::new(lo, hi)
    }
}

impl fmt::Display for CompactBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.lo.iter().zip(&self.hi).map(|(a, b)| format!("[{a}, {b}]")).collect();
        write!(f, "{}", parts.join(" x "))
    }
}

/// Grid sup estimate; a lower bound on the true supremum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupEstimate {
    pub value: f64,
    /// Points per axis at the accepted level.
    pub points: usize,
    pub converged: bool,
}

pub const GRID_START: usize = 17;
pub const GRID_CAP: usize = 4096;
pub const GRID_TOL: f64 = 1e-3;

fn grid_axes(bx: &CompactBox, n: usize) -> Vec<Vec<f64>> {
    (0..bx.dim())
        .map(|i| {
            let (a, b) = (bx.lo[i].to_f64(), bx.hi[i].to_f64());
            if n == 1 || a == b {
                vec![a]
            } else {
                (0..n).map(|t| a + (b - a) * t as f64 / (n - 1) as f64).collect()
            }
        })
        .collect()
}

/// Visits the nodes of one refinement level in row-major order, reusing one buffer.
pub fn for_each_node(bx: &CompactBox, n: usize, mut f: impl FnMut(&[f64])) {
    let axes = grid_axes(bx, n);
    let mut idx = vec![0usize; axes.len()];
    let mut x: Vec<f64> = axes.iter().map(|a| a[0]).collect();
    loop {
        f(&x);
        let mut d = axes.len();
        loop {
            if d == 0 {
                return;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < axes[d].len() {
                x[d] = axes[d][idx[d]];
                break;
            }
            idx[d] = 0;
            x[d] = axes[d][0];
        }
    }
}

/// Sample positions of one refinement level: `n` equispaced nodes on each axis.
pub fn grid_nodes(bx: &CompactBox, n: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for_each_node(bx, n, |x| out.push(x.to_vec()));
    out
}

/// Refinement schedule 17, 33, 65, ... capped at [`GRID_CAP`] points per axis.
pub fn grid_levels() -> impl Iterator<Item = usize> {
    std::iter::successors(Some(GRID_START), |&n| (n < GRID_CAP).then(|| (2 * (n - 1) + 1).min(GRID_CAP)))
}

/// Adaptive sup of `f` over a box. Refines until the relative change drops below
/// [`GRID_TOL`]; `budget` caps the total number of nodes per level.
pub fn grid_sup(bx: &CompactBox, budget: usize, mut f: impl FnMut(&[f64]) -> f64) -> SupEstimate {
    let mut prev: Option<f64> = None;
    let mut last = SupEstimate { value: 0.0, points: 0, converged: false };
    for n in grid_levels() {
        if n.checked_pow(bx.dim() as u32).is_none_or(|t| t > budget) && prev.is_some() {
            break;
        }
        let mut v = 0.0f64;
        for_each_node(bx, n, |x| v = v.max(f(x)));
        last = SupEstimate { value: v, points: n, converged: false };
        if let Some(p) = prev {
            if (v - p).abs() <= GRID_TOL * v.abs().max(f64::MIN_POSITIVE) || v == p {
                last.converged = true;
                return last;
            }
        }
        prev = Some(v);
    }
    last
}

/// Default node budget per refinement level.
pub const GRID_BUDGET: usize = 1 << 20;

/// Real smooth functions or holomorphic (complex polynomial) coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionMode {
    SmoothReal,
    HolomorphicComplex,
}

impl FunctionMode {
    pub fn for_field(f: Field) -> Self {
        match f {
            Field::Real => FunctionMode::SmoothReal,
            Field::Complex => FunctionMode::HolomorphicComplex,
        }
    }
}

/// Truncated element: coefficients for nilradical exponents of weighted degree at most `order`.
#[derive(Clone, Debug)]
pub struct NCFunctionElement {
    alg: Arc<PbwAlgebra>,
    order: u32,
    mode: FunctionMode,
    coeffs: BTreeMap<MultiIndex, CoefficientFn>,
}

impl NCFunctionElement {
    pub fn zero(alg: &Arc<PbwAlgebra>, order: u32) -> Self {
        NCFunctionElement { alg: alg.clone(), order, mode: FunctionMode::for_field(alg.lie().field()), coeffs: BTreeMap::new() }
    }

    pub fn one(alg: &Arc<PbwAlgebra>, order: u32) -> Self {
        let mut out = NCFunctionElement::zero(alg, order);
        out.insert(MultiIndex::zeros(alg.nil_dim()), CoefficientFn::Poly(Polynomial::one(alg.split())));
        out
    }

    /// Single term `Phi(f) e^beta`.
    pub fn term(alg: &Arc<PbwAlgebra>, order: u32, beta: MultiIndex, f: CoefficientFn) -> Self {
        let mut out = NCFunctionElement::zero(alg, order);
        out.insert(beta, f);
        out
    }

    /// Collects the coefficient polynomial of each `e^beta`, dropping exponents above `order`.
    pub fn from_uea(a: &UEAElement, order: u32) -> Self {
        let mut out = NCFunctionElement::zero(a.algebra(), order);
        for (beta, f) in a.coefficients() {
            out.insert(beta, CoefficientFn::Poly(f));
        }
        out
    }

    /// Inverse of [`Self::from_uea`]; `None` if a coefficient is not polynomial.
    pub fn to_uea(&self) -> Option<UEAElement> {
        let mut polys = BTreeMap::new();
        for (b, c) in &self.coeffs {
            polys.insert(b.clone(), c.as_poly()?.clone());
        }
        Some(UEAElement::from_coefficients(&self.alg, &polys))
    }

    /// Adds to the coefficient at `beta`; ignored above the truncation order.
    pub fn insert(&mut self, beta: MultiIndex, f: CoefficientFn) {
        assert_eq!(beta.len(), self.alg.nil_dim(), "exponent length");
        if self.alg.nil_filtration_degree(&beta) > self.order || f.is_zero() {
            return;
        }
        let next = match self.coeffs.remove(&beta) {
            Some(old) => old.add(&f),
            None => f,
        };
        if !next.is_zero() {
            self.coeffs.insert(beta, next);
        }
    }

    pub fn algebra(&self) -> &Arc<PbwAlgebra> {
        &self.alg
    }

    pub fn split(&self) -> usize {
        self.alg.split()
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn mode(&self) -> FunctionMode {
        self.mode
    }

    pub fn coefficients(&self) -> &BTreeMap<MultiIndex, CoefficientFn> {
        &self.coeffs
    }

    pub fn coefficient(&self, beta: &MultiIndex) -> Option<&CoefficientFn> {
        self.coeffs.get(beta)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_polynomial(&self) -> bool {
        self.coeffs.values().all(|c| c.as_poly().is_some())
    }

    pub fn truncate(&self, order: u32) -> Self {
        let mut out = NCFunctionElement { order: order.min(self.order), coeffs: BTreeMap::new(), ..self.clone() };
        for (b, c) in &self.coeffs {
            out.insert(b.clone(), c.clone());
        }
        out
    }

    pub fn add(&self, o: &NCFunctionElement) -> Result<Self, NcError> {
        self.compatible(o)?;
        let mut out = self.truncate(self.order.min(o.order));
        for (b, c) in &o.coeffs {
            out.insert(b.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        let mut out = NCFunctionElement { coeffs: BTreeMap::new(), ..self.clone() };
        for (b, c) in &self.coeffs {
            out.insert(b.clone(), c.scale(s));
        }
        out
    }

    /// Same element with polynomial coefficients equal exactly.
    pub fn exact_eq(&self, o: &NCFunctionElement) -> bool {
        self.coeffs.len() == o.coeffs.len()
            && self.coeffs.iter().all(|(b, c)| match (c.as_poly(), o.coeffs.get(b).and_then(CoefficientFn::as_poly)) {
                (Some(x), Some(y)) => x == y,
                _ => false,
            })
    }

    fn compatible(&self, o: &NCFunctionElement) -> Result<(), NcError> {
        if self.mode != o.mode {
            return Err(NcError::ModeMismatch);
        }
        if !(Arc::ptr_eq(&self.alg, &o.alg) || self.alg == o.alg) {
            return Err(NcError::AlgebraMismatch);
        }
        Ok(())
    }

    /// Product modulo exponents above `min(order_a, order_b)`.
    pub fn multiply(&self, o: &NCFunctionElement) -> Result<NCFunctionElement, NcError> {
        self.compatible(o)?;
        let order = self.order.min(o.order);
        if let (Some(a), Some(b)) = (self.to_uea(), o.to_uea()) {
            return Ok(NCFunctionElement { mode: self.mode, ..NCFunctionElement::from_uea(&a.mul_truncated(&b, order), order) });
        }
        if !self.alg.lie().is_nilpotent() {
            return Err(NcError::SmoothUnsupported);
        }
        let tables = ProductTables::new(&self.alg, order)?;
        let mut out = NCFunctionElement { order, coeffs: BTreeMap::new(), ..self.clone() };
        for (beta, f) in &self.coeffs {
            for (gamma, g) in &o.coeffs {
                for entry in tables.table(beta, gamma).iter() {
                    let term = f.derivative(&entry.left).mul(&g.derivative(&entry.right)).scale(&entry.coeff);
                    out.insert(entry.delta.clone(), term);
                }
            }
        }
        Ok(out)
    }

    /// `sum_{|gamma| = l} sup_M |d^gamma f_beta|`.
    pub fn seminorm(&self, beta: &MultiIndex, bx: &CompactBox, l: u32) -> SeminormEstimate {
        match self.coeffs.get(beta) {
            None => SeminormEstimate { value: 0.0, points: 0, converged: true },
            Some(f) => coefficient_seminorm(f, bx, l),
        }
    }

    /// Character: evaluation of the exponent-zero coefficient at `x`.
    pub fn character(&self, x: &[f64]) -> Complex64 {
        self.coeffs.get(&MultiIndex::zeros(self.alg.nil_dim())).map_or(Complex64::new(0.0, 0.0), |c| c.eval(x))
    }

    pub fn to_spec(&self) -> NcSpec {
        NcSpec {
            split: self.split(),
            order: self.order,
            mode: self.mode,
            terms: self
                .coeffs
                .iter()
                .map(|(b, c)| NcTermSpec { beta: b.0.clone(), poly: c.as_poly().map(Polynomial::to_spec), opaque: c.as_poly().is_none() })
                .collect(),
        }
    }

    pub fn from_spec(alg: &Arc<PbwAlgebra>, spec: &NcSpec) -> Result<NCFunctionElement, NcError> {
        if spec.split != alg.split() {
            return Err(NcError::AlgebraMismatch);
        }
        let mut out = NCFunctionElement::zero(alg, spec.order);
        out.mode = spec.mode;
        for t in &spec.terms {
            if t.beta.len() != alg.nil_dim() {
                return Err(NcError::Format(format!("beta has length {}, expected {}", t.beta.len(), alg.nil_dim())));
            }
            let p = t.poly.as_ref().ok_or_else(|| NcError::Format("opaque coefficients cannot be imported".into()))?;
            let p = Polynomial::from_spec(alg.split(), p).map_err(NcError::Format)?;
            out.insert(MultiIndex(t.beta.clone()), CoefficientFn::Poly(p));
        }
        Ok(out)
    }
}

impl fmt::Display for NCFunctionElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let names: Vec<String> = (1..=self.split()).map(|i| format!("l{i}")).collect();
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|(b, c)| {
                let coef = match c.as_poly() {
                    Some(p) => p.to_string_with(&names),
                    None => "<smooth>".to_string(),
                };
                format!("{:?}: {coef}", b.0)
            })
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Seminorm value with the grid level it was accepted at.
pub type SeminormEstimate = SupEstimate;

/// `sum_{|gamma| = l} sup |d^gamma f|` on the grid.
pub fn coefficient_seminorm(f: &CoefficientFn, bx: &CompactBox, l: u32) -> SeminormEstimate {
    let mut total = SupEstimate { value: 0.0, points: 0, converged: true };
    for gamma in crate::poly::exponents_exact(bx.dim(), l) {
        let ev = f.compile(&gamma);
        let s = grid_sup(bx, GRID_BUDGET, |x| ev.eval(x).norm());
        total.value += s.value;
        total.points = total.points.max(s.points);
        total.converged &= s.converged;
    }
    total
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct NcSpec {
    pub split: usize,
    #[serde(rename = "N")]
    pub order: u32,
    #[serde(default = "default_mode")]
    pub mode: FunctionMode,
    pub terms: Vec<NcTermSpec>,
}

fn default_mode() -> FunctionMode {
    FunctionMode::SmoothReal
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct NcTermSpec {
    pub beta: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poly: Option<PolynomialSpec>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub opaque: bool,
}

/// One bidifferential term `coeff * d^left f * d^right g` contributing to `e^delta`.
#[derive(Clone, Debug, PartialEq)]
pub struct BidiffTerm {
    pub delta: MultiIndex,
    pub left: Vec<u32>,
    pub right: Vec<u32>,
    pub coeff: Scalar,
}

/// Bidifferential tables of a nilpotent algebra for a fixed truncation order.
pub struct ProductTables {
    alg: Arc<PbwAlgebra>,
    weights: Vec<u32>,
    order: u32,
    cache: std::sync::Mutex<HashMap<(MultiIndex, MultiIndex), Arc<Vec<BidiffTerm>>>>,
}

impl ProductTables {
    pub fn new(alg: &Arc<PbwAlgebra>, order: u32) -> Result<ProductTables, NcError> {
        let whole = PbwAlgebra::with_split(alg.lie().clone(), 0).map_err(|e| match e {
            PbwError::NonAdaptedBasis => NcError::NonAdaptedBasis,
            PbwError::InvalidSplit { .. } => NcError::SmoothUnsupported,
            other => NcError::Pbw(other),
        })?;
        Ok(ProductTables { alg: alg.clone(), weights: whole.weights().to_vec(), order, cache: Default::default() })
    }

    fn weight(&self, full: &MultiIndex) -> u32 {
        full.0.iter().zip(&self.weights).map(|(a, w)| a * w).sum()
    }

    /// Terms of `(Phi(f) e^beta)(Phi(g) e^gamma)`.
    pub fn table(&self, beta: &MultiIndex, gamma: &MultiIndex) -> Arc<Vec<BidiffTerm>> {
        let key = (beta.clone(), gamma.clone());
        if let Some(t) = self.cache.lock().expect("table cache").get(&key) {
            return t.clone();
        }
        let t = Arc::new(self.build(beta, gamma));
        self.cache.lock().expect("table cache").insert(key, t.clone());
        t
    }

    fn build(&self, beta: &MultiIndex, gamma: &MultiIndex) -> Vec<BidiffTerm> {
        let k = self.alg.split();
        let nd = self.alg.nil_dim();
        let zk = MultiIndex::zeros(k);
        // the product lies in the augmentation filtration of weight wt(u)+wt(beta)+wt(v)+wt(gamma),
        // and its constant coefficient at e^delta has weight wt(delta)
        let max_delta = MultiIndex::all_up_to(nd, self.order)
            .into_iter()
            .filter(|d| self.alg.nil_filtration_degree(d) <= self.order)
            .map(|d| self.weight(&zk.concat(&d)))
            .max()
            .unwrap_or(0);
        let base = self.weight(&zk.concat(beta)) + self.weight(&zk.concat(gamma));
        let budget = max_delta.saturating_sub(base);
        let mut out = Vec::new();
        for u in MultiIndex::all_up_to(k, budget) {
            let wu = self.weight(&u.concat(&MultiIndex::zeros(nd)));
            for v in MultiIndex::all_up_to(k, budget) {
                let wv = self.weight(&v.concat(&MultiIndex::zeros(nd)));
                if wu + wv > budget {
                    continue;
                }
                let cu = u.factorial().recip().expect("nonzero");
                let cv = v.factorial().recip().expect("nonzero");
                let a = UEAElement::monomial(&self.alg, u.concat(beta), cu);
                let b = UEAElement::monomial(&self.alg, v.concat(gamma), cv);
                let prod = a.mul_truncated(&b, self.order);
                for (full, c) in prod.terms() {
                    let (lam, delta) = full.split_at(k);
                    if lam.is_zero() {
                        out.push(BidiffTerm { delta, left: u.0.clone(), right: v.0.clone(), coeff: c.clone() });
                    }
                }
            }
        }
        out
    }
}

/// `e_j Phi(f)` in coefficient form.
pub fn commutation_rule(alg: &Arc<PbwAlgebra>, j: usize, f: &Polynomial, order: u32) -> NCFunctionElement {
    let prod = UEAElement::generator(alg, j).mul(&UEAElement::phi(alg, f));
    NCFunctionElement::from_uea(&prod, order)
}
