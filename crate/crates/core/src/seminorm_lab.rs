//! Seminorms of matrix-valued functions, nested triangular algebras and the
//! domination checks comparing coefficient seminorms with symbol seminorms.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::Signed;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::SparseMatrix;
use crate::ncfunc::{grid_sup, CoefficientFn, CompactBox, Evaluator, NCFunctionElement, GRID_BUDGET};
use crate::pbw::MultiIndex;
use crate::poly::exponents_exact;
use crate::reps::{tilde_pi_nc, AdaptedSystem, MatrixFunction, RepError};
use crate::scalar::Scalar;

/// Absolute slack for comparisons between grid estimates.
pub const SLACK: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeminormError {
    #[error("box chains differ")]
    ChainMismatch,
    #[error("boxes must decrease along the chain")]
    NotNested,
    #[error("entry ({0}, {1}) lies below the diagonal or outside the matrix")]
    BadEntry(usize, usize),
    #[error("the system does not match the element's algebra")]
    SystemIncomplete,
    #[error(transparent)]
    Rep(#[from] RepError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixNorm {
    /// Largest singular value.
    Operator2,
    /// Maximum absolute row sum.
    MaxRowSum,
}

impl MatrixNorm {
    pub fn of(self, a: &DMatrix<Complex64>) -> f64 {
        if a.is_empty() {
            return 0.0;
        }
        if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return f64::INFINITY;
        }
        match self {
            MatrixNorm::Operator2 => a.clone().svd(false, false).singular_values.max(),
            MatrixNorm::MaxRowSum => a.row_iter().map(|r| r.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max),
        }
    }

    /// Exact value for the row-sum norm over rational reals; `None` otherwise.
    pub fn exact(self, a: &SparseMatrix) -> Option<Scalar> {
        if self != MatrixNorm::MaxRowSum {
            return None;
        }
        let mut rows: BTreeMap<usize, Scalar> = BTreeMap::new();
        for (i, _, v) in a.entries() {
            if !v.is_real() {
                return None;
            }
            *rows.entry(i).or_insert_with(Scalar::zero) += &Scalar::from_rational(v.re().abs());
        }
        Some(rows.into_values().max_by(|a, b| a.re().cmp(&b.re())).unwrap_or_else(Scalar::zero))
    }
}

impl std::str::FromStr for MatrixNorm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "op2" | "operator-2" | "operator2" => Ok(MatrixNorm::Operator2),
            "row" | "max-row-sum" | "inf" => Ok(MatrixNorm::MaxRowSum),
            other => Err(format!("unknown matrix norm `{other}`")),
        }
    }
}

/// Box, derivative order and matrix norm of `||F||_{K,n}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeminormSpec {
    pub region: CompactBox,
    pub order: u32,
    pub norm: MatrixNorm,
}

impl SeminormSpec {
    pub fn new(region: CompactBox, order: u32, norm: MatrixNorm) -> Self {
        SeminormSpec { region, order, norm }
    }
}

/// Grid estimate of a matrix seminorm, with the finest level used.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub points: usize,
    pub converged: bool,
}

struct CompiledMatrix {
    dim: usize,
    funcs: Vec<Evaluator>,
    entries: Vec<((usize, usize), usize)>,
}

impl CompiledMatrix {
    /// Identical polynomial entries share one evaluator.
    fn new(f: &MatrixFunction, gamma: &[u32]) -> Self {
        let mut seen: HashMap<crate::poly::Polynomial, usize> = HashMap::new();
        let mut funcs = Vec::new();
        let mut entries = Vec::new();
        for (&ij, c) in f.entries() {
            let idx = match c.as_poly() {
                Some(p) => {
                    let d = p.derivative(gamma);
                    if d.is_zero() {
                        continue;
                    }
                    *seen.entry(d).or_insert_with_key(|d| {
                        funcs.push(Evaluator::Poly(d.to_float()));
                        funcs.len() - 1
                    })
                }
                None => {
                    funcs.push(c.compile(gamma));
                    funcs.len() - 1
                }
            };
            entries.push((ij, idx));
        }
        CompiledMatrix { dim: f.dim(), funcs, entries }
    }

    fn eval(&self, x: &[f64]) -> DMatrix<Complex64> {
        let v: Vec<Complex64> = self.funcs.iter().map(|e| e.eval(x)).collect();
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for ((i, j), k) in &self.entries {
            m[(*i, *j)] = v[*k];
        }
        m
    }

    /// Norm at `x`; `vals` and `rows` are scratch space.
    fn norm_at(&self, norm: MatrixNorm, x: &[f64], vals: &mut Vec<f64>, rows: &mut Vec<f64>) -> f64 {
        if norm == MatrixNorm::Operator2 {
            return norm.of(&self.eval(x));
        }
        vals.clear();
        vals.extend(self.funcs.iter().map(|e| e.eval(x).norm()));
        rows.clear();
        rows.resize(self.dim, 0.0);
        for ((i, _), k) in &self.entries {
            rows[*i] += vals[*k];
        }
        if rows.iter().any(|r| r.is_nan()) {
            f64::INFINITY
        } else {
            rows.iter().copied().fold(0.0, f64::max)
        }
    }
}

/// `sum_{|gamma| = n} sup_K ||d^gamma F||`.
pub fn matrix_seminorm(f: &MatrixFunction, spec: &SeminormSpec) -> Estimate {
    let mut out = Estimate { value: 0.0, points: 0, converged: true };
    for gamma in exponents_exact(spec.region.dim(), spec.order) {
        let cm = CompiledMatrix::new(f, &gamma);
        let (mut vals, mut rows) = (Vec::new(), Vec::new());
        if cm.entries.is_empty() {
            continue;
        }
        let s = grid_sup(&spec.region, GRID_BUDGET, |x| cm.norm_at(spec.norm, x, &mut vals, &mut rows));
        out.value += s.value;
        out.points = out.points.max(s.points);
        out.converged &= s.converged;
    }
    out
}

/// Upper triangular matrix whose `(i, j)` entry lives on the `j`-th box of a decreasing chain.
#[derive(Clone, Debug)]
pub struct NestedTriangularElement {
    boxes: Vec<CompactBox>,
    entries: BTreeMap<(usize, usize), CoefficientFn>,
}

impl NestedTriangularElement {
    pub fn new(boxes: Vec<CompactBox>) -> Result<Self, SeminormError> {
        if boxes.windows(2).any(|w| w[0].dim() != w[1].dim() || !w[0].contains_box(&w[1])) {
            return Err(SeminormError::NotNested);
        }
        Ok(NestedTriangularElement { boxes, entries: BTreeMap::new() })
    }

    pub fn identity(boxes: Vec<CompactBox>) -> Result<Self, SeminormError> {
        let mut out = NestedTriangularElement::new(boxes)?;
        let k = out.nvars();
        for i in 0..out.size() {
            out.set(i, i, CoefficientFn::Poly(crate::poly::Polynomial::one(k)))?;
        }
        Ok(out)
    }

    pub fn size(&self) -> usize {
        self.boxes.len()
    }

    pub fn nvars(&self) -> usize {
        self.boxes.first().map_or(0, CompactBox::dim)
    }

    pub fn boxes(&self) -> &[CompactBox] {
        &self.boxes
    }

    pub fn entries(&self) -> &BTreeMap<(usize, usize), CoefficientFn> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&CoefficientFn> {
        self.entries.get(&(i, j))
    }

    pub fn set(&mut self, i: usize, j: usize, f: CoefficientFn) -> Result<(), SeminormError> {
        if i > j || j >= self.size() {
            return Err(SeminormError::BadEntry(i, j));
        }
        if f.is_zero() {
            self.entries.remove(&(i, j));
        } else {
            self.entries.insert((i, j), f);
        }
        Ok(())
    }

    /// `h_ik = sum_j f_ij g_jk`, each entry read on its own box.
    pub fn multiply(&self, o: &NestedTriangularElement) -> Result<Self, SeminormError> {
        if self.boxes != o.boxes {
            return Err(SeminormError::ChainMismatch);
        }
        let mut acc: BTreeMap<(usize, usize), CoefficientFn> = BTreeMap::new();
        for (&(i, j), f) in &self.entries {
            for (&(_, k), g) in o.entries.range((j, j)..(j + 1, 0)) {
                let t = f.mul(g);
                let next = match acc.remove(&(i, k)) {
                    Some(old) => old.add(&t),
                    None => t,
                };
                acc.insert((i, k), next);
            }
        }
        acc.retain(|_, f| !f.is_zero());
        Ok(NestedTriangularElement { boxes: self.boxes.clone(), entries: acc })
    }

    /// `sum_{i <= j} |h_ij|_{K_j, n}`.
    pub fn seminorm(&self, n: u32) -> Estimate {
        let mut out = Estimate { value: 0.0, points: 0, converged: true };
        for (&(_, j), f) in &self.entries {
            let s = crate::ncfunc::coefficient_seminorm(f, &self.boxes[j], n);
            out.value += s.value;
            out.points = out.points.max(s.points);
            out.converged &= s.converged;
        }
        out
    }

    /// Exact equality of polynomial entries.
    pub fn exact_eq(&self, o: &NestedTriangularElement) -> bool {
        self.boxes == o.boxes
            && self.entries.len() == o.entries.len()
            && self.entries.iter().all(|(k, f)| match (f.as_poly(), o.entries.get(k).and_then(CoefficientFn::as_poly)) {
                (Some(a), Some(b)) => a == b,
                _ => false,
            })
    }
}

/// Terms of `a` strictly below `beta` in colexicographic order.
pub fn project_below(a: &NCFunctionElement, beta: &MultiIndex) -> NCFunctionElement {
    let mut out = NCFunctionElement::zero(a.algebra(), a.order());
    for (b, f) in a.coefficients() {
        if b.colex_lt(beta) {
            out.insert(b.clone(), f.clone());
        }
    }
    out
}

/// Both sides of the domination inequality for one exponent.
#[derive(Clone, Debug, Serialize)]
pub struct DominationReport {
    pub lhs: f64,
    pub rhs: f64,
    #[serde(rename = "C")]
    pub constant: f64,
    /// Exact value of the constant when the norm allows it.
    pub constant_exact: Option<String>,
    pub shift: Vec<String>,
    pub symbol_term: f64,
    pub projected_term: f64,
    /// Window values `||pi~_alpha(a)||_{K,n}` for the requested candidates.
    pub window: Vec<f64>,
    pub pass: bool,
}

/// Evaluates `|a|_{beta,M,l}` and `C^{-1} (||pi~_beta(a)|| + ||pi~_beta P_beta(a)||)` on `M - mu`.
pub fn verify_domination(
    a: &NCFunctionElement,
    beta: &MultiIndex,
    region: &CompactBox,
    l: u32,
    system: &AdaptedSystem,
    norm: MatrixNorm,
    candidates: &[(MultiIndex, CompactBox, u32)],
) -> Result<DominationReport, SeminormError> {
    if a.algebra().as_ref() != system.algebra().as_ref() || beta.len() != a.algebra().nil_dim() {
        return Err(SeminormError::SystemIncomplete);
    }
    let lhs = a.seminorm(beta, region, l).value;
    let pi = system.tensor_rep(beta);
    let lead = system.leading_image(beta);
    let constant = norm.of(&lead.to_c64());
    let constant_exact = norm.exact(&lead).map(|c| c.to_string());
    let mu = system.shift_vector(beta);
    let shifted = region.shifted_down(&mu);
    let spec = SeminormSpec::new(shifted, l, norm);
    let symbol_term = matrix_seminorm(&tilde_pi_nc(&pi, a)?, &spec).value;
    let projected_term = matrix_seminorm(&tilde_pi_nc(&pi, &project_below(a, beta))?, &spec).value;
    let rhs = (symbol_term + projected_term) / constant;
    let mut window = Vec::new();
    for (alpha, bx, n) in candidates {
        let spec = SeminormSpec::new(bx.clone(), *n, norm);
        window.push(matrix_seminorm(&tilde_pi_nc(&system.tensor_rep(alpha), a)?, &spec).value);
    }
    Ok(DominationReport {
        lhs,
        rhs,
        constant,
        constant_exact,
        shift: mu.iter().map(Scalar::to_string).collect(),
        symbol_term,
        projected_term,
        window,
        pass: lhs <= rhs + SLACK,
    })
}

/// Finite window `(||pi~_beta(a)||_{K,n})_beta` of the embedding into symbol algebras.
pub fn rho_embed(
    a: &NCFunctionElement,
    system: &AdaptedSystem,
    betas: &[MultiIndex],
    spec: &SeminormSpec,
) -> Result<Vec<f64>, SeminormError> {
    if a.algebra().as_ref() != system.algebra().as_ref() {
        return Err(SeminormError::SystemIncomplete);
    }
    betas
        .iter()
        .map(|b| Ok(matrix_seminorm(&tilde_pi_nc(&system.tensor_rep(b), a)?, spec).value))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pbw::UEAElement;
    use crate::poly::Polynomial;
    use crate::reps::{catalog_system, tilde_pi};

    #[test]
    fn matrix_seminorm_examples() {
        let unit = CompactBox::cube(1, 0, 1);
        let lam = Polynomial::var(1, 0);
        let f = MatrixFunction::from_polys(2, 1, [((0, 0), lam.clone()), ((1, 1), lam)]);
        let v = matrix_seminorm(&f, &SeminormSpec::new(unit.clone(), 0, MatrixNorm::MaxRowSum));
        assert!((v.value - 1.0).abs() < 1e-12);

        let sys = catalog_system("af1").unwrap();
        let alg = sys.algebra();
        let a = UEAElement::parse(alg, "e1 + e2").unwrap();
        let sym = tilde_pi(&sys.reps()[0], &a);
        let v = matrix_seminorm(&sym, &SeminormSpec::new(unit.clone(), 0, MatrixNorm::MaxRowSum));
        assert!((v.value - 3.0).abs() < 1e-12);
        let c = MatrixFunction::constant(&SparseMatrix::identity(2), 1);
        assert_eq!(matrix_seminorm(&c, &SeminormSpec::new(unit, 1, MatrixNorm::Operator2)).value, 0.0);
    }

    #[test]
    fn affine_domination_example() {
        let sys = catalog_system("af1").unwrap();
        let alg = sys.algebra();
        let a = NCFunctionElement::from_uea(&UEAElement::parse(alg, "e1*e2").unwrap(), 4);
        let beta = MultiIndex(vec![1]);
        let r = verify_domination(&a, &beta, &CompactBox::cube(1, 0, 1), 0, &sys, MatrixNorm::MaxRowSum, &[]).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-12);
        assert!((r.symbol_term - 1.0).abs() < 1e-12);
        assert_eq!(r.constant_exact.as_deref(), Some("1"));
        assert!(r.pass);
        let w = rho_embed(&a, &sys, &[MultiIndex(vec![0]), beta], &SeminormSpec::new(CompactBox::cube(1, 0, 1), 0, MatrixNorm::MaxRowSum))
            .unwrap();
        assert_eq!(w[0], 0.0);
        assert!(w[1] > 0.0);
    }

    #[test]
    fn nested_strict_upper_squares_to_zero() {
        let boxes = vec![CompactBox::cube(1, 0, 2), CompactBox::cube(1, 0, 1)];
        let mut a = NestedTriangularElement::new(boxes.clone()).unwrap();
        a.set(0, 1, CoefficientFn::Poly(Polynomial::var(1, 0))).unwrap();
        assert!(a.multiply(&a).unwrap().entries().is_empty());
        let id = NestedTriangularElement::identity(boxes).unwrap();
        assert!(id.multiply(&a).unwrap().exact_eq(&a));
        assert!(NestedTriangularElement::new(vec![CompactBox::cube(1, 0, 1), CompactBox::cube(1, 0, 2)]).is_err());
    }
}
