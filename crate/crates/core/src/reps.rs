//! Finite-dimensional representations and adapted systems.
//!
//! An adapted system is a basis `e_1..e_k; e_{k+1}..e_m` with the tail spanning the
//! nilradical, together with representations `pi_{k+1}..pi_m` such that for every `r`:
//! `pi_r(e_r) != 0`, `pi_r(y) pi_r(e_r) = mu_y pi_r(e_r)` for all `y`, `mu_y = 0` on the
//! nilradical, and `pi_r(e_j) = 0` whenever `r < j`.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flag::{self, FlagError};
use crate::lie::{LieAlgebra, LieError, Subspace};
use crate::linalg::{QMatrix, SparseMatrix};
use crate::ncfunc::{CoefficientFn, NCFunctionElement};
use crate::pbw::{MultiIndex, PbwAlgebra, PbwError, UEAElement};
use crate::poly::Polynomial;
use crate::scalar::{Field, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RepError {
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Pbw(#[from] PbwError),
    #[error("algebra is not nilpotent")]
    NotNilpotent,
    #[error("algebra is not triangular: witness e{witness}, characteristic polynomial {charpoly}")]
    NotTriangular { witness: usize, charpoly: String },
    #[error("eigenvalues of e{witness} are real but not rational: {charpoly}")]
    IrrationalEigenvalues { witness: usize, charpoly: String },
    #[error("case {case} unsupported: {reason}")]
    Unsupported { case: u8, reason: String },
    #[error("matrices do not respect the bracket [e{i}, e{j}]")]
    NotHomomorphism { i: usize, j: usize },
    #[error("expected {expected} matrices of size {dim}")]
    Shape { expected: usize, dim: usize },
    #[error("representation could not be triangularized: {0}")]
    Flag(FlagError),
    #[error("condition {condition} fails for generator {index}")]
    ConditionFails { condition: &'static str, index: usize },
    #[error("smooth coefficients need nilpotent complement images or a monomial element")]
    SmoothUnsupported,
    #[error("unknown catalog name `{0}`")]
    UnknownName(String),
    #[error("malformed representation: {0}")]
    Format(String),
}

/// Matrices `pi(e_1), ..., pi(e_m)` of a representation.
#[derive(Clone, Debug, PartialEq)]
pub struct Representation {
    dim: usize,
    mats: Vec<SparseMatrix>,
    nilpotent_image: bool,
    distinguished: Option<usize>,
}

impl Representation {
    /// Checks the bracket relations exactly.
    pub fn new(lie: &LieAlgebra, mats: Vec<SparseMatrix>) -> Result<Representation, RepError> {
        let rep = Representation::from_matrices(mats);
        if rep.mats.len() != lie.dim() || rep.mats.iter().any(|a| a.dim() != rep.dim) {
            return Err(RepError::Shape { expected: lie.dim(), dim: rep.dim });
        }
        if let Some((i, j)) = rep.bracket_failure(lie) {
            return Err(RepError::NotHomomorphism { i: i + 1, j: j + 1 });
        }
        Ok(rep)
    }

    /// No bracket check.
    pub fn from_matrices(mats: Vec<SparseMatrix>) -> Representation {
        let dim = mats.first().map_or(1, SparseMatrix::dim);
        let nilpotent_image = mats.iter().all(|a| a.pow(dim as u32).is_zero());
        Representation { dim, mats, nilpotent_image, distinguished: None }
    }

    /// One-dimensional zero representation.
    pub fn trivial(m: usize) -> Representation {
        Representation::from_matrices(vec![SparseMatrix::zeros(1); m])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[SparseMatrix] {
        &self.mats
    }

    pub fn generator(&self, i: usize) -> &SparseMatrix {
        &self.mats[i]
    }

    /// Every image operator is nilpotent.
    pub fn nilpotent_image(&self) -> bool {
        self.nilpotent_image
    }

    pub fn distinguished(&self) -> Option<usize> {
        self.distinguished
    }

    pub fn with_distinguished(mut self, r: usize) -> Self {
        self.distinguished = Some(r);
        self
    }

    pub fn image(&self, x: &[Scalar]) -> SparseMatrix {
        let mut acc = SparseMatrix::zeros(self.dim);
        for (c, a) in x.iter().zip(&self.mats) {
            if !c.is_zero() {
                acc = acc.add(&a.scale(c));
            }
        }
        acc
    }

    /// First basis pair `(i, j)` where `pi([e_i, e_j]) != [pi(e_i), pi(e_j)]`.
    pub fn bracket_failure(&self, lie: &LieAlgebra) -> Option<(usize, usize)> {
        let m = lie.dim();
        for i in 0..m {
            for j in i + 1..m {
                let lhs = self.image(lie.bracket_basis(i, j));
                if lhs != self.mats[i].commutator(&self.mats[j]) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// Image of an enveloping algebra element.
    pub fn eval_uea(&self, a: &UEAElement) -> SparseMatrix {
        let mut powers: BTreeMap<(usize, u32), SparseMatrix> = BTreeMap::new();
        let mut acc = SparseMatrix::zeros(self.dim);
        for (alpha, c) in a.terms() {
            let mut term = SparseMatrix::identity(self.dim);
            for (i, &e) in alpha.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let p = powers.entry((i, e)).or_insert_with(|| self.mats[i].pow(e));
                term = term.mul(p);
                if term.is_zero() {
                    break;
                }
            }
            acc = acc.add(&term.scale(c));
        }
        acc
    }

    /// Representation of another algebra whose generator `i` maps to `sum_j coords[j][i] pi(e_j)`.
    pub fn pull_back(&self, coords: &QMatrix) -> Representation {
        let mats = (0..coords.ncols()).map(|i| self.image(&coords.column(i))).collect();
        Representation { mats, distinguished: None, ..self.clone() }
    }

    /// `p^{-1} pi p` for every generator.
    pub fn conjugate(&self, p: &QMatrix) -> Representation {
        let p_inv = p.inverse().expect("invertible basis change");
        let mats = self.mats.iter().map(|a| a.conjugate(p, &p_inv)).collect();
        Representation { mats, ..self.clone() }
    }

    /// Same representation in a basis where every generator is upper triangular.
    pub fn triangularized(&self, field: Field) -> Result<Representation, RepError> {
        if self.is_upper_triangular() {
            return Ok(self.clone());
        }
        let dense: Vec<QMatrix> = self.mats.iter().map(SparseMatrix::to_dense).collect();
        let p = flag::triangularize(&dense, field).map_err(RepError::Flag)?;
        Ok(self.conjugate(&p))
    }

    pub fn is_upper_triangular(&self) -> bool {
        self.mats.iter().all(SparseMatrix::is_upper_triangular)
    }

    pub fn to_spec(&self) -> RepresentationSpec {
        RepresentationSpec {
            dim: self.dim,
            matrices: self.mats.iter().map(|a| (0..self.dim).map(|i| a.to_dense().row(i)).collect()).collect(),
            nilpotent_image: self.nilpotent_image,
            distinguished: self.distinguished.map(|r| r + 1),
        }
    }

    pub fn from_spec(lie: &LieAlgebra, spec: &RepresentationSpec) -> Result<Representation, RepError> {
        let mut mats = Vec::new();
        for rows in &spec.matrices {
            if rows.len() != spec.dim || rows.iter().any(|r| r.len() != spec.dim) {
                return Err(RepError::Format(format!("matrices must be {0}x{0}", spec.dim)));
            }
            mats.push(SparseMatrix::from_dense(&QMatrix::from_rows(rows.clone())));
        }
        let mut rep = Representation::new(lie, mats)?;
        rep.distinguished = spec.distinguished.map(|r| r - 1);
        Ok(rep)
    }
}

/// JSON form: row-major rational strings.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RepresentationSpec {
    pub dim: usize,
    pub matrices: Vec<Vec<Vec<Scalar>>>,
    #[serde(default)]
    pub nilpotent_image: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distinguished: Option<usize>,
}

/// Adjoint representation in the algebra's basis.
pub fn adjoint_rep(lie: &LieAlgebra) -> Representation {
    let mats = (0..lie.dim()).map(|i| SparseMatrix::from_dense(&lie.ad_basis(i))).collect();
    Representation::from_matrices(mats)
}

/// Basis change (columns) adapted to the lower central series: deeper terms are spanned
/// by a prefix read from the end.
fn lcs_adapted_basis(lie: &LieAlgebra) -> QMatrix {
    let m = lie.dim();
    let lcs = lie.lower_central_series();
    let mut chosen: Vec<Vec<Scalar>> = Vec::new();
    for s in lcs.iter().rev() {
        for v in s.basis() {
            let mut trial = chosen.clone();
            trial.push(v);
            if Subspace::from_vectors(m, &trial).dim() == trial.len() {
                chosen = trial;
            }
        }
    }
    chosen.reverse();
    QMatrix::from_columns(&chosen)
}

/// Left-regular action of a nilpotent algebra on `U(L)` modulo the `p`-th power of the
/// augmentation ideal, which is spanned by monomials of weighted degree at least `p`.
pub fn nilpotent_quotient_rep(lie: &LieAlgebra, p: u32) -> Result<Representation, RepError> {
    if !lie.is_nilpotent() {
        return Err(RepError::NotNilpotent);
    }
    let pbw = match PbwAlgebra::with_split(lie.clone(), 0) {
        Ok(a) => a,
        Err(PbwError::NonAdaptedBasis) => {
            let basis = lcs_adapted_basis(lie);
            let labels = (1..=lie.dim()).map(|i| format!("f{i}")).collect();
            let adapted = lie.change_basis(&basis, labels)?;
            let inner = nilpotent_quotient_rep(&adapted, p)?;
            let inv = basis.inverse().expect("adapted basis is invertible");
            return Ok(inner.pull_back(&inv));
        }
        Err(e) => return Err(e.into()),
    };
    let m = lie.dim();
    let mut monos: Vec<MultiIndex> =
        MultiIndex::all_up_to(m, p.saturating_sub(1)).into_iter().filter(|a| pbw.filtration_degree(a) < p).collect();
    // higher weight first so that the action is strictly upper triangular
    monos.sort_by(|a, b| pbw.filtration_degree(b).cmp(&pbw.filtration_degree(a)).then(a.cmp(b)));
    let index: BTreeMap<&MultiIndex, usize> = monos.iter().enumerate().map(|(i, a)| (a, i)).collect();
    let d = monos.len();
    let mut mats = Vec::with_capacity(m);
    for g in 0..m {
        let gen = UEAElement::generator(&pbw, g);
        let mut mat = SparseMatrix::zeros(d);
        for (col, a) in monos.iter().enumerate() {
            let img = gen.mul_truncated(&UEAElement::monomial(&pbw, a.clone(), Scalar::one()), p - 1);
            for (b, c) in img.terms() {
                mat.add_at(index[b], col, c);
            }
        }
        mats.push(mat);
    }
    let mut rep = Representation::from_matrices(mats);
    rep.nilpotent_image = true;
    Ok(rep)
}

/// Outcome of checking the three conditions for a pair `(pi, x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport {
    pub a1: bool,
    /// `mu_y` for each basis vector `y`, `None` where `pi(y) pi(x)` is not a multiple of `pi(x)`.
    pub mu: Vec<Option<Scalar>>,
    pub a2_witness: Option<usize>,
    pub a3: bool,
    pub a3_witness: Option<usize>,
}

impl ConditionReport {
    pub fn a2(&self) -> bool {
        self.a1 && self.a2_witness.is_none()
    }

    pub fn all(&self) -> bool {
        self.a1 && self.a2() && self.a3
    }
}

pub fn check_a_conditions(pi: &Representation, x: &[Scalar], lie: &LieAlgebra) -> ConditionReport {
    let px = pi.image(x);
    let pivot = px.entries().next().map(|(i, j, v)| (i, j, v.clone()));
    let Some((pi_, pj, pv)) = pivot else {
        return ConditionReport { a1: false, mu: vec![None; lie.dim()], a2_witness: None, a3: false, a3_witness: None };
    };
    let mu: Vec<Option<Scalar>> = (0..lie.dim())
        .map(|y| {
            let prod = pi.generator(y).mul(&px);
            let c = &prod.get(pi_, pj) / &pv;
            (prod == px.scale(&c)).then_some(c)
        })
        .collect();
    let a2_witness = mu.iter().position(Option::is_none).map(|y| y + 1);
    let nil = lie.derived_algebra();
    let mut a3_witness = None;
    for (idx, v) in nil.basis().iter().enumerate() {
        if !pi.image(v).mul(&px).is_zero() {
            a3_witness = Some(idx + 1);
            break;
        }
    }
    ConditionReport { a1: true, mu, a2_witness, a3: a3_witness.is_none(), a3_witness }
}

/// Basis, representations and eigenvalue table satisfying the adapted-system conditions.
#[derive(Clone, Debug)]
pub struct AdaptedSystem {
    original: LieAlgebra,
    basis: QMatrix,
    pbw: Arc<PbwAlgebra>,
    reps: Vec<Representation>,
    mu: Vec<Vec<Scalar>>,
}

impl AdaptedSystem {
    /// Wraps an algebra already in adapted form; verifies every condition.
    pub fn from_parts(pbw: Arc<PbwAlgebra>, reps: Vec<Representation>) -> Result<AdaptedSystem, RepError> {
        let lie = pbw.lie().clone();
        let m = lie.dim();
        AdaptedSystem::assemble(lie, QMatrix::identity(m), pbw, reps)
    }

    fn assemble(
        original: LieAlgebra,
        basis: QMatrix,
        pbw: Arc<PbwAlgebra>,
        reps: Vec<Representation>,
    ) -> Result<AdaptedSystem, RepError> {
        let lie = pbw.lie();
        let (m, k) = (lie.dim(), pbw.split());
        if reps.len() != m - k {
            return Err(RepError::Shape { expected: m - k, dim: reps.len() });
        }
        let mut mu = Vec::new();
        for (r, pi) in reps.iter().enumerate() {
            if let Some((i, j)) = pi.bracket_failure(lie) {
                return Err(RepError::NotHomomorphism { i: i + 1, j: j + 1 });
            }
            let report = check_a_conditions(pi, &lie.unit(k + r), lie);
            if !report.a1 {
                return Err(RepError::ConditionFails { condition: "A1", index: k + r + 1 });
            }
            if !report.a2() {
                return Err(RepError::ConditionFails { condition: "A2", index: k + r + 1 });
            }
            if !report.a3 {
                return Err(RepError::ConditionFails { condition: "A3", index: k + r + 1 });
            }
            for j in k + r + 1..m {
                if !pi.generator(j).is_zero() {
                    return Err(RepError::ConditionFails { condition: "vanishing on later generators", index: k + r + 1 });
                }
            }
            mu.push(report.mu.into_iter().map(|c| c.expect("checked")).collect());
        }
        let reps = reps.into_iter().enumerate().map(|(r, pi)| pi.with_distinguished(k + r)).collect();
        Ok(AdaptedSystem { original, basis, pbw, reps, mu })
    }

    /// Algebra the system was built from.
    pub fn original(&self) -> &LieAlgebra {
        &self.original
    }

    /// Adapted basis as columns of coordinates in the original basis.
    pub fn basis(&self) -> &QMatrix {
        &self.basis
    }

    /// The algebra in the adapted basis.
    pub fn algebra(&self) -> &Arc<PbwAlgebra> {
        &self.pbw
    }

    pub fn split(&self) -> usize {
        self.pbw.split()
    }

    pub fn reps(&self) -> &[Representation] {
        &self.reps
    }

    /// `mu[r][j]` with `pi_r(e_j) pi_r(e_r) = mu pi_r(e_r)`, `r` counted inside the nilradical.
    pub fn mu_table(&self) -> &[Vec<Scalar>] {
        &self.mu
    }

    pub fn is_shift_free(&self) -> bool {
        self.mu.iter().flatten().all(Scalar::is_zero)
    }

    pub fn all_nilpotent(&self) -> bool {
        self.reps.iter().all(Representation::nilpotent_image)
    }

    /// Leibniz tensor product with multiplicities `beta` over the nilradical slots.
    pub fn tensor_rep(&self, beta: &MultiIndex) -> Representation {
        let m = self.pbw.dim();
        let factors: Vec<&Representation> =
            beta.0.iter().enumerate().flat_map(|(r, &b)| std::iter::repeat(&self.reps[r]).take(b as usize)).collect();
        if factors.is_empty() {
            return Representation::trivial(m);
        }
        let dims: Vec<usize> = factors.iter().map(|f| f.dim()).collect();
        let mats = (0..m)
            .map(|j| {
                let total: usize = dims.iter().product();
                let mut acc = SparseMatrix::zeros(total);
                for (pos, f) in factors.iter().enumerate() {
                    let a = f.generator(j);
                    if a.is_zero() {
                        continue;
                    }
                    let left: usize = dims[..pos].iter().product();
                    let right: usize = dims[pos + 1..].iter().product();
                    let term = SparseMatrix::identity(left).kron(a).kron(&SparseMatrix::identity(right));
                    acc = acc.add(&term);
                }
                acc
            })
            .collect();
        let mut rep = Representation::from_matrices(mats);
        rep.nilpotent_image = factors.iter().all(|f| f.nilpotent_image());
        rep
    }

    /// Shift `mu_j = sum_r beta_r mu[r][j]` over the complement generators.
    pub fn shift_vector(&self, beta: &MultiIndex) -> Vec<Scalar> {
        (0..self.split())
            .map(|j| {
                beta.0.iter().enumerate().filter(|(_, &b)| b > 0).map(|(r, &b)| &Scalar::from_int(b as i64) * &self.mu[r][j]).sum()
            })
            .collect()
    }

    /// `pi_beta(e^beta)`.
    pub fn leading_image(&self, beta: &MultiIndex) -> SparseMatrix {
        let pi = self.tensor_rep(beta);
        let exp = MultiIndex::zeros(self.split()).concat(beta);
        pi.eval_uea(&UEAElement::monomial(&self.pbw, exp, Scalar::one()))
    }
}

/// Preimage inside `target` of a quotient vector.
fn lift_into(target: &Subspace, projection: &QMatrix, v: &[Scalar]) -> Vec<Scalar> {
    let basis = target.basis();
    let cols: Vec<Vec<Scalar>> = basis.iter().map(|b| projection.mul_vec(b)).collect();
    let coeffs = QMatrix::from_columns(&cols).solve(v).expect("quotient vector has a preimage");
    let mut out = vec![Scalar::zero(); target.ambient()];
    for (c, b) in coeffs.iter().zip(&basis) {
        for (o, x) in out.iter_mut().zip(b) {
            *o += c * x;
        }
    }
    out
}

/// Nilradical basis (original coordinates) and one representation per vector.
type Partial = (Vec<Vec<Scalar>>, Vec<Representation>);

fn adapt_rec(lie: &LieAlgebra) -> Result<Partial, RepError> {
    let m = lie.dim();
    let n = lie.derived_algebra();
    if n.dim() == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let z = lie.center();
    let zn = z.intersect(&n);
    let lcs_n = lie.lower_central_series_of(&n);
    let (x, pi) = if zn.dim() > 0 {
        // deepest term of the nilradical series still meeting the center
        let depth = (0..lcs_n.len()).rev().find(|&j| lcs_n[j].intersect(&z).dim() > 0).expect("center meets the nilradical");
        let x = lcs_n[depth].intersect(&z).basis()[0].clone();
        let below = lcs_n.get(depth + 1).cloned().unwrap_or_else(|| Subspace::zero(m));
        let q = lie.quotient(&below)?;
        if !q.algebra.is_nilpotent() {
            return Err(RepError::Unsupported {
                case: 1,
                reason: "center meets the nilradical of a non-nilpotent algebra; the construction needs semisimple parts of a Cartan subalgebra".into(),
            });
        }
        let xq = q.projection.mul_vec(&x);
        let ql = q.algebra.clone();
        let weight = {
            let lcs = ql.lower_central_series();
            lcs.iter().take_while(|s| s.contains(&xq)).count() as u32
        };
        let rep = nilpotent_quotient_rep(&ql, weight + 1)?;
        (x, rep.pull_back(&q.projection))
    } else if z.dim() == 0 {
        let last = lcs_n.iter().rev().find(|s| s.dim() > 0).expect("nilradical is nonzero").clone();
        let basis = QMatrix::from_columns(&last.basis());
        let restricted: Vec<QMatrix> = (0..m)
            .map(|i| flag::restrict(&lie.ad_basis(i), &basis).expect("series terms are ideals"))
            .collect();
        let v = flag::common_eigenvector(&restricted, lie.field()).map_err(|e| flag_to_rep(e, lie))?;
        (basis.mul_vec(&v), adjoint_rep(lie))
    } else {
        let q = lie.quotient(&z)?;
        let (vecs, reps) = adapt_rec(&q.algebra)?;
        let lifted = vecs.iter().map(|v| lift_into(&n, &q.projection, v)).collect();
        let reps = reps.into_iter().map(|r| r.pull_back(&q.projection)).collect();
        return Ok((lifted, reps));
    };
    let h = Subspace::from_vectors(m, std::slice::from_ref(&x));
    let q = lie.quotient(&h)?;
    let (vecs, reps) = adapt_rec(&q.algebra)?;
    let mut out_vecs: Vec<Vec<Scalar>> = vecs.iter().map(|v| lift_into(&n, &q.projection, v)).collect();
    let mut out_reps: Vec<Representation> = reps.into_iter().map(|r| r.pull_back(&q.projection)).collect();
    out_vecs.push(x);
    out_reps.push(pi);
    Ok((out_vecs, out_reps))
}

fn flag_to_rep(e: FlagError, _lie: &LieAlgebra) -> RepError {
    match e {
        FlagError::NonReal { index, charpoly } => RepError::NotTriangular { witness: index + 1, charpoly },
        FlagError::OutsideField { index, charpoly } => RepError::IrrationalEigenvalues { witness: index + 1, charpoly },
        other => RepError::Flag(other),
    }
}

/// Constructs an adapted system by induction on dimension.
pub fn build_adapted_system(lie: &LieAlgebra) -> Result<AdaptedSystem, RepError> {
    lie.triangular_flag().map_err(|e| match e {
        LieError::NotTriangular { witness, charpoly } => RepError::NotTriangular { witness, charpoly },
        LieError::IrrationalEigenvalues { witness, charpoly } => RepError::IrrationalEigenvalues { witness, charpoly },
        other => RepError::Lie(other),
    })?;
    let n = lie.derived_algebra();
    let (nil_vecs, reps) = adapt_rec(lie)?;
    let mut cols: Vec<Vec<Scalar>> = n.complement_indices().into_iter().map(|i| lie.unit(i)).collect();
    let k = cols.len();
    cols.extend(nil_vecs);
    let basis = QMatrix::from_columns(&cols);
    let labels = adapted_labels(lie, &basis, k);
    let adapted = lie.change_basis(&basis, labels)?;
    let mut tri = Vec::new();
    for r in reps {
        // generator i of the adapted algebra is column i of the basis
        let pulled = r.pull_back(&basis);
        tri.push(pulled.triangularized(lie.field())?);
    }
    let pbw = PbwAlgebra::with_split(adapted, k)?;
    AdaptedSystem::assemble(lie.clone(), basis, pbw, tri)
}

/// Keeps original labels where the adapted vector is a unit vector.
fn adapted_labels(lie: &LieAlgebra, basis: &QMatrix, _k: usize) -> Vec<String> {
    let m = lie.dim();
    let mut used = Vec::new();
    (0..m)
        .map(|j| {
            let col = basis.column(j);
            let nz: Vec<usize> = (0..m).filter(|&i| !col[i].is_zero()).collect();
            let label = if nz.len() == 1 && col[nz[0]].is_one() && !used.contains(&lie.labels()[nz[0]]) {
                lie.labels()[nz[0]].clone()
            } else {
                format!("a{}", j + 1)
            };
            used.push(label.clone());
            label
        })
        .collect()
}

/// Matrix whose entries are coefficient functions of the complement variables.
#[derive(Clone, Debug)]
pub struct MatrixFunction {
    dim: usize,
    nvars: usize,
    entries: BTreeMap<(usize, usize), CoefficientFn>,
}

impl MatrixFunction {
    pub fn zero(dim: usize, nvars: usize) -> Self {
        MatrixFunction { dim, nvars, entries: BTreeMap::new() }
    }

    pub fn identity(dim: usize, nvars: usize) -> Self {
        MatrixFunction::constant(&SparseMatrix::identity(dim), nvars)
    }

    pub fn constant(a: &SparseMatrix, nvars: usize) -> Self {
        let mut out = MatrixFunction::zero(a.dim(), nvars);
        for (i, j, v) in a.entries() {
            out.entries.insert((i, j), CoefficientFn::Poly(Polynomial::constant(nvars, v.clone())));
        }
        out
    }

    /// Polynomial entries `f_ij`.
    pub fn from_polys(dim: usize, nvars: usize, entries: impl IntoIterator<Item = ((usize, usize), Polynomial)>) -> Self {
        let mut out = MatrixFunction::zero(dim, nvars);
        for ((i, j), p) in entries {
            out.add_entry(i, j, CoefficientFn::Poly(p));
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn entries(&self) -> &BTreeMap<(usize, usize), CoefficientFn> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&CoefficientFn> {
        self.entries.get(&(i, j))
    }

    /// Entry as a polynomial; `None` for smooth entries, zero for absent ones.
    pub fn poly(&self, i: usize, j: usize) -> Option<Polynomial> {
        match self.entries.get(&(i, j)) {
            None => Some(Polynomial::zero(self.nvars)),
            Some(c) => c.as_poly().cloned(),
        }
    }

    pub fn is_polynomial(&self) -> bool {
        self.entries.values().all(|c| c.as_poly().is_some())
    }

    fn add_entry(&mut self, i: usize, j: usize, c: CoefficientFn) {
        if c.is_zero() {
            return;
        }
        let next = match self.entries.remove(&(i, j)) {
            Some(old) => old.add(&c),
            None => c,
        };
        if !next.is_zero() {
            self.entries.insert((i, j), next);
        }
    }

    /// Adds `f * A` for a scalar function `f` and constant matrix `A`.
    pub fn add_scaled(&mut self, f: &CoefficientFn, a: &SparseMatrix) {
        for (i, j, v) in a.entries() {
            self.add_entry(i, j, f.scale(v));
        }
    }

    pub fn add(&self, o: &MatrixFunction) -> MatrixFunction {
        let mut out = self.clone();
        for ((i, j), c) in &o.entries {
            out.add_entry(*i, *j, c.clone());
        }
        out
    }

    pub fn mul(&self, o: &MatrixFunction) -> MatrixFunction {
        let mut out = MatrixFunction::zero(self.dim, self.nvars);
        for ((i, l), a) in &self.entries {
            for ((l2, j), b) in o.entries.range((*l, 0)..(*l + 1, 0)) {
                debug_assert_eq!(l, l2);
                out.add_entry(*i, *j, a.mul(b));
            }
        }
        out
    }

    pub fn is_upper_triangular(&self) -> bool {
        self.entries.keys().all(|(i, j)| i <= j)
    }

    /// Entry-wise partial derivative.
    pub fn derivative(&self, gamma: &[u32]) -> MatrixFunction {
        let mut out = MatrixFunction::zero(self.dim, self.nvars);
        for ((i, j), c) in &self.entries {
            out.add_entry(*i, *j, c.derivative(gamma));
        }
        out
    }

    /// Value of the `gamma`-derivative at `x`.
    pub fn eval(&self, x: &[f64], gamma: &[u32]) -> DMatrix<Complex64> {
        let mut out = DMatrix::zeros(self.dim, self.dim);
        for ((i, j), c) in &self.entries {
            out[(*i, *j)] = c.eval_deriv(x, gamma);
        }
        out
    }

    /// Same matrix with each polynomial entry shifted: `f(x + mu)`.
    pub fn shift(&self, mu: &[Scalar]) -> MatrixFunction {
        let mut out = MatrixFunction::zero(self.dim, self.nvars);
        for ((i, j), c) in &self.entries {
            out.add_entry(*i, *j, c.shift(mu));
        }
        out
    }

    pub fn same_as(&self, o: &MatrixFunction) -> bool {
        self.dim == o.dim && self.sub_is_zero(o)
    }

    fn sub_is_zero(&self, o: &MatrixFunction) -> bool {
        let keys: std::collections::BTreeSet<_> = self.entries.keys().chain(o.entries.keys()).collect();
        keys.into_iter().all(|k| match (self.entries.get(k).and_then(|c| c.as_poly()), o.entries.get(k).and_then(|c| c.as_poly())) {
            (Some(a), Some(b)) => a == b,
            (Some(a), None) => a.is_zero() && !o.entries.contains_key(k),
            (None, Some(b)) => b.is_zero() && !self.entries.contains_key(k),
            (None, None) => false,
        })
    }
}

/// Symbol map `e_j -> lambda_j + pi(e_j)` (complement) and `e_j -> pi(e_j)` (nilradical)
/// applied to an enveloping algebra element.
pub fn tilde_pi(pi: &Representation, a: &UEAElement) -> MatrixFunction {
    let k = a.algebra().split();
    let coeffs: BTreeMap<MultiIndex, CoefficientFn> =
        a.coefficients().into_iter().map(|(b, f)| (b, CoefficientFn::Poly(f))).collect();
    taylor_symbol(pi, &a.algebra().clone(), k, &coeffs, None)
}

/// Symbol of a truncated function element: finite Taylor sum
/// `sum_u d^u f / u! (x) pi(e_1)^{u_1}...pi(e_k)^{u_k} pi(e^beta)`.
pub fn tilde_pi_nc(pi: &Representation, a: &NCFunctionElement) -> Result<MatrixFunction, RepError> {
    let k = a.algebra().split();
    let polynomial = a.is_polynomial();
    let bound = if polynomial {
        None
    } else if (0..k).all(|j| pi.generator(j).pow(pi.dim() as u32).is_zero()) {
        Some(pi.dim() as u32)
    } else {
        return Err(RepError::SmoothUnsupported);
    };
    Ok(taylor_symbol(pi, a.algebra(), k, a.coefficients(), bound))
}

fn taylor_symbol(
    pi: &Representation,
    alg: &Arc<PbwAlgebra>,
    k: usize,
    coeffs: &BTreeMap<MultiIndex, CoefficientFn>,
    nil_bound: Option<u32>,
) -> MatrixFunction {
    let d = pi.dim();
    let mut out = MatrixFunction::zero(d, k);
    let mut power_cache: BTreeMap<(usize, u32), SparseMatrix> = BTreeMap::new();
    for (beta, f) in coeffs {
        let nil_part = pi.eval_uea(&UEAElement::monomial(alg, MultiIndex::zeros(k).concat(beta), Scalar::one()));
        if nil_part.is_zero() {
            continue;
        }
        let max_order = match (nil_bound, f.as_poly()) {
            (_, Some(p)) => p.degree().unwrap_or(0),
            (Some(b), None) => b.saturating_sub(1) * k as u32,
            (None, None) => unreachable!("smooth coefficients need a bound"),
        };
        for u in MultiIndex::all_up_to(k, max_order) {
            let mut mat = SparseMatrix::identity(d);
            for (j, &e) in u.0.iter().enumerate() {
                if e > 0 {
                    let p = power_cache.entry((j, e)).or_insert_with(|| pi.generator(j).pow(e));
                    mat = mat.mul(p);
                }
            }
            let mat = mat.mul(&nil_part);
            if mat.is_zero() {
                continue;
            }
            let df = f.derivative(&u.0).scale(&u.factorial().recip().expect("nonzero factorial"));
            out.add_scaled(&df, &mat);
        }
    }
    out
}

/// `pi_q(e_1) = diag(q, ..., 0)`, `pi_q(e_2)` the superdiagonal shift; `q = 0` is `(1, 0)`.
pub fn affine_rep(q: usize) -> Representation {
    if q == 0 {
        let mut x = SparseMatrix::zeros(1);
        x.set(0, 0, Scalar::one());
        return Representation::from_matrices(vec![x, SparseMatrix::zeros(1)]);
    }
    let d = q + 1;
    let mut x = SparseMatrix::zeros(d);
    let mut y = SparseMatrix::zeros(d);
    for i in 0..d {
        x.set(i, i, Scalar::from_int((q - i) as i64));
        if i + 1 < d {
            y.set(i, i + 1, Scalar::one());
        }
    }
    Representation::from_matrices(vec![x, y])
}

/// Standard three-dimensional representation of the Heisenberg algebra.
pub fn heisenberg_rep() -> Representation {
    Representation::from_matrices(vec![
        SparseMatrix::unit(3, 0, 1),
        SparseMatrix::unit(3, 1, 2),
        SparseMatrix::unit(3, 0, 2),
    ])
}

/// Prebuilt system for a catalog algebra.
pub fn catalog_system(name: &str) -> Result<AdaptedSystem, RepError> {
    let lie = crate::catalog::algebra(name).ok_or_else(|| RepError::UnknownName(name.to_string()))?;
    match name {
        "af1" => {
            let pbw = PbwAlgebra::new(lie)?;
            AdaptedSystem::from_parts(pbw, vec![affine_rep(1)])
        }
        "heisenberg" | "h" => {
            let pbw = PbwAlgebra::new(lie)?;
            AdaptedSystem::from_parts(pbw, vec![heisenberg_rep()])
        }
        _ => build_adapted_system(&lie),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn adjoint_of_affine_line() {
        let ad = adjoint_rep(&catalog::af1());
        assert_eq!(ad.generator(0).to_dense(), QMatrix::from_i64(&[&[0, 0], &[0, 1]]));
        assert!(ad.bracket_failure(&catalog::af1()).is_none());
    }

    #[test]
    fn nilpotent_quotient_of_heisenberg() {
        let h = catalog::heisenberg();
        assert_eq!(nilpotent_quotient_rep(&h, 2).unwrap().dim(), 3);
        let pi = nilpotent_quotient_rep(&h, 3).unwrap();
        assert_eq!(pi.dim(), 7);
        assert!(pi.nilpotent_image());
        assert!(pi.bracket_failure(&h).is_none());
        let report = check_a_conditions(&pi, &h.unit(2), &h);
        assert!(report.all());
        assert!(report.mu.iter().all(|m| m.as_ref().is_some_and(Scalar::is_zero)));
        let line = nilpotent_quotient_rep(&catalog::abelian(1), 3).unwrap();
        assert_eq!(line.generator(0).pow(2).nnz(), 1);
        assert!(line.generator(0).pow(3).is_zero());
    }

    #[test]
    fn adapted_systems_for_catalog() {
        let af = build_adapted_system(&catalog::af1()).unwrap();
        assert_eq!(af.split(), 1);
        assert_eq!(af.mu_table()[0][0], Scalar::one());
        let h = build_adapted_system(&catalog::heisenberg()).unwrap();
        assert_eq!(h.split(), 2);
        assert!(h.is_shift_free() && h.all_nilpotent());
        let ab = build_adapted_system(&catalog::abelian(3)).unwrap();
        assert!(ab.reps().is_empty());
        for p in 2..=3 {
            let t = build_adapted_system(&catalog::triangular(p)).unwrap();
            assert_eq!(t.reps().len(), p * (p - 1) / 2);
        }
        assert!(matches!(build_adapted_system(&catalog::euclidean()), Err(RepError::NotTriangular { witness: 1, .. })));
    }

    #[test]
    fn tilde_pi_examples() {
        let af = PbwAlgebra::new(catalog::af1()).unwrap();
        let a = UEAElement::parse(&af, "e1 + e2").unwrap();
        let s = tilde_pi(&affine_rep(1), &a);
        let lam = Polynomial::var(1, 0);
        assert_eq!(s.poly(0, 0).unwrap(), lam.add(&Polynomial::one(1)));
        assert_eq!(s.poly(0, 1).unwrap(), Polynomial::one(1));
        assert_eq!(s.poly(1, 1).unwrap(), lam);
        let h = PbwAlgebra::new(catalog::heisenberg()).unwrap();
        let a = UEAElement::parse(&h, "e1*e2").unwrap();
        let s = tilde_pi(&heisenberg_rep(), &a);
        assert_eq!(s.poly(0, 1).unwrap().to_string(), "l2");
        assert_eq!(s.poly(0, 2).unwrap().to_string(), "1");
        assert_eq!(s.poly(1, 2).unwrap().to_string(), "l1");
        assert_eq!(s.poly(2, 2).unwrap().to_string(), "l1*l2");
    }

    #[test]
    fn heisenberg_tensor_powers() {
        let sys = catalog_system("heisenberg").unwrap();
        for q in 1..=3u32 {
            let beta = MultiIndex(vec![q]);
            let lead = sys.leading_image(&beta);
            let mut expected = SparseMatrix::identity(1);
            for _ in 0..q {
                expected = expected.kron(heisenberg_rep().generator(2));
            }
            assert_eq!(lead, expected.scale(&crate::scalar::factorial(q)));
            let pi = sys.tensor_rep(&beta);
            let above = UEAElement::monomial(sys.algebra(), MultiIndex(vec![0, 0, q + 1]), Scalar::one());
            assert!(pi.eval_uea(&above).is_zero());
        }
    }
}
