//! Finite-dimensional Lie algebras given by exact structure constants.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flag::{self, FlagError};
use crate::linalg::QMatrix;
use crate::scalar::{Field, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LieError {
    /// 1-based basis triple and the nonzero Jacobiator.
    #[error("Jacobi identity fails on (e{}, e{}, e{}): residual {residual:?}", triple.0, triple.1, triple.2)]
    JacobiViolation { triple: (usize, usize, usize), residual: Vec<Scalar> },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("basis index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("bracket of e{0} with itself must vanish")]
    SelfBracket(usize),
    #[error("brackets [e{0},e{1}] and [e{1},e{0}] are not opposite")]
    InconsistentBracket(usize, usize),
    #[error("scalar {0} is not in the declared field")]
    FieldMismatch(Scalar),
    #[error("algebra is not solvable (derived series stabilizes at dimension {0})")]
    NotSolvable(usize),
    #[error("subspace is not an ideal")]
    NotAnIdeal,
    #[error("nilradical candidate is not nilpotent")]
    NotNilpotent,
    /// 1-based witness generator and its characteristic polynomial.
    #[error("algebra is not triangular: ad e{witness} has characteristic polynomial {charpoly} with non-real roots")]
    NotTriangular { witness: usize, charpoly: String },
    #[error("ad e{witness} has real eigenvalues outside the rationals (characteristic polynomial {charpoly})")]
    IrrationalEigenvalues { witness: usize, charpoly: String },
    #[error("basis change is singular")]
    SingularBasisChange,
    #[error("invalid algebra description: {0}")]
    Format(String),
}

/// Lie algebra with basis `e_1..e_m` and structure constants `[e_i, e_j] = sum_k c_ij^k e_k`.
#[derive(Clone, PartialEq, Eq)]
pub struct LieAlgebra {
    field: Field,
    labels: Vec<String>,
    // brackets[i][j] = coordinates of [e_i, e_j], 0-based
    brackets: Vec<Vec<Vec<Scalar>>>,
}

/// One declared bracket, 0-based.
#[derive(Clone, Debug)]
pub struct BracketEntry {
    pub i: usize,
    pub j: usize,
    pub coeffs: Vec<(usize, Scalar)>,
}

impl BracketEntry {
    pub fn new(i: usize, j: usize, coeffs: &[(usize, i64)]) -> Self {
        BracketEntry { i, j, coeffs: coeffs.iter().map(|&(k, c)| (k, Scalar::from_int(c))).collect() }
    }
}

impl LieAlgebra {
    /// Builds and validates an algebra (antisymmetry completion plus exact Jacobi check).
    pub fn new(field: Field, labels: Vec<String>, entries: &[BracketEntry]) -> Result<Self, LieError> {
        let m = labels.len();
        let mut brackets = vec![vec![vec![Scalar::zero(); m]; m]; m];
        let mut seen: BTreeMap<(usize, usize), Vec<Scalar>> = BTreeMap::new();
        for e in entries {
            for idx in [e.i, e.j] {
                if idx >= m {
                    return Err(LieError::IndexOutOfRange(idx + 1));
                }
            }
            let mut v = vec![Scalar::zero(); m];
            for (k, c) in &e.coeffs {
                if *k >= m {
                    return Err(LieError::IndexOutOfRange(k + 1));
                }
                if !c.fits(field) {
                    return Err(LieError::FieldMismatch(c.clone()));
                }
                v[*k] += c;
            }
            if e.i == e.j {
                if v.iter().any(|c| !c.is_zero()) {
                    return Err(LieError::SelfBracket(e.i + 1));
                }
                continue;
            }
            let (a, b, v) = if e.i < e.j { (e.i, e.j, v) } else { (e.j, e.i, v.iter().map(|c| -c).collect()) };
            if let Some(prev) = seen.get(&(a, b)) {
                if *prev != v {
                    return Err(LieError::InconsistentBracket(e.i + 1, e.j + 1));
                }
            }
            seen.insert((a, b), v);
        }
        for ((a, b), v) in seen {
            brackets[b][a] = v.iter().map(|c| -c).collect();
            brackets[a][b] = v;
        }
        let alg = LieAlgebra { field, labels, brackets };
        alg.check_jacobi()?;
        Ok(alg)
    }

    fn check_jacobi(&self) -> Result<(), LieError> {
        let m = self.dim();
        for i in 0..m {
            for j in i + 1..m {
                for k in j + 1..m {
                    let unit = |t: usize| -> Vec<Scalar> {
                        let mut v = vec![Scalar::zero(); m];
                        v[t] = Scalar::one();
                        v
                    };
                    let (ei, ej, ek) = (unit(i), unit(j), unit(k));
                    let t1 = self.bracket(&ei, &self.bracket(&ej, &ek));
                    let t2 = self.bracket(&ej, &self.bracket(&ek, &ei));
                    let t3 = self.bracket(&ek, &self.bracket(&ei, &ej));
                    let residual: Vec<Scalar> = (0..m).map(|t| &(&t1[t] + &t2[t]) + &t3[t]).collect();
                    if residual.iter().any(|c| !c.is_zero()) {
                        return Err(LieError::JacobiViolation { triple: (i + 1, j + 1, k + 1), residual });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, LieError> {
        if labels.len() != self.dim() {
            return Err(LieError::DimensionMismatch { expected: self.dim(), got: labels.len() });
        }
        self.labels = labels;
        Ok(self)
    }

    /// Same structure constants over the complex field.
    pub fn complexify(&self) -> Self {
        let mut c = self.clone();
        c.field = Field::Complex;
        c
    }

    /// Coordinates of `[e_i, e_j]` (0-based).
    pub fn bracket_basis(&self, i: usize, j: usize) -> &[Scalar] {
        &self.brackets[i][j]
    }

    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> &Scalar {
        &self.brackets[i][j][k]
    }

    /// Bracket of two coordinate vectors.
    pub fn bracket(&self, x: &[Scalar], y: &[Scalar]) -> Vec<Scalar> {
        let m = self.dim();
        let mut out = vec![Scalar::zero(); m];
        for i in 0..m {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..m {
                if y[j].is_zero() || i == j {
                    continue;
                }
                let s = &x[i] * &y[j];
                for (k, c) in self.brackets[i][j].iter().enumerate() {
                    if !c.is_zero() {
                        out[k] += &(&s * c);
                    }
                }
            }
        }
        out
    }

    /// `ad x` as a matrix; column `j` holds `[x, e_j]`.
    pub fn ad(&self, x: &[Scalar]) -> QMatrix {
        let m = self.dim();
        let cols: Vec<Vec<Scalar>> = (0..m).map(|j| self.bracket(x, &self.unit(j))).collect();
        QMatrix::from_columns(&cols)
    }

    pub fn ad_basis(&self, i: usize) -> QMatrix {
        self.ad(&self.unit(i))
    }

    pub fn unit(&self, i: usize) -> Vec<Scalar> {
        let mut v = vec![Scalar::zero(); self.dim()];
        v[i] = Scalar::one();
        v
    }

    pub fn is_abelian(&self) -> bool {
        self.brackets.iter().flatten().flatten().all(Scalar::is_zero)
    }

    /// Span of `[a, b]` over `a` in `u`, `b` in `v`.
    pub fn bracket_spaces(&self, u: &Subspace, v: &Subspace) -> Subspace {
        let mut vecs = Vec::new();
        for a in u.basis() {
            for b in v.basis() {
                vecs.push(self.bracket(&a, &b));
            }
        }
        Subspace::from_vectors(self.dim(), &vecs)
    }

    pub fn full_space(&self) -> Subspace {
        Subspace::full(self.dim())
    }

    pub fn derived_algebra(&self) -> Subspace {
        let g = self.full_space();
        self.bracket_spaces(&g, &g)
    }

    /// `g, [g,g], [[g,g],[g,g]], ...` up to the first repeated term.
    pub fn derived_series(&self) -> Vec<Subspace> {
        let mut out = vec![self.full_space()];
        loop {
            let last = out.last().expect("nonempty");
            let next = self.bracket_spaces(last, last);
            if next.dim() == last.dim() {
                break;
            }
            let done = next.dim() == 0;
            out.push(next);
            if done {
                break;
            }
        }
        out
    }

    pub fn is_solvable(&self) -> bool {
        self.derived_series().last().is_some_and(|s| s.dim() == 0)
    }

    /// Lower central series of the subalgebra `s`: `s, [s,s], [s,[s,s]], ...`.
    pub fn lower_central_series_of(&self, s: &Subspace) -> Vec<Subspace> {
        let mut out = vec![s.clone()];
        loop {
            let last = out.last().expect("nonempty");
            let next = self.bracket_spaces(s, last);
            if next.dim() == last.dim() {
                break;
            }
            let done = next.dim() == 0;
            out.push(next);
            if done {
                break;
            }
        }
        out
    }

    pub fn lower_central_series(&self) -> Vec<Subspace> {
        self.lower_central_series_of(&self.full_space())
    }

    pub fn is_nilpotent(&self) -> bool {
        self.lower_central_series().last().is_some_and(|s| s.dim() == 0)
    }

    /// Number of nonzero terms in the lower central series (0 for the zero algebra).
    pub fn nilpotency_class(&self) -> Option<usize> {
        let lcs = self.lower_central_series();
        if lcs.last().is_some_and(|s| s.dim() == 0) {
            Some(lcs.iter().filter(|s| s.dim() > 0).count())
        } else {
            None
        }
    }

    pub fn is_ideal(&self, s: &Subspace) -> bool {
        let g = self.full_space();
        self.bracket_spaces(&g, s).is_subspace_of(s)
    }

    pub fn center(&self) -> Subspace {
        let m = self.dim();
        // x in center iff ad(x) = 0; linear in x
        let mut rows = Vec::new();
        for j in 0..m {
            for k in 0..m {
                rows.push((0..m).map(|i| self.brackets[i][j][k].clone()).collect::<Vec<_>>());
            }
        }
        let kern = QMatrix::from_rows(rows).nullspace();
        Subspace::from_vectors(m, &kern)
    }

    /// Nilradical of a solvable algebra whose nilradical equals the derived algebra.
    pub fn nilradical(&self) -> Result<Subspace, LieError> {
        if !self.is_solvable() {
            let last = self.derived_series().last().map_or(0, Subspace::dim);
            return Err(LieError::NotSolvable(last));
        }
        let n = self.derived_algebra();
        let lcs = self.lower_central_series_of(&n);
        if lcs.last().is_some_and(|s| s.dim() != 0) {
            return Err(LieError::NotNilpotent);
        }
        Ok(n)
    }

    /// The split index `k` if the last `m - k` basis vectors span the derived algebra.
    pub fn split_index(&self) -> Option<usize> {
        let n = self.derived_algebra();
        let k = self.dim() - n.dim();
        let tail: Vec<Vec<Scalar>> = (k..self.dim()).map(|i| self.unit(i)).collect();
        (Subspace::from_vectors(self.dim(), &tail) == n).then_some(k)
    }

    /// Quotient by an ideal; the quotient basis is the image of the non-pivot basis vectors.
    pub fn quotient(&self, ideal: &Subspace) -> Result<Quotient, LieError> {
        if ideal.ambient() != self.dim() {
            return Err(LieError::DimensionMismatch { expected: self.dim(), got: ideal.ambient() });
        }
        if !self.is_ideal(ideal) {
            return Err(LieError::NotAnIdeal);
        }
        let keep = ideal.complement_indices();
        let q = keep.len();
        let mut projection = QMatrix::zeros(q, self.dim());
        for c in 0..self.dim() {
            let img = ideal.reduce(&self.unit(c));
            for (a, &k) in keep.iter().enumerate() {
                projection.set(a, c, img[k].clone());
            }
        }
        let mut entries = Vec::new();
        for (a, &ka) in keep.iter().enumerate() {
            for (b, &kb) in keep.iter().enumerate().skip(a + 1) {
                let br = projection.mul_vec(&self.brackets[ka][kb]);
                let coeffs: Vec<(usize, Scalar)> =
                    br.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).collect();
                if !coeffs.is_empty() {
                    entries.push(BracketEntry { i: a, j: b, coeffs });
                }
            }
        }
        let labels = keep.iter().map(|&k| self.labels[k].clone()).collect();
        let algebra = LieAlgebra::new(self.field, labels, &entries)?;
        let mut section = QMatrix::zeros(self.dim(), q);
        for (a, &k) in keep.iter().enumerate() {
            section.set(k, a, Scalar::one());
        }
        let quotient = Quotient { algebra, projection, section };
        debug_assert!(quotient.projection_is_homomorphism(self));
        Ok(quotient)
    }

    /// Algebra in the basis given by the columns of `p` (old coordinates).
    pub fn change_basis(&self, p: &QMatrix, labels: Vec<String>) -> Result<LieAlgebra, LieError> {
        let m = self.dim();
        if p.nrows() != m || p.ncols() != m || labels.len() != m {
            return Err(LieError::DimensionMismatch { expected: m, got: p.ncols() });
        }
        let p_inv = p.inverse().ok_or(LieError::SingularBasisChange)?;
        let cols: Vec<Vec<Scalar>> = (0..m).map(|j| p.column(j)).collect();
        let mut entries = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                let br = p_inv.mul_vec(&self.bracket(&cols[i], &cols[j]));
                let coeffs: Vec<(usize, Scalar)> =
                    br.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).collect();
                if !coeffs.is_empty() {
                    entries.push(BracketEntry { i, j, coeffs });
                }
            }
        }
        LieAlgebra::new(self.field, labels, &entries)
    }

    /// Full flag of ideals with eigenvalue functionals, or a certificate of failure.
    pub fn triangular_flag(&self) -> Result<FlagCertificate, LieError> {
        if !self.is_solvable() {
            let last = self.derived_series().last().map_or(0, Subspace::dim);
            return Err(LieError::NotSolvable(last));
        }
        let m = self.dim();
        let ads: Vec<QMatrix> = (0..m).map(|i| self.ad_basis(i)).collect();
        let p = flag::triangularize(&ads, self.field).map_err(|e| match e {
            FlagError::NonReal { index, charpoly } => LieError::NotTriangular { witness: index + 1, charpoly },
            FlagError::OutsideField { index, charpoly } => {
                LieError::IrrationalEigenvalues { witness: index + 1, charpoly }
            }
            FlagError::NoCommonEigenvector => LieError::NotTriangular { witness: 0, charpoly: String::new() },
        })?;
        let p_inv = p.inverse().expect("triangularizing basis is invertible");
        let conj: Vec<QMatrix> = ads.iter().map(|a| p_inv.mul(a).mul(&p)).collect();
        let functionals = (0..m).map(|j| conj.iter().map(|c| c.get(j, j).clone()).collect()).collect();
        let ideals = (1..=m)
            .map(|j| Subspace::from_vectors(m, &(0..j).map(|c| p.column(c)).collect::<Vec<_>>()))
            .collect();
        Ok(FlagCertificate { basis: p, ideals, functionals })
    }

    pub fn to_spec(&self) -> LieAlgebraSpec {
        let mut brackets = Vec::new();
        for i in 0..self.dim() {
            for j in i + 1..self.dim() {
                let c: BTreeMap<String, Scalar> = self.brackets[i][j]
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(k, v)| ((k + 1).to_string(), v.clone()))
                    .collect();
                if !c.is_empty() {
                    brackets.push(BracketSpec { i: i + 1, j: j + 1, c });
                }
            }
        }
        LieAlgebraSpec { dim: self.dim(), mode: self.field, basis: Some(self.labels.clone()), brackets }
    }

    pub fn from_spec(spec: &LieAlgebraSpec) -> Result<Self, LieError> {
        let labels = match &spec.basis {
            Some(b) => {
                if b.len() != spec.dim {
                    return Err(LieError::DimensionMismatch { expected: spec.dim, got: b.len() });
                }
                b.clone()
            }
            None => (1..=spec.dim).map(|i| format!("e{i}")).collect(),
        };
        let mut entries = Vec::new();
        for b in &spec.brackets {
            if b.i == 0 || b.j == 0 || b.i > spec.dim || b.j > spec.dim {
                return Err(LieError::IndexOutOfRange(b.i.max(b.j)));
            }
            let mut coeffs = Vec::new();
            for (k, v) in &b.c {
                let k: usize = k.parse().map_err(|_| LieError::Format(format!("bad index `{k}`")))?;
                if k == 0 || k > spec.dim {
                    return Err(LieError::IndexOutOfRange(k));
                }
                coeffs.push((k - 1, v.clone()));
            }
            entries.push(BracketEntry { i: b.i - 1, j: b.j - 1, coeffs });
        }
        LieAlgebra::new(spec.mode, labels, &entries)
    }

    pub fn from_json(text: &str) -> Result<Self, LieError> {
        let spec: LieAlgebraSpec = serde_json::from_str(text).map_err(|e| LieError::Format(e.to_string()))?;
        LieAlgebra::from_spec(&spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_spec()).expect("serializable")
    }
}

impl fmt::Debug for LieAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LieAlgebra(dim={}, {:?}, {})", self.dim(), self.field, self.to_json())
    }
}

/// Serialized form: 1-based indices, scalars as strings, omitted pairs are zero.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct LieAlgebraSpec {
    pub dim: usize,
    #[serde(default)]
    pub mode: Field,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<String>>,
    #[serde(default)]
    pub brackets: Vec<BracketSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BracketSpec {
    pub i: usize,
    pub j: usize,
    pub c: BTreeMap<String, Scalar>,
}

/// Quotient algebra with its projection and the standard section.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub algebra: LieAlgebra,
    /// `dim(q) x dim(g)`.
    pub projection: QMatrix,
    /// `dim(g) x dim(q)`, picks the kept basis vectors.
    pub section: QMatrix,
}

impl Quotient {
    pub fn projection_is_homomorphism(&self, parent: &LieAlgebra) -> bool {
        let m = parent.dim();
        (0..m).all(|i| {
            (0..m).all(|j| {
                let lhs = self.projection.mul_vec(parent.bracket_basis(i, j));
                let rhs = self
                    .algebra
                    .bracket(&self.projection.mul_vec(&parent.unit(i)), &self.projection.mul_vec(&parent.unit(j)));
                lhs == rhs
            })
        })
    }
}

/// Flag `0 = I_0 < I_1 < ... < I_m = g` of ideals with `dim I_j = j`.
#[derive(Clone, Debug)]
pub struct FlagCertificate {
    /// Columns `v_1..v_m` with `I_j = span(v_1..v_j)`.
    pub basis: QMatrix,
    pub ideals: Vec<Subspace>,
    /// `functionals[j][i]`: eigenvalue of `ad e_i` on `I_{j+1} / I_j`.
    pub functionals: Vec<Vec<Scalar>>,
}

/// Subspace of `K^n` stored by the reduced row echelon form of a spanning set.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Subspace {
    ambient: usize,
    rows: Vec<Vec<Scalar>>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Subspace { ambient, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn full(ambient: usize) -> Self {
        let rows = (0..ambient)
            .map(|i| (0..ambient).map(|j| if i == j { Scalar::one() } else { Scalar::zero() }).collect())
            .collect();
        Subspace { ambient, rows, pivots: (0..ambient).collect() }
    }

    pub fn from_vectors(ambient: usize, vecs: &[Vec<Scalar>]) -> Self {
        let nonzero: Vec<Vec<Scalar>> = vecs.iter().filter(|v| v.iter().any(|c| !c.is_zero())).cloned().collect();
        if nonzero.is_empty() {
            return Subspace::zero(ambient);
        }
        let (r, pivots) = QMatrix::from_rows(nonzero).rref();
        let rows = (0..pivots.len()).map(|i| r.row(i)).collect();
        Subspace { ambient, rows, pivots }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Canonical (reduced echelon) basis.
    pub fn basis(&self) -> Vec<Vec<Scalar>> {
        self.rows.clone()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Indices of standard basis vectors spanning a complement.
    pub fn complement_indices(&self) -> Vec<usize> {
        (0..self.ambient).filter(|i| !self.pivots.contains(i)).collect()
    }

    /// `v` minus its echelon components; zero iff `v` lies in the subspace.
    pub fn reduce(&self, v: &[Scalar]) -> Vec<Scalar> {
        let mut w = v.to_vec();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let f = w[p].clone();
            if f.is_zero() {
                continue;
            }
            for (t, c) in row.iter().enumerate() {
                if !c.is_zero() {
                    w[t] -= &(&f * c);
                }
            }
        }
        w
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        self.reduce(v).iter().all(Scalar::is_zero)
    }

    /// Coordinates of `v` in the canonical basis, if it lies in the subspace.
    pub fn coordinates(&self, v: &[Scalar]) -> Option<Vec<Scalar>> {
        if !self.contains(v) {
            return None;
        }
        Some(self.pivots.iter().map(|&p| v[p].clone()).collect())
    }

    pub fn is_subspace_of(&self, o: &Subspace) -> bool {
        self.rows.iter().all(|r| o.contains(r))
    }

    pub fn sum(&self, o: &Subspace) -> Subspace {
        let mut v = self.rows.clone();
        v.extend(o.rows.iter().cloned());
        Subspace::from_vectors(self.ambient, &v)
    }

    pub fn intersect(&self, o: &Subspace) -> Subspace {
        if self.dim() == 0 || o.dim() == 0 {
            return Subspace::zero(self.ambient);
        }
        // solve sum a_i u_i = sum b_j w_j
        let mut cols = self.rows.clone();
        cols.extend(o.rows.iter().map(|r| r.iter().map(|c| -c).collect::<Vec<_>>()));
        let kern = QMatrix::from_columns(&cols).nullspace();
        let vecs: Vec<Vec<Scalar>> = kern
            .iter()
            .map(|k| {
                let mut v = vec![Scalar::zero(); self.ambient];
                for (a, r) in k.iter().zip(&self.rows) {
                    for (t, c) in r.iter().enumerate() {
                        v[t] += &(a * c);
                    }
                }
                v
            })
            .collect();
        Subspace::from_vectors(self.ambient, &vecs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn jacobi_counterexample_rejected() {
        let err = catalog::jacobi_counterexample().unwrap_err();
        match err {
            LieError::JacobiViolation { triple, residual } => {
                assert_eq!(triple, (1, 2, 3));
                assert!(residual.iter().any(|c| !c.is_zero()));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn heisenberg_structure() {
        let h = catalog::heisenberg();
        assert!(h.is_nilpotent());
        assert_eq!(h.center().dim(), 1);
        assert!(h.center().contains(&h.unit(2)));
        assert_eq!(h.nilradical().unwrap().dim(), 1);
        assert_eq!(h.nilpotency_class(), Some(2));
        assert_eq!(h.split_index(), Some(2));
    }

    #[test]
    fn euclidean_flag_fails_with_e1() {
        let e2 = catalog::euclidean();
        assert!(e2.is_solvable());
        match e2.triangular_flag() {
            Err(LieError::NotTriangular { witness, charpoly }) => {
                assert_eq!(witness, 1);
                assert_eq!(charpoly, "t^3 + t");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn irrational_eigenvalues_distinguished() {
        // [x, y] = z, [x, z] = 2y: ad x acts on span(y, z) with eigenvalues +-sqrt(2)
        let labels = vec!["x".into(), "y".into(), "z".into()];
        let g = LieAlgebra::new(
            Field::Real,
            labels,
            &[BracketEntry::new(0, 1, &[(2, 1)]), BracketEntry::new(0, 2, &[(1, 2)])],
        )
        .unwrap();
        assert!(matches!(g.triangular_flag(), Err(LieError::IrrationalEigenvalues { witness: 1, .. })));
    }

    #[test]
    fn affine_flag_and_quotient() {
        let a = catalog::af1();
        let cert = a.triangular_flag().unwrap();
        assert_eq!(cert.ideals.len(), 2);
        assert!(cert.ideals.iter().all(|i| a.is_ideal(i)));
        let n = a.nilradical().unwrap();
        let q = a.quotient(&n).unwrap();
        assert_eq!(q.algebra.dim(), 1);
        assert!(q.projection_is_homomorphism(&a));
        let not_ideal = Subspace::from_vectors(2, &[a.unit(0)]);
        assert_eq!(a.quotient(&not_ideal).unwrap_err(), LieError::NotAnIdeal);
    }

    #[test]
    fn json_round_trip() {
        let h = catalog::heisenberg();
        let back = LieAlgebra::from_json(&h.to_json()).unwrap();
        assert_eq!(h, back);
        let text = r#"{"dim":2,"mode":"real","basis":["e1","e2"],"brackets":[{"i":1,"j":2,"c":{"2":"1"}}]}"#;
        assert_eq!(LieAlgebra::from_json(text).unwrap(), catalog::af1());
    }

    #[test]
    fn triangular_upper_matrices() {
        for p in 2..=3 {
            let t = catalog::triangular(p);
            assert!(t.is_solvable());
            assert_eq!(t.split_index(), Some(p));
            let cert = t.triangular_flag().unwrap();
            assert!(cert.ideals.iter().all(|i| t.is_ideal(i)));
        }
    }
}
