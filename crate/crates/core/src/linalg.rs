//! Exact dense and sparse matrices over [`Scalar`].

use std::collections::BTreeMap;
use std::fmt;

use crate::scalar::Scalar;

/// Dense row-major matrix with exact entries.
#[derive(Clone, PartialEq, Eq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix { rows, cols, data: vec![Scalar::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = QMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Scalar::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        QMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        QMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| Scalar::from_int(v)).collect()).collect())
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<Scalar>]) -> Self {
        let n = cols.first().map_or(0, Vec::len);
        let mut m = QMatrix::zeros(n, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for (i, v) in c.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> Vec<Scalar> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn column(&self, j: usize) -> Vec<Scalar> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_upper_triangular(&self) -> bool {
        (0..self.rows).all(|i| (0..i.min(self.cols)).all(|j| self.get(i, j).is_zero()))
    }

    pub fn is_strictly_upper_triangular(&self) -> bool {
        (0..self.rows).all(|i| (0..=i.min(self.cols.saturating_sub(1))).all(|j| j >= self.cols || self.get(i, j).is_zero()))
    }

    pub fn transpose(&self) -> Self {
        let mut t = QMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        QMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn add(&self, o: &QMatrix) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        QMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &QMatrix) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        QMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect() }
    }

    pub fn mul(&self, o: &QMatrix) -> Self {
        assert_eq!(self.cols, o.rows, "shape mismatch in product");
        let mut out = QMatrix::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if !b.is_zero() {
                        let idx = i * out.cols + j;
                        out.data[idx] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).filter(|&j| !v[j].is_zero()).map(|j| self.get(i, j) * &v[j]).sum())
            .collect()
    }

    pub fn commutator(&self, o: &QMatrix) -> Self {
        self.mul(o).sub(&o.mul(self))
    }

    pub fn trace(&self) -> Scalar {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i).clone()).sum()
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (QMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else { continue };
            m.swap_rows(r, p);
            let inv = m.get(r, c).recip().expect("nonzero pivot");
            for j in c..m.cols {
                let v = m.get(r, j) * &inv;
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let f = m.get(i, c).clone();
                if f.is_zero() {
                    continue;
                }
                for j in c..m.cols {
                    let v = m.get(i, j) - &(&f * m.get(r, j));
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `{x : A x = 0}`.
    pub fn nullspace(&self) -> Vec<Vec<Scalar>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Scalar::zero(); self.cols];
                v[f] = Scalar::one();
                for (row, &p) in pivots.iter().enumerate() {
                    v[p] = -r.get(row, f);
                }
                v
            })
            .collect()
    }

    pub fn inverse(&self) -> Option<QMatrix> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut aug = QMatrix::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n + i, Scalar::one());
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = QMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, r.get(i, n + j).clone());
            }
        }
        Some(inv)
    }

    /// One solution of `A x = b`, if any.
    pub fn solve(&self, b: &[Scalar]) -> Option<Vec<Scalar>> {
        let mut aug = QMatrix::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, self.cols, b[i].clone());
        }
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![Scalar::zero(); self.cols];
        for (row, &p) in pivots.iter().enumerate() {
            x[p] = r.get(row, self.cols).clone();
        }
        Some(x)
    }

    /// Characteristic polynomial `det(t I - A)`, coefficients low to high.
    pub fn charpoly(&self) -> UPoly {
        assert!(self.is_square());
        // Faddeev-LeVerrier
        let n = self.rows;
        let mut coeffs = vec![Scalar::zero(); n + 1];
        coeffs[n] = Scalar::one();
        let mut m = QMatrix::zeros(n, n);
        for k in 1..=n {
            let mut next = self.mul(&m);
            let c = &coeffs[n - k + 1];
            for i in 0..n {
                let v = next.get(i, i) + c;
                next.set(i, i, v);
            }
            m = next;
            let t = self.mul(&m).trace();
            coeffs[n - k] = -(&t / &Scalar::from_int(k as i64));
        }
        UPoly::new(coeffs)
    }

    pub fn kron(&self, o: &QMatrix) -> QMatrix {
        let mut out = QMatrix::zeros(self.rows * o.rows, self.cols * o.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..o.rows {
                    for l in 0..o.cols {
                        out.set(i * o.rows + k, j * o.cols + l, a * o.get(k, l));
                    }
                }
            }
        }
        out
    }

    pub fn to_f64(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).to_f64())
    }

    pub fn to_c64(&self) -> nalgebra::DMatrix<num_complex::Complex64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).to_c64())
    }
}

impl fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[")?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|s| s.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Square sparse matrix stored as per-row ordered maps; zeros are never stored.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct SparseMatrix {
    dim: usize,
    rows: Vec<BTreeMap<usize, Scalar>>,
}

impl SparseMatrix {
    pub fn zeros(dim: usize) -> Self {
        SparseMatrix { dim, rows: vec![BTreeMap::new(); dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = SparseMatrix::zeros(dim);
        for i in 0..dim {
            m.rows[i].insert(i, Scalar::one());
        }
        m
    }

    pub fn from_dense(m: &QMatrix) -> Self {
        assert!(m.is_square());
        let mut s = SparseMatrix::zeros(m.nrows());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                s.set(i, j, m.get(i, j).clone());
            }
        }
        s
    }

    pub fn to_dense(&self) -> QMatrix {
        let mut d = QMatrix::zeros(self.dim, self.dim);
        for (i, row) in self.rows.iter().enumerate() {
            for (&j, v) in row {
                d.set(i, j, v.clone());
            }
        }
        d
    }

    /// Matrix unit `E_{ij}` (0-based).
    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = SparseMatrix::zeros(dim);
        m.set(i, j, Scalar::one());
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Scalar {
        self.rows[i].get(&j).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        if v.is_zero() {
            self.rows[i].remove(&j);
        } else {
            self.rows[i].insert(j, v);
        }
    }

    pub fn add_at(&mut self, i: usize, j: usize, v: &Scalar) {
        if v.is_zero() {
            return;
        }
        let slot = self.rows[i].entry(j).or_insert_with(Scalar::zero);
        *slot += v;
        if slot.is_zero() {
            self.rows[i].remove(&j);
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Scalar)> {
        self.rows.iter().enumerate().flat_map(|(i, r)| r.iter().map(move |(&j, v)| (i, j, v)))
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(BTreeMap::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(BTreeMap::is_empty)
    }

    pub fn is_upper_triangular(&self) -> bool {
        self.entries().all(|(i, j, _)| j >= i)
    }

    pub fn is_strictly_upper_triangular(&self) -> bool {
        self.entries().all(|(i, j, _)| j > i)
    }

    pub fn diagonal(&self) -> Vec<Scalar> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        if s.is_zero() {
            return SparseMatrix::zeros(self.dim);
        }
        SparseMatrix {
            dim: self.dim,
            rows: self.rows.iter().map(|r| r.iter().map(|(&j, v)| (j, v * s)).collect()).collect(),
        }
    }

    pub fn add(&self, o: &SparseMatrix) -> Self {
        assert_eq!(self.dim, o.dim);
        let mut out = self.clone();
        for (i, j, v) in o.entries() {
            out.add_at(i, j, v);
        }
        out
    }

    pub fn sub(&self, o: &SparseMatrix) -> Self {
        self.add(&o.scale(&Scalar::from_int(-1)))
    }

    pub fn mul(&self, o: &SparseMatrix) -> Self {
        assert_eq!(self.dim, o.dim, "shape mismatch in product");
        let mut out = SparseMatrix::zeros(self.dim);
        for (i, row) in self.rows.iter().enumerate() {
            let mut acc: BTreeMap<usize, Scalar> = BTreeMap::new();
            for (&k, a) in row {
                for (&j, b) in &o.rows[k] {
                    *acc.entry(j).or_insert_with(Scalar::zero) += a * b;
                }
            }
            acc.retain(|_, v| !v.is_zero());
            out.rows[i] = acc;
        }
        out
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Vec<Scalar> {
        self.rows
            .iter()
            .map(|r| r.iter().filter(|(&j, _)| !v[j].is_zero()).map(|(&j, a)| a * &v[j]).sum())
            .collect()
    }

    pub fn commutator(&self, o: &SparseMatrix) -> Self {
        self.mul(o).sub(&o.mul(self))
    }

    pub fn kron(&self, o: &SparseMatrix) -> Self {
        let n = self.dim * o.dim;
        let mut out = SparseMatrix::zeros(n);
        for (i, j, a) in self.entries() {
            for (k, l, b) in o.entries() {
                out.rows[i * o.dim + k].insert(j * o.dim + l, a * b);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = SparseMatrix::identity(self.dim);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Conjugate by `p`: returns `p^{-1} A p`.
    pub fn conjugate(&self, p: &QMatrix, p_inv: &QMatrix) -> Self {
        SparseMatrix::from_dense(&p_inv.mul(&self.to_dense()).mul(p))
    }

    pub fn to_f64(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.dim, self.dim);
        for (i, j, v) in self.entries() {
            m[(i, j)] = v.to_f64();
        }
        m
    }

    pub fn to_c64(&self) -> nalgebra::DMatrix<num_complex::Complex64> {
        let mut m = nalgebra::DMatrix::zeros(self.dim, self.dim);
        for (i, j, v) in self.entries() {
            m[(i, j)] = v.to_c64();
        }
        m
    }
}

impl fmt::Debug for SparseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dim <= 8 {
            return write!(f, "{:?}", self.to_dense());
        }
        write!(f, "SparseMatrix(dim={}, nnz={})", self.dim, self.nnz())
    }
}

/// Univariate polynomial with exact coefficients, lowest degree first, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct UPoly {
    coeffs: Vec<Scalar>,
}

/// Outcome of the search for roots in the base field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootSplit {
    /// Roots with multiplicity.
    pub roots: Vec<Scalar>,
    /// Cofactor without roots in the base field.
    pub remainder: UPoly,
    /// Number of distinct real roots of the remainder (real coefficients only).
    pub remainder_real_roots: usize,
}

impl UPoly {
    pub fn new(mut coeffs: Vec<Scalar>) -> Self {
        while coeffs.last().is_some_and(Scalar::is_zero) {
            coeffs.pop();
        }
        UPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    /// Degree; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, x: &Scalar) -> Scalar {
        self.coeffs.iter().rev().fold(Scalar::zero(), |acc, c| &(&acc * x) + c)
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(Scalar::is_real)
    }

    pub fn derivative(&self) -> UPoly {
        UPoly::new(self.coeffs.iter().enumerate().skip(1).map(|(k, c)| c * &Scalar::from_int(k as i64)).collect())
    }

    /// Quotient and remainder.
    pub fn div_rem(&self, d: &UPoly) -> (UPoly, UPoly) {
        let dd = d.degree().expect("division by zero polynomial");
        let lead_inv = d.coeffs[dd].recip().expect("nonzero lead");
        let mut rem = self.coeffs.clone();
        let Some(n) = self.degree() else { return (UPoly::new(vec![]), UPoly::new(vec![])) };
        if n < dd {
            return (UPoly::new(vec![]), self.clone());
        }
        let mut q = vec![Scalar::zero(); n - dd + 1];
        for k in (0..=n - dd).rev() {
            let c = &rem[k + dd] * &lead_inv;
            if !c.is_zero() {
                for (i, dc) in d.coeffs.iter().enumerate() {
                    rem[k + i] -= &(&c * dc);
                }
            }
            q[k] = c;
        }
        rem.truncate(dd);
        (UPoly::new(q), UPoly::new(rem))
    }

    fn deflate(&self, r: &Scalar) -> UPoly {
        let (q, rem) = self.div_rem(&UPoly::new(vec![-r, Scalar::one()]));
        debug_assert!(rem.degree().is_none());
        q
    }

    fn neg(&self) -> UPoly {
        UPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }

    /// Number of distinct real roots via a Sturm sequence (real coefficients).
    pub fn count_real_roots(&self) -> usize {
        let Some(d) = self.degree() else { return 0 };
        if d == 0 {
            return 0;
        }
        let mut seq = vec![self.clone(), self.derivative()];
        loop {
            let n = seq.len();
            if seq[n - 1].degree().is_none_or(|d| d == 0) {
                break;
            }
            let (_, r) = seq[n - 2].div_rem(&seq[n - 1]);
            if r.degree().is_none() {
                break;
            }
            seq.push(r.neg());
        }
        let sign_changes = |vals: Vec<i32>| -> usize {
            let nz: Vec<i32> = vals.into_iter().filter(|&v| v != 0).collect();
            nz.windows(2).filter(|w| w[0] != w[1]).count()
        };
        let sgn = |c: &Scalar| -> i32 {
            use num_traits::Signed;
            if c.is_zero() {
                0
            } else if c.re().is_positive() {
                1
            } else {
                -1
            }
        };
        let at_pos: Vec<i32> = seq.iter().map(|p| p.coeffs.last().map_or(0, sgn)).collect();
        let at_neg: Vec<i32> = seq
            .iter()
            .map(|p| {
                let d = p.degree().unwrap_or(0);
                let s = p.coeffs.last().map_or(0, sgn);
                if d % 2 == 0 {
                    s
                } else {
                    -s
                }
            })
            .collect();
        sign_changes(at_neg).saturating_sub(sign_changes(at_pos))
    }

    /// Finds every root lying in the coefficient field (Q, or Q(i) when `gaussian`).
    ///
    /// Candidates come from floating-point root approximations rounded by continued
    /// fractions; each candidate is verified exactly before it is accepted.
    pub fn split_roots(&self, gaussian: bool) -> RootSplit {
        let mut p = self.clone();
        let mut roots = Vec::new();
        while p.degree().is_some_and(|d| d > 0) && p.coeffs[0].is_zero() {
            roots.push(Scalar::zero());
            p = UPoly::new(p.coeffs[1..].to_vec());
        }
        'outer: loop {
            let Some(d) = p.degree() else { break };
            if d == 0 {
                break;
            }
            if d == 1 {
                let r = -(&p.coeffs[0] / &p.coeffs[1]);
                if r.is_real() || gaussian {
                    roots.push(r);
                    p = UPoly::new(vec![Scalar::one()]);
                }
                break;
            }
            for approx in numeric_roots(&p) {
                for cand in rational_candidates(approx, gaussian) {
                    if p.eval(&cand).is_zero() {
                        p = p.deflate(&cand);
                        roots.push(cand);
                        continue 'outer;
                    }
                }
            }
            break;
        }
        let remainder_real_roots = if p.is_real() { p.count_real_roots() } else { 0 };
        roots.sort_by(|a, b| a.re().cmp(b.re()).then(a.im().cmp(b.im())));
        RootSplit { roots, remainder: p, remainder_real_roots }
    }
}

fn numeric_roots(p: &UPoly) -> Vec<num_complex::Complex64> {
    use num_complex::Complex64;
    let d = p.degree().unwrap_or(0);
    let lead = p.coeffs[d].to_c64();
    let c: Vec<Complex64> = p.coeffs.iter().map(|v| v.to_c64() / lead).collect();
    let eval = |z: Complex64| c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &k| acc * z + k);
    let bound = 1.0 + c[..d].iter().map(|v| v.norm()).fold(0.0, f64::max);
    // Durand-Kerner
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..d).map(|k| seed.powu(k as u32) * bound.min(4.0)).collect();
    for _ in 0..2000 {
        let mut delta: f64 = 0.0;
        for i in 0..d {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..d {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            if den.norm() == 0.0 {
                den = Complex64::new(1e-12, 0.0);
            }
            let step = eval(z[i]) / den;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    z
}

/// Best rational approximations of `x` by continued fractions.
fn convergents(x: f64) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    if !x.is_finite() {
        return out;
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut r = x;
    for _ in 0..24 {
        let a = r.floor();
        if a.abs() > 1e12 {
            break;
        }
        let ai = a as i128;
        let h = ai * h1 + h0;
        let k = ai * k1 + k0;
        if k > 1_000_000_000 || h.abs() > 1_000_000_000_000 {
            break;
        }
        out.push((h as i64, k as i64));
        (h0, h1, k0, k1) = (h1, h, k1, k);
        let frac = r - a;
        if frac.abs() < 1e-13 {
            break;
        }
        r = 1.0 / frac;
    }
    out
}

fn rational_candidates(z: num_complex::Complex64, gaussian: bool) -> Vec<Scalar> {
    let re: Vec<Scalar> = convergents(z.re).into_iter().rev().map(|(h, k)| Scalar::ratio(h, k)).collect();
    if !gaussian {
        return re;
    }
    let im: Vec<Scalar> = convergents(z.im).into_iter().rev().map(|(h, k)| Scalar::ratio(h, k)).collect();
    let mut out = Vec::new();
    for a in re.iter().take(6) {
        for b in im.iter().take(6) {
            out.push(a + &(b * &Scalar::i()));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Scalar {
        Scalar::from_int(n)
    }

    #[test]
    fn rref_nullspace_inverse() {
        let a = QMatrix::from_i64(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(a.rank(), 2);
        for v in a.nullspace() {
            assert!(a.mul_vec(&v).iter().all(Scalar::is_zero));
        }
        let b = QMatrix::from_i64(&[&[2, 1], &[1, 1]]);
        let bi = b.inverse().unwrap();
        assert_eq!(b.mul(&bi), QMatrix::identity(2));
        assert!(a.inverse().is_none());
        let x = b.solve(&[q(3), q(2)]).unwrap();
        assert_eq!(x, vec![q(1), q(1)]);
    }

    #[test]
    fn charpoly_of_rotation_block() {
        // ad e1 on the Euclidean algebra: lambda (lambda^2 + 1)
        let a = QMatrix::from_i64(&[&[0, 0, 0], &[0, 0, -1], &[0, 1, 0]]);
        assert_eq!(a.charpoly(), UPoly::new(vec![q(0), q(1), q(0), q(1)]));
        let split = a.charpoly().split_roots(false);
        assert_eq!(split.roots, vec![q(0)]);
        assert_eq!(split.remainder_real_roots, 0);
        let split = a.charpoly().split_roots(true);
        assert_eq!(split.roots.len(), 3);
    }

    #[test]
    fn irrational_roots_are_detected() {
        let p = UPoly::new(vec![q(-2), q(0), q(1)]);
        let s = p.split_roots(false);
        assert!(s.roots.is_empty());
        assert_eq!(s.remainder_real_roots, 2);
        let p = UPoly::new(vec![Scalar::ratio(13, 16), Scalar::ratio(-7, 2), q(1)]);
        let s = p.split_roots(false);
        assert_eq!(s.roots, vec![Scalar::ratio(1, 4), Scalar::ratio(13, 4)]);
    }

    #[test]
    fn sparse_matches_dense() {
        let a = QMatrix::from_i64(&[&[1, 2], &[0, 3]]);
        let b = QMatrix::from_i64(&[&[0, 1], &[5, 0]]);
        let (sa, sb) = (SparseMatrix::from_dense(&a), SparseMatrix::from_dense(&b));
        assert_eq!(sa.mul(&sb).to_dense(), a.mul(&b));
        assert_eq!(sa.kron(&sb).to_dense(), a.kron(&b));
        assert_eq!(sa.commutator(&sb).to_dense(), a.commutator(&b));
    }
}
