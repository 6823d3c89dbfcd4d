//! Universal enveloping algebras in PBW coordinates.
//!
//! The basis order puts the complement generators `e_1..e_k` first and the
//! nilradical `e_{k+1}..e_m` last. Every element is stored as a sparse map from
//! exponent vectors to exact coefficients, meaning `sum c_a e_1^{a_1}...e_m^{a_m}`.

use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::rc::Rc;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lie::{LieAlgebra, Subspace};
use crate::poly::{format_term, push_term, random_scalar, Polynomial};
use crate::scalar::{factorial, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PbwError {
    #[error("the trailing basis vectors do not span the derived algebra")]
    NotSplit,
    #[error("split {split} is invalid: trailing span must be a nilpotent ideal containing the derived algebra")]
    InvalidSplit { split: usize },
    #[error("nilradical basis is not adapted to its lower central series")]
    NonAdaptedBasis,
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("elements belong to different algebras")]
    AlgebraMismatch,
    #[error("exponent has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("scalar {0} is not in the algebra's field")]
    FieldMismatch(Scalar),
}

/// Exponent vector in `Z_+^n`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zeros(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        MultiIndex(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    /// Colexicographic order: compare at the last differing coordinate.
    pub fn colex_cmp(&self, o: &MultiIndex) -> Ordering {
        for (a, b) in self.0.iter().zip(&o.0).rev() {
            match a.cmp(b) {
                Ordering::Equal => continue,
                other => return other,
            }
        }
        self.0.len().cmp(&o.0.len())
    }

    pub fn colex_lt(&self, o: &MultiIndex) -> bool {
        self.colex_cmp(o) == Ordering::Less
    }

    pub fn add(&self, o: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    /// `alpha!` = product of factorials.
    pub fn factorial(&self) -> Scalar {
        self.0.iter().fold(Scalar::one(), |acc, &a| &acc * &factorial(a))
    }

    pub fn concat(&self, o: &MultiIndex) -> MultiIndex {
        let mut v = self.0.clone();
        v.extend_from_slice(&o.0);
        MultiIndex(v)
    }

    pub fn split_at(&self, k: usize) -> (MultiIndex, MultiIndex) {
        (MultiIndex(self.0[..k].to_vec()), MultiIndex(self.0[k..].to_vec()))
    }

    /// Generator indices in ascending order with multiplicity.
    pub fn word(&self) -> Vec<usize> {
        self.0.iter().enumerate().flat_map(|(i, &a)| std::iter::repeat(i).take(a as usize)).collect()
    }

    /// All indices of length `n` with total degree at most `d`.
    pub fn all_up_to(n: usize, d: u32) -> Vec<MultiIndex> {
        crate::poly::exponents_up_to(n, d).into_iter().map(MultiIndex).collect()
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

/// A Lie algebra together with its split and the filtration weights of the nilradical.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PbwAlgebra {
    lie: LieAlgebra,
    split: usize,
    weights: Vec<u32>,
}

impl PbwAlgebra {
    /// Uses the split where the trailing basis vectors span the derived algebra.
    pub fn new(lie: LieAlgebra) -> Result<Arc<PbwAlgebra>, PbwError> {
        let split = lie.split_index().ok_or(PbwError::NotSplit)?;
        PbwAlgebra::with_split(lie, split)
    }

    /// Explicit split: `span(e_{k+1}..e_m)` must be a nilpotent ideal containing `[g, g]`.
    pub fn with_split(lie: LieAlgebra, split: usize) -> Result<Arc<PbwAlgebra>, PbwError> {
        let m = lie.dim();
        if split > m {
            return Err(PbwError::InvalidSplit { split });
        }
        let tail: Vec<_> = (split..m).map(|i| lie.unit(i)).collect();
        let n = Subspace::from_vectors(m, &tail);
        if !lie.is_ideal(&n) || !lie.derived_algebra().is_subspace_of(&n) {
            return Err(PbwError::InvalidSplit { split });
        }
        let lcs = lie.lower_central_series_of(&n);
        if lcs.last().is_some_and(|s| s.dim() != 0) {
            return Err(PbwError::InvalidSplit { split });
        }
        let mut weights = vec![0; m];
        for (j, w) in weights.iter_mut().enumerate().skip(split) {
            let e = lie.unit(j);
            *w = lcs.iter().take_while(|s| s.contains(&e)).count() as u32;
        }
        // each term of the series must be spanned by basis vectors of weight at least its depth
        for (depth, s) in lcs.iter().enumerate() {
            let span: Vec<_> = (split..m).filter(|&j| weights[j] as usize > depth).map(|j| lie.unit(j)).collect();
            if Subspace::from_vectors(m, &span) != *s {
                return Err(PbwError::NonAdaptedBasis);
            }
        }
        Ok(Arc::new(PbwAlgebra { lie, split, weights }))
    }

    pub fn lie(&self) -> &LieAlgebra {
        &self.lie
    }

    pub fn dim(&self) -> usize {
        self.lie.dim()
    }

    /// Number `k` of complement generators.
    pub fn split(&self) -> usize {
        self.split
    }

    /// Dimension of the nilradical part.
    pub fn nil_dim(&self) -> usize {
        self.lie.dim() - self.split
    }

    /// Filtration weight of each basis vector: 0 on the complement, depth in the
    /// lower central series of the nilradical otherwise.
    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    /// Number of nilradical factors in a monomial.
    pub fn n_degree(&self, a: &MultiIndex) -> u32 {
        a.0[self.split..].iter().sum()
    }

    /// Weighted nilradical degree; coincides with [`Self::n_degree`] when the nilradical is abelian.
    pub fn filtration_degree(&self, a: &MultiIndex) -> u32 {
        a.0.iter().zip(&self.weights).map(|(x, w)| x * w).sum()
    }

    /// Weighted degree of an exponent over the nilradical slots only.
    pub fn nil_filtration_degree(&self, beta: &MultiIndex) -> u32 {
        beta.0.iter().zip(&self.weights[self.split..]).map(|(x, w)| x * w).sum()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.lie.labels().iter().position(|l| l == label)
    }
}

type Terms = BTreeMap<MultiIndex, Scalar>;

fn add_into(t: &mut Terms, k: MultiIndex, c: Scalar) {
    if c.is_zero() {
        return;
    }
    match t.entry(k) {
        Entry::Vacant(v) => {
            v.insert(c);
        }
        Entry::Occupied(mut o) => {
            *o.get_mut() += c;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

/// Memoized left multiplication by generators.
struct Straightener<'a> {
    alg: &'a PbwAlgebra,
    cutoff: Option<u32>,
    memo: HashMap<(usize, MultiIndex), Rc<Terms>>,
}

impl<'a> Straightener<'a> {
    fn new(alg: &'a PbwAlgebra, cutoff: Option<u32>) -> Self {
        Straightener { alg, cutoff, memo: HashMap::new() }
    }

    fn keep(&self, a: &MultiIndex) -> bool {
        self.cutoff.is_none_or(|n| self.alg.filtration_degree(a) <= n)
    }

    /// `e_i * e^beta` in normal form.
    fn gen_times_mono(&mut self, i: usize, beta: &MultiIndex) -> Rc<Terms> {
        if let Some(t) = self.memo.get(&(i, beta.clone())) {
            return t.clone();
        }
        let first = beta.0.iter().position(|&a| a > 0);
        let mut out = Terms::new();
        match first {
            Some(j) if j < i => {
                // e_i e_j = e_j e_i + [e_i, e_j]
                let mut rest = beta.clone();
                rest.0[j] -= 1;
                let inner = self.gen_times_mono(i, &rest);
                for (g, c) in inner.iter() {
                    let outer = self.gen_times_mono(j, g);
                    for (d, c2) in outer.iter() {
                        add_into(&mut out, d.clone(), c * c2);
                    }
                }
                let br: Vec<(usize, Scalar)> = self
                    .alg
                    .lie
                    .bracket_basis(i, j)
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(k, c)| (k, c.clone()))
                    .collect();
                for (k, c) in br {
                    let t = self.gen_times_mono(k, &rest);
                    for (d, c2) in t.iter() {
                        add_into(&mut out, d.clone(), &c * c2);
                    }
                }
            }
            _ => {
                let mut b = beta.clone();
                b.0[i] += 1;
                out.insert(b, Scalar::one());
            }
        }
        if self.cutoff.is_some() {
            out.retain(|k, _| self.keep(k));
        }
        let rc = Rc::new(out);
        self.memo.insert((i, beta.clone()), rc.clone());
        rc
    }

    fn gen_times(&mut self, i: usize, x: &Terms) -> Terms {
        let mut out = Terms::new();
        for (b, c) in x {
            let t = self.gen_times_mono(i, b);
            for (d, c2) in t.iter() {
                add_into(&mut out, d.clone(), c * c2);
            }
        }
        out
    }

    fn multiply(&mut self, a: &Terms, b: &Terms) -> Terms {
        let mut out = Terms::new();
        for (alpha, ca) in a {
            let mut x: Terms = b.clone();
            for &g in alpha.word().iter().rev() {
                x = self.gen_times(g, &x);
            }
            for (k, c) in x {
                add_into(&mut out, k, ca * &c);
            }
        }
        if self.cutoff.is_some() {
            out.retain(|k, _| self.keep(k));
        }
        out
    }
}

/// Element of `U(g)` in PBW coordinates.
#[derive(Clone)]
pub struct UEAElement {
    alg: Arc<PbwAlgebra>,
    terms: Terms,
}

impl PartialEq for UEAElement {
    fn eq(&self, o: &Self) -> bool {
        (Arc::ptr_eq(&self.alg, &o.alg) || self.alg == o.alg) && self.terms == o.terms
    }
}

impl Eq for UEAElement {}

impl UEAElement {
    pub fn zero(alg: &Arc<PbwAlgebra>) -> Self {
        UEAElement { alg: alg.clone(), terms: Terms::new() }
    }

    pub fn scalar(alg: &Arc<PbwAlgebra>, c: Scalar) -> Self {
        UEAElement::monomial(alg, MultiIndex::zeros(alg.dim()), c)
    }

    pub fn one(alg: &Arc<PbwAlgebra>) -> Self {
        UEAElement::scalar(alg, Scalar::one())
    }

    pub fn generator(alg: &Arc<PbwAlgebra>, i: usize) -> Self {
        UEAElement::monomial(alg, MultiIndex::unit(alg.dim(), i), Scalar::one())
    }

    pub fn monomial(alg: &Arc<PbwAlgebra>, exp: MultiIndex, c: Scalar) -> Self {
        assert_eq!(exp.len(), alg.dim(), "exponent length");
        let mut terms = Terms::new();
        add_into(&mut terms, exp, c);
        UEAElement { alg: alg.clone(), terms }
    }

    pub fn from_terms(alg: &Arc<PbwAlgebra>, terms: impl IntoIterator<Item = (MultiIndex, Scalar)>) -> Self {
        let mut t = Terms::new();
        for (k, c) in terms {
            assert_eq!(k.len(), alg.dim(), "exponent length");
            add_into(&mut t, k, c);
        }
        UEAElement { alg: alg.clone(), terms: t }
    }

    /// Normal form of a word of generators by leftmost-pair rewriting.
    ///
    /// Each step replaces `u e_j e_i v` (j > i) by `u e_i e_j v + u [e_j, e_i] v`; the pair
    /// (length, inversion count) strictly decreases lexicographically, so the loop terminates.
    pub fn normal_order(alg: &Arc<PbwAlgebra>, word: &[usize]) -> Self {
        let metric = |w: &[usize]| -> (usize, usize) {
            let inv = (0..w.len()).flat_map(|a| (a + 1..w.len()).map(move |b| (a, b))).filter(|&(a, b)| w[a] > w[b]).count();
            (w.len(), inv)
        };
        let mut out = Terms::new();
        let mut work: Vec<(Vec<usize>, Scalar)> = vec![(word.to_vec(), Scalar::one())];
        while let Some((w, c)) = work.pop() {
            let Some(p) = (0..w.len().saturating_sub(1)).find(|&p| w[p] > w[p + 1]) else {
                let mut e = vec![0u32; alg.dim()];
                for &g in &w {
                    e[g] += 1;
                }
                add_into(&mut out, MultiIndex(e), c);
                continue;
            };
            let before = metric(&w);
            let (j, i) = (w[p], w[p + 1]);
            let mut swapped = w.clone();
            swapped.swap(p, p + 1);
            debug_assert!(metric(&swapped) < before);
            work.push((swapped, c.clone()));
            for (k, ck) in alg.lie.bracket_basis(j, i).iter().enumerate() {
                if ck.is_zero() {
                    continue;
                }
                let mut nw = w[..p].to_vec();
                nw.push(k);
                nw.extend_from_slice(&w[p + 2..]);
                debug_assert!(metric(&nw) < before);
                work.push((nw, &c * ck));
            }
        }
        UEAElement { alg: alg.clone(), terms: out }
    }

    /// Ordered-monomial image of a polynomial in the complement variables: `lambda^g -> e^g`.
    pub fn phi(alg: &Arc<PbwAlgebra>, f: &Polynomial) -> Self {
        assert_eq!(f.nvars(), alg.split(), "polynomial must be in the complement variables");
        let nd = alg.nil_dim();
        UEAElement::from_terms(
            alg,
            f.terms().iter().map(|(e, c)| (MultiIndex(e.clone()).concat(&MultiIndex::zeros(nd)), c.clone())),
        )
    }

    /// `sum_beta Phi(f_beta) e^beta` from coefficient polynomials.
    pub fn from_coefficients(alg: &Arc<PbwAlgebra>, coeffs: &BTreeMap<MultiIndex, Polynomial>) -> Self {
        let mut t = Terms::new();
        for (beta, f) in coeffs {
            for (e, c) in f.terms() {
                add_into(&mut t, MultiIndex(e.clone()).concat(beta), c.clone());
            }
        }
        UEAElement { alg: alg.clone(), terms: t }
    }

    /// Coefficient polynomials `f_beta` with `self = sum Phi(f_beta) e^beta`.
    pub fn coefficients(&self) -> BTreeMap<MultiIndex, Polynomial> {
        let k = self.alg.split();
        let mut out: BTreeMap<MultiIndex, Polynomial> = BTreeMap::new();
        for (a, c) in &self.terms {
            let (lam, beta) = a.split_at(k);
            out.entry(beta).or_insert_with(|| Polynomial::zero(k)).add_term(lam.0, c);
        }
        out.retain(|_, p| !p.is_zero());
        out
    }

    pub fn algebra(&self) -> &Arc<PbwAlgebra> {
        &self.alg
    }

    pub fn terms(&self) -> &BTreeMap<MultiIndex, Scalar> {
        &self.terms
    }

    pub fn coefficient(&self, exp: &MultiIndex) -> Scalar {
        self.terms.get(exp).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total PBW degree; `None` for zero.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(MultiIndex::degree).max()
    }

    /// Smallest weighted nilradical degree among the monomials.
    pub fn min_filtration_degree(&self) -> Option<u32> {
        self.terms.keys().map(|a| self.alg.filtration_degree(a)).min()
    }

    pub fn max_filtration_degree(&self) -> Option<u32> {
        self.terms.keys().map(|a| self.alg.filtration_degree(a)).max()
    }

    fn check_same(&self, o: &UEAElement) -> Result<(), PbwError> {
        if Arc::ptr_eq(&self.alg, &o.alg) || self.alg == o.alg {
            Ok(())
        } else {
            Err(PbwError::AlgebraMismatch)
        }
    }

    pub fn add(&self, o: &UEAElement) -> UEAElement {
        self.check_same(o).expect("same algebra");
        let mut t = self.terms.clone();
        for (k, c) in &o.terms {
            add_into(&mut t, k.clone(), c.clone());
        }
        UEAElement { alg: self.alg.clone(), terms: t }
    }

    pub fn sub(&self, o: &UEAElement) -> UEAElement {
        self.add(&o.scale(&Scalar::from_int(-1)))
    }

    pub fn scale(&self, s: &Scalar) -> UEAElement {
        let mut t = Terms::new();
        for (k, c) in &self.terms {
            add_into(&mut t, k.clone(), c * s);
        }
        UEAElement { alg: self.alg.clone(), terms: t }
    }

    /// Product in `U(g)`.
    pub fn mul(&self, o: &UEAElement) -> UEAElement {
        self.try_mul(o).expect("same algebra")
    }

    pub fn try_mul(&self, o: &UEAElement) -> Result<UEAElement, PbwError> {
        self.check_same(o)?;
        let mut s = Straightener::new(&self.alg, None);
        Ok(UEAElement { alg: self.alg.clone(), terms: s.multiply(&self.terms, &o.terms) })
    }

    /// Product modulo monomials of weighted nilradical degree above `n`.
    pub fn mul_truncated(&self, o: &UEAElement, n: u32) -> UEAElement {
        self.check_same(o).expect("same algebra");
        let mut s = Straightener::new(&self.alg, Some(n));
        let a = self.truncate_n_degree(n);
        let b = o.truncate_n_degree(n);
        UEAElement { alg: self.alg.clone(), terms: s.multiply(&a.terms, &b.terms) }
    }

    pub fn commutator(&self, o: &UEAElement) -> UEAElement {
        self.mul(o).sub(&o.mul(self))
    }

    pub fn pow(&self, k: u32) -> UEAElement {
        let mut acc = UEAElement::one(&self.alg);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Drops monomials of weighted nilradical degree above `n`.
    pub fn truncate_n_degree(&self, n: u32) -> UEAElement {
        let terms = self.terms.iter().filter(|(a, _)| self.alg.filtration_degree(a) <= n).map(|(a, c)| (a.clone(), c.clone())).collect();
        UEAElement { alg: self.alg.clone(), terms }
    }

    /// Keeps the terms whose nilradical exponent is colexicographically below `beta`.
    pub fn project_below(&self, beta: &MultiIndex) -> UEAElement {
        let k = self.alg.split();
        let terms = self
            .terms
            .iter()
            .filter(|(a, _)| a.split_at(k).1.colex_lt(beta))
            .map(|(a, c)| (a.clone(), c.clone()))
            .collect();
        UEAElement { alg: self.alg.clone(), terms }
    }

    /// Random element with `nterms` monomials of degree at most `max_degree`.
    pub fn random<R: Rng>(rng: &mut R, alg: &Arc<PbwAlgebra>, max_degree: u32, nterms: usize) -> UEAElement {
        let all = MultiIndex::all_up_to(alg.dim(), max_degree);
        let mut t = Terms::new();
        for _ in 0..nterms {
            let k = all[rng.gen_range(0..all.len())].clone();
            add_into(&mut t, k, random_scalar(rng, alg.lie().field()));
        }
        UEAElement { alg: alg.clone(), terms: t }
    }

    pub fn parse(alg: &Arc<PbwAlgebra>, text: &str) -> Result<UEAElement, PbwError> {
        Parser { alg, src: text.as_bytes(), pos: 0 }.expr()
    }

    pub fn to_spec(&self) -> UeaSpec {
        UeaSpec { terms: self.terms.iter().map(|(k, c)| UeaTerm { exp: k.0.clone(), c: c.clone() }).collect() }
    }

    pub fn from_spec(alg: &Arc<PbwAlgebra>, spec: &UeaSpec) -> Result<UEAElement, PbwError> {
        let mut t = Terms::new();
        for term in &spec.terms {
            if term.exp.len() != alg.dim() {
                return Err(PbwError::DimensionMismatch { expected: alg.dim(), got: term.exp.len() });
            }
            if !term.c.fits(alg.lie().field()) {
                return Err(PbwError::FieldMismatch(term.c.clone()));
            }
            add_into(&mut t, MultiIndex(term.exp.clone()), term.c.clone());
        }
        Ok(UEAElement { alg: alg.clone(), terms: t })
    }
}

impl fmt::Display for UEAElement {
    /// Monomials by descending degree, then descending exponent.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let labels = self.alg.lie().labels();
        let mut keys: Vec<&MultiIndex> = self.terms.keys().collect();
        keys.sort_by(|a, b| b.degree().cmp(&a.degree()).then(b.cmp(a)));
        let mut out = String::new();
        for (idx, k) in keys.into_iter().enumerate() {
            let mono: Vec<String> = k
                .0
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(g, &e)| if e == 1 { labels[g].clone() } else { format!("{}^{}", labels[g], e) })
                .collect();
            push_term(&mut out, idx == 0, &format_term(&self.terms[k], &mono.join("*")));
        }
        write!(f, "{out}")
    }
}

impl fmt::Debug for UEAElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UEAElement({self})")
    }
}

/// JSON mirror of the text format.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct UeaSpec {
    pub terms: Vec<UeaTerm>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct UeaTerm {
    pub exp: Vec<u32>,
    pub c: Scalar,
}

/// Recursive-descent parser for sums of products of scalars and generator powers.
struct Parser<'a> {
    alg: &'a Arc<PbwAlgebra>,
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err<T>(&self, msg: &str) -> Result<T, PbwError> {
        Err(PbwError::Parse { pos: self.pos, msg: msg.to_string() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<UEAElement, PbwError> {
        let mut acc = UEAElement::zero(self.alg);
        let mut sign = Scalar::one();
        let mut first = true;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                }
                Some(b'-') => {
                    self.pos += 1;
                    sign = -sign;
                }
                _ => {}
            }
            // allow "+ -1*e2"
            while let Some(c @ (b'+' | b'-')) = self.peek() {
                self.pos += 1;
                if c == b'-' {
                    sign = -sign;
                }
            }
            if self.peek().is_none() {
                if first {
                    return self.err("empty expression");
                }
                return self.err("dangling sign");
            }
            let t = self.term()?;
            acc = acc.add(&t.scale(&sign));
            sign = Scalar::one();
            first = false;
            match self.peek() {
                None => return Ok(acc),
                Some(b'+' | b'-') => continue,
                Some(_) => return self.err("expected `+`, `-` or end of input"),
            }
        }
    }

    fn term(&mut self) -> Result<UEAElement, PbwError> {
        let mut acc = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            let f = self.factor()?;
            acc = acc.mul(&f);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<UEAElement, PbwError> {
        let c = self.peek().ok_or(PbwError::Parse { pos: self.pos, msg: "unexpected end".into() })?;
        let base = if c == b'(' {
            self.pos += 1;
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos] != b')' {
                self.pos += 1;
            }
            if self.pos == self.src.len() {
                return self.err("unclosed `(`");
            }
            let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
            self.pos += 1;
            let s: Scalar = text.parse().map_err(|_| PbwError::Parse { pos: start, msg: format!("bad scalar `{text}`") })?;
            self.scalar_elem(s)?
        } else if c.is_ascii_digit() || c == b'.' {
            let start = self.pos;
            while self.pos < self.src.len() && (self.src[self.pos].is_ascii_digit() || b"/.".contains(&self.src[self.pos])) {
                self.pos += 1;
            }
            let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
            let s: Scalar = text.parse().map_err(|_| PbwError::Parse { pos: start, msg: format!("bad number `{text}`") })?;
            self.scalar_elem(s)?
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = self.pos;
            while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
                self.pos += 1;
            }
            let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
            match self.alg.index_of(name) {
                Some(g) => UEAElement::generator(self.alg, g),
                None if name == "i" && self.alg.lie().field() == crate::scalar::Field::Complex => {
                    UEAElement::scalar(self.alg, Scalar::i())
                }
                None => return Err(PbwError::UnknownGenerator(name.to_string())),
            }
        } else {
            return self.err("expected a scalar or a generator");
        };
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let k: u32 = std::str::from_utf8(&self.src[start..self.pos])
                .ok()
                .and_then(|t| t.parse().ok())
                .ok_or(PbwError::Parse { pos: start, msg: "expected exponent".into() })?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn scalar_elem(&self, s: Scalar) -> Result<UEAElement, PbwError> {
        if !s.fits(self.alg.lie().field()) {
            return Err(PbwError::FieldMismatch(s));
        }
        Ok(UEAElement::scalar(self.alg, s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn alg(l: LieAlgebra) -> Arc<PbwAlgebra> {
        PbwAlgebra::new(l).unwrap()
    }

    #[test]
    fn straightening_examples() {
        let a = alg(catalog::af1());
        assert_eq!(UEAElement::normal_order(&a, &[1, 0]).to_string(), "e1*e2 - e2");
        let h = alg(catalog::heisenberg());
        assert_eq!(UEAElement::normal_order(&h, &[1, 0]).to_string(), "e1*e2 - e3");
        let e = alg(catalog::euclidean());
        let lhs = UEAElement::parse(&e, "e2*e1^2").unwrap();
        let rhs = UEAElement::parse(&e, "e1^2*e2 - e2 - 2*e1*e3").unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn colex_order() {
        let a = MultiIndex(vec![1, 0]);
        let b = MultiIndex(vec![0, 1]);
        assert!(a.colex_lt(&b));
        assert!(MultiIndex(vec![2, 1, 0]).colex_lt(&MultiIndex(vec![0, 0, 1])));
        assert!(!b.colex_lt(&a));
    }

    #[test]
    fn truncation_and_projection() {
        let h = alg(catalog::heisenberg());
        let x = UEAElement::parse(&h, "e3^2 + e1").unwrap();
        assert_eq!(x.truncate_n_degree(1).to_string(), "e1");
        let y = UEAElement::parse(&h, "e1*e3^2 + e2*e3 + e1").unwrap();
        assert_eq!(y.project_below(&MultiIndex(vec![1])).to_string(), "e1");
    }

    #[test]
    fn text_round_trip() {
        let h = alg(catalog::heisenberg());
        let x = UEAElement::parse(&h, "3/2*e1^2*e3 + -1*e2").unwrap();
        assert_eq!(x.to_string(), "3/2*e1^2*e3 - e2");
        assert_eq!(UEAElement::parse(&h, &x.to_string()).unwrap(), x);
        assert!(matches!(UEAElement::parse(&h, "e9"), Err(PbwError::UnknownGenerator(_))));
        assert!(UEAElement::parse(&h, "e1 +").is_err());
    }

    #[test]
    fn weighted_filtration_for_nonabelian_nilradical() {
        let t = alg(catalog::triangular(3));
        // u12, u13, u23 with [u12, u23] = u13
        let w = t.weights();
        assert_eq!(&w[3..], &[1, 2, 1]);
        let x = UEAElement::parse(&t, "u23*u12").unwrap();
        assert_eq!(x.to_string(), "u12*u23 - u13");
        assert_eq!(x.min_filtration_degree(), Some(2));
    }
}
