//! Sparse multivariate polynomials with exact coefficients.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::scalar::{binomial, Field, Scalar};

/// Polynomial in `nvars` commuting variables; zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Scalar>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Scalar) -> Self {
        Polynomial::monomial(vec![0; nvars], c)
    }

    pub fn one(nvars: usize) -> Self {
        Polynomial::constant(nvars, Scalar::one())
    }

    /// The coordinate function `x_i` (0-based).
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Polynomial::monomial(e, Scalar::one())
    }

    pub fn monomial(exp: Vec<u32>, c: Scalar) -> Self {
        let nvars = exp.len();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exp, c);
        }
        Polynomial { nvars, terms }
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, Scalar)>) -> Self {
        let mut p = Polynomial::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent length");
            p.add_term(e, &c);
        }
        p
    }

    pub fn add_term(&mut self, exp: Vec<u32>, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exp) {
            Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, Scalar> {
        &self.terms
    }

    pub fn coefficient(&self, exp: &[u32]) -> Scalar {
        self.terms.get(exp).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn fits(&self, field: Field) -> bool {
        self.terms.values().all(|c| c.fits(field))
    }

    pub fn add(&self, o: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, o.nvars, "variable count");
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(e.clone(), c);
        }
        out
    }

    pub fn sub(&self, o: &Polynomial) -> Polynomial {
        self.add(&o.scale(&Scalar::from_int(-1)))
    }

    pub fn scale(&self, s: &Scalar) -> Polynomial {
        if s.is_zero() {
            return Polynomial::zero(self.nvars);
        }
        Polynomial { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect() }
    }

    pub fn mul(&self, o: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, o.nvars, "variable count");
        let mut out = Polynomial::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, &(ca * cb));
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Polynomial {
        let mut acc = Polynomial::one(self.nvars);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// `d/dx_i`.
    pub fn partial(&self, i: usize) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[i] -= 1;
            out.add_term(d, &(c * &Scalar::from_int(e[i] as i64)));
        }
        out
    }

    /// Mixed partial derivative of multi-order `alpha`.
    pub fn derivative(&self, alpha: &[u32]) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        'terms: for (e, c) in &self.terms {
            let mut coef = c.clone();
            let mut d = e.clone();
            for (t, &a) in alpha.iter().enumerate() {
                if e[t] < a {
                    continue 'terms;
                }
                for r in 0..a {
                    coef = &coef * &Scalar::from_int((e[t] - r) as i64);
                }
                d[t] -= a;
            }
            out.add_term(d, &coef);
        }
        out
    }

    /// `x -> f(x + shift)`, expanded exactly.
    pub fn shift(&self, shift: &[Scalar]) -> Polynomial {
        assert_eq!(shift.len(), self.nvars);
        let mut out = Polynomial::zero(self.nvars);
        for (e, c) in &self.terms {
            // product over variables of (x_t + s_t)^{e_t}
            let mut partial: Vec<(Vec<u32>, Scalar)> = vec![(vec![0; self.nvars], c.clone())];
            for t in 0..self.nvars {
                let mut next = Vec::new();
                for (pe, pc) in &partial {
                    for j in 0..=e[t] {
                        let coef = &(pc * &binomial(e[t], j)) * &shift[t].pow(e[t] - j);
                        if coef.is_zero() {
                            continue;
                        }
                        let mut ne = pe.clone();
                        ne[t] = j;
                        next.push((ne, coef));
                    }
                }
                partial = next;
            }
            for (pe, pc) in partial {
                out.add_term(pe, &pc);
            }
        }
        out
    }

    /// Substitutes polynomials (in a common variable count) for each variable.
    pub fn compose(&self, subs: &[Polynomial]) -> Polynomial {
        assert_eq!(subs.len(), self.nvars);
        let n = subs.first().map_or(0, Polynomial::nvars);
        let mut out = Polynomial::zero(n);
        for (e, c) in &self.terms {
            let mut t = Polynomial::constant(n, c.clone());
            for (v, &k) in e.iter().enumerate() {
                t = t.mul(&subs[v].pow(k));
            }
            out = out.add(&t);
        }
        out
    }

    pub fn eval(&self, x: &[Scalar]) -> Scalar {
        let mut acc = Scalar::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    t = &t * &xi.pow(k);
                }
            }
            acc += t;
        }
        acc
    }

    /// Floating-point image for fast repeated evaluation.
    pub fn to_float(&self) -> FloatPoly {
        FloatPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.to_c64())).collect(),
        }
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.to_float().eval(x).re
    }

    pub fn eval_c64(&self, x: &[Complex64]) -> Complex64 {
        self.to_float().eval_complex(x)
    }

    /// Random polynomial of total degree at most `degree` with small rational coefficients.
    pub fn random<R: Rng>(rng: &mut R, nvars: usize, degree: u32, field: Field) -> Polynomial {
        let mut p = Polynomial::zero(nvars);
        for e in exponents_up_to(nvars, degree) {
            if rng.gen_bool(0.6) {
                let c = random_scalar(rng, field);
                p.add_term(e, &c);
            }
        }
        if p.is_zero() {
            p = Polynomial::constant(nvars, Scalar::one());
        }
        p
    }

    pub fn to_string_with(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut keys: Vec<&Vec<u32>> = self.terms.keys().collect();
        keys.sort_by(|a, b| b.iter().sum::<u32>().cmp(&a.iter().sum::<u32>()).then(b.cmp(a)));
        let mut out = String::new();
        for (idx, e) in keys.into_iter().enumerate() {
            let c = &self.terms[e];
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(v, &k)| if k == 1 { names[v].clone() } else { format!("{}^{}", names[v], k) })
                .collect();
            let term = format_term(c, &mono.join("*"));
            push_term(&mut out, idx == 0, &term);
        }
        out
    }
}

pub(crate) fn format_term(c: &Scalar, mono: &str) -> String {
    let cs = c.to_string();
    if mono.is_empty() {
        return if c.is_real() { cs } else { format!("({cs})") };
    }
    if c.is_one() {
        mono.to_string()
    } else if cs == "-1" {
        format!("-{mono}")
    } else if c.is_real() {
        format!("{cs}*{mono}")
    } else {
        format!("({cs})*{mono}")
    }
}

pub(crate) fn push_term(out: &mut String, first: bool, term: &str) {
    if first {
        out.push_str(term);
    } else if let Some(rest) = term.strip_prefix('-') {
        out.push_str(" - ");
        out.push_str(rest);
    } else {
        out.push_str(" + ");
        out.push_str(term);
    }
}

/// All exponent vectors of length `n` and total degree at most `d`, graded then lexicographic.
pub fn exponents_up_to(n: usize, d: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for total in 0..=d {
        exponents_of_degree(n, total, &mut vec![0; n], 0, &mut out);
    }
    out
}

/// Exponent vectors of length `n` with total degree exactly `d`.
pub fn exponents_exact(n: usize, d: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    exponents_of_degree(n, d, &mut vec![0; n], 0, &mut out);
    out
}

fn exponents_of_degree(n: usize, left: u32, cur: &mut Vec<u32>, pos: usize, out: &mut Vec<Vec<u32>>) {
    if n == 0 {
        if left == 0 {
            out.push(Vec::new());
        }
        return;
    }
    if pos == n - 1 {
        cur[pos] = left;
        out.push(cur.clone());
        cur[pos] = 0;
        return;
    }
    for k in (0..=left).rev() {
        cur[pos] = k;
        exponents_of_degree(n, left - k, cur, pos + 1, out);
    }
    cur[pos] = 0;
}

pub fn random_scalar<R: Rng>(rng: &mut R, field: Field) -> Scalar {
    let num = rng.gen_range(-9..=9);
    let den = rng.gen_range(1..=4);
    let re = Scalar::ratio(num, den);
    match field {
        Field::Real => re,
        Field::Complex => {
            let im = Scalar::ratio(rng.gen_range(-9..=9), rng.gen_range(1..=4));
            &re + &(&im * &Scalar::i())
        }
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (1..=self.nvars).map(|i| format!("l{i}")).collect();
        write!(f, "{}", self.to_string_with(&names))
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial({self})")
    }
}

/// Serialized form: exponent keys like `"2,0"` mapped to scalar strings.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PolynomialSpec(pub BTreeMap<String, Scalar>);

impl Polynomial {
    pub fn to_spec(&self) -> PolynomialSpec {
        PolynomialSpec(
            self.terms
                .iter()
                .map(|(e, c)| (e.iter().map(u32::to_string).collect::<Vec<_>>().join(","), c.clone()))
                .collect(),
        )
    }

    pub fn from_spec(nvars: usize, spec: &PolynomialSpec) -> Result<Polynomial, String> {
        let mut p = Polynomial::zero(nvars);
        for (k, c) in &spec.0 {
            let e: Vec<u32> = if k.trim().is_empty() {
                Vec::new()
            } else {
                k.split(',').map(|t| t.trim().parse::<u32>().map_err(|_| format!("bad exponent `{k}`"))).collect::<Result<_, _>>()?
            };
            if e.len() != nvars {
                return Err(format!("exponent `{k}` has {} entries, expected {nvars}", e.len()));
            }
            p.add_term(e, c);
        }
        Ok(p)
    }
}

/// Floating-point polynomial used inside sampling loops.
#[derive(Clone, Debug)]
pub struct FloatPoly {
    nvars: usize,
    terms: Vec<(Vec<u32>, Complex64)>,
}

impl FloatPoly {
    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut t = *c;
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    t *= xi.powi(k as i32);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_complex(&self, x: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut t = *c;
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    t *= xi.powu(k);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Scalar {
        Scalar::from_int(n)
    }

    #[test]
    fn shift_matches_composition() {
        // f = x^2 y - 3 x + 1, shifted by (1, -2)
        let f = Polynomial::from_terms(2, [(vec![2, 1], q(1)), (vec![1, 0], q(-3)), (vec![0, 0], q(1))]);
        let s = [q(1), q(-2)];
        let g = f.shift(&s);
        let subs = [
            Polynomial::var(2, 0).add(&Polynomial::constant(2, q(1))),
            Polynomial::var(2, 1).add(&Polynomial::constant(2, q(-2))),
        ];
        assert_eq!(g, f.compose(&subs));
        let pt = [Scalar::ratio(1, 3), q(5)];
        assert_eq!(g.eval(&pt), f.eval(&[&pt[0] + &s[0], &pt[1] + &s[1]]));
    }

    #[test]
    fn derivatives() {
        let f = Polynomial::from_terms(2, [(vec![3, 2], q(2))]);
        assert_eq!(f.derivative(&[2, 1]), Polynomial::from_terms(2, [(vec![1, 1], q(24))]));
        assert_eq!(f.derivative(&[4, 0]), Polynomial::zero(2));
        assert_eq!(f.partial(1), Polynomial::from_terms(2, [(vec![3, 1], q(4))]));
    }

    #[test]
    fn spec_round_trip_and_display() {
        let f = Polynomial::from_terms(2, [(vec![1, 1], Scalar::ratio(3, 2)), (vec![0, 0], q(-1))]);
        let back = Polynomial::from_spec(2, &f.to_spec()).unwrap();
        assert_eq!(f, back);
        assert_eq!(f.to_string(), "3/2*l1*l2 - 1");
        assert_eq!(exponents_up_to(2, 2).len(), 6);
    }
}
