//! Regions made of open boxes, sections over them, restriction and gluing.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ncfunc::{CoefficientFn, FunctionMode, NCFunctionElement, NcError, RegionTest, SmoothExpr};
use crate::pbw::MultiIndex;
use crate::poly::Polynomial;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SheafError {
    #[error("local products need a nilpotent algebra")]
    NotNilpotent,
    #[error("sections live on different regions")]
    DomainMismatch,
    #[error("target region is not contained in the domain")]
    NotSubregion,
    #[error("regions do not cover the union")]
    NotACover,
    #[error("cover has {regions} regions but {sections} sections")]
    CountMismatch { regions: usize, sections: usize },
    #[error("open box needs lo < hi on every axis")]
    EmptyBox,
    #[error("region dimension {got} does not match {expected}")]
    Dimension { expected: usize, got: usize },
    #[error(transparent)]
    Nc(#[from] NcError),
    #[error("malformed region: {0}")]
    Format(String),
}

/// Open box `prod (lo_i, hi_i)` with rational endpoints.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OpenBox {
    lo: Vec<BigRational>,
    hi: Vec<BigRational>,
}

impl OpenBox {
    pub fn new(lo: Vec<BigRational>, hi: Vec<BigRational>) -> Result<OpenBox, SheafError> {
        if lo.len() != hi.len() || lo.iter().zip(&hi).any(|(a, b)| a >= b) {
            return Err(SheafError::EmptyBox);
        }
        Ok(OpenBox { lo, hi })
    }

    pub fn from_ints(bounds: &[(i64, i64)]) -> Result<OpenBox, SheafError> {
        let lo = bounds.iter().map(|b| BigRational::from_integer(b.0.into())).collect();
        let hi = bounds.iter().map(|b| BigRational::from_integer(b.1.into())).collect();
        OpenBox::new(lo, hi)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[BigRational] {
        &self.lo
    }

    pub fn hi(&self) -> &[BigRational] {
        &self.hi
    }

    pub fn contains(&self, x: &[BigRational]) -> bool {
        x.iter().zip(&self.lo).zip(&self.hi).all(|((x, a), b)| a < x && x < b)
    }

    pub fn contains_f64(&self, x: &[f64]) -> bool {
        x.iter().zip(&self.lo).zip(&self.hi).all(|((&x, a), b)| to_f64(a) < x && x < to_f64(b))
    }

    pub fn intersect(&self, o: &OpenBox) -> Option<OpenBox> {
        let lo: Vec<BigRational> = self.lo.iter().zip(&o.lo).map(|(a, b)| a.max(b).clone()).collect();
        let hi: Vec<BigRational> = self.hi.iter().zip(&o.hi).map(|(a, b)| a.min(b).clone()).collect();
        OpenBox::new(lo, hi).ok()
    }

    fn contains_box(&self, o: &OpenBox) -> bool {
        (0..self.dim()).all(|i| self.lo[i] <= o.lo[i] && o.hi[i] <= self.hi[i])
    }

    /// Union is a single box: all axes but one agree and that axis overlaps.
    fn merge(&self, o: &OpenBox) -> Option<OpenBox> {
        let differing: Vec<usize> = (0..self.dim()).filter(|&i| self.lo[i] != o.lo[i] || self.hi[i] != o.hi[i]).collect();
        match differing.as_slice() {
            [] => Some(self.clone()),
            [i] if self.lo[*i] < o.hi[*i] && o.lo[*i] < self.hi[*i] => {
                let mut out = self.clone();
                out.lo[*i] = self.lo[*i].clone().min(o.lo[*i].clone());
                out.hi[*i] = self.hi[*i].clone().max(o.hi[*i].clone());
                Some(out)
            }
            _ => None,
        }
    }

    /// `n` interior rational points per axis.
    fn probe_axis(&self, i: usize, n: usize) -> Vec<BigRational> {
        let w = &self.hi[i] - &self.lo[i];
        (1..=n).map(|t| &self.lo[i] + &w * BigRational::new(t.into(), (n + 1).into())).collect()
    }
}

fn to_f64(q: &BigRational) -> f64 {
    Scalar::from_rational(q.clone()).to_f64()
}

impl fmt::Display for OpenBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.lo.iter().zip(&self.hi).map(|(a, b)| format!("({a}, {b})")).collect();
        write!(f, "{}", parts.join(" x "))
    }
}

/// Finite union of open boxes of a fixed dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpenRegion {
    dim: usize,
    boxes: Vec<OpenBox>,
}

impl OpenRegion {
    pub fn new(dim: usize, boxes: Vec<OpenBox>) -> Result<OpenRegion, SheafError> {
        if let Some(b) = boxes.iter().find(|b| b.dim() != dim) {
            return Err(SheafError::Dimension { expected: dim, got: b.dim() });
        }
        let mut r = OpenRegion { dim, boxes };
        r.normalize();
        Ok(r)
    }

    pub fn from_box(b: OpenBox) -> OpenRegion {
        OpenRegion { dim: b.dim(), boxes: vec![b] }
    }

    pub fn empty(dim: usize) -> OpenRegion {
        OpenRegion { dim, boxes: Vec::new() }
    }

    fn normalize(&mut self) {
        loop {
            let mut changed = false;
            'outer: for i in 0..self.boxes.len() {
                for j in 0..self.boxes.len() {
                    if i == j {
                        continue;
                    }
                    if self.boxes[i].contains_box(&self.boxes[j]) {
                        self.boxes.remove(j);
                        changed = true;
                        break 'outer;
                    }
                    if let Some(m) = self.boxes[i].merge(&self.boxes[j]) {
                        self.boxes[i] = m;
                        self.boxes.remove(j);
                        changed = true;
                        break 'outer;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        self.boxes.sort();
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn boxes(&self) -> &[OpenBox] {
        &self.boxes
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn contains(&self, x: &[BigRational]) -> bool {
        self.boxes.iter().any(|b| b.contains(x))
    }

    pub fn contains_f64(&self, x: &[f64]) -> bool {
        self.boxes.iter().any(|b| b.contains_f64(x))
    }

    pub fn union(&self, o: &OpenRegion) -> OpenRegion {
        let mut boxes = self.boxes.clone();
        boxes.extend(o.boxes.iter().cloned());
        let mut r = OpenRegion { dim: self.dim, boxes };
        r.normalize();
        r
    }

    pub fn intersect(&self, o: &OpenRegion) -> OpenRegion {
        let boxes = self.boxes.iter().flat_map(|a| o.boxes.iter().filter_map(move |b| a.intersect(b))).collect();
        let mut r = OpenRegion { dim: self.dim, boxes };
        r.normalize();
        r
    }

    /// Exact inclusion test. Every endpoint becomes a breakpoint; membership is constant on
    /// each product of open gaps and breakpoints, so one representative per cell decides.
    pub fn is_subset_of(&self, o: &OpenRegion) -> bool {
        if self.dim != o.dim {
            return false;
        }
        let axes: Vec<Vec<BigRational>> = (0..self.dim)
            .map(|i| {
                let pts: BTreeSet<BigRational> = self
                    .boxes
                    .iter()
                    .chain(&o.boxes)
                    .flat_map(|b| [b.lo[i].clone(), b.hi[i].clone()])
                    .collect();
                let pts: Vec<BigRational> = pts.into_iter().collect();
                let mut reps = Vec::new();
                for (k, p) in pts.iter().enumerate() {
                    reps.push(p.clone());
                    if let Some(q) = pts.get(k + 1) {
                        reps.push((p + q) / BigRational::from_integer(2.into()));
                    }
                }
                reps
            })
            .collect();
        let mut idx = vec![0usize; self.dim];
        if axes.iter().any(Vec::is_empty) {
            return true;
        }
        loop {
            let x: Vec<BigRational> = idx.iter().enumerate().map(|(i, &k)| axes[i][k].clone()).collect();
            if self.contains(&x) && !o.contains(&x) {
                return false;
            }
            let mut i = 0;
            while i < self.dim {
                idx[i] += 1;
                if idx[i] < axes[i].len() {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
            if i == self.dim {
                return true;
            }
        }
    }

    pub fn same_set(&self, o: &OpenRegion) -> bool {
        self.is_subset_of(o) && o.is_subset_of(self)
    }

    pub fn to_spec(&self) -> RegionSpec {
        RegionSpec {
            boxes: self
                .boxes
                .iter()
                .map(|b| b.lo.iter().zip(&b.hi).map(|(a, c)| [a.to_string(), c.to_string()]).collect())
                .collect(),
        }
    }

    pub fn from_spec(dim: usize, spec: &RegionSpec) -> Result<OpenRegion, SheafError> {
        let parse = |s: &str| -> Result<BigRational, SheafError> {
            let v: Scalar = s.parse().map_err(|e: crate::scalar::ParseScalarError| SheafError::Format(e.to_string()))?;
            if !v.is_real() {
                return Err(SheafError::Format(format!("endpoint `{s}` is not real")));
            }
            Ok(v.re().clone())
        };
        let mut boxes = Vec::new();
        for b in &spec.boxes {
            let lo = b.iter().map(|p| parse(&p[0])).collect::<Result<Vec<_>, _>>()?;
            let hi = b.iter().map(|p| parse(&p[1])).collect::<Result<Vec<_>, _>>()?;
            boxes.push(OpenBox::new(lo, hi)?);
        }
        OpenRegion::new(dim, boxes)
    }
}

impl fmt::Display for OpenRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.boxes.is_empty() {
            return write!(f, "{{}}");
        }
        let parts: Vec<String> = self.boxes.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join(" u "))
    }
}

/// Box list with string endpoints: `{"boxes": [[["0","1"],["0","2"]]]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub boxes: Vec<Vec<[String; 2]>>,
}

/// Element of the local algebra over a region.
#[derive(Clone, Debug)]
pub struct LocalSection {
    element: NCFunctionElement,
    domain: OpenRegion,
}

/// Real dimension of the region carrying `k` complement variables.
pub fn region_dim(mode: FunctionMode, k: usize) -> usize {
    match mode {
        FunctionMode::SmoothReal => k,
        FunctionMode::HolomorphicComplex => 2 * k,
    }
}

impl LocalSection {
    pub fn new(element: NCFunctionElement, domain: OpenRegion) -> Result<LocalSection, SheafError> {
        let expected = region_dim(element.mode(), element.split());
        if domain.dim() != expected {
            return Err(SheafError::Dimension { expected, got: domain.dim() });
        }
        Ok(LocalSection { element, domain })
    }

    pub fn element(&self) -> &NCFunctionElement {
        &self.element
    }

    pub fn domain(&self) -> &OpenRegion {
        &self.domain
    }

    pub fn is_zero(&self) -> bool {
        self.element.is_zero()
    }

    pub fn multiply(&self, o: &LocalSection) -> Result<LocalSection, SheafError> {
        if !self.element.algebra().lie().is_nilpotent() {
            return Err(SheafError::NotNilpotent);
        }
        if !self.domain.same_set(&o.domain) {
            return Err(SheafError::DomainMismatch);
        }
        Ok(LocalSection { element: self.element.multiply(&o.element)?, domain: self.domain.clone() })
    }

    /// Restriction to `target`; coefficients are kept as they are.
    pub fn restrict(&self, target: &OpenRegion) -> Result<LocalSection, SheafError> {
        if !target.is_subset_of(&self.domain) {
            return Err(SheafError::NotSubregion);
        }
        Ok(LocalSection { element: self.element.clone(), domain: target.clone() })
    }

    /// Same region and exactly equal polynomial coefficients.
    pub fn exact_eq(&self, o: &LocalSection) -> bool {
        self.domain.same_set(&o.domain) && self.element.exact_eq(&o.element)
    }

    /// Evaluation of the exponent-zero coefficient at a point of the region.
    pub fn character(&self, x: &[Scalar]) -> Option<Scalar> {
        let zero = MultiIndex::zeros(self.element.algebra().nil_dim());
        let real = self.point_coords(x);
        if !self.domain.contains(&real) {
            return None;
        }
        Some(match self.element.coefficient(&zero).and_then(CoefficientFn::as_poly) {
            Some(p) => p.eval(x),
            None if self.element.coefficient(&zero).is_none() => Scalar::zero(),
            None => Scalar::from_f64(self.element.character(&x.iter().map(Scalar::to_f64).collect::<Vec<_>>()).re)?,
        })
    }

    fn point_coords(&self, x: &[Scalar]) -> Vec<BigRational> {
        match self.element.mode() {
            FunctionMode::SmoothReal => x.iter().map(|v| v.re().clone()).collect(),
            FunctionMode::HolomorphicComplex => x.iter().flat_map(|v| [v.re().clone(), v.im().clone()]).collect(),
        }
    }
}

/// How compatibility was established.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Exact,
    Numeric,
}

/// Point of an overlap where two sections disagree.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub first: usize,
    pub second: usize,
    pub beta: Vec<u32>,
    pub point: Vec<String>,
    pub values: [String; 2],
}

#[derive(Clone, Debug)]
pub enum GlueOutcome {
    Glued { section: LocalSection, verdict: Verdict },
    Mismatch(Witness),
}

/// Serializable gluing report.
#[derive(Clone, Debug, Serialize)]
pub struct GlueReport {
    pub ok: bool,
    pub verdict: Option<Verdict>,
    pub witness: Option<Witness>,
    pub domain: String,
}

impl GlueOutcome {
    pub fn report(&self) -> GlueReport {
        match self {
            GlueOutcome::Glued { section, verdict } => {
                GlueReport { ok: true, verdict: Some(*verdict), witness: None, domain: section.domain.to_string() }
            }
            GlueOutcome::Mismatch(w) => GlueReport { ok: false, verdict: None, witness: Some(w.clone()), domain: String::new() },
        }
    }
}

const PROBES: usize = 9;
const PROBE_TOL: f64 = 1e-9;

/// Rational probe points inside `b`, as complement coordinates.
fn probe_points(b: &OpenBox, mode: FunctionMode, per_axis: usize) -> Vec<Vec<Scalar>> {
    let axes: Vec<Vec<BigRational>> = (0..b.dim()).map(|i| b.probe_axis(i, per_axis)).collect();
    let mut grid: Vec<Vec<BigRational>> = vec![Vec::new()];
    for axis in &axes {
        grid = grid.iter().flat_map(|p| axis.iter().map(move |x| { let mut q = p.clone(); q.push(x.clone()); q })).collect();
    }
    grid.into_iter()
        .map(|p| match mode {
            FunctionMode::SmoothReal => p.into_iter().map(Scalar::from_rational).collect(),
            FunctionMode::HolomorphicComplex => p.chunks(2).map(|c| Scalar::gaussian(c[0].clone(), c[1].clone())).collect(),
        })
        .collect()
}

fn coefficient_or_zero(s: &LocalSection, beta: &MultiIndex) -> CoefficientFn {
    s.element.coefficient(beta).cloned().unwrap_or_else(|| CoefficientFn::Poly(Polynomial::zero(s.element.split())))
}

/// First disagreement of two sections on the overlap `ov`.
fn compare(a: &LocalSection, b: &LocalSection, ov: &OpenRegion, ids: (usize, usize)) -> Result<Option<Witness>, bool> {
    let betas: BTreeSet<&MultiIndex> = a.element.coefficients().keys().chain(b.element.coefficients().keys()).collect();
    let mut numeric = false;
    for beta in betas {
        let (fa, fb) = (coefficient_or_zero(a, beta), coefficient_or_zero(b, beta));
        match (fa.as_poly(), fb.as_poly()) {
            (Some(p), Some(q)) => {
                if p == q {
                    continue;
                }
                // a nonzero polynomial of degree d is nonzero somewhere on any (d+1)^k grid
                let diff = p.sub(q);
                let n = diff.degree().unwrap_or(0) as usize + 1;
                for bx in ov.boxes() {
                    for x in probe_points(bx, a.element.mode(), n) {
                        if !diff.eval(&x).is_zero() {
                            return Ok(Some(Witness {
                                first: ids.0,
                                second: ids.1,
                                beta: beta.0.clone(),
                                point: x.iter().map(Scalar::to_string).collect(),
                                values: [p.eval(&x).to_string(), q.eval(&x).to_string()],
                            }));
                        }
                    }
                }
                unreachable!("nonzero polynomial vanishes on a full grid");
            }
            _ => {
                numeric = true;
                for bx in ov.boxes() {
                    for x in probe_points(bx, a.element.mode(), PROBES) {
                        let xf: Vec<f64> = x.iter().map(Scalar::to_f64).collect();
                        let (va, vb) = (fa.eval(&xf), fb.eval(&xf));
                        if (va - vb).norm() > PROBE_TOL * (1.0 + va.norm()) {
                            return Ok(Some(Witness {
                                first: ids.0,
                                second: ids.1,
                                beta: beta.0.clone(),
                                point: x.iter().map(Scalar::to_string).collect(),
                                values: [va.to_string(), vb.to_string()],
                            }));
                        }
                    }
                }
            }
        }
    }
    Err(numeric)
}

fn region_test(r: &OpenRegion) -> RegionTest {
    let r = r.clone();
    Arc::new(move |x: &[f64]| r.contains_f64(x))
}

/// Glues sections given on the regions of a cover of their union.
pub fn glue(cover: &[OpenRegion], sections: &[LocalSection]) -> Result<GlueOutcome, SheafError> {
    if cover.len() != sections.len() {
        return Err(SheafError::CountMismatch { regions: cover.len(), sections: sections.len() });
    }
    let Some(first) = sections.first() else {
        return Err(SheafError::NotACover);
    };
    for (u, s) in cover.iter().zip(sections) {
        if !u.same_set(&s.domain) {
            return Err(SheafError::DomainMismatch);
        }
        if s.element.mode() != first.element.mode() || s.element.algebra() != first.element.algebra() {
            return Err(SheafError::Nc(NcError::AlgebraMismatch));
        }
    }
    let union = cover.iter().skip(1).fold(cover[0].clone(), |acc, u| acc.union(u));
    let mut verdict = Verdict::Exact;
    for i in 0..cover.len() {
        for j in i + 1..cover.len() {
            let ov = cover[i].intersect(&cover[j]);
            if ov.is_empty() {
                continue;
            }
            match compare(&sections[i], &sections[j], &ov, (i, j)) {
                Ok(Some(w)) => return Ok(GlueOutcome::Mismatch(w)),
                Ok(None) => {}
                Err(numeric) => {
                    if numeric {
                        verdict = Verdict::Numeric;
                    }
                }
            }
        }
    }
    let order = sections.iter().map(|s| s.element.order()).min().expect("nonempty");
    let alg = first.element.algebra().clone();
    let mut element = NCFunctionElement::zero(&alg, order);
    let betas: BTreeSet<MultiIndex> = sections.iter().flat_map(|s| s.element.coefficients().keys().cloned()).collect();
    let k = alg.split();
    for beta in betas {
        let pieces: Vec<CoefficientFn> = sections.iter().map(|s| coefficient_or_zero(s, &beta)).collect();
        let polys: Option<Vec<&Polynomial>> = pieces.iter().map(CoefficientFn::as_poly).collect();
        let glued = match polys {
            Some(ps) if ps.windows(2).all(|w| w[0] == w[1]) => pieces[0].clone(),
            _ => {
                verdict = Verdict::Numeric;
                let parts = cover
                    .iter()
                    .zip(&pieces)
                    .map(|(u, f)| {
                        let expr = match f {
                            CoefficientFn::Poly(p) => SmoothExpr::Poly(p.clone()),
                            CoefficientFn::Smooth { expr, .. } => (**expr).clone(),
                        };
                        (region_test(u), expr)
                    })
                    .collect();
                CoefficientFn::smooth(k, SmoothExpr::Piecewise(parts))
            }
        };
        element.insert(beta, glued);
    }
    let section = LocalSection { element, domain: union };
    for (u, s) in cover.iter().zip(sections) {
        let back = section.restrict(u)?;
        if let Ok(Some(w)) = compare(&back, s, u, (usize::MAX, usize::MAX)) {
            return Ok(GlueOutcome::Mismatch(w));
        }
    }
    Ok(GlueOutcome::Glued { section, verdict })
}

/// Unit box `(0,1)^n` scaled along the first axis by `width`.
pub fn strip(n: usize, width: i64) -> OpenBox {
    let mut bounds = vec![(0, 1); n];
    if let Some(b) = bounds.first_mut() {
        b.1 = width;
    }
    OpenBox::from_ints(&bounds).expect("nonempty")
}

/// Rational `p/q`.
pub fn rat(p: i64, q: i64) -> BigRational {
    if q == 1 {
        return BigRational::from_integer(p.into());
    }
    BigRational::new(p.into(), q.into())
}

/// Whether `0 < x < 1` for all coordinates.
pub fn in_unit_cube(x: &[BigRational]) -> bool {
    x.iter().all(|v| v > &BigRational::zero() && v < &BigRational::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::pbw::{PbwAlgebra, UEAElement};

    fn boxr(b: &[(i64, i64)]) -> OpenRegion {
        OpenRegion::from_box(OpenBox::from_ints(b).unwrap())
    }

    #[test]
    fn subset_and_normalization() {
        let a = boxr(&[(0, 1), (0, 1)]);
        let b = boxr(&[(0, 2), (0, 1)]);
        assert!(a.is_subset_of(&b) && !b.is_subset_of(&a));
        let halves = boxr(&[(0, 1), (0, 1)]).union(&boxr(&[(1, 2), (0, 1)]));
        assert_eq!(halves.boxes().len(), 2);
        assert!(halves.is_subset_of(&b) && !b.is_subset_of(&halves));
        let overlap = OpenRegion::new(2, vec![
            OpenBox::new(vec![rat(0, 1), rat(0, 1)], vec![rat(3, 2), rat(1, 1)]).unwrap(),
            OpenBox::new(vec![rat(1, 2), rat(0, 1)], vec![rat(2, 1), rat(1, 1)]).unwrap(),
        ])
        .unwrap();
        assert_eq!(overlap.boxes().len(), 1);
        assert!(overlap.same_set(&b));
    }

    #[test]
    fn glue_two_boxes_and_detect_mismatch() {
        let h = PbwAlgebra::new(catalog::heisenberg()).unwrap();
        let a = NCFunctionElement::from_uea(&UEAElement::parse(&h, "e1*e2 + 3*e3").unwrap(), 2);
        let cover = vec![
            OpenRegion::from_box(OpenBox::new(vec![rat(0, 1), rat(0, 1)], vec![rat(3, 2), rat(1, 1)]).unwrap()),
            OpenRegion::from_box(OpenBox::new(vec![rat(1, 2), rat(0, 1)], vec![rat(2, 1), rat(1, 1)]).unwrap()),
        ];
        let sections: Vec<LocalSection> = cover.iter().map(|u| LocalSection::new(a.clone(), u.clone()).unwrap()).collect();
        match glue(&cover, &sections).unwrap() {
            GlueOutcome::Glued { section, verdict } => {
                assert_eq!(verdict, Verdict::Exact);
                assert!(section.element().exact_eq(&a));
                assert!(section.domain().same_set(&boxr(&[(0, 2), (0, 1)])));
            }
            GlueOutcome::Mismatch(w) => panic!("{w:?}"),
        }
        let one = NCFunctionElement::one(&h, 2);
        let bad = vec![
            LocalSection::new(NCFunctionElement::zero(&h, 2), cover[0].clone()).unwrap(),
            LocalSection::new(one, cover[1].clone()).unwrap(),
        ];
        let GlueOutcome::Mismatch(w) = glue(&cover, &bad).unwrap() else { panic!("glued incompatible sections") };
        assert_eq!(w.beta, vec![0]);
        assert_eq!(w.values, ["0".to_string(), "1".to_string()]);
    }
}
