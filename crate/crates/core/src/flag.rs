//! Simultaneous triangularization of solvable families of matrices.
//!
//! Common eigenvectors are found inside the joint kernel of the derived family,
//! where the generators commute; eigenspaces are then refined one generator at a time.

use thiserror::Error;

use crate::linalg::{QMatrix, UPoly};
use crate::scalar::{Field, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FlagError {
    /// Generator (0-based) whose characteristic polynomial has non-real roots.
    #[error("generator {index} has non-real eigenvalues (characteristic polynomial {charpoly})")]
    NonReal { index: usize, charpoly: String },
    /// Generator whose eigenvalues are real but not all in the base field.
    #[error("generator {index} has eigenvalues outside the base field (characteristic polynomial {charpoly})")]
    OutsideField { index: usize, charpoly: String },
    #[error("family is not simultaneously triangularizable")]
    NoCommonEigenvector,
}

/// Pretty form of a characteristic polynomial in `t`.
pub fn format_upoly(p: &UPoly, var: &str) -> String {
    let mut parts = Vec::new();
    for (k, c) in p.coeffs().iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let mono = match k {
            0 => String::new(),
            1 => var.to_string(),
            _ => format!("{var}^{k}"),
        };
        let coef = c.to_string();
        let term = if mono.is_empty() {
            coef
        } else if c.is_one() {
            mono
        } else if coef == "-1" {
            format!("-{mono}")
        } else if c.is_real() {
            format!("{coef}*{mono}")
        } else {
            format!("({coef})*{mono}")
        };
        parts.push(term);
    }
    if parts.is_empty() {
        return "0".into();
    }
    parts.join(" + ").replace("+ -", "- ")
}

/// Checks that every generator has all eigenvalues in `field`.
pub fn check_split(mats: &[QMatrix], field: Field) -> Result<(), FlagError> {
    for (index, m) in mats.iter().enumerate() {
        let cp = m.charpoly();
        let split = cp.split_roots(field == Field::Complex);
        if split.remainder.degree().is_some_and(|d| d > 0) {
            let charpoly = format_upoly(&cp, "t");
            let real_gap = split.remainder.degree().unwrap_or(0);
            return Err(if field == Field::Real && split.remainder_real_roots < real_gap {
                FlagError::NonReal { index, charpoly }
            } else {
                FlagError::OutsideField { index, charpoly }
            });
        }
    }
    Ok(())
}

fn span_rows(vectors: &[Vec<Scalar>], dim: usize) -> Vec<Vec<Scalar>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let m = QMatrix::from_rows(vectors.to_vec());
    let (r, piv) = m.rref();
    (0..piv.len()).map(|i| r.row(i)).collect::<Vec<_>>().into_iter().filter(|v| v.len() == dim).collect()
}

/// Restriction of `a` to the invariant subspace with basis columns `basis`.
pub(crate) fn restrict(a: &QMatrix, basis: &QMatrix) -> Option<QMatrix> {
    let k = basis.ncols();
    let mut out = QMatrix::zeros(k, k);
    for j in 0..k {
        let img = a.mul_vec(&basis.column(j));
        let coords = basis.solve(&img)?;
        for (i, c) in coords.into_iter().enumerate() {
            out.set(i, j, c);
        }
    }
    Some(out)
}

/// A common eigenvector of the family, chosen deterministically.
pub fn common_eigenvector(mats: &[QMatrix], field: Field) -> Result<Vec<Scalar>, FlagError> {
    let d = mats.first().map_or(0, QMatrix::nrows);
    if d == 0 {
        return Err(FlagError::NoCommonEigenvector);
    }
    // joint kernel of the derived family
    let mut stacked: Vec<Vec<Scalar>> = Vec::new();
    for (i, a) in mats.iter().enumerate() {
        for b in &mats[i + 1..] {
            let c = a.commutator(b);
            for r in 0..d {
                stacked.push(c.row(r));
            }
        }
    }
    let mut space: Vec<Vec<Scalar>> = if stacked.iter().all(|r| r.iter().all(Scalar::is_zero)) {
        (0..d).map(|i| (0..d).map(|j| if i == j { Scalar::one() } else { Scalar::zero() }).collect()).collect()
    } else {
        QMatrix::from_rows(stacked).nullspace()
    };
    if space.is_empty() {
        return Err(FlagError::NoCommonEigenvector);
    }
    for a in mats {
        let basis = QMatrix::from_columns(&space);
        let r = restrict(a, &basis).ok_or(FlagError::NoCommonEigenvector)?;
        let split = r.charpoly().split_roots(field == Field::Complex);
        let Some(ev) = split.roots.first() else { return Err(FlagError::NoCommonEigenvector) };
        let mut shifted = r.clone();
        for i in 0..shifted.nrows() {
            let v = shifted.get(i, i) - ev;
            shifted.set(i, i, v);
        }
        let kern = shifted.nullspace();
        let lifted: Vec<Vec<Scalar>> = kern.iter().map(|c| basis.mul_vec(c)).collect();
        space = span_rows(&lifted, d);
        if space.is_empty() {
            return Err(FlagError::NoCommonEigenvector);
        }
    }
    Ok(space[0].clone())
}

/// Basis change `P` (columns) with every `P^{-1} A P` upper triangular.
pub fn triangularize(mats: &[QMatrix], field: Field) -> Result<QMatrix, FlagError> {
    check_split(mats, field)?;
    let d = mats.first().map_or(0, QMatrix::nrows);
    triangularize_rec(mats, d, field)
}

fn triangularize_rec(mats: &[QMatrix], d: usize, field: Field) -> Result<QMatrix, FlagError> {
    if d <= 1 {
        return Ok(QMatrix::identity(d));
    }
    let v = common_eigenvector(mats, field)?;
    // complete v to a basis with standard vectors
    let mut cols = vec![v.clone()];
    for i in 0..d {
        let mut e = vec![Scalar::zero(); d];
        e[i] = Scalar::one();
        let mut trial = cols.clone();
        trial.push(e);
        if QMatrix::from_columns(&trial).rank() == trial.len() {
            cols = trial;
        }
        if cols.len() == d {
            break;
        }
    }
    let p0 = QMatrix::from_columns(&cols);
    let p0_inv = p0.inverse().expect("completed basis is invertible");
    let blocks: Vec<QMatrix> = mats
        .iter()
        .map(|a| {
            let c = p0_inv.mul(a).mul(&p0);
            let mut b = QMatrix::zeros(d - 1, d - 1);
            for i in 1..d {
                for j in 1..d {
                    b.set(i - 1, j - 1, c.get(i, j).clone());
                }
            }
            b
        })
        .collect();
    let q = triangularize_rec(&blocks, d - 1, field)?;
    let mut embed = QMatrix::identity(d);
    for i in 0..d - 1 {
        for j in 0..d - 1 {
            embed.set(i + 1, j + 1, q.get(i, j).clone());
        }
    }
    Ok(p0.mul(&embed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjoint_of_affine_line_triangularizes() {
        let ad1 = QMatrix::from_i64(&[&[0, 0], &[0, 1]]);
        let ad2 = QMatrix::from_i64(&[&[0, 0], &[-1, 0]]);
        let p = triangularize(&[ad1.clone(), ad2.clone()], Field::Real).unwrap();
        let pi = p.inverse().unwrap();
        for a in [ad1, ad2] {
            assert!(pi.mul(&a).mul(&p).is_upper_triangular());
        }
    }

    #[test]
    fn rotation_is_rejected() {
        let rot = QMatrix::from_i64(&[&[0, -1], &[1, 0]]);
        assert!(matches!(triangularize(&[rot], Field::Real), Err(FlagError::NonReal { index: 0, .. })));
        let rot = QMatrix::from_i64(&[&[0, -1], &[1, 0]]);
        assert!(triangularize(&[rot], Field::Complex).is_ok());
        let sqrt2 = QMatrix::from_i64(&[&[0, 2], &[1, 0]]);
        assert!(matches!(triangularize(&[sqrt2], Field::Real), Err(FlagError::OutsideField { .. })));
    }

    #[test]
    fn upoly_format() {
        let p = UPoly::new(vec![Scalar::zero(), Scalar::one(), Scalar::zero(), Scalar::one()]);
        assert_eq!(format_upoly(&p, "t"), "t^3 + t");
    }
}
