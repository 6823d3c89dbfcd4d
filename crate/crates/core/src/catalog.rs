//! Built-in algebras used throughout the examples and tests.

use crate::lie::{BracketEntry, LieAlgebra, LieError};
use crate::linalg::QMatrix;
use crate::scalar::{Field, Scalar};

fn labels(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn build(names: &[&str], entries: &[BracketEntry]) -> LieAlgebra {
    LieAlgebra::new(Field::Real, labels(names), entries).expect("catalog algebra is valid")
}

/// Abelian algebra of dimension `m`.
pub fn abelian(m: usize) -> LieAlgebra {
    let names: Vec<String> = (1..=m).map(|i| format!("e{i}")).collect();
    LieAlgebra::new(Field::Real, names, &[]).expect("abelian algebra is valid")
}

/// Affine algebra of the line: `[e1, e2] = e2`.
pub fn af1() -> LieAlgebra {
    build(&["e1", "e2"], &[BracketEntry::new(0, 1, &[(1, 1)])])
}

/// Three-dimensional Heisenberg algebra: `[e1, e2] = e3`.
pub fn heisenberg() -> LieAlgebra {
    build(&["e1", "e2", "e3"], &[BracketEntry::new(0, 1, &[(2, 1)])])
}

/// Heisenberg algebra over the complex field.
pub fn heisenberg_complex() -> LieAlgebra {
    heisenberg().complexify()
}

/// Euclidean motions of the plane: `[e1, e2] = e3`, `[e1, e3] = -e2`. Solvable, not triangular.
pub fn euclidean() -> LieAlgebra {
    build(
        &["e1", "e2", "e3"],
        &[BracketEntry::new(0, 1, &[(2, 1)]), BracketEntry::new(0, 2, &[(1, -1)])],
    )
}

/// Upper-triangular `p x p` matrices; diagonal units first, then `E_ij` (i < j) row by row.
pub fn triangular(p: usize) -> LieAlgebra {
    let mut units: Vec<(usize, usize)> = (0..p).map(|i| (i, i)).collect();
    let mut names: Vec<String> = (1..=p).map(|i| format!("d{i}")).collect();
    for i in 0..p {
        for j in i + 1..p {
            units.push((i, j));
            names.push(format!("u{}{}", i + 1, j + 1));
        }
    }
    let mat = |(i, j): (usize, usize)| {
        let mut m = QMatrix::zeros(p, p);
        m.set(i, j, Scalar::one());
        m
    };
    let mut entries = Vec::new();
    for a in 0..units.len() {
        for b in a + 1..units.len() {
            let c = mat(units[a]).commutator(&mat(units[b]));
            let coeffs: Vec<(usize, Scalar)> = units
                .iter()
                .enumerate()
                .filter_map(|(k, &(i, j))| {
                    let v = c.get(i, j).clone();
                    (!v.is_zero()).then_some((k, v))
                })
                .collect();
            if !coeffs.is_empty() {
                entries.push(BracketEntry { i: a, j: b, coeffs });
            }
        }
    }
    LieAlgebra::new(Field::Real, names, &entries).expect("triangular matrices form a Lie algebra")
}

/// Structure constants `c12^3 = c13^3 = c23^1 = 1`, which violate the Jacobi identity.
pub fn jacobi_counterexample() -> Result<LieAlgebra, LieError> {
    LieAlgebra::new(
        Field::Real,
        labels(&["e1", "e2", "e3"]),
        &[
            BracketEntry::new(0, 1, &[(2, 1)]),
            BracketEntry::new(0, 2, &[(2, 1)]),
            BracketEntry::new(1, 2, &[(0, 1)]),
        ],
    )
}

/// Algebra by catalog name: `abelian:<m>`, `af1`, `heisenberg`, `heisenberg-c`, `e2`, `tri:<p>`.
pub fn algebra(name: &str) -> Option<LieAlgebra> {
    let (base, arg) = match name.split_once(':') {
        Some((b, a)) => (b, Some(a.parse::<usize>().ok()?)),
        None => (name, None),
    };
    Some(match (base, arg) {
        ("abelian", Some(m)) if m >= 1 => abelian(m),
        ("abelian", None) => abelian(2),
        ("af1", None) => af1(),
        ("heisenberg" | "h", None) => heisenberg(),
        ("heisenberg-c" | "h-c", None) => heisenberg_complex(),
        ("e2" | "euclidean", None) => euclidean(),
        ("tri", Some(p)) if p >= 1 => triangular(p),
        _ => return None,
    })
}
