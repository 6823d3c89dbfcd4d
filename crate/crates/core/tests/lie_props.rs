mod common;

use common::*;
use proptest::prelude::*;
use trilie::lie::Subspace;
use trilie::{catalog, LieError, Scalar};

#[test]
fn catalog_jacobi_residuals_vanish() {
    for name in CATALOG {
        let l = lie(name);
        let m = l.dim();
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let (x, y, z) = (l.unit(i), l.unit(j), l.unit(k));
                    let a = l.bracket(&x, &l.bracket(&y, &z));
                    let b = l.bracket(&y, &l.bracket(&z, &x));
                    let c = l.bracket(&z, &l.bracket(&x, &y));
                    assert!(a.iter().zip(&b).zip(&c).all(|((a, b), c)| (&(a + b) + c).is_zero()), "{name}");
                }
            }
        }
    }
}

#[test]
fn triangular_flag_on_the_catalog() {
    for name in TRIANGULAR {
        let cert = lie(name).triangular_flag().unwrap_or_else(|e| panic!("{name}: {e}"));
        let l = lie(name);
        for (j, ideal) in cert.ideals.iter().enumerate() {
            assert_eq!(ideal.dim(), j + 1);
            assert!(l.is_ideal(ideal), "{name}: I_{} is not an ideal", j + 1);
        }
    }
    match catalog::euclidean().triangular_flag() {
        Err(LieError::NotTriangular { witness: 1, .. }) => {}
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn nilradical_is_invariant_with_terminating_series() {
    for name in CATALOG {
        let l = lie(name);
        let n = l.nilradical().unwrap();
        for i in 0..l.dim() {
            for v in n.basis() {
                assert!(n.contains(&l.bracket(&l.unit(i), &v)), "{name}");
            }
        }
        assert_eq!(l.lower_central_series_of(&n).last().unwrap().dim(), 0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn quotients_preserve_brackets(name in prop::sample::select(CATALOG), coeffs in prop::collection::vec(prop::collection::vec(-3i64..=3, 6), 0..3)) {
        let l = lie(name);
        let m = l.dim();
        let nb = l.nilradical().unwrap().basis();
        let gens: Vec<Vec<Scalar>> = coeffs
            .iter()
            .map(|c| (0..m).map(|i| nb.iter().zip(c).map(|(b, &x)| &b[i] * &Scalar::from_int(x)).sum()).collect())
            .collect();
        let mut ideal = Subspace::from_vectors(m, &gens);
        loop {
            let next = ideal.sum(&l.bracket_spaces(&l.full_space(), &ideal));
            if next.dim() == ideal.dim() {
                break;
            }
            ideal = next;
        }
        prop_assert!(l.is_ideal(&ideal));
        let q = l.quotient(&ideal).unwrap();
        prop_assert_eq!(q.algebra.dim(), m - ideal.dim());
        prop_assert!(q.projection_is_homomorphism(&l));
    }
}
