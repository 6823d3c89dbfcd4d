mod common;

use common::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use trilie::calculus::*;
use trilie::ncfunc::CoefficientFn;
use trilie::pbw::{MultiIndex, UEAElement};
use trilie::poly::{random_scalar, Polynomial};
use trilie::reps::{catalog_system, Representation};
use trilie::seminorm_lab::MatrixNorm;
use trilie::{Field, Scalar};

fn polynomial_alpha(b: &NumericMatrix) -> Option<f64> {
    match exp_growth_scan(b, 1000.0, 64, MatrixNorm::Operator2).unwrap().verdict {
        Verdict::Polynomial { alpha } => Some(alpha),
        _ => None,
    }
}

fn random_image(rep: &Representation, seed: u64) -> NumericMatrix {
    let mut r = rng(seed);
    let x: Vec<Scalar> = (0..rep.generators().len()).map(|_| random_scalar(&mut r, Field::Real)).collect();
    rep.image(&x).to_f64()
}

#[test]
fn adapted_images_grow_polynomially() {
    for name in ["af1", "heisenberg", "tri:2", "tri:3"] {
        let sys = catalog_system(name).unwrap();
        let mut reps: Vec<Representation> = sys.reps().to_vec();
        for beta in MultiIndex::all_up_to(sys.algebra().nil_dim(), 2) {
            reps.push(sys.tensor_rep(&beta));
        }
        for (i, rep) in reps.iter().enumerate() {
            for seed in 0..2 {
                let b = random_image(rep, 1000 * i as u64 + seed);
                let alpha = polynomial_alpha(&b);
                let d = rep.dim() as f64;
                assert!(alpha.is_some_and(|a| a <= d - 1.0 + 0.2), "{name} rep {i} seed {seed}: {alpha:?}");
            }
        }
    }
}

/// `[[A, C], [0, N]]` with `A` of real spectrum and `N` nilpotent.
fn split_extension(seed: u64) -> NumericMatrix {
    let mut r = rng(seed);
    let mut small = || r.gen_range(-4i32..=4) as f64 / 2.0;
    let mut m = DMatrix::zeros(4, 4);
    m[(0, 0)] = small();
    m[(1, 1)] = small();
    m[(0, 1)] = small();
    m[(2, 3)] = small();
    for i in 0..2 {
        for j in 2..4 {
            m[(i, j)] = small();
        }
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn split_extensions_grow_polynomially(seed in any::<u64>()) {
        let b = split_extension(seed);
        prop_assert!(polynomial_alpha(&b).is_some_and(|a| a <= 3.2), "{}", b);
    }

    #[test]
    fn ordered_calculus_agrees_with_the_enveloping_image(seed in any::<u64>(), which in 0usize..3) {
        let (name, pick) = [("af1", 0), ("af1", 1), ("heisenberg", 0)][which];
        let sys = catalog_system(name).unwrap();
        let rep = if name == "af1" { sys.tensor_rep(&MultiIndex(vec![pick as u32 + 1])) } else { sys.reps()[0].clone() };
        let alg = sys.algebra();
        let f = Polynomial::random(&mut rng(seed), alg.dim(), 2, Field::Real);
        let mut image = UEAElement::zero(alg);
        for (e, c) in f.terms() {
            image = image.add(&UEAElement::monomial(alg, MultiIndex(e.clone()), c.clone()));
        }
        let expected = rep.eval_uea(&image).to_f64();
        let bs: Vec<NumericMatrix> = rep.generators().iter().map(|g| g.to_f64()).collect();
        let symbol = FourierSymbol::poly_cutoff(&f, &FourierSymbol::spectral_box(&bs));
        let q = ordered_fc_quadrature(&symbol, &bs).unwrap();
        let err = max_entry(&(q.value - expected.map(|x| num_complex::Complex64::new(x, 0.0))));
        prop_assert!(err < 1e-5, "{} {}", name, err);
    }
}

#[test]
fn jordan_block_exponents() {
    for d in 2..=5 {
        let alpha = polynomial_alpha(&jordan_block(d)).unwrap();
        assert!((alpha - (d as f64 - 1.0)).abs() < 0.2, "{d}: {alpha}");
    }
    let rot = NumericMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
    assert_eq!(exp_growth_scan(&rot, 1000.0, 64, MatrixNorm::Operator2).unwrap().verdict, Verdict::Exponential);
}

#[test]
fn flat_symbols_vanish_on_nilpotent_matrices() {
    for d in 2..=3 {
        let n = jordan_block(d);
        let flat = Polynomial::var(1, 0).pow(d as u32);
        let q = ordered_fc_quadrature(&FourierSymbol::poly_gaussian(&flat, &[1.0]), std::slice::from_ref(&n)).unwrap();
        assert!(max_entry(&q.value) < 1e-6, "{d}: {}", max_entry(&q.value));
        let t = ordered_fc_taylor(&CoefficientFn::Poly(flat), std::slice::from_ref(&n)).unwrap();
        assert_eq!(max_entry(&t), 0.0);
    }
    let diag = NumericMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.0, 1.0]));
    let flat = Polynomial::var(2, 1).pow(2).mul(&Polynomial::var(2, 0).add(&Polynomial::one(2)));
    let q = ordered_fc_quadrature(&FourierSymbol::poly_gaussian(&flat, &[1.0, 1.0]), &[diag, jordan_block(2)]).unwrap();
    assert!(max_entry(&q.value) < 1e-6);
}

#[test]
fn weyl_and_ordered_agree_on_commuting_diagonals() {
    let b1 = NumericMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.0, 1.0, -0.5]));
    let b2 = NumericMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.5, 0.0, 1.0]));
    let f = FourierSymbol::gaussian(&[1.0, 0.7]);
    let o = ordered_fc_quadrature(&f, &[b1.clone(), b2.clone()]).unwrap();
    let w = weyl_fc_quadrature(&f, &[b1, b2]).unwrap();
    let exact = diagonal_calculus(&f, &[vec![0.0, 1.0, -0.5], vec![0.5, 0.0, 1.0]]);
    assert!(max_entry(&(&o.value - &exact)) < 1e-6);
    assert!(max_entry(&(&w.value - &exact)) < 1e-6);
}
