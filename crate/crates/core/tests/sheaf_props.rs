mod common;

use common::*;
use proptest::prelude::*;
use trilie::ncfunc::{CoefficientFn, NCFunctionElement};
use trilie::pbw::{MultiIndex, UEAElement};
use trilie::poly::random_scalar;
use trilie::sheaf::{glue, rat, GlueOutcome, LocalSection, OpenBox, OpenRegion, SheafError, Verdict};
use trilie::Scalar;

const NILPOTENT: &[&str] = &["abelian:2", "heisenberg", "heisenberg-c"];

fn section(name: &str, seed: u64, region: &OpenRegion) -> LocalSection {
    let alg = pbw(name);
    let a = NCFunctionElement::from_uea(&UEAElement::random(&mut rng(seed), &alg, 3, 5), 3);
    LocalSection::new(a, region.clone()).unwrap()
}

fn nested_regions(dim: usize) -> [OpenRegion; 3] {
    let cube = |lo: i64, hi: i64| OpenRegion::from_box(OpenBox::new(vec![rat(lo, 2); dim], vec![rat(hi, 2); dim]).unwrap());
    [cube(-4, 4), cube(-2, 3), cube(0, 1)]
}

fn dim_of(name: &str) -> usize {
    if name.ends_with("-c") {
        4
    } else {
        2
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn presheaf_laws(name in prop::sample::select(NILPOTENT), s1 in any::<u64>(), s2 in any::<u64>()) {
        let [v, w, x] = nested_regions(dim_of(name));
        let a = section(name, s1, &v);
        let b = section(name, s2, &v);
        prop_assert!(a.restrict(&v).unwrap().exact_eq(&a));
        prop_assert!(a.restrict(&w).unwrap().restrict(&x).unwrap().exact_eq(&a.restrict(&x).unwrap()));
        let lhs = a.multiply(&b).unwrap().restrict(&w).unwrap();
        let rhs = a.restrict(&w).unwrap().multiply(&b.restrict(&w).unwrap()).unwrap();
        prop_assert!(lhs.exact_eq(&rhs));
        prop_assert!(matches!(a.restrict(&w).unwrap().restrict(&v), Err(SheafError::NotSubregion)));
    }

    #[test]
    fn gluing_respects_products(name in prop::sample::select(NILPOTENT), seed in any::<u64>()) {
        let mut r = rng(seed);
        let cover = random_cover(&mut r, dim_of(name));
        let alg = pbw(name);
        let a = NCFunctionElement::from_uea(&UEAElement::random(&mut r, &alg, 2, 4), 3);
        let b = NCFunctionElement::from_uea(&UEAElement::random(&mut r, &alg, 2, 4), 3);
        let glued = |e: &NCFunctionElement| {
            let ss: Vec<LocalSection> = cover.iter().map(|u| LocalSection::new(e.clone(), u.clone()).unwrap()).collect();
            match glue(&cover, &ss).unwrap() {
                GlueOutcome::Glued { section, .. } => section,
                GlueOutcome::Mismatch(w) => panic!("{w:?}"),
            }
        };
        let lhs = glued(&a).multiply(&glued(&b)).unwrap();
        prop_assert!(lhs.exact_eq(&glued(&a.multiply(&b).unwrap())));
    }

    /// Point evaluation of the exponent-zero layer is multiplicative and kills the nilradical part.
    #[test]
    fn characters_factor_through_the_commutative_layer(name in prop::sample::select(NILPOTENT), s1 in any::<u64>(), s2 in any::<u64>()) {
        let [v, _, _] = nested_regions(dim_of(name));
        let a = section(name, s1, &v);
        let b = section(name, s2, &v);
        let alg = pbw(name);
        let mut r = rng(s1 ^ s2);
        let x: Vec<Scalar> = (0..alg.split()).map(|_| {
            let z = random_scalar(&mut r, alg.lie().field());
            Scalar::gaussian(z.re().clone() / num_bigint::BigInt::from(8), z.im().clone() / num_bigint::BigInt::from(8))
        }).collect();
        let ab = a.multiply(&b).unwrap();
        prop_assert_eq!(ab.character(&x).unwrap(), &a.character(&x).unwrap() * &b.character(&x).unwrap());
        let ba = b.multiply(&a).unwrap();
        let comm = LocalSection::new(ab.element().add(&ba.element().scale(&Scalar::from_int(-1))).unwrap(), v.clone()).unwrap();
        prop_assert!(comm.character(&x).unwrap().is_zero());
        let mut upper = NCFunctionElement::zero(&alg, 3);
        for (beta, f) in a.element().coefficients() {
            if beta.degree() > 0 {
                upper.insert(beta.clone(), f.clone());
            }
        }
        prop_assert!(LocalSection::new(upper, v.clone()).unwrap().character(&x).unwrap().is_zero());
    }
}

#[test]
fn random_families_glue_and_mismatches_are_caught() {
    for (i, name) in NILPOTENT.iter().enumerate() {
        gluing_suite(name, 40 + i as u64, 20).unwrap();
    }
}

#[test]
fn smooth_sections_glue_numerically() {
    let alg = pbw("heisenberg");
    let cover = vec![
        OpenRegion::from_box(OpenBox::from_ints(&[(0, 2), (0, 1)]).unwrap()),
        OpenRegion::from_box(OpenBox::from_ints(&[(1, 3), (0, 1)]).unwrap()),
    ];
    let g = NCFunctionElement::term(&alg, 2, MultiIndex(vec![1]), CoefficientFn::gaussian(vec![0.5, 0.5], vec![1.0, 2.0]));
    let sections: Vec<LocalSection> = cover.iter().map(|u| LocalSection::new(g.clone(), u.clone()).unwrap()).collect();
    let GlueOutcome::Glued { section, verdict } = glue(&cover, &sections).unwrap() else { panic!("smooth family rejected") };
    assert_eq!(verdict, Verdict::Numeric);
    let f = section.element().coefficient(&MultiIndex(vec![1])).unwrap();
    let direct = g.coefficient(&MultiIndex(vec![1])).unwrap();
    for x in [[0.5, 0.5], [1.5, 0.25], [2.5, 0.75]] {
        assert!((f.eval(&x) - direct.eval(&x)).norm() < 1e-12);
    }
    let shifted = NCFunctionElement::term(&alg, 2, MultiIndex(vec![1]), CoefficientFn::gaussian(vec![0.6, 0.5], vec![1.0, 2.0]));
    let bad = vec![sections[0].clone(), LocalSection::new(shifted, cover[1].clone()).unwrap()];
    assert!(matches!(glue(&cover, &bad).unwrap(), GlueOutcome::Mismatch(_)));
}

#[test]
fn non_nilpotent_products_are_refused() {
    let alg = pbw("af1");
    let v = OpenRegion::from_box(OpenBox::from_ints(&[(0, 1)]).unwrap());
    let a = LocalSection::new(NCFunctionElement::one(&alg, 2), v).unwrap();
    assert!(matches!(a.multiply(&a), Err(SheafError::NotNilpotent)));
}
