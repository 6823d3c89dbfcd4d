mod common;

use common::*;
use proptest::prelude::*;
use trilie::pbw::{MultiIndex, UEAElement};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn associativity(name in prop::sample::select(CATALOG), seed in any::<u64>()) {
        let alg = pbw(name);
        let mut r = rng(seed);
        let a = UEAElement::random(&mut r, &alg, 2, 3);
        let b = UEAElement::random(&mut r, &alg, 2, 3);
        let c = UEAElement::random(&mut r, &alg, 2, 3);
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
    }

    #[test]
    fn print_parse_round_trip(name in prop::sample::select(CATALOG), seed in any::<u64>()) {
        let alg = pbw(name);
        let a = UEAElement::random(&mut rng(seed), &alg, 4, 5);
        prop_assert_eq!(UEAElement::parse(&alg, &a.to_string()).unwrap(), a.clone());
        prop_assert_eq!(UEAElement::from_spec(&alg, &a.to_spec()).unwrap(), a);
    }

    #[test]
    fn reordering_only_adds_lower_terms(name in prop::sample::select(CATALOG), word in prop::collection::vec(0usize..6, 1..6), perm_seed in any::<u64>()) {
        let alg = pbw(name);
        let word: Vec<usize> = word.into_iter().map(|i| i % alg.dim()).collect();
        let mut sorted = word.clone();
        sorted.sort_unstable();
        let mut shuffled = word.clone();
        use rand::seq::SliceRandom;
        shuffled.shuffle(&mut rng(perm_seed));
        let diff = UEAElement::normal_order(&alg, &shuffled).sub(&UEAElement::normal_order(&alg, &sorted));
        let base = {
            let mut e = vec![0u32; alg.dim()];
            for &i in &word {
                e[i] += 1;
            }
            MultiIndex(e)
        };
        for exp in diff.terms().keys() {
            prop_assert!(exp.degree() < word.len() as u32);
            prop_assert!(alg.filtration_degree(exp) >= alg.filtration_degree(&base));
        }
    }

    #[test]
    fn products_never_lower_the_nil_degree(name in prop::sample::select(CATALOG), seed in any::<u64>()) {
        let alg = pbw(name);
        let mut r = rng(seed);
        let a = UEAElement::random(&mut r, &alg, 3, 3);
        let b = UEAElement::random(&mut r, &alg, 3, 3);
        let low = |x: &UEAElement| x.terms().keys().map(|e| alg.filtration_degree(e)).min().unwrap_or(0);
        let p = a.mul(&b);
        if let Some(m) = p.terms().keys().map(|e| alg.filtration_degree(e)).min() {
            prop_assert!(m >= low(&a) + low(&b));
        }
    }

    #[test]
    fn commutators_live_in_the_nil_ideal(name in prop::sample::select(CATALOG), seed in any::<u64>()) {
        let alg = pbw(name);
        let mut r = rng(seed);
        let a = UEAElement::random(&mut r, &alg, 3, 3);
        let b = UEAElement::random(&mut r, &alg, 3, 3);
        for e in a.commutator(&b).terms().keys() {
            prop_assert!(alg.n_degree(e) >= 1);
        }
    }

    #[test]
    fn truncated_product_is_truncation_of_product(name in prop::sample::select(CATALOG), seed in any::<u64>(), n in 0u32..4) {
        let alg = pbw(name);
        let mut r = rng(seed);
        let a = UEAElement::random(&mut r, &alg, 3, 3);
        let b = UEAElement::random(&mut r, &alg, 3, 3);
        prop_assert_eq!(a.mul_truncated(&b, n), a.mul(&b).truncate_n_degree(n));
    }
}

fn transport(a: &UEAElement, target: &std::sync::Arc<trilie::pbw::PbwAlgebra>, images: &[UEAElement]) -> UEAElement {
    let mut out = UEAElement::zero(target);
    for (exp, c) in a.terms() {
        let mut mono = UEAElement::monomial(target, MultiIndex::zeros(images.len()), c.clone());
        for (i, &e) in exp.0.iter().enumerate() {
            mono = mono.mul(&images[i].pow(e));
        }
        out = out.add(&mono);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Products computed in a rescaled and sheared nilradical basis agree after transport.
    #[test]
    fn products_survive_nilradical_basis_changes(name in prop::sample::select(TRIANGULAR), seed in any::<u64>()) {
        use rand::Rng;
        use trilie::linalg::QMatrix;
        use trilie::Scalar;
        let old = pbw(name);
        let m = old.dim();
        let k = old.split();
        let mut r = rng(seed);
        let mut p = QMatrix::identity(m);
        for j in k..m {
            p.set(j, j, Scalar::from_int(r.gen_range(1..=3) * if r.gen_bool(0.5) { 1 } else { -1 }));
            for l in (j + 1..m).filter(|&l| old.weights()[l] >= old.weights()[j]) {
                p.set(l, j, Scalar::from_int(r.gen_range(-2..=2)));
            }
        }
        let lie = old.lie().change_basis(&p, old.lie().labels().to_vec()).unwrap();
        let new = trilie::pbw::PbwAlgebra::new(lie).unwrap();
        let inv = p.inverse().unwrap();
        let images: Vec<UEAElement> = (0..m)
            .map(|i| {
                (0..m).fold(UEAElement::zero(&new), |acc, j| acc.add(&UEAElement::generator(&new, j).scale(inv.get(j, i))))
            })
            .collect();
        let a = UEAElement::random(&mut r, &old, 3, 3);
        let b = UEAElement::random(&mut r, &old, 3, 3);
        prop_assert_eq!(transport(&a.mul(&b), &new, &images), transport(&a, &new, &images).mul(&transport(&b, &new, &images)));
    }
}
