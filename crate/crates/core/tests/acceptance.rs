//! End-to-end acceptance checks. Each criterion prints one line with its verdict and
//! wall time; criteria run one at a time so the timings are not inflated by each other.

mod common;

use std::io::Write;
use std::sync::Mutex;
use std::time::Instant;

use common::*;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use trilie::calculus::*;
use trilie::demo::{demo_e2_blowup, DemoConfig};
use trilie::linalg::SparseMatrix;
use trilie::ncfunc::{CoefficientFn, CompactBox, NCFunctionElement};
use trilie::pbw::{MultiIndex, UEAElement};
use trilie::poly::Polynomial;
use trilie::reps::{affine_rep, build_adapted_system, catalog_system, tilde_pi, MatrixFunction};
use trilie::scalar::factorial;
use trilie::seminorm_lab::{verify_domination, MatrixNorm};
use trilie::sheaf::{rat, LocalSection, OpenBox, OpenRegion};
use trilie::{Field, Scalar};

static SERIAL: Mutex<()> = Mutex::new(());

fn criterion(id: u32, title: &str, limit: f64, body: impl FnOnce() -> Result<String, String>) {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(body)).unwrap_or_else(|p| {
        Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
    });
    let secs = start.elapsed().as_secs_f64();
    let in_time = secs < limit;
    let pass = outcome.is_ok() && in_time;
    let detail = match &outcome {
        Ok(d) => d.clone(),
        Err(e) => e.clone(),
    };
    let line = format!(
        "[{}] criterion {id:>2}: {title} ({secs:.2} s, limit {limit} s{}) {detail}\n",
        if pass { "PASS" } else { "FAIL" },
        if in_time { "" } else { ", too slow" }
    );
    // bypass the harness capture so the verdict always reaches the log
    std::io::stderr().write_all(line.as_bytes()).ok();
    assert!(pass, "{line}");
}

#[test]
fn criterion_01_pbw_oracle() {
    criterion(1, "associativity and round trips", 10.0, || {
        let mut count = 0;
        for (i, name) in CATALOG.iter().enumerate() {
            let alg = pbw(name);
            let mut r = rng(1000 + i as u64);
            for _ in 0..100 {
                let a = UEAElement::random(&mut r, &alg, 4, 2);
                let b = UEAElement::random(&mut r, &alg, 4, 2);
                let c = UEAElement::random(&mut r, &alg, 4, 2);
                if a.mul(&b).mul(&c) != a.mul(&b.mul(&c)) {
                    return Err(format!("{name}: associativity fails for {a} | {b} | {c}"));
                }
                if UEAElement::parse(&alg, &a.to_string()).map_err(|e| e.to_string())? != a {
                    return Err(format!("{name}: print/parse changes {a}"));
                }
                if UEAElement::from_spec(&alg, &a.to_spec()).map_err(|e| e.to_string())? != a {
                    return Err(format!("{name}: JSON round trip changes {a}"));
                }
                count += 1;
            }
        }
        Ok(format!("{count} triples over {} algebras", CATALOG.len()))
    });
}

#[test]
fn criterion_02_euclidean_commutation() {
    criterion(2, "e2 commutation identity", 5.0, || {
        let alg = pbw("e2");
        let e2 = UEAElement::generator(&alg, 1);
        let i = Scalar::i();
        let half = Scalar::from_rational(rat(1, 2));
        let mut r = rng(2);
        for n in 0..50 {
            let f = Polynomial::random(&mut r, 1, 8, Field::Real);
            let prod = e2.mul(&UEAElement::phi(&alg, &f));
            let (mut even, mut odd) = (Polynomial::zero(1), Polynomial::zero(1));
            for (exp, c) in prod.terms() {
                match (exp.0[1], exp.0[2]) {
                    (1, 0) => even.add_term(vec![exp.0[0]], c),
                    (0, 1) => odd.add_term(vec![exp.0[0]], c),
                    _ => return Err(format!("unexpected monomial {:?} in e2*f for f = {f}", exp.0)),
                }
            }
            let minus = f.shift(&[-&i]);
            let plus = f.shift(&[i.clone()]);
            let want_even = minus.add(&plus).scale(&half);
            let want_odd = minus.sub(&plus).scale(&(&half * &(-&i)));
            if even != want_even || odd != want_odd {
                return Err(format!("sample {n}: f = {f}"));
            }
            if n < 10 && !trilie::demo::commutation_identity_holds(&f) {
                return Err(format!("commutation rule disagrees for f = {f}"));
            }
        }
        Ok("50 polynomials of degree <= 8".into())
    });
}

#[test]
fn criterion_03_affine_matrix_formula() {
    criterion(3, "af1 symbol matrices and exact norms", 10.0, || {
        let alg = pbw("af1");
        let mut r = rng(3);
        for q in 0..=4usize {
            let pi = affine_rep(q);
            for _ in 0..10 {
                let fs: Vec<Polynomial> = (0..=q + 1).map(|_| Polynomial::random(&mut r, 1, 4, Field::Real)).collect();
                let mut a = UEAElement::zero(&alg);
                for (j, f) in fs.iter().enumerate() {
                    a = a.add(&UEAElement::phi(&alg, f).mul(&UEAElement::generator(&alg, 1).pow(j as u32)));
                }
                let sym = tilde_pi(&pi, &a);
                // the one-dimensional member sends e1 to 1, not to 0
                let top = if q == 0 { 1 } else { q };
                for i in 0..=q {
                    for l in 0..=q {
                        let want = if l >= i { fs[l - i].shift(&[Scalar::from_int((top - i) as i64)]) } else { Polynomial::zero(1) };
                        if sym.poly(i, l).unwrap_or_else(|| Polynomial::zero(1)) != want {
                            return Err(format!("q = {q}, entry ({i}, {l})"));
                        }
                    }
                }
            }
        }
        let sys = catalog_system("af1").map_err(|e| e.to_string())?;
        let mut worst = 0.0f64;
        for q in 0..=3u32 {
            for l in 0..=1 {
                for c in [-1i64, 0, 2] {
                    let f = Polynomial::random(&mut r, 1, 3, Field::Real);
                    let beta = MultiIndex(vec![q]);
                    let a = NCFunctionElement::term(sys.algebra(), 4, beta.clone(), CoefficientFn::Poly(f));
                    let rep = verify_domination(&a, &beta, &CompactBox::cube(1, c, c + 1), l, &sys, MatrixNorm::MaxRowSum, &[])
                        .map_err(|e| e.to_string())?;
                    worst = worst.max((rep.lhs - rep.rhs).abs());
                }
            }
        }
        if worst >= 1e-6 {
            return Err(format!("norm equality off by {worst:e}"));
        }
        Ok(format!("q <= 4 exact, norm equality gap {worst:.1e}"))
    });
}

#[test]
fn criterion_04_heisenberg_system() {
    criterion(4, "Heisenberg adapted system", 30.0, || {
        let built = build_adapted_system(&lie("heisenberg")).map_err(|e| e.to_string())?;
        if !built.all_nilpotent() || !built.is_shift_free() {
            return Err("built system has a shift or a non-nilpotent image".into());
        }
        let sys = catalog_system("heisenberg").map_err(|e| e.to_string())?;
        let mut checks = 0;
        for beta in MultiIndex::all_up_to(1, 3) {
            let pi = sys.tensor_rep(&beta);
            let mono = |b: &MultiIndex| UEAElement::monomial(sys.algebra(), MultiIndex::zeros(2).concat(b), Scalar::one());
            if pi.eval_uea(&mono(&beta)).is_zero() {
                return Err(format!("leading image vanishes at {beta:?}"));
            }
            for alpha in MultiIndex::all_up_to(1, 5) {
                if beta.colex_lt(&alpha) && !pi.eval_uea(&mono(&alpha)).is_zero() {
                    return Err(format!("{alpha:?} survives in the representation for {beta:?}"));
                }
                checks += 1;
            }
        }
        let e3 = sys.reps()[0].generator(2).clone();
        for q in 1..=4u32 {
            let mut power = SparseMatrix::identity(1);
            for _ in 0..q {
                power = power.kron(&e3);
            }
            if sys.leading_image(&MultiIndex(vec![q])) != power.scale(&factorial(q)) {
                return Err(format!("tensor power identity fails at q = {q}"));
            }
        }
        Ok(format!("{checks} exponent pairs, q <= 4"))
    });
}

#[test]
fn criterion_05_leading_terms_shift() {
    criterion(5, "symbol of leading terms is a shift", 10.0, || {
        let mut count = 0;
        for (i, name) in DOMINATION.iter().enumerate() {
            let sys = catalog_system(name).map_err(|e| e.to_string())?;
            let k = sys.split();
            let mut r = rng(500 + i as u64);
            for beta in MultiIndex::all_up_to(sys.algebra().nil_dim(), 2) {
                let pi = sys.tensor_rep(&beta);
                let lead = sys.leading_image(&beta);
                let mu = sys.shift_vector(&beta);
                let mono = UEAElement::monomial(sys.algebra(), MultiIndex::zeros(k).concat(&beta), Scalar::one());
                for _ in 0..50 {
                    let f = Polynomial::random(&mut r, k, 5, Field::Real);
                    let got = tilde_pi(&pi, &UEAElement::phi(sys.algebra(), &f).mul(&mono));
                    let mut want = MatrixFunction::zero(got.dim(), k);
                    want.add_scaled(&CoefficientFn::Poly(f.shift(&mu)), &lead);
                    if !got.same_as(&want) {
                        return Err(format!("{name} {beta:?}: f = {f}"));
                    }
                    count += 1;
                }
            }
        }
        Ok(format!("{count} polynomials"))
    });
}

#[test]
fn criterion_06_domination() {
    criterion(6, "domination inequality", 60.0, || {
        let mut total = 0;
        for (i, name) in DOMINATION.iter().enumerate() {
            let (checks, failures) = domination_sweep(name, 600 + i as u64, 20);
            if let Some(f) = failures.first() {
                return Err(format!("{} failures, first: {f}", failures.len()));
            }
            total += checks;
        }
        Ok(format!("{total} inequalities over {} systems", DOMINATION.len()))
    });
}

fn growth_alpha(b: &NumericMatrix) -> Result<Option<f64>, String> {
    let r = exp_growth_scan(b, 1000.0, 64, MatrixNorm::Operator2).map_err(|e| e.to_string())?;
    Ok(match r.verdict {
        Verdict::Polynomial { alpha } => Some(alpha),
        _ => None,
    })
}

#[test]
fn criterion_07_growth() {
    criterion(7, "growth scans", 60.0, || {
        let mut alphas = Vec::new();
        for d in 1..=5 {
            let alpha = growth_alpha(&jordan_block(d))?.ok_or(format!("Jordan block {d} not polynomial"))?;
            if (alpha - (d as f64 - 1.0)).abs() > 0.2 {
                return Err(format!("Jordan block {d}: alpha {alpha}"));
            }
            alphas.push(format!("{alpha:.2}"));
        }
        let rot = NumericMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        if exp_growth_scan(&rot, 1000.0, 64, MatrixNorm::Operator2).map_err(|e| e.to_string())?.verdict != Verdict::Exponential {
            return Err("rotation generator not exponential".into());
        }
        let mut r = rng(7);
        let mut small = move || r.gen_range(-6i32..=6) as f64 / 3.0;
        for n in 0..20 {
            let mut b = DMatrix::zeros(4, 4);
            for i in 0..4 {
                for j in i..4 {
                    b[(i, j)] = small();
                }
            }
            let alpha = growth_alpha(&b)?.ok_or(format!("upper triangular sample {n} not polynomial:\n{b}"))?;
            if alpha > 3.2 {
                return Err(format!("upper triangular sample {n}: alpha {alpha}"));
            }
        }
        for n in 0..20 {
            // [[A, C], [0, N]]: real spectrum block, nilpotent block, arbitrary coupling
            let mut b = DMatrix::zeros(4, 4);
            b[(0, 0)] = small();
            b[(0, 1)] = small();
            b[(1, 1)] = small();
            b[(2, 3)] = small();
            for i in 0..2 {
                for j in 2..4 {
                    b[(i, j)] = small();
                }
            }
            growth_alpha(&b)?.ok_or(format!("split extension sample {n} not polynomial:\n{b}"))?;
        }
        Ok(format!("Jordan alphas {}", alphas.join(" ")))
    });
}

fn gap(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    max_entry(&(a - b))
}

#[test]
fn criterion_08_ordered_calculus() {
    criterion(8, "functional calculus by quadrature", 60.0, || {
        let mut worst = 0.0f64;
        let gauss = FourierSymbol::gaussian(&[1.0]);
        for diag in [vec![0.0, 1.0], vec![-0.5, 0.25, 1.0]] {
            let b = NumericMatrix::from_diagonal(&DVector::from_vec(diag.clone()));
            let q = ordered_fc_quadrature(&gauss, &[b]).map_err(|e| e.to_string())?;
            worst = worst.max(gap(&q.value, &diagonal_calculus(&gauss, &[diag])));
        }
        let coeff = gauss.to_coefficient().ok_or("gaussian has no closed form")?;
        for d in 2..=3 {
            let n = jordan_block(d);
            let q = ordered_fc_quadrature(&gauss, std::slice::from_ref(&n)).map_err(|e| e.to_string())?;
            let t = ordered_fc_taylor(&coeff, std::slice::from_ref(&n)).map_err(|e| e.to_string())?;
            worst = worst.max(gap(&q.value, &t));
        }
        let pair = FourierSymbol::gaussian(&[1.0, 0.8]);
        for (d1, d2) in [(vec![0.0, 1.0], vec![1.0, -1.0]), (vec![0.0, 0.5, 1.0], vec![1.0, 0.0, -0.5])] {
            let bs = [NumericMatrix::from_diagonal(&DVector::from_vec(d1.clone())), NumericMatrix::from_diagonal(&DVector::from_vec(d2.clone()))];
            let o = ordered_fc_quadrature(&pair, &bs).map_err(|e| e.to_string())?;
            let w = weyl_fc_quadrature(&pair, &bs).map_err(|e| e.to_string())?;
            let exact = diagonal_calculus(&pair, &[d1, d2]);
            worst = worst.max(gap(&o.value, &exact)).max(gap(&w.value, &exact)).max(gap(&o.value, &w.value));
        }
        // commuting but not diagonal: b and b^2 for a nilpotent b
        let n = jordan_block(3);
        let bs = [n.clone(), &n * &n];
        let two = FourierSymbol::poly_gaussian(&Polynomial::one(2), &[1.0, 1.0]);
        let o = ordered_fc_quadrature(&two, &bs).map_err(|e| e.to_string())?;
        let w = weyl_fc_quadrature(&two, &bs).map_err(|e| e.to_string())?;
        let t = ordered_fc_taylor(&two.to_coefficient().ok_or("no closed form")?, &bs).map_err(|e| e.to_string())?;
        worst = worst.max(gap(&o.value, &w.value)).max(gap(&o.value, &t));
        if worst >= 1e-6 {
            return Err(format!("quadrature off by {worst:e}"));
        }
        let mut flat = 0.0f64;
        for d in 2..=3 {
            let sym = FourierSymbol::poly_gaussian(&Polynomial::var(1, 0).pow(d as u32), &[1.0]);
            let q = ordered_fc_quadrature(&sym, &[jordan_block(d)]).map_err(|e| e.to_string())?;
            flat = flat.max(max_entry(&q.value));
        }
        let mixed = Polynomial::var(2, 1).pow(2).mul(&Polynomial::var(2, 0).add(&Polynomial::one(2)));
        let diag = NumericMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0]));
        let q = ordered_fc_quadrature(&FourierSymbol::poly_gaussian(&mixed, &[1.0, 1.0]), &[diag, jordan_block(2)]).map_err(|e| e.to_string())?;
        flat = flat.max(max_entry(&q.value));
        if flat >= 1e-6 {
            return Err(format!("flat symbols leave {flat:e}"));
        }
        Ok(format!("largest gap {worst:.1e}, flat residue {flat:.1e}"))
    });
}

fn presheaf_laws(name: &str, seed: u64) -> Result<(), String> {
    let alg = pbw(name);
    let dim = if name.ends_with("-c") { 4 } else { 2 };
    let cube = |lo: i64, hi: i64| OpenRegion::from_box(OpenBox::new(vec![rat(lo, 2); dim], vec![rat(hi, 2); dim]).unwrap());
    let (v, w, x) = (cube(-4, 4), cube(-2, 3), cube(0, 1));
    let mut r = rng(seed);
    for _ in 0..20 {
        let a = NCFunctionElement::from_uea(&UEAElement::random(&mut r, &alg, 3, 5), 3);
        let b = NCFunctionElement::from_uea(&UEAElement::random(&mut r, &alg, 3, 5), 3);
        let a = LocalSection::new(a, v.clone()).map_err(|e| e.to_string())?;
        let b = LocalSection::new(b, v.clone()).map_err(|e| e.to_string())?;
        let res = |s: &LocalSection, t: &OpenRegion| s.restrict(t).map_err(|e| e.to_string());
        if !res(&a, &v)?.exact_eq(&a) {
            return Err(format!("{name}: restriction to the whole region is not the identity"));
        }
        if !res(&res(&a, &w)?, &x)?.exact_eq(&res(&a, &x)?) {
            return Err(format!("{name}: restrictions do not compose"));
        }
        let ab = a.multiply(&b).map_err(|e| e.to_string())?;
        let split = res(&a, &w)?.multiply(&res(&b, &w)?).map_err(|e| e.to_string())?;
        if !res(&ab, &w)?.exact_eq(&split) {
            return Err(format!("{name}: restriction is not multiplicative"));
        }
    }
    Ok(())
}

#[test]
fn criterion_09_sheaf() {
    criterion(9, "presheaf laws and gluing", 20.0, || {
        for (i, name) in ["heisenberg", "heisenberg-c"].iter().enumerate() {
            presheaf_laws(name, 900 + i as u64)?;
            gluing_suite(name, 910 + i as u64, 20)?;
        }
        Ok("real and holomorphic modes, 20 families each".into())
    });
}

#[test]
fn criterion_10_euclidean_blowup() {
    criterion(10, "e2 blow-up demo", 30.0, || {
        let rows = demo_e2_blowup(&DemoConfig::default());
        let mut summary = Vec::new();
        let mut last = 0.0;
        for row in &rows {
            if row.fit_residual >= 1e-3 || !row.within_10_percent {
                return Err(format!("m = {}: residual {:e}, sup {} vs {}", row.m, row.fit_residual, row.sup_g, row.sup_target));
            }
            if row.sup_g <= last {
                return Err(format!("sup does not grow at m = {}", row.m));
            }
            last = row.sup_g;
            summary.push(format!("m={} sup {:.3}/{:.3}", row.m, row.sup_g, row.sup_target));
        }
        if rows.iter().map(|r| r.m).collect::<Vec<_>>() != [2, 4, 8] {
            return Err("demo did not cover m = 2, 4, 8".into());
        }
        Ok(summary.join(", "))
    });
}
