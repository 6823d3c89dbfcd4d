#![allow(dead_code)]

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use trilie::catalog;
use trilie::pbw::PbwAlgebra;
use trilie::LieAlgebra;

pub const CATALOG: &[&str] = &["abelian:2", "af1", "heisenberg", "e2", "tri:2", "tri:3", "heisenberg-c"];
pub const TRIANGULAR: &[&str] = &["abelian:2", "abelian:3", "af1", "heisenberg", "tri:2", "tri:3", "heisenberg-c"];

pub fn lie(name: &str) -> LieAlgebra {
    catalog::algebra(name).unwrap()
}

pub fn pbw(name: &str) -> Arc<PbwAlgebra> {
    PbwAlgebra::new(lie(name)).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

use trilie::ncfunc::{CompactBox, NCFunctionElement};
use trilie::pbw::{MultiIndex, UEAElement};
use trilie::reps::catalog_system;
use trilie::seminorm_lab::{verify_domination, MatrixNorm};

/// Systems with a catalog adapted system; e2 has none.
pub const DOMINATION: &[&str] = &["abelian:2", "af1", "heisenberg", "tri:2", "tri:3"];

/// Checks the domination inequality for `count` random elements, every exponent of degree
/// at most 2, two boxes and orders 0 and 1. Returns the number of checks and the failures.
pub fn domination_sweep(name: &str, seed: u64, count: usize) -> (usize, Vec<String>) {
    let sys = catalog_system(name).unwrap();
    let alg = sys.algebra().clone();
    let k = sys.split();
    let boxes = [CompactBox::cube(k, 0, 1), CompactBox::cube(k, -1, 2)];
    let mut r = rng(seed);
    let mut checks = 0;
    let mut failures = Vec::new();
    for i in 0..count {
        let a = NCFunctionElement::from_uea(&UEAElement::random(&mut r, &alg, 3, 4), 4);
        for beta in MultiIndex::all_up_to(alg.nil_dim(), 2) {
            for bx in &boxes {
                for l in 0..=1 {
                    let rep = verify_domination(&a, &beta, bx, l, &sys, MatrixNorm::MaxRowSum, &[]).unwrap();
                    checks += 1;
                    if !rep.pass || rep.constant_exact.is_none() {
                        failures.push(format!("{name} element {i} beta {beta:?} l {l}: {} > {}", rep.lhs, rep.rhs));
                    }
                }
            }
        }
    }
    (checks, failures)
}

use rand::Rng;
use trilie::poly::Polynomial;
use trilie::sheaf::{glue, rat, region_dim, GlueOutcome, LocalSection, OpenBox, OpenRegion};

/// Chain of 2 or 3 boxes whose consecutive members overlap; every box contains `(0, 1/2)` on the later axes.
pub fn random_cover<R: Rng>(r: &mut R, dim: usize) -> Vec<OpenRegion> {
    let count = r.gen_range(2..=3);
    let mut lo = r.gen_range(-4i64..=0);
    let mut cover = Vec::new();
    for _ in 0..count {
        let width = r.gen_range(2i64..=4);
        let mut los = vec![rat(lo, 2)];
        let mut his = vec![rat(lo + width, 2)];
        for _ in 1..dim {
            let a = r.gen_range(-2i64..=0);
            los.push(rat(a, 2));
            his.push(rat(r.gen_range(1i64..=3), 2));
        }
        cover.push(OpenRegion::from_box(OpenBox::new(los, his).unwrap()));
        lo += r.gen_range(1..width);
    }
    cover
}

/// Sheaf checks on `families` random covers: gluing of restrictions of one element succeeds
/// and restricts back exactly; a perturbed family fails with a witness in an overlap.
pub fn gluing_suite(name: &str, seed: u64, families: usize) -> Result<(), String> {
    let alg = pbw(name);
    let mut r = rng(seed);
    let dim = region_dim(trilie::ncfunc::FunctionMode::for_field(alg.lie().field()), alg.split());
    for family in 0..families {
        let cover = random_cover(&mut r, dim);
        let a = NCFunctionElement::from_uea(&UEAElement::random(&mut r, &alg, 3, 5), 3);
        let sections: Vec<LocalSection> = cover.iter().map(|u| LocalSection::new(a.clone(), u.clone()).unwrap()).collect();
        match glue(&cover, &sections).map_err(|e| e.to_string())? {
            GlueOutcome::Glued { section, .. } => {
                for (u, s) in cover.iter().zip(&sections) {
                    if !section.restrict(u).map_err(|e| e.to_string())?.exact_eq(s) {
                        return Err(format!("{name} family {family}: glued section does not restrict back"));
                    }
                }
            }
            GlueOutcome::Mismatch(w) => return Err(format!("{name} family {family}: compatible family rejected at {w:?}")),
        }
        let victim = r.gen_range(1..cover.len());
        let betas = MultiIndex::all_up_to(alg.nil_dim(), 2);
        let beta = betas[r.gen_range(0..betas.len())].clone();
        let bump = Polynomial::random(&mut r, alg.split(), 2, alg.lie().field());
        let mut bad = sections.clone();
        let perturbed = a.add(&NCFunctionElement::term(&alg, 3, beta, trilie::ncfunc::CoefficientFn::Poly(bump))).unwrap();
        bad[victim] = LocalSection::new(perturbed, cover[victim].clone()).unwrap();
        match glue(&cover, &bad).map_err(|e| e.to_string())? {
            GlueOutcome::Glued { .. } => return Err(format!("{name} family {family}: perturbed family glued")),
            GlueOutcome::Mismatch(w) => {
                if w.values[0] == w.values[1] || (w.first != victim && w.second != victim) {
                    return Err(format!("{name} family {family}: bad witness {w:?}"));
                }
            }
        }
    }
    Ok(())
}
