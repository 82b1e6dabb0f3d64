use std::sync::Arc;

use operadic::algebra::{basis_space, free_algebra, OperadAlgebra};
use operadic::complexes::Complex;
use operadic::connection::{
    atiyah_agreement, atiyah_from_connection, atiyah_from_extension, canonical_connection, connection_splitting_test,
    derivative_of_morphism, find_free_connection, jet_module, product_connection, Connection, JetModule,
};
use operadic::lax::{Fed, Word, WordVec};
use operadic::linalg::{Basis, GradedMap, GradedSpace, Rational};
use operadic::modules::{free_module, free_module_twisted, kahler, lax_product, module_maps, AModule};
use operadic::operad::com_operad;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CAP: u32 = 3;

fn poly() -> Arc<OperadAlgebra> {
    Arc::new(free_algebra(Arc::new(com_operad(CAP as usize + 4)), &basis_space(&["x"], 0), CAP).unwrap())
}

fn jet(e: &Arc<AModule>) -> Arc<JetModule> {
    let (_, d) = kahler(e.algebra()).unwrap();
    Arc::new(jet_module(e, &d, 2).unwrap())
}

/// `E` free on `e0` (degree 0) and `e1` (degree 1) with `∂e0 = x·e1`.
fn twisted(a: &Arc<OperadAlgebra>) -> Arc<AModule> {
    let sp = GradedSpace::new(vec![Basis::new(0, 2, "e0"), Basis::new(1, 1, "e1")]);
    let w = Complex::zero_differential(Arc::new(sp));
    let mut de0 = WordVec::new();
    de0.insert(Word { op: 0, gens: vec![0], slots: vec![(0, 1)] }, Rational::from_integer(1));
    free_module_twisted(a, &w, Some(vec![de0, WordVec::new()])).unwrap()
}

#[test]
fn canonical_connection_on_a_free_module() {
    let a = poly();
    let e = free_module(&a, &basis_space(&["u"], 0)).unwrap();
    let j = jet(&e);
    let nabla = canonical_connection(&j).unwrap();
    let v = connection_splitting_test(&j, &nabla.map).unwrap();
    assert!(v.diagrams && v.splitting);
    assert!(nabla.is_chain_map().unwrap());
    assert!(GradedMap::is_zero(&atiyah_from_connection(&nabla).unwrap().representative));
    let ext = atiyah_from_extension(&j).unwrap();
    assert!(atiyah_agreement(&j, &ext, &atiyah_from_connection(&nabla).unwrap()).unwrap().is_some());
}

#[test]
fn zero_is_not_a_connection() {
    let a = poly();
    let e = free_module(&a, &basis_space(&["u"], 0)).unwrap();
    let j = jet(&e);
    let zero = GradedMap::zero(e.carrier().space().clone(), j.product.module.carrier().space().clone(), 0);
    let v = connection_splitting_test(&j, &zero).unwrap();
    assert!(!v.diagrams && !v.splitting);
}

#[test]
fn twisted_module_has_a_nonzero_atiyah_class() {
    let a = poly();
    let e = twisted(&a);
    assert!(e.carrier().squares_to_zero());
    let j = jet(&e);
    let nabla = canonical_connection(&j).unwrap();
    assert!(nabla.is_derivative().unwrap());
    assert!(!nabla.is_chain_map().unwrap());
    let conn = atiyah_from_connection(&nabla).unwrap();
    assert!(!GradedMap::is_zero(&conn.representative));
    let ext = atiyah_from_extension(&j).unwrap();
    assert!(atiyah_agreement(&j, &conn, &ext).unwrap().is_some());
    // not null-homotopic: no connection commutes with ∂
    let zero = GradedMap::zero(conn.representative.source().clone(), conn.representative.target().clone(), 1);
    let z = operadic::connection::AtiyahClass { representative: zero, route: conn.route };
    assert!(atiyah_agreement(&j, &conn, &z).unwrap().is_none());

    let solved = find_free_connection(&j).unwrap().expect("free connection");
    assert!(solved.is_derivative().unwrap());
    let other = atiyah_from_connection(&solved).unwrap();
    assert!(atiyah_agreement(&j, &conn, &other).unwrap().is_some());
}

#[test]
fn splitting_test_agrees_on_random_candidates() {
    let a = poly();
    let e = twisted(&a);
    let j = jet(&e);
    let nabla = canonical_connection(&j).unwrap();
    let linear = module_maps(&e, &j.product.module, 0, 2).unwrap();
    let target = j.product.module.carrier().space().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut passing = 0;
    for trial in 0..24 {
        let mut m = nabla.map.clone();
        if trial % 2 == 0 {
            for f in &linear {
                let c = Rational::from_integer(rng.gen_range(-3..=3));
                m = m.add(&f.scale(&c)).unwrap();
            }
        } else {
            let cols = (0..e.dim())
                .map(|i| {
                    let mut v = m.col(i).clone();
                    for r in 0..target.dim() {
                        let same = target.degree(r) == e.carrier().space().degree(i)
                            && target.weight(r) == e.carrier().space().weight(i);
                        if same && rng.gen_bool(0.3) {
                            v.add_at(r, &Rational::from_integer(rng.gen_range(-2..=2)));
                        }
                    }
                    v
                })
                .collect();
            m = GradedMap::new(e.carrier().space().clone(), target.clone(), 0, cols).unwrap();
        }
        let v = connection_splitting_test(&j, &m).unwrap();
        assert!(v.agree(), "trial {trial}: {v:?}");
        passing += v.diagrams as usize;
    }
    assert!((12..24).contains(&passing));
}

#[test]
fn derivative_of_the_unit_morphism_vanishes() {
    let a = poly();
    let e = twisted(&a);
    let j = jet(&e);
    let nabla = canonical_connection(&j).unwrap();
    let p1 = lax_product(&a, std::slice::from_ref(&e)).unwrap();
    let l = &p1.words;
    let cols = (0..e.dim())
        .map(|y| l.project(&l.canon(1, l.operad().unit(), &[Fed::Slot(0, y as u32)]).unwrap()).unwrap())
        .collect();
    let f = GradedMap::new(e.carrier().space().clone(), p1.module.carrier().space().clone(), 0, cols).unwrap();
    let pc = product_connection(&j.derivation, &[&nabla]).unwrap();
    assert!(GradedMap::is_zero(&derivative_of_morphism(&f, &nabla, &pc).unwrap()));
}

#[test]
fn algebra_carries_a_flat_connection() {
    let a = poly();
    let e = AModule::over_itself(&a);
    let j = jet(&e);
    let nabla: Connection = find_free_connection(&j).unwrap().expect("connection on A");
    assert!(nabla.is_chain_map().unwrap());
    let v = connection_splitting_test(&j, &nabla.map).unwrap();
    assert!(v.diagrams && v.splitting);
    let ext = atiyah_from_extension(&j).unwrap();
    let conn = atiyah_from_connection(&nabla).unwrap();
    assert!(atiyah_agreement(&j, &ext, &conn).unwrap().is_some());
}

#[test]
fn free_modules_over_the_unit_match_the_algebra() {
    let a = poly();
    let w = Complex::zero_differential(Arc::new(GradedSpace::new(vec![Basis::new(0, 0, "1")])));
    let e = free_module(&a, &w).unwrap();
    assert_eq!(e.carrier().space().dims(), a.carrier().space().dims());
    let j = jet(&e);
    let nabla = canonical_connection(&j).unwrap();
    assert!(nabla.is_chain_map().unwrap());
    assert!(nabla.is_derivative().unwrap());
}
