use std::sync::Arc;

mod common;

use common::*;
use operadic::complexes::commutator;
use operadic::connection::{
    atiyah_agreement, atiyah_from_connection, atiyah_from_extension, canonical_connection, find_free_connection,
    jet_module,
};
use operadic::curvature::*;
use operadic::linalg::{GradedMap, Rational, SparseVec};
use operadic::modules::{check_module, is_chain, kahler};

#[test]
fn chevalley_eilenberg_elements_solve_the_equation() {
    let (_, g) = chevalley_eilenberg(&nonabelian());
    assert!(!g.hat().unwrap().is_zero());
    assert!(mc_check(&g).unwrap());
    // in two dimensions every bracket satisfies Jacobi, and every g solves
    for a in -1..=1 {
        for b in -1..=1 {
            let k = antisymmetric(2, &[(0, 1, 0, a), (0, 1, 1, b)]);
            assert!(jacobi(&k));
            assert!(mc_check(&chevalley_eilenberg(&k).1).unwrap());
        }
    }
}

#[test]
fn jacobi_violations_are_detected() {
    // sl_2, then with one structure constant flipped
    let sl2 = antisymmetric(3, &[(0, 1, 2, 1), (2, 0, 0, 2), (2, 1, 1, -2)]);
    assert!(jacobi(&sl2));
    assert!(mc_check(&chevalley_eilenberg(&sl2).1).unwrap());
    let broken = antisymmetric(3, &[(0, 1, 2, 1), (2, 0, 0, 2), (2, 1, 1, 2)]);
    assert!(!jacobi(&broken));
    let (_, g) = chevalley_eilenberg(&broken);
    assert!(!mc_check(&g).unwrap());
    assert!(!g.defect().unwrap().is_zero());
}

#[test]
fn mc_check_agrees_with_jacobi_on_three_dimensional_brackets() {
    let pairs = [(0, 1), (0, 2), (1, 2)];
    let mut seen = [0usize; 2];
    let mut state = 17u64;
    for _ in 0..12 {
        let mut upper = Vec::new();
        for &(i, j) in &pairs {
            for k in 0..3 {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let v = ((state >> 33) % 3) as i64 - 1;
                if v != 0 && (state >> 40).is_multiple_of(2) {
                    upper.push((i, j, k, v));
                }
            }
        }
        let c = antisymmetric(3, &upper);
        let j = jacobi(&c);
        seen[j as usize] += 1;
        assert_eq!(mc_check(&chevalley_eilenberg(&c).1).unwrap(), j, "{upper:?}");
    }
    assert!(seen[0] > 0 && seen[1] > 0);
}

#[test]
fn deformations_of_algebra_and_module() {
    let (a, g) = twisted_instance();
    assert!(mc_check(&g).unwrap());
    let zero = McElement::zero(&a).unwrap();
    assert!(mc_check(&zero).unwrap());
    let a0 = deform(&a, &zero).unwrap();
    assert_eq!(a0.carrier().differential(), a.carrier().differential());
    let ag = deform(&a, &g).unwrap();
    let expected = a.carrier().differential().add(&g.hat().unwrap()).unwrap();
    assert_eq!(ag.carrier().differential().cols(), expected.cols());
    let (mg, d) = deform_module(&a, &g).unwrap();
    assert!(is_chain(&d.map, ag.carrier(), mg.carrier()).unwrap());
    assert!(check_module(&mg, 2).is_ok());
}

#[test]
fn curvature_components() {
    let (a, g) = twisted_instance();
    let c = curvature_mc(&a, &g, 3).unwrap();
    let sa = &c.deformed;
    let (jet, nabla) = canonical(sa);
    let q = q_nabla(sa, &nabla).unwrap();
    assert_eq!(q.map, c.q.map);
    assert!(raises_slots(&q.map, &sa.words, 0, 1));
    assert!(is_free_derivation(sa, &q.map).unwrap());
    assert_eq!(sa.component(&q.map, 2).unwrap(), sa.symmetrise(&jet.product, &nabla.map).unwrap());

    let r = &c.curvature;
    assert!(r.map.compose(&r.map).unwrap().is_zero());
    assert!(r.components[0].is_zero());
    let m = &sa.derivation.target;
    assert_eq!(r.components[1], sa.inclusion.compose(m.carrier().differential()).unwrap());
    let atiyah = atiyah_from_connection(&nabla).unwrap();
    assert!(!atiyah.representative.is_zero());
    assert_eq!(r.components[2], sa.symmetrise(&jet.product, &atiyah.representative).unwrap());
    assert!(!r.components[3].is_zero());
}

#[test]
fn module_curvature_components() {
    let (a, g) = twisted_instance();
    let c = curvature_mc(&a, &g, 3).unwrap();
    let sa = &c.deformed;
    let (jet, nabla) = canonical(sa);
    let sm = symmetric_module(sa, &sa.derivation.target).unwrap();
    let d = d_nabla(&sm, &nabla, &nabla).unwrap();
    assert!(is_free_q_derivation(&sm, &c.q, &d, &nabla).unwrap());
    assert!(raises_slots(&d.map, &sm.words, 0, 1));
    let t = total_curvature_module(&sm, &d).unwrap();
    assert!(t.map.compose(&t.map).unwrap().is_zero());
    assert_eq!(t.components[0], sm.inclusion.compose(sm.source.carrier().differential()).unwrap());
    let atiyah = atiyah_from_connection(&nabla).unwrap();
    assert_eq!(t.components[1], sm.flatten(&jet.product, &atiyah.representative).unwrap());
}

// From R∘R = 0 in symmetric degree three: ∂R⁽³⁾ + R⁽³⁾∂ + R⁽²⁾R⁽²⁾ = 0,
// and R⁽²⁾ on S² is α̂ because it vanishes on A.
#[test]
fn bianchi_identity() {
    let (a, g) = twisted_instance();
    let c = curvature_mc(&a, &g, 3).unwrap();
    let sa = &c.deformed;
    let b = bianchi_witness(sa, &c.curvature).unwrap();
    let m = sa.derivation.target.carrier();
    assert!(!b.composite.is_zero());
    assert_eq!(commutator(&b.homotopy, m, sa.words.carrier()).unwrap(), b.composite);
    assert_eq!(b.composite, b.curvature_bracket.neg());
    assert_ne!(b.composite, b.curvature_bracket);
    assert!(raises_slots(&b.alpha_hat, &sa.words, 0, 1));
}

#[test]
fn bianchi_identity_for_modules() {
    let (a, g) = twisted_instance();
    let c = curvature_mc(&a, &g, 3).unwrap();
    let sa = &c.deformed;
    let (_, nabla) = canonical(sa);
    let sm = symmetric_module(sa, &sa.derivation.target).unwrap();
    let d = d_nabla(&sm, &nabla, &nabla).unwrap();
    let t = total_curvature_module(&sm, &d).unwrap();
    let b = bianchi_witness_module(&sm, &c.curvature, &t).unwrap();
    assert!(!b.composite.is_zero());
    assert_eq!(commutator(&b.homotopy, sm.source.carrier(), sm.words.carrier()).unwrap(), b.composite);
    assert_eq!(b.composite, b.curvature_bracket.neg());
}

#[test]
fn flat_free_modules_have_trivial_bianchi_data() {
    let a = algebra(&[(0, "x")], 4);
    let zero = McElement::zero(&a).unwrap();
    let c = curvature_mc(&a, &zero, 3).unwrap();
    let r = &c.curvature;
    assert!(r.components[2].is_zero() && r.components[3].is_zero());
    let b = bianchi_witness(&c.deformed, r).unwrap();
    assert!(b.alpha.is_zero() && b.composite.is_zero() && b.homotopy.is_zero());
    assert!(c.element.hat().unwrap().is_zero());
    assert!(mc_check(&c.element).unwrap());
}

#[test]
fn chevalley_eilenberg_curvature() {
    let (a, g) = chevalley_eilenberg(&nonabelian());
    let c = curvature_mc(&a, &g, 2).unwrap();
    let sa = &c.deformed;
    assert_eq!(c.curvature.components[1], sa.inclusion.compose(sa.derivation.target.carrier().differential()).unwrap());
    assert!(!c.element.hat().unwrap().is_zero());
    assert!(mc_check(&c.element).unwrap());
    // with odd generators S³ vanishes, so the Bianchi data is zero
    let c3 = curvature_mc(&a, &g, 3).unwrap();
    let b = bianchi_witness(&c3.deformed, &c3.curvature).unwrap();
    assert!(b.composite.is_zero() && b.curvature_bracket.is_zero());
}

#[test]
fn deformed_module_connections_and_atiyah_classes() {
    let (a, g) = twisted_instance();
    let (mg, d) = deform_module(&a, &g).unwrap();
    let jet = Arc::new(jet_module(&mg, &d, 2).unwrap());
    let free = find_free_connection(&jet).unwrap().expect("a free connection");
    assert!(free.is_derivative().unwrap());
    let conn = atiyah_from_connection(&free).unwrap();
    assert!(!conn.representative.is_zero());
    let ext = atiyah_from_extension(&jet).unwrap();
    assert!(atiyah_agreement(&jet, &conn, &ext).unwrap().is_some());
    let canon = atiyah_from_connection(&canonical_connection(&jet).unwrap()).unwrap();
    assert!(atiyah_agreement(&jet, &conn, &canon).unwrap().is_some());
}

fn constant(xi: Vec<SparseVec>) -> Vec<Vec<SparseVec>> {
    vec![xi]
}

#[test]
fn gauge_flow_basics() {
    let (a, g) = chevalley_eilenberg(&nonabelian());
    let fam = gauge_flow(&a, &g, &[], 3).unwrap();
    assert!(fam.coefficients[1..].iter().all(|c| c.hat().unwrap().is_zero()));

    // x1 ↦ x2: first coefficient is [ξ̂, ∂ + ĝ] on generators
    let xi = vec![a.generators()[1].clone(), SparseVec::new()];
    let fam = gauge_flow(&a, &g, &constant(xi.clone()), 1).unwrap();
    let xhat = McElement::on_algebra(&a, xi).unwrap();
    let xhat = operadic::curvature::derivation_on(&xhat.words, 0, &|f| {
        Ok(xhat.values.iter().find(|(h, _)| *h == f).map(|(_, v)| a.words().unwrap().lift(v)).unwrap_or_default())
    })
    .unwrap();
    let dg = a.carrier().differential().add(&g.hat().unwrap()).unwrap();
    let b = bracket(&xhat, &dg).unwrap();
    for (i, x) in a.generators().iter().enumerate() {
        assert_eq!(&fam.coefficients[1].values[i].1, &b.apply(x));
    }
}

#[test]
fn gauge_flow_preserves_the_equation_to_order() {
    let (a, g) = chevalley_eilenberg(&nonabelian());
    let xi = constant(vec![a.generators()[1].clone(), a.generators()[0].clone()]);
    let fam = gauge_flow(&a, &g, &xi, 3).unwrap();
    let defects = fam.defect_coefficients().unwrap();
    assert!(defects[..=3].iter().all(GradedMap::is_zero));
    // g(t₀) fails only through the coefficients beyond order 3
    let t0 = Rational::from_integer(2);
    let mut tail = GradedMap::zero(defects[0].source().clone(), defects[0].target().clone(), 2);
    for (k, dk) in defects.iter().enumerate().skip(4) {
        tail = tail.add(&dk.scale(&pow(&t0, k))).unwrap();
    }
    assert_eq!(fam.evaluate(&t0).defect().unwrap(), tail);
}

fn pow(x: &Rational, k: usize) -> Rational {
    (0..k).fold(Rational::from_integer(1), |acc, _| &acc * x)
}

#[test]
fn gauge_transport() {
    let (a, g) = chevalley_eilenberg(&nonabelian());
    let xi = constant(vec![a.generators()[1].clone(), a.generators()[0].clone()]);
    let fam = gauge_flow(&a, &g, &xi, 2).unwrap();
    assert!(gauge_transport_check(&fam, &xi, 2, true).unwrap().holds());

    // a nonlinear ξ, where exp(ad ∇) ξ̂ differs from ξ̂
    let (a, g) = twisted_instance();
    let xi = constant(vec![mono(&a, &[0, 0]), SparseVec::new()]);
    let fam = gauge_flow(&a, &g, &xi, 3).unwrap();
    assert!(fam.defect_coefficients().unwrap()[..=3].iter().all(GradedMap::is_zero));
    let report = gauge_transport_check(&fam, &xi, 3, true).unwrap();
    assert!(report.holds(), "{report:?}");
    let mutated = gauge_transport_check(&fam, &xi, 3, false).unwrap();
    assert!(!mutated.orders[0]);

    let zero = gauge_flow(&a, &g, &[], 2).unwrap();
    assert!(gauge_transport_check(&zero, &[], 3, true).unwrap().holds());
}

#[test]
fn kahler_of_the_twisted_instance_is_free() {
    let (a, _) = twisted_instance();
    let (m, _) = kahler(&a).unwrap();
    assert!(m.free_over().is_some());
}
