use std::sync::Arc;

use operadic::algebra::{basis_space, free_algebra, weight_profile, OperadAlgebra};
use operadic::complexes::tensor;
use operadic::linalg::SparseVec;
use operadic::modules::{
    adjoint_transpose, adjoint_untranspose, algebra_into_words, check_module, free_module, lax_hom, lax_product,
    module_maps, quotient_module, AModule,
};
use operadic::operad::{ass_operad, com_operad};

const CAP: u32 = 3;

fn com_poly() -> Arc<OperadAlgebra> {
    com_capped(CAP)
}

fn ass_poly() -> Arc<OperadAlgebra> {
    ass_capped(CAP)
}

// Words carry at most `cap` generators plus weight-zero slot entries, and
// acting adds up to two more inputs.
fn com_capped(cap: u32) -> Arc<OperadAlgebra> {
    Arc::new(free_algebra(Arc::new(com_operad(cap as usize + 4)), &basis_space(&["x"], 0), cap).unwrap())
}

fn ass_capped(cap: u32) -> Arc<OperadAlgebra> {
    Arc::new(free_algebra(Arc::new(ass_operad(cap as usize + 4)), &basis_space(&["x"], 0), cap).unwrap())
}

/// `x^n` in a one-generator algebra.
fn power(a: &OperadAlgebra, n: usize) -> SparseVec {
    let x = a.generators()[0].clone();
    a.mult(n, &SparseVec::unit(0), &vec![x; n]).unwrap()
}

fn truncated(a: &Arc<OperadAlgebra>, n: usize) -> Arc<AModule> {
    quotient_module(&AModule::over_itself(a), &[power(a, n)], 2).unwrap()
}

#[test]
fn empty_and_unary_products() {
    for a in [com_poly(), ass_poly()] {
        let p0 = lax_product(&a, &[]).unwrap();
        let unit = algebra_into_words(&a, &p0.words).unwrap();
        assert_eq!(unit.rank(), a.dim());
        assert_eq!(p0.module.dim(), a.dim());
        let m = AModule::over_itself(&a);
        let p1 = lax_product(&a, &[m]).unwrap();
        assert_eq!(weight_profile(p1.module.carrier(), CAP), weight_profile(a.carrier(), CAP));
    }
    let a = com_poly();
    let m = truncated(&a, 2);
    assert_eq!(weight_profile(m.carrier(), CAP), vec![1, 1, 0, 0]);
    assert!(check_module(&m, 2).is_ok());
    let p = lax_product(&a, std::slice::from_ref(&m)).unwrap();
    assert_eq!(weight_profile(p.module.carrier(), CAP), vec![1, 1, 0, 0]);
}

#[test]
fn free_module_products() {
    let w1 = basis_space(&["u"], 0);
    let w2 = basis_space(&["v", "w"], 1);
    let a = com_poly();
    let f1 = free_module(&a, &w1).unwrap();
    let f2 = free_module(&a, &w2).unwrap();
    let p = lax_product(&a, &[f1, f2]).unwrap();
    let f12 = free_module(&a, &tensor(&w1, &w2)).unwrap();
    assert_eq!(p.module.carrier().space().dims(), f12.carrier().space().dims());
    assert_eq!(weight_profile(p.module.carrier(), CAP), weight_profile(f12.carrier(), CAP));
    assert!(check_module(&p.module, 2).is_ok());
}

// Over Ass, a product of modules is a sum over orderings of the factors;
// for free modules each ordering gives words x^a u x^b v x^c.
#[test]
fn associative_products_sum_over_orderings() {
    let w1 = basis_space(&["u"], 0);
    let w2 = basis_space(&["v", "w"], 1);
    let a = ass_poly();
    let f1 = free_module(&a, &w1).unwrap();
    let f2 = free_module(&a, &w2).unwrap();
    let p = lax_product(&a, &[f1, f2]).unwrap();
    // weight 2: 2 orderings × 2; weight 3: 2 orderings × 3 positions of x × 2
    assert_eq!(weight_profile(p.module.carrier(), CAP), vec![0, 0, 4, 12]);
    let f12 = free_module(&a, &tensor(&w1, &w2)).unwrap();
    assert_eq!(weight_profile(f12.carrier(), CAP), vec![0, 0, 2, 4]);
    assert!(check_module(&p.module, 2).is_ok());
}

#[test]
fn commutative_products_are_tensor_products() {
    let a = com_poly();
    let p = lax_product(&a, &[truncated(&a, 2), truncated(&a, 3)]).unwrap();
    assert_eq!(weight_profile(p.module.carrier(), CAP), vec![1, 1, 0, 0]);
    let p = lax_product(&a, &[truncated(&a, 3), AModule::over_itself(&a)]).unwrap();
    assert_eq!(weight_profile(p.module.carrier(), CAP), vec![1, 1, 1, 0]);
}

fn adjunction(a: &Arc<OperadAlgebra>, m1: Arc<AModule>, m2: Arc<AModule>, n: Arc<AModule>) -> (usize, usize) {
    let p = lax_product(a, &[m1.clone(), m2.clone()]).unwrap();
    let h = lax_hom(a, &[m2], &n, 2).unwrap();
    assert!(check_module(&h.module, 2).is_ok(), "{:?}", check_module(&h.module, 2).failures.first());
    let left = module_maps(&p.module, &n, 0, 2).unwrap();
    let right = module_maps(&m1, &h.module, 0, 2).unwrap();
    for g in &left {
        let f = adjoint_transpose(&p, &h, g).unwrap();
        assert_eq!(&adjoint_untranspose(&p, &h, &f).unwrap(), g);
    }
    (left.len(), right.len())
}

#[test]
fn adjunction_commutative() {
    let a = com_capped(2);
    let (l, r) = adjunction(&a, truncated(&a, 3), AModule::over_itself(&a), truncated(&a, 2));
    assert_eq!(l, r);
    assert!(l > 0);
}

#[test]
fn adjunction_free_modules() {
    let a = ass_capped(2);
    let w = basis_space(&["u"], 0);
    let f = free_module(&a, &w).unwrap();
    let (l, r) = adjunction(&a, f.clone(), f.clone(), AModule::over_itself(&a));
    assert_eq!(l, r);
    assert!(l > 0);
}

#[test]
fn adjunction_odd_generators() {
    let a = com_capped(2);
    let w = basis_space(&["e"], 1);
    let f = free_module(&a, &w).unwrap();
    let n = free_module(&a, &tensor(&w, &w)).unwrap();
    let (l, r) = adjunction(&a, f.clone(), f, n);
    assert_eq!(l, r);
    assert!(l > 0);
}
