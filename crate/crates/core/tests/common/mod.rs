//! Instances shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use operadic::algebra::{free_algebra, OperadAlgebra};
use operadic::complexes::Complex;
use operadic::connection::{canonical_connection, jet_module, Connection, JetModule};
use operadic::curvature::{McElement, SymmetricAlgebra};
use operadic::linalg::{Basis, GradedSpace, Rational, SparseVec};
use operadic::operad::com_operad;

pub fn algebra(gens: &[(i32, &str)], cap: u32) -> Arc<OperadAlgebra> {
    let sp = GradedSpace::new(gens.iter().map(|(d, l)| Basis::new(*d, 1, *l)).collect());
    let v = Complex::zero_differential(Arc::new(sp));
    Arc::new(free_algebra(Arc::new(com_operad(cap as usize + 4)), &v, cap).unwrap())
}

pub fn mono(a: &OperadAlgebra, idx: &[usize]) -> SparseVec {
    let xs: Vec<SparseVec> = idx.iter().map(|&i| a.generators()[i].clone()).collect();
    a.mult(xs.len(), &SparseVec::unit(0), &xs).unwrap()
}

/// `k[x] ⊗ Λ[y]` with `|x| = 0`, `|y| = 1` and `g(x) = x²y`.
pub fn twisted_instance() -> (Arc<OperadAlgebra>, McElement) {
    let a = algebra(&[(0, "x"), (1, "y")], 5);
    let g = McElement::on_algebra(&a, vec![mono(&a, &[0, 0, 1]), SparseVec::new()]).unwrap();
    (a, g)
}

/// Structure constants `c[k][i][j]` of a bracket `[e_i, e_j] = Σ_k c^k_ij e_k`.
pub type Constants = Vec<Vec<Vec<i64>>>;

pub fn antisymmetric(n: usize, upper: &[(usize, usize, usize, i64)]) -> Constants {
    let mut c = vec![vec![vec![0; n]; n]; n];
    for &(i, j, k, v) in upper {
        c[k][i][j] = v;
        c[k][j][i] = -v;
    }
    c
}

/// The Jacobi identity, checked on all triples of basis vectors.
pub fn jacobi(c: &Constants) -> bool {
    let n = c.len();
    let br = |x: &[i64], y: &[i64]| -> Vec<i64> {
        (0..n).map(|k| (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| c[k][i][j] * x[i] * y[j]).sum()).collect()
    };
    let e = |i: usize| -> Vec<i64> { (0..n).map(|j| i64::from(i == j)).collect() };
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let t1 = br(&e(i), &br(&e(j), &e(k)));
                let t2 = br(&e(j), &br(&e(k), &e(i)));
                let t3 = br(&e(k), &br(&e(i), &e(j)));
                if (0..n).any(|m| t1[m] + t2[m] + t3[m] != 0) {
                    return false;
                }
            }
        }
    }
    true
}

/// The Chevalley–Eilenberg element on `Λ(x_1..x_n)`, `|x_i| = 1`:
/// `g(x_k) = −Σ_{i<j} c^k_ij x_i x_j`.
pub fn chevalley_eilenberg(c: &Constants) -> (Arc<OperadAlgebra>, McElement) {
    let n = c.len();
    let labels: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let gens: Vec<(i32, &str)> = labels.iter().map(|l| (1, l.as_str())).collect();
    let a = algebra(&gens, 4);
    let values = (0..n)
        .map(|k| {
            let mut v = SparseVec::new();
            for i in 0..n {
                for j in i + 1..n {
                    v.add_scaled(&mono(&a, &[i, j]), &Rational::from_integer(-c[k][i][j]));
                }
            }
            v
        })
        .collect();
    let g = McElement::on_algebra(&a, values).unwrap();
    (a, g)
}

pub fn nonabelian() -> Constants {
    antisymmetric(2, &[(0, 1, 1, 1)])
}

/// The jet module of `M` over `S_A(M)`'s derivation and its canonical connection.
pub fn canonical(sa: &SymmetricAlgebra) -> (Arc<JetModule>, Connection) {
    let jet = Arc::new(jet_module(&sa.derivation.target, &sa.derivation, 2).unwrap());
    let nabla = canonical_connection(&jet).unwrap();
    (jet, nabla)
}
