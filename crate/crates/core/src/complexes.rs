//! Bounded cochain complexes of finite-dimensional rational spaces.
//!
//! Sign conventions, fixed once:
//! - tensor differential `∂(x⊗y) = ∂x⊗y + (-1)^{|x|} x⊗∂y`;
//! - braiding `x⊗y ↦ (-1)^{|x||y|} y⊗x`;
//! - shift `∂_{X[k]} = (-1)^k ∂_X`;
//! - commutator `[∂,h] = ∂h - (-1)^{|h|} h∂`; a chain map of degree `d`
//!   is a map with `[∂,f] = 0`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::One;

use crate::error::{Error, Result};
use crate::linalg::{
    kernel, map_from_unknowns, map_unknowns, sign, solve_map, DegreeWindow, GradedMap,
    GradedSpace, Rational, SparseVec, SystemBuilder,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Complex {
    space: Arc<GradedSpace>,
    d: GradedMap,
}

impl Complex {
    /// Validates that `d` has degree one and squares to zero.
    pub fn new(space: Arc<GradedSpace>, d: GradedMap) -> Result<Self> {
        if d.degree() != 1 || !d.source().same_shape(&space) || !d.target().same_shape(&space) {
            return Err(Error::Dimension("differential must be a degree-1 endomorphism".into()));
        }
        let d = d.with_spaces(space.clone(), space.clone())?;
        if !d.compose(&d)?.is_zero() {
            return Err(Error::Axiom("differential does not square to zero".into()));
        }
        Ok(Complex { space, d })
    }

    pub fn zero_differential(space: Arc<GradedSpace>) -> Self {
        let d = GradedMap::zero(space.clone(), space.clone(), 1);
        Complex { space, d }
    }

    /// The monoidal unit `1`.
    pub fn unit() -> Self {
        Complex::zero_differential(Arc::new(GradedSpace::unit()))
    }

    pub fn zero() -> Self {
        Complex::zero_differential(Arc::new(GradedSpace::zero()))
    }

    pub fn space(&self) -> &Arc<GradedSpace> {
        &self.space
    }

    pub fn differential(&self) -> &GradedMap {
        &self.d
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn squares_to_zero(&self) -> bool {
        self.d.compose(&self.d).map(|m| m.is_zero()).unwrap_or(false)
    }

    /// `X[k]`, with differential `(-1)^k ∂`.
    pub fn shift(&self, k: i32) -> Complex {
        let space = Arc::new(self.space.shift(k));
        let d = self
            .d
            .scale(&sign(k % 2 != 0))
            .with_spaces(space.clone(), space.clone())
            .expect("shift preserves shape");
        Complex { space, d }
    }

    pub fn with_differential(&self, d: GradedMap) -> Result<Complex> {
        Complex::new(self.space.clone(), d)
    }

    pub fn is_acyclic(&self) -> bool {
        cohomology_dims(self).values().all(|&n| n == 0)
    }
}

/// A map of some degree `d` with `[∂,f] = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainMap {
    source: Complex,
    target: Complex,
    map: GradedMap,
}

impl ChainMap {
    pub fn new(source: Complex, target: Complex, map: GradedMap) -> Result<Self> {
        let map = map.with_spaces(source.space.clone(), target.space.clone())?;
        if !commutator(&map, &source, &target)?.is_zero() {
            return Err(Error::Axiom("map does not commute with the differentials".into()));
        }
        Ok(ChainMap {
            source,
            target,
            map,
        })
    }

    pub fn identity(x: &Complex) -> Self {
        ChainMap {
            source: x.clone(),
            target: x.clone(),
            map: GradedMap::identity(x.space.clone()),
        }
    }

    pub fn source(&self) -> &Complex {
        &self.source
    }

    pub fn target(&self) -> &Complex {
        &self.target
    }

    pub fn map(&self) -> &GradedMap {
        &self.map
    }

    pub fn degree(&self) -> i32 {
        self.map.degree()
    }

    pub fn compose(&self, inner: &ChainMap) -> Result<ChainMap> {
        Ok(ChainMap {
            source: inner.source.clone(),
            target: self.target.clone(),
            map: self.map.compose(&inner.map)?,
        })
    }

    pub fn as_free(&self) -> FreeMap {
        FreeMap {
            source: self.source.clone(),
            target: self.target.clone(),
            map: self.map.clone(),
        }
    }
}

/// A homogeneous map with no compatibility condition with the differentials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeMap {
    source: Complex,
    target: Complex,
    map: GradedMap,
}

impl FreeMap {
    pub fn new(source: Complex, target: Complex, map: GradedMap) -> Result<Self> {
        let map = map.with_spaces(source.space.clone(), target.space.clone())?;
        Ok(FreeMap {
            source,
            target,
            map,
        })
    }

    pub fn source(&self) -> &Complex {
        &self.source
    }

    pub fn target(&self) -> &Complex {
        &self.target
    }

    pub fn map(&self) -> &GradedMap {
        &self.map
    }

    pub fn degree(&self) -> i32 {
        self.map.degree()
    }

    /// `[∂,f]`, a map of degree `deg f + 1`.
    pub fn commutator(&self) -> GradedMap {
        commutator(&self.map, &self.source, &self.target).expect("shapes already validated")
    }

    pub fn is_chain(&self) -> bool {
        self.commutator().is_zero()
    }

    pub fn into_chain(self) -> Result<ChainMap> {
        ChainMap::new(self.source, self.target, self.map)
    }
}

/// `[∂,h] = ∂_Y h - (-1)^{|h|} h ∂_X` for `h: X → Y`.
pub fn commutator(h: &GradedMap, x: &Complex, y: &Complex) -> Result<GradedMap> {
    let left = y.d.compose(h)?;
    let right = h.compose(&x.d)?;
    left.sub(&right.scale(&sign(h.degree() % 2 != 0)))
}

/// Koszul-signed tensor product of complexes.
pub fn tensor(x: &Complex, y: &Complex) -> Complex {
    let space = Arc::new(GradedSpace::tensor(&x.space, &y.space));
    let dy = y.space.dim();
    let mut cols = Vec::with_capacity(space.dim());
    for i in 0..x.dim() {
        let s = sign(x.space.degree(i) % 2 != 0);
        for j in 0..dy {
            let mut v = SparseVec::new();
            for (k, c) in x.d.col(i).iter() {
                v.add_at(k * dy + j, c);
            }
            for (k, c) in y.d.col(j).iter() {
                v.add_at(i * dy + k, &(c * &s));
            }
            cols.push(v);
        }
    }
    let d = GradedMap::new_unchecked(space.clone(), space.clone(), 1, cols);
    Complex { space, d }
}

pub fn tensor_within(x: &Complex, y: &Complex, window: &DegreeWindow) -> Result<Complex> {
    let t = tensor(x, y);
    window.admit(&t.space, "tensor product")?;
    Ok(t)
}

/// Iterated tensor product; the empty product is the unit.
pub fn tensor_power(factors: &[&Complex]) -> Complex {
    let mut out = Complex::unit();
    for (k, f) in factors.iter().enumerate() {
        out = if k == 0 { (*f).clone() } else { tensor(&out, f) };
    }
    out
}

/// `f ⊗ g` with the Koszul rule `(f⊗g)(x⊗y) = (-1)^{|g||x|} f(x)⊗g(y)`.
pub fn tensor_maps(f: &GradedMap, g: &GradedMap) -> GradedMap {
    let src = Arc::new(GradedSpace::tensor(f.source(), g.source()));
    let tgt = Arc::new(GradedSpace::tensor(f.target(), g.target()));
    let gt = g.target().dim();
    let odd_g = g.degree() % 2 != 0;
    let mut cols = Vec::with_capacity(src.dim());
    for i in 0..f.source().dim() {
        let s = sign(odd_g && f.source().degree(i) % 2 != 0);
        for jc in g.cols() {
            let mut v = SparseVec::new();
            for (a, x) in f.col(i).iter() {
                for (b, y) in jc.iter() {
                    v.add_at(a * gt + b, &(x * y * &s));
                }
            }
            cols.push(v);
        }
    }
    GradedMap::new_unchecked(src, tgt, f.degree() + g.degree(), cols)
}

/// The symmetry `X⊗Y → Y⊗X`.
pub fn braiding(x: &Complex, y: &Complex) -> ChainMap {
    let src = tensor(x, y);
    let tgt = tensor(y, x);
    let (dx, dy) = (x.dim(), y.dim());
    let cols = (0..dx * dy)
        .map(|k| {
            let (i, j) = (k / dy, k % dy);
            let odd = x.space.degree(i) % 2 != 0 && y.space.degree(j) % 2 != 0;
            SparseVec::from_pairs([(j * dx + i, sign(odd))])
        })
        .collect();
    let map = GradedMap::new_unchecked(src.space.clone(), tgt.space.clone(), 0, cols);
    ChainMap {
        source: src,
        target: tgt,
        map,
    }
}

/// Inner hom `[Y,Z]`; the basis vector `i * dim Z + j` is the elementary map
/// sending `y_i` to `z_j`, of degree `|z_j| - |y_i|`.
pub fn inner_hom(y: &Complex, z: &Complex) -> Complex {
    let dz = z.dim();
    let mut basis = Vec::with_capacity(y.dim() * dz);
    for i in 0..y.dim() {
        for j in 0..dz {
            basis.push(crate::linalg::Basis::new(
                z.space.degree(j) - y.space.degree(i),
                0,
                format!("[{}→{}]", y.space.label(i), z.space.label(j)),
            ));
        }
    }
    let space = Arc::new(GradedSpace::new(basis));
    let dyt = y.d.transpose();
    let mut cols = Vec::with_capacity(space.dim());
    for i in 0..y.dim() {
        for j in 0..dz {
            let n = z.space.degree(j) - y.space.degree(i);
            let s = sign(n % 2 != 0);
            let mut v = SparseVec::new();
            for (k, c) in z.d.col(j).iter() {
                v.add_at(i * dz + k, c);
            }
            // (E_{j←i} ∘ ∂_Y) sends y_l to (∂_Y)_{il} z_j
            for (l, c) in dyt.col(i).iter() {
                v.add_at(l * dz + j, &-(c * &s));
            }
            cols.push(v);
        }
    }
    let d = GradedMap::new_unchecked(space.clone(), space.clone(), 1, cols);
    Complex { space, d }
}

pub fn inner_hom_within(y: &Complex, z: &Complex, window: &DegreeWindow) -> Result<Complex> {
    let h = inner_hom(y, z);
    window.admit(&h.space, "inner hom")?;
    Ok(h)
}

/// Coordinates of a homogeneous map in the basis of `inner_hom`.
pub fn hom_element(f: &GradedMap) -> SparseVec {
    let dz = f.target().dim();
    let mut v = SparseVec::new();
    for (i, c) in f.cols().iter().enumerate() {
        for (j, x) in c.iter() {
            v.add_at(i * dz + j, x);
        }
    }
    v
}

/// Inverse of `hom_element` for a vector of homogeneous degree `degree`.
pub fn hom_map(
    v: &SparseVec,
    y: Arc<GradedSpace>,
    z: Arc<GradedSpace>,
    degree: i32,
) -> Result<GradedMap> {
    let dz = z.dim();
    let mut cols = vec![SparseVec::new(); y.dim()];
    for (k, c) in v.iter() {
        cols[k / dz].add_at(k % dz, c);
    }
    GradedMap::new(y, z, degree, cols)
}

/// Cohomology dimensions per degree (zero entries omitted).
pub fn cohomology_dims(x: &Complex) -> BTreeMap<i32, usize> {
    let k = kernel(&x.d);
    let mut out = BTreeMap::new();
    for deg in x.space.dims().into_keys() {
        let z = k.dim_in(deg);
        let b = x.d.rank_in(deg - 1);
        if z > b {
            out.insert(deg, z - b);
        }
    }
    out
}

/// Cohomology as a graded space, one basis vector per class.
pub fn cohomology(x: &Complex) -> GradedSpace {
    let mut basis = Vec::new();
    for (deg, n) in cohomology_dims(x) {
        for k in 0..n {
            basis.push(crate::linalg::Basis::new(deg, 0, format!("h{deg}_{k}")));
        }
    }
    GradedSpace::new(basis)
}

/// The mapping cone of a degree-0 chain map `f: E' → E`.
#[derive(Clone, Debug)]
pub struct Cone {
    pub complex: Complex,
    /// `E → cone(f)`, `j ↦ (0, j)`.
    pub inclusion: ChainMap,
    /// `cone(f) → E'[1]`, `(p, j) ↦ p`.
    pub projection: FreeMap,
}

/// `cone(f)^n = E'^{n+1} ⊕ E^n` with `∂(p, j) = (-∂p, f(p) + ∂j)`.
pub fn cone(f: &ChainMap) -> Result<Cone> {
    if f.degree() != 0 {
        return Err(Error::Dimension("cone needs a degree-0 chain map".into()));
    }
    let src = f.source();
    let tgt = f.target();
    let shifted = src.shift(1);
    let (space, offs) = GradedSpace::direct_sum(&[&shifted.space, &tgt.space]);
    let space = Arc::new(space);
    let off = offs[1];
    let mut cols = Vec::with_capacity(space.dim());
    for i in 0..src.dim() {
        let mut v = src.d.col(i).neg();
        for (k, c) in f.map.col(i).iter() {
            v.add_at(off + k, c);
        }
        cols.push(v);
    }
    for j in 0..tgt.dim() {
        cols.push(tgt.d.col(j).reindex(|k| Some(off + k)));
    }
    let complex = Complex::new(space.clone(), GradedMap::new(space.clone(), space.clone(), 1, cols)?)?;
    let inc = GradedMap::new(
        tgt.space.clone(),
        space.clone(),
        0,
        (0..tgt.dim()).map(|j| SparseVec::unit(off + j)).collect(),
    )?;
    let proj = GradedMap::new(
        space.clone(),
        shifted.space.clone(),
        0,
        (0..space.dim())
            .map(|k| if k < off { SparseVec::unit(k) } else { SparseVec::new() })
            .collect(),
    )?;
    Ok(Cone {
        inclusion: ChainMap::new(tgt.clone(), complex.clone(), inc)?,
        projection: FreeMap::new(complex.clone(), shifted, proj)?,
        complex,
    })
}

/// A degree-0 chain map is a quasi-isomorphism iff its cone is acyclic.
pub fn is_quasi_iso(f: &ChainMap) -> Result<bool> {
    Ok(cone(f)?.complex.is_acyclic())
}

/// Some `h` of degree `deg f - 1` with `[∂,h] = f`, if one exists.
pub fn null_homotopy(f: &GradedMap, x: &Complex, y: &Complex) -> Option<GradedMap> {
    null_homotopy_constrained(f, x, y, |_| {})
}

/// As `null_homotopy`, with extra linear constraints on the unknown
/// entries of `h` (indexed as in `map_unknowns`).
pub fn null_homotopy_constrained(
    f: &GradedMap,
    x: &Complex,
    y: &Complex,
    extra: impl FnOnce(&mut HomotopySystem),
) -> Option<GradedMap> {
    let deg = f.degree() - 1;
    let unknowns = map_unknowns(&x.space, &y.space, deg);
    let mut sys = HomotopySystem {
        unknowns,
        builder: SystemBuilder::new(0),
        extra_rows: 0,
    };
    sys.builder = SystemBuilder::new(sys.unknowns.len());
    let s = sign(deg % 2 != 0);
    let dxt = x.d.transpose();
    for (u, &(j, i)) in sys.unknowns.clone().iter().enumerate() {
        // ∂_Y E_{j←i}: y_i ↦ ∂z_j
        for (k, c) in y.d.col(j).iter() {
            sys.builder.add_term((0, k, i), u, c);
        }
        // E_{j←i} ∂_X: x_l ↦ (∂_X)_{il} y_j
        for (l, c) in dxt.col(i).iter() {
            sys.builder.add_term((0, j, l), u, &-(c * &s));
        }
    }
    for (i, col) in f.cols().iter().enumerate() {
        for (j, c) in col.iter() {
            sys.builder.add_rhs((0, j, i), c);
        }
    }
    extra(&mut sys);
    let sol = sys.builder.build().solve()?;
    Some(map_from_unknowns(
        x.space.clone(),
        y.space.clone(),
        deg,
        &sys.unknowns,
        &sol,
    ))
}

/// Equation system for a null-homotopy search; callers may append rows.
pub struct HomotopySystem {
    pub unknowns: Vec<(usize, usize)>,
    builder: SystemBuilder<(usize, usize, usize)>,
    extra_rows: usize,
}

impl HomotopySystem {
    /// Appends the constraint `Σ coeffs·h = rhs`.
    pub fn add_constraint(&mut self, coeffs: &[(usize, Rational)], rhs: &Rational) {
        self.extra_rows += 1;
        let key = (1, self.extra_rows, 0);
        for (u, c) in coeffs {
            self.builder.add_term(key, *u, c);
        }
        self.builder.add_rhs(key, rhs);
    }
}

/// Number of linearly independent degree-`d` chain maps `X → Y`.
pub fn chain_map_dim(x: &Complex, y: &Complex, degree: i32) -> usize {
    let unknowns = map_unknowns(&x.space, &y.space, degree);
    let mut b = SystemBuilder::<(usize, usize)>::new(unknowns.len());
    let s = sign(degree % 2 != 0);
    let dxt = x.d.transpose();
    for (u, &(j, i)) in unknowns.iter().enumerate() {
        for (k, c) in y.d.col(j).iter() {
            b.add_term((k, i), u, c);
        }
        for (l, c) in dxt.col(i).iter() {
            b.add_term((j, l), u, &-(c * &s));
        }
    }
    b.build().nullity()
}

/// Extension class data of a degreewise-split short exact sequence.
#[derive(Clone, Debug)]
pub struct ExtensionClass {
    /// Degree-1 chain map `E'' → E'`, i.e. a chain map `E'' → E'[1]`.
    pub class: GradedMap,
    /// The degreewise section `E'' → E` used.
    pub section: GradedMap,
}

/// Checks degreewise exactness of `E' --i--> E --p--> E''`.
pub fn check_exact(i: &ChainMap, p: &ChainMap) -> Result<()> {
    if i.degree() != 0 || p.degree() != 0 {
        return Err(Error::NotExact("maps must have degree 0".into()));
    }
    if !p.map.compose(&i.map)?.is_zero() {
        return Err(Error::NotExact("composite is not zero".into()));
    }
    let e = i.target();
    for (deg, n) in e.space.dims() {
        let ri = i.map.rank_in(deg);
        let rp = p.map.rank_in(deg);
        if ri != i.source().space.dim_in(deg) {
            return Err(Error::NotExact(format!("first map not injective in degree {deg}")));
        }
        if rp != p.target().space.dim_in(deg) {
            return Err(Error::NotExact(format!("second map not surjective in degree {deg}")));
        }
        if ri + rp != n {
            return Err(Error::NotExact(format!("not exact in the middle in degree {deg}")));
        }
    }
    for (deg, n) in p.target().space.dims() {
        if e.space.dim_in(deg) < n {
            return Err(Error::NotExact(format!("second map not surjective in degree {deg}")));
        }
    }
    Ok(())
}

/// `∂_E s - s ∂_{E''}`, corestricted along `i`, for the pivot-chosen section.
pub fn extension_class(i: &ChainMap, p: &ChainMap) -> Result<ExtensionClass> {
    check_exact(i, p)?;
    let id = GradedMap::identity(p.target().space.clone());
    let section = solve_map(&p.map, &id)
        .ok_or_else(|| Error::NotExact("no degreewise section".into()))?;
    extension_class_with_section(i, p, &section)
}

pub fn extension_class_with_section(
    i: &ChainMap,
    p: &ChainMap,
    section: &GradedMap,
) -> Result<ExtensionClass> {
    check_exact(i, p)?;
    let section = section.with_spaces(p.target().space.clone(), i.target().space.clone())?;
    if p.map.compose(&section)? != GradedMap::identity(p.target().space.clone()) {
        return Err(Error::NotExact("given map is not a section".into()));
    }
    let defect = commutator(&section, p.target(), i.target())?;
    let class = solve_map(&i.map, &defect)
        .ok_or_else(|| Error::NotExact("defect does not land in the kernel".into()))?;
    Ok(ExtensionClass { class, section })
}

/// `true` iff `v` is a sum of the listed vectors scaled by rationals; a tiny
/// convenience for tests that compare classes.
pub fn is_identity(f: &GradedMap) -> bool {
    f.source().same_shape(f.target())
        && f.cols()
            .iter()
            .enumerate()
            .all(|(i, c)| c.nnz() == 1 && c.get(i) == Rational::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{q, Basis};

    /// `e0 → e1` with the identity as differential.
    fn two_term() -> Complex {
        let s = Arc::new(GradedSpace::from_dims(&[(0, 1), (1, 1)]));
        let d = GradedMap::new(s.clone(), s.clone(), 1, vec![SparseVec::unit(1), SparseVec::new()]).unwrap();
        Complex::new(s, d).unwrap()
    }

    fn point(deg: i32) -> Complex {
        Complex::zero_differential(Arc::new(GradedSpace::from_dims(&[(deg, 1)])))
    }

    #[test]
    fn unit_law_for_tensor() {
        let x = two_term();
        let t = tensor(&Complex::unit(), &x);
        assert_eq!(t.differential().cols(), x.differential().cols());
        assert!(t.space().same_shape(x.space()));
    }

    #[test]
    fn tensor_of_two_term_is_acyclic() {
        let x = two_term();
        let t = tensor(&x, &x);
        assert!(t.squares_to_zero());
        assert_eq!(t.space().dims(), BTreeMap::from([(0, 1), (1, 2), (2, 1)]));
        assert!(t.is_acyclic());
    }

    #[test]
    fn second_factor_sign_on_odd_first_factor() {
        let x = point(1);
        let y = two_term();
        let t = tensor(&x, &y);
        // x ⊗ e0 ↦ -x ⊗ e1
        assert_eq!(t.differential().col(0), &SparseVec::from_pairs([(1, q(-1))]));
    }

    #[test]
    fn braiding_signs_and_involution() {
        let a = point(0);
        let b = point(0);
        assert_eq!(braiding(&a, &b).map().col(0), &SparseVec::unit(0));
        let x = point(1);
        let y = point(1);
        assert_eq!(braiding(&x, &y).map().col(0), &SparseVec::from_pairs([(0, q(-1))]));
        let u = two_term();
        let v = Complex::zero_differential(Arc::new(GradedSpace::from_dims(&[(0, 1), (1, 2)])));
        let there = braiding(&u, &v);
        let back = braiding(&v, &u);
        assert!(ChainMap::new(there.source().clone(), there.target().clone(), there.map().clone()).is_ok());
        assert!(is_identity(back.compose(&there).unwrap().map()));
    }

    #[test]
    fn inner_hom_unit_and_identity_cycle() {
        let z = two_term();
        let h = inner_hom(&Complex::unit(), &z);
        assert_eq!(h.differential().cols(), z.differential().cols());
        let e = inner_hom(&z, &z);
        assert!(e.squares_to_zero());
        let id = hom_element(&GradedMap::identity(z.space().clone()));
        assert!(e.differential().apply(&id).is_zero());
    }

    #[test]
    fn tensor_hom_adjunction_counts() {
        let x = Complex::zero_differential(Arc::new(GradedSpace::from_dims(&[(0, 1), (1, 1)])));
        let y = two_term();
        let z = Complex::zero_differential(Arc::new(GradedSpace::from_dims(&[(0, 1), (1, 2)])));
        let lhs = chain_map_dim(&tensor(&x, &y), &z, 0);
        let rhs = chain_map_dim(&x, &inner_hom(&y, &z), 0);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn cohomology_examples() {
        let s = Arc::new(GradedSpace::from_dims(&[(0, 2), (1, 1)]));
        let z = Complex::zero_differential(s.clone());
        assert_eq!(cohomology(&z).dims(), s.dims());
        assert!(two_term().is_acyclic());
    }

    #[test]
    fn quasi_iso_of_cycle_inclusion() {
        // 0 → a → b → c with ∂a = b, ∂b = 0: H is spanned by c in degree 2.
        let s = Arc::new(GradedSpace::from_dims(&[(0, 1), (1, 1), (2, 1)]));
        let d = GradedMap::new(s.clone(), s.clone(), 1, vec![SparseVec::unit(1), SparseVec::new(), SparseVec::new()]).unwrap();
        let x = Complex::new(s.clone(), d).unwrap();
        let c = point(2);
        let inc = GradedMap::new(c.space().clone(), s.clone(), 0, vec![SparseVec::unit(2)]).unwrap();
        assert!(is_quasi_iso(&ChainMap::new(c.clone(), x.clone(), inc).unwrap()).unwrap());
        let b = point(1);
        let incb = GradedMap::new(b.space().clone(), s, 0, vec![SparseVec::unit(1)]).unwrap();
        assert!(!is_quasi_iso(&ChainMap::new(b, x, incb).unwrap()).unwrap());
    }

    #[test]
    fn cone_examples() {
        let x = two_term();
        let id = ChainMap::identity(&x);
        assert!(cone(&id).unwrap().complex.is_acyclic());
        let y = Complex::zero_differential(Arc::new(GradedSpace::from_dims(&[(0, 1), (1, 1)])));
        let zero = ChainMap::new(y.clone(), y.clone(), GradedMap::zero(y.space().clone(), y.space().clone(), 0)).unwrap();
        let c = cone(&zero).unwrap();
        assert_eq!(cohomology_dims(&c.complex), BTreeMap::from([(-1, 1), (0, 2), (1, 1)]));
        // point(1) → two_term, the inclusion of e1: cokernel is point(0)
        let p = point(1);
        let f = GradedMap::new(p.space().clone(), x.space().clone(), 0, vec![SparseVec::unit(1)]).unwrap();
        let cf = cone(&ChainMap::new(p, x, f).unwrap()).unwrap();
        assert_eq!(cohomology_dims(&cf.complex), BTreeMap::from([(0, 1)]));
    }

    #[test]
    fn null_homotopy_examples() {
        let x = two_term();
        let z = GradedMap::zero(x.space().clone(), x.space().clone(), 0);
        assert!(null_homotopy(&z, &x, &x).unwrap().is_zero());
        let d = x.differential().clone();
        let h = null_homotopy(&d, &x, &x).unwrap();
        assert_eq!(commutator(&h, &x, &x).unwrap(), d);
        let y = Complex::zero_differential(Arc::new(GradedSpace::from_dims(&[(0, 2)])));
        let id = GradedMap::identity(y.space().clone());
        assert!(null_homotopy(&id, &y, &y).is_none());
    }

    #[test]
    fn extension_class_examples() {
        let e = two_term();
        let sub = point(1);
        let quo = point(0);
        let i = ChainMap::new(
            sub.clone(),
            e.clone(),
            GradedMap::new(sub.space().clone(), e.space().clone(), 0, vec![SparseVec::unit(1)]).unwrap(),
        )
        .unwrap();
        let p = ChainMap::new(
            e.clone(),
            quo.clone(),
            GradedMap::new(e.space().clone(), quo.space().clone(), 0, vec![SparseVec::unit(0), SparseVec::new()]).unwrap(),
        )
        .unwrap();
        let ext = extension_class(&i, &p).unwrap();
        assert_eq!(ext.class.col(0), &SparseVec::unit(0));
        assert!(null_homotopy(&ext.class, &quo, &sub).is_none());

        // split sequence: point(0) → point(0) ⊕ point(0) → point(0)
        let a = point(0);
        let s2 = Complex::zero_differential(Arc::new(GradedSpace::new(vec![Basis::new(0, 0, "a"), Basis::new(0, 0, "b")])));
        let i2 = ChainMap::new(a.clone(), s2.clone(), GradedMap::new(a.space().clone(), s2.space().clone(), 0, vec![SparseVec::unit(0)]).unwrap()).unwrap();
        let p2 = ChainMap::new(s2.clone(), a.clone(), GradedMap::new(s2.space().clone(), a.space().clone(), 0, vec![SparseVec::new(), SparseVec::unit(0)]).unwrap()).unwrap();
        assert!(extension_class(&i2, &p2).unwrap().class.is_zero());

        let bad = ChainMap::new(s2.clone(), a.clone(), GradedMap::zero(s2.space().clone(), a.space().clone(), 0)).unwrap();
        assert!(matches!(extension_class(&i2, &bad), Err(Error::NotExact(_))));
    }

    #[test]
    fn two_sections_give_homotopic_classes() {
        // E: a, b in degree 0 and c, e in degree 1 with ∂a = c, ∂b = e;
        // E' = span(b, c, e), E'' = span(a)
        let s = Arc::new(GradedSpace::from_dims(&[(0, 2), (1, 2)]));
        let d = GradedMap::new(
            s.clone(),
            s.clone(),
            1,
            vec![SparseVec::unit(2), SparseVec::unit(3), SparseVec::new(), SparseVec::new()],
        )
        .unwrap();
        let e = Complex::new(s.clone(), d).unwrap();
        let ss = Arc::new(GradedSpace::from_dims(&[(0, 1), (1, 2)]));
        let sd = GradedMap::new(ss.clone(), ss.clone(), 1, vec![SparseVec::unit(2), SparseVec::new(), SparseVec::new()]).unwrap();
        let sub = Complex::new(ss.clone(), sd).unwrap();
        let quo = point(0);
        let i = ChainMap::new(
            sub.clone(),
            e.clone(),
            GradedMap::new(ss, s.clone(), 0, vec![SparseVec::unit(1), SparseVec::unit(2), SparseVec::unit(3)]).unwrap(),
        )
        .unwrap();
        let p = ChainMap::new(
            e.clone(),
            quo.clone(),
            GradedMap::new(s.clone(), quo.space().clone(), 0, vec![SparseVec::unit(0), SparseVec::new(), SparseVec::new(), SparseVec::new()]).unwrap(),
        )
        .unwrap();
        let c1 = extension_class(&i, &p).unwrap();
        let other = GradedMap::new(
            quo.space().clone(),
            s,
            0,
            vec![SparseVec::from_pairs([(0, q(1)), (1, q(3))])],
        )
        .unwrap();
        let c2 = extension_class_with_section(&i, &p, &other).unwrap();
        let diff = c1.class.sub(&c2.class).unwrap();
        assert!(!diff.is_zero());
        let h = null_homotopy(&diff, &quo, &sub).unwrap();
        assert_eq!(commutator(&h, &quo, &sub).unwrap(), diff);
    }
}
