//! Modules over an operad algebra: free modules, lax products, symmetric
//! products, lax homs, free `A`-algebras, derivations and Kähler
//! differentials.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_traits::{One, Zero};

use crate::algebra::{envelope_spec, expand, hole, OperadAlgebra};
use crate::complexes::Complex;
use crate::error::{Error, Result};
use crate::lax::{add_word, add_words, Fed, Image, Lax, ModuleAction, SlotKind, SlotType, Word, WordVec};
use crate::linalg::{
    map_from_unknowns, map_unknowns_weighted, quotient, sign, Basis, GradedMap, GradedSpace, LinearSystem,
    Rational, SparseVec, Subspace, SystemBuilder,
};
use crate::operad::AxiomReport;
use crate::perm::Permutation;

fn odd(a: i32, b: i32) -> bool {
    a % 2 != 0 && b % 2 != 0
}

/// `ν(p; c_1..c_k; y)` on basis elements, `p ∈ O(k+1)`.
pub type ActionFn = dyn Fn(usize, &[usize], usize) -> Result<SparseVec> + Send + Sync;

#[derive(Clone)]
pub enum ModuleKind {
    /// The algebra acting on itself.
    SelfModule,
    /// Spanned by words; the algebra acts by composition.
    Words(Arc<Lax>),
    Custom(Arc<ActionFn>),
}

/// A module over an operad algebra.
#[derive(Clone)]
pub struct AModule {
    name: String,
    algebra: Arc<OperadAlgebra>,
    carrier: Complex,
    kind: ModuleKind,
    weight_cap: Option<u32>,
    free_over: Option<Complex>,
    cache: Arc<Mutex<HashMap<(usize, Vec<usize>, usize), SparseVec>>>,
}

impl fmt::Debug for AModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AModule({} over {}, dim {})", self.name, self.algebra.name(), self.carrier.dim())
    }
}

impl AModule {
    pub fn over_itself(a: &Arc<OperadAlgebra>) -> Arc<AModule> {
        Arc::new(AModule {
            name: a.name().to_string(),
            algebra: a.clone(),
            carrier: a.carrier().clone(),
            kind: ModuleKind::SelfModule,
            weight_cap: a.weight_cap(),
            free_over: None,
            cache: Default::default(),
        })
    }

    pub fn from_words(name: impl Into<String>, a: &Arc<OperadAlgebra>, lax: Arc<Lax>) -> Arc<AModule> {
        Arc::new(AModule {
            name: name.into(),
            algebra: a.clone(),
            carrier: lax.carrier().clone(),
            weight_cap: Some(lax.weight_cap()),
            kind: ModuleKind::Words(lax),
            free_over: None,
            cache: Default::default(),
        })
    }

    /// A module given by its action on basis elements.
    pub fn from_fn(
        name: impl Into<String>,
        a: &Arc<OperadAlgebra>,
        carrier: Complex,
        weight_cap: Option<u32>,
        f: Arc<ActionFn>,
    ) -> Arc<AModule> {
        Arc::new(AModule {
            name: name.into(),
            algebra: a.clone(),
            carrier,
            kind: ModuleKind::Custom(f),
            weight_cap,
            free_over: None,
            cache: Default::default(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn algebra(&self) -> &Arc<OperadAlgebra> {
        &self.algebra
    }

    pub fn carrier(&self) -> &Complex {
        &self.carrier
    }

    pub fn dim(&self) -> usize {
        self.carrier.dim()
    }

    pub fn kind(&self) -> &ModuleKind {
        &self.kind
    }

    pub fn words(&self) -> Option<&Arc<Lax>> {
        match &self.kind {
            ModuleKind::Words(l) => Some(l),
            _ => None,
        }
    }

    pub fn weight_cap(&self) -> Option<u32> {
        self.weight_cap
    }

    /// The complex `W` when this is the free module `F_A(W)`.
    pub fn free_over(&self) -> Option<&Complex> {
        self.free_over.as_ref()
    }

    /// `ν(p; c_1..c_k; y)` on basis elements, `p ∈ O(k+1)`.
    pub fn act_basis(&self, p: usize, cs: &[usize], y: usize) -> Result<SparseVec> {
        let key = (p, cs.to_vec(), y);
        if let Some(v) = self.cache.lock().expect("cache").get(&key) {
            return Ok(v.clone());
        }
        let v = match &self.kind {
            ModuleKind::SelfModule => {
                let mut all = cs.to_vec();
                all.push(y);
                self.algebra.mult_basis(cs.len() + 1, p, &all)?
            }
            ModuleKind::Words(l) => l.act(p, cs, y)?,
            ModuleKind::Custom(f) => f(p, cs, y)?,
        };
        self.cache.lock().expect("cache").insert(key, v.clone());
        Ok(v)
    }

    /// `ν(p; c; y)`, multilinearly.
    pub fn act(&self, p: &SparseVec, cs: &[SparseVec], y: &SparseVec) -> Result<SparseVec> {
        let mut out = SparseVec::new();
        for (pi, pc) in p.iter() {
            for (c, idx) in expand(cs) {
                for (yi, yc) in y.iter() {
                    out.add_scaled(&self.act_basis(pi, &idx, yi)?, &(pc * &c * yc));
                }
            }
        }
        Ok(out)
    }
}

impl ModuleAction for AModule {
    fn carrier(&self) -> &Complex {
        &self.carrier
    }

    fn act_gens(&self, p: usize, gens: &[u32], y: usize) -> Result<SparseVec> {
        let elems = self.algebra.generators();
        let cs: Vec<SparseVec> = gens.iter().map(|&g| elems[g as usize].clone()).collect();
        self.act(&SparseVec::unit(p), &cs, &SparseVec::unit(y))
    }
}

/// Tuples of algebra inputs used to test linearity: generator multisets
/// when the algebra is presented, basis tuples otherwise. Each comes with
/// its total degree and weight.
pub(crate) fn probe_inputs(a: &OperadAlgebra, max_inputs: usize, budget: u32) -> Vec<(Vec<SparseVec>, i32, u32)> {
    let (elems, degs, wts): (Vec<SparseVec>, Vec<i32>, Vec<u32>) = match a.presentation() {
        Ok(p) => (p.gen_elems.clone(), p.degree.clone(), p.weight.clone()),
        Err(_) => {
            let sp = a.carrier().space();
            (
                (0..sp.dim()).map(SparseVec::unit).collect(),
                (0..sp.dim()).map(|i| sp.degree(i)).collect(),
                (0..sp.dim()).map(|i| sp.weight(i)).collect(),
            )
        }
    };
    let mut out = Vec::new();
    fn rec(
        n: usize,
        from: usize,
        max: usize,
        budget: u32,
        wts: &[u32],
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        out.push(cur.clone());
        if cur.len() == max {
            return;
        }
        for g in from..n {
            if wts[g] <= budget {
                cur.push(g);
                rec(n, g, max, budget - wts[g], wts, cur, out);
                cur.pop();
            }
        }
    }
    let mut idx = Vec::new();
    rec(elems.len(), 0, max_inputs, budget, &wts, &mut Vec::new(), &mut idx);
    for t in idx {
        let d = t.iter().map(|&g| degs[g]).sum();
        let w = t.iter().map(|&g| wts[g]).sum();
        out.push((t.iter().map(|&g| elems[g].clone()).collect(), d, w));
    }
    out
}

/// Exhaustive check of the module axioms for algebra inputs up to
/// `max_inputs`: unit, equivariance, both associativity diagrams (insertion
/// into an algebra input and into the module input) and the differential.
pub fn check_module(e: &AModule, max_inputs: usize) -> AxiomReport {
    let mut r = AxiomReport::default();
    if let Err(err) = check_module_into(e, max_inputs, &mut r) {
        r.fail("module.evaluation", &[], err.to_string());
    }
    r
}

fn check_module_into(e: &AModule, max_inputs: usize, r: &mut AxiomReport) -> Result<()> {
    let a = e.algebra();
    let op = a.operad();
    let cap = op.arity_cap();
    let max_k = max_inputs.min(cap - 1);
    let asp = a.carrier().space();
    let esp = e.carrier().space();
    let wcap = e.weight_cap().unwrap_or(u32::MAX);
    let dim = e.dim();
    let unit = |i: usize| SparseVec::unit(i);
    for y in 0..dim {
        let v = e.act(op.unit(), &[], &unit(y))?;
        r.check(v == unit(y), "module.unit", &[y], || "ν(η; y) ≠ y".into());
    }
    let tuples_of = |k: usize| crate::algebra::tuples(a.dim(), k);
    for k in 0..=max_k {
        for cs in tuples_of(k) {
            let cdeg: Vec<i32> = cs.iter().map(|&c| asp.degree(c)).collect();
            let cw: u32 = cs.iter().map(|&c| asp.weight(c)).sum();
            if cw > wcap {
                continue;
            }
            let cvec: Vec<SparseVec> = cs.iter().map(|&c| unit(c)).collect();
            for p in 0..op.dim(k + 1) {
                for y in 0..dim {
                    let base = e.act_basis(p, &cs, y)?;
                    for i in 0..k.saturating_sub(1) {
                        let ps = op.act_generator_basis(k + 1, p, i);
                        let mut sw = cs.clone();
                        sw.swap(i, i + 1);
                        let lhs = e.act(&ps, &cvec, &unit(y))?;
                        let rhs = e.act_basis(p, &sw, y)?.scaled(&sign(odd(cdeg[i], cdeg[i + 1])));
                        r.check(lhs == rhs, "module.equivariance", &[k, p, i], || format!("at {cs:?}, {y}"));
                    }
                    // differential
                    let lhs = e.carrier().differential().apply(&base);
                    let dp = op.components()[k + 1].differential().apply(&unit(p));
                    let mut rhs = e.act(&dp, &cvec, &unit(y))?;
                    let mut before = op.degree(k + 1, p);
                    for i in 0..k {
                        let mut ys = cvec.clone();
                        ys[i] = a.carrier().differential().col(cs[i]).clone();
                        rhs.add_scaled(&e.act(&unit(p), &ys, &unit(y))?, &sign(before % 2 != 0));
                        before += cdeg[i];
                    }
                    let dy = e.carrier().differential().col(y).clone();
                    rhs.add_scaled(&e.act(&unit(p), &cvec, &dy)?, &sign(before % 2 != 0));
                    r.check(lhs == rhs, "module.differential", &[k, p, y], || format!("at {cs:?}"));
                }
            }
        }
    }
    // associativity: p ∈ O(n+1) with q inserted at an algebra input or at the module input
    for n in 0..=max_k {
        for l in 0..=max_k {
            // insertion at an algebra input i < n of q ∈ O(l)
            let m = (n + l).saturating_sub(1);
            if n >= 1 && m <= max_k {
                for cs in tuples_of(m) {
                    let cw: u32 = cs.iter().map(|&c| asp.weight(c)).sum();
                    if cw > wcap {
                        continue;
                    }
                    let cdeg: Vec<i32> = cs.iter().map(|&c| asp.degree(c)).collect();
                    let cvec: Vec<SparseVec> = cs.iter().map(|&c| unit(c)).collect();
                    for y in 0..dim {
                        if cw + esp.weight(y) > wcap {
                            continue;
                        }
                        for p in 0..op.dim(n + 1) {
                            for q in 0..op.dim(l) {
                                for i in 0..n {
                                    let comp = op.partial_basis(n + 1, p, i, l, q)?;
                                    let lhs = e.act(&comp, &cvec, &unit(y))?;
                                    let inner = a.mult_basis(l, q, &cs[i..i + l])?;
                                    let mut ys: Vec<SparseVec> = cvec[..i].to_vec();
                                    ys.push(inner);
                                    ys.extend_from_slice(&cvec[i + l..]);
                                    let before: i32 = cdeg[..i].iter().sum();
                                    let rhs = e.act(&unit(p), &ys, &unit(y))?.scaled(&sign(odd(op.degree(l, q), before)));
                                    r.check(lhs == rhs, "module.associativity.inner", &[n, p, i, l, q], || {
                                        format!("at {cs:?}, {y}")
                                    });
                                }
                            }
                        }
                    }
                }
            }
            // insertion at the module input of q ∈ O(l+1)
            if n + l <= max_k {
                for cs in tuples_of(n + l) {
                    let cw: u32 = cs.iter().map(|&c| asp.weight(c)).sum();
                    if cw > wcap {
                        continue;
                    }
                    let cdeg: i32 = cs[..n].iter().map(|&c| asp.degree(c)).sum();
                    for y in 0..dim {
                        if cw + esp.weight(y) > wcap {
                            continue;
                        }
                        for p in 0..op.dim(n + 1) {
                            for q in 0..op.dim(l + 1) {
                                let comp = op.partial_basis(n + 1, p, n, l + 1, q)?;
                                let cvec: Vec<SparseVec> = cs.iter().map(|&c| unit(c)).collect();
                                let lhs = e.act(&comp, &cvec, &unit(y))?;
                                let inner = e.act_basis(q, &cs[n..], y)?;
                                let rhs = e
                                    .act(&unit(p), &cvec[..n], &inner)?
                                    .scaled(&sign(odd(op.degree(l + 1, q), cdeg)));
                                r.check(lhs == rhs, "module.associativity.outer", &[n, p, l, q], || {
                                    format!("at {cs:?}, {y}")
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// Basis of the weight-preserving `A`-linear chain maps `M → N` of the
/// given degree. Linearity is imposed for up to `max_inputs` generators,
/// and only where both sides lie within the weight caps.
pub fn module_maps(m: &AModule, n: &AModule, degree: i32, max_inputs: usize) -> Result<Vec<GradedMap>> {
    let mut sys = MapSystem::weighted(m, n, degree);
    sys.chain(&|_| true, None);
    sys.linear(max_inputs, caps(m, n), &|_| true)?;
    Ok(sys.system().nullspace().iter().map(|x| sys.to_map(x)).collect())
}

type EqKey = (u8, usize, usize, usize, usize);

/// Linear equations on the entries of an unknown map `M → N`, listed as
/// `(row, col)` pairs.
pub(crate) struct MapSystem<'a> {
    m: &'a AModule,
    n: &'a AModule,
    degree: i32,
    unknowns: Vec<(usize, usize)>,
    by_col: BTreeMap<usize, Vec<(usize, usize)>>,
    builder: SystemBuilder<EqKey>,
}

impl<'a> MapSystem<'a> {
    pub(crate) fn new(m: &'a AModule, n: &'a AModule, degree: i32, unknowns: Vec<(usize, usize)>) -> Self {
        let mut by_col: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
        for (u, &(j, i)) in unknowns.iter().enumerate() {
            by_col.entry(i).or_default().push((u, j));
        }
        let builder = SystemBuilder::new(unknowns.len());
        MapSystem { m, n, degree, unknowns, by_col, builder }
    }

    /// Weight-preserving unknowns of the given degree.
    pub(crate) fn weighted(m: &'a AModule, n: &'a AModule, degree: i32) -> Self {
        let u = map_unknowns_weighted(m.carrier().space(), n.carrier().space(), degree);
        Self::new(m, n, degree, u)
    }

    fn col(&self, i: usize) -> &[(usize, usize)] {
        self.by_col.get(&i).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// `∂_N f − (−1)^{|f|} f ∂_M = rhs` on source basis elements in `domain`.
    pub(crate) fn chain(&mut self, domain: &dyn Fn(usize) -> bool, rhs: Option<&GradedMap>) {
        let s = sign(self.degree % 2 != 0);
        for i in 0..self.m.dim() {
            if !domain(i) {
                continue;
            }
            for &(u, j) in self.col(i).to_vec().iter() {
                for (z, c) in self.n.carrier().differential().col(j).iter() {
                    self.builder.add_term((0, i, z, 0, 0), u, c);
                }
            }
            for (l, c) in self.m.carrier().differential().col(i).iter() {
                for &(u, j) in self.col(l).to_vec().iter() {
                    self.builder.add_term((0, i, j, 0, 0), u, &-(c * &s));
                }
            }
            if let Some(r) = rhs {
                for (z, c) in r.col(i).iter() {
                    self.builder.add_rhs((0, i, z, 0, 0), c);
                }
            }
        }
    }

    /// `f(ν(p; c; y)) − (−1)^{|f|(|p|+|c|)} ν(p; c; f(y)) = 0` for probe
    /// inputs `c`, with both sides within `wcap`.
    pub(crate) fn linear(&mut self, max_inputs: usize, wcap: u32, domain: &dyn Fn(usize) -> bool) -> Result<()> {
        self.linear_affine(max_inputs, wcap, domain, None)
    }

    /// As `linear`, with right-hand side `rhs(p, c, y)`.
    pub(crate) fn linear_affine(
        &mut self,
        max_inputs: usize,
        wcap: u32,
        domain: &dyn Fn(usize) -> bool,
        rhs: Option<&dyn Fn(usize, &[SparseVec], usize) -> Result<SparseVec>>,
    ) -> Result<()> {
        let a = self.m.algebra().clone();
        let op = a.operad();
        let msp = self.m.carrier().space().clone();
        let probes = probe_inputs(&a, max_inputs.min(op.arity_cap() - 1), wcap);
        for (t, (cs, cdeg, cw)) in probes.iter().enumerate() {
            let k = cs.len();
            for p in 0..op.dim(k + 1) {
                let sg = sign(odd(self.degree, op.degree(k + 1, p) + cdeg));
                let pv = SparseVec::unit(p);
                for y in 0..msp.dim() {
                    if !domain(y) || msp.weight(y) + cw > wcap {
                        continue;
                    }
                    let key = |z: usize| (1u8, t, p, y, z);
                    let img = self.m.act(&pv, cs, &SparseVec::unit(y))?;
                    for (i, c) in img.iter() {
                        for &(u, j) in self.col(i).to_vec().iter() {
                            self.builder.add_term(key(j), u, c);
                        }
                    }
                    for &(u, j) in self.col(y).to_vec().iter() {
                        let nu = self.n.act(&pv, cs, &SparseVec::unit(j))?;
                        for (z, c) in nu.iter() {
                            self.builder.add_term(key(z), u, &-(c * &sg));
                        }
                    }
                    if let Some(r) = rhs {
                        for (z, c) in r(p, cs, y)?.iter() {
                            self.builder.add_rhs(key(z), c);
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Adds `Σ coeffs · x = rhs` under a caller-chosen key.
    pub(crate) fn constraint(&mut self, key: (usize, usize), coeffs: &[(usize, Rational)], rhs: &Rational) {
        let k = (2u8, key.0, key.1, 0, 0);
        for (u, c) in coeffs {
            self.builder.add_term(k, *u, c);
        }
        self.builder.add_rhs(k, rhs);
    }

    pub(crate) fn unknowns(&self) -> &[(usize, usize)] {
        &self.unknowns
    }

    pub(crate) fn system(&self) -> LinearSystem {
        self.builder.build()
    }

    pub(crate) fn to_map(&self, x: &SparseVec) -> GradedMap {
        map_from_unknowns(
            self.m.carrier().space().clone(),
            self.n.carrier().space().clone(),
            self.degree,
            &self.unknowns,
            x,
        )
    }
}

fn caps(m: &AModule, n: &AModule) -> u32 {
    m.weight_cap().unwrap_or(u32::MAX).min(n.weight_cap().unwrap_or(u32::MAX))
}

/// An `A`-linear `h` of degree `|f| − 1` with `[∂, h] = f`, if any.
pub fn module_null_homotopy(m: &AModule, n: &AModule, f: &GradedMap, max_inputs: usize) -> Result<Option<GradedMap>> {
    let mut sys = MapSystem::weighted(m, n, f.degree() - 1);
    sys.chain(&|_| true, Some(f));
    sys.linear(max_inputs, caps(m, n), &|_| true)?;
    Ok(sys.system().solve().map(|x| sys.to_map(&x)))
}

/// Whether `f` commutes with the action of up to `max_inputs` generators.
pub fn is_linear(f: &GradedMap, m: &AModule, n: &AModule, max_inputs: usize) -> Result<bool> {
    let a = m.algebra();
    let op = a.operad();
    let wcap = caps(m, n);
    for (cs, cdeg, cw) in probe_inputs(a, max_inputs.min(op.arity_cap() - 1), wcap) {
        let k = cs.len();
        for p in 0..op.dim(k + 1) {
            let sg = sign(odd(f.degree(), op.degree(k + 1, p) + cdeg));
            for y in 0..m.dim() {
                if m.carrier().space().weight(y) + cw > wcap {
                    continue;
                }
                let pv = SparseVec::unit(p);
                let lhs = f.apply(&m.act(&pv, &cs, &SparseVec::unit(y))?);
                let rhs = n.act(&pv, &cs, f.col(y))?.scaled(&sg);
                if lhs != rhs {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Whether `f` commutes with the differentials (in the graded sense).
pub fn is_chain(f: &GradedMap, m: &Complex, n: &Complex) -> Result<bool> {
    Ok(crate::complexes::commutator(f, m, n)?.is_zero())
}

/// `F_A(W)`: words with one slot holding `W`.
pub fn free_module(a: &Arc<OperadAlgebra>, w: &Complex) -> Result<Arc<AModule>> {
    free_module_twisted(a, w, None)
}

/// `F_A(W)` with `∂w` extended by the given words (with the single slot of
/// type 0), e.g. `∂e_0 = x·e_1`.
pub fn free_module_twisted(a: &Arc<OperadAlgebra>, w: &Complex, extra: Option<Vec<WordVec>>) -> Result<Arc<AModule>> {
    let slot = SlotType { kind: SlotKind::Plain { space: w.clone(), extra }, symmetric: false };
    let name = format!("F_{}(W)", a.name());
    let spec = envelope_spec(a, vec![slot], vec![vec![1]], name.clone())?;
    let lax = Arc::new(Lax::build(spec)?);
    let mut m = (*AModule::from_words(name, a, lax)).clone();
    m.free_over = Some(w.clone());
    Ok(Arc::new(m))
}

/// `M / ⟨vs⟩`: the quotient by the submodule generated by `vs` (closed
/// under the differential and the action of up to `max_inputs` generators).
pub fn quotient_module(m: &Arc<AModule>, vs: &[SparseVec], max_inputs: usize) -> Result<Arc<AModule>> {
    let a = m.algebra().clone();
    let op = a.operad();
    let wcap = m.weight_cap().unwrap_or(u32::MAX);
    let probes = probe_inputs(&a, max_inputs.min(op.arity_cap() - 1), wcap);
    let mut sub = Subspace::zero(m.carrier().space().clone());
    let mut todo: Vec<SparseVec> = vs.to_vec();
    while let Some(v) = todo.pop() {
        if !sub.insert(v.clone()) {
            continue;
        }
        todo.push(m.carrier().differential().apply(&v));
        for (cs, _, _) in &probes {
            for p in 0..op.dim(cs.len() + 1) {
                todo.push(m.act(&SparseVec::unit(p), cs, &v)?);
            }
        }
    }
    let q = Arc::new(quotient(m.carrier().space().clone(), &sub));
    let d = q.projection.compose(&m.carrier().differential().compose(&q.section_map())?)?;
    let carrier = Complex::new(q.space.clone(), d)?;
    let (mm, qq) = (m.clone(), q.clone());
    let act: Arc<ActionFn> = Arc::new(move |p, cs, y| Ok(qq.projection.apply(&mm.act_basis(p, cs, qq.section[y])?)));
    Ok(AModule::from_fn(format!("{}/N", m.name()), &a, carrier, m.weight_cap(), act))
}

/// A lax product together with its word model and factors.
#[derive(Clone, Debug)]
pub struct LaxProduct {
    pub module: Arc<AModule>,
    pub words: Arc<Lax>,
    pub factors: Vec<Arc<AModule>>,
}

fn module_slot(m: &Arc<AModule>) -> SlotType {
    SlotType::module(m.clone() as Arc<dyn ModuleAction>)
}

/// `P_A(M_1..M_m)`: words with one slot per factor, modulo the relations
/// letting `A` act inside each factor.
pub fn lax_product(a: &Arc<OperadAlgebra>, factors: &[Arc<AModule>]) -> Result<LaxProduct> {
    let slots: Vec<SlotType> = factors.iter().map(module_slot).collect();
    let names: Vec<&str> = factors.iter().map(|f| f.name()).collect();
    let name = format!("P_{}({})", a.name(), names.join(","));
    let spec = envelope_spec(a, slots, vec![vec![1; factors.len()]], name.clone())?;
    let lax = Arc::new(Lax::build(spec)?);
    Ok(LaxProduct { module: AModule::from_words(name, a, lax.clone()), words: lax, factors: factors.to_vec() })
}

impl LaxProduct {
    /// The symmetry `P_A(M_1..M_m) → P_A(M_{σ(1)}..M_{σ(m)})` into a
    /// product built with the permuted factors.
    pub fn symmetry_map(&self, target: &LaxProduct, sigma: &Permutation) -> Result<GradedMap> {
        let inv = sigma.inverse();
        let tl = &target.words;
        self.words.map_from_words(tl.carrier().space().clone(), 0, |w| {
            let entries: Vec<Fed> = w
                .entries()
                .into_iter()
                .map(|f| match f {
                    Fed::Slot(t, x) => Fed::Slot(inv.apply(t as usize) as u16, x),
                    other => other,
                })
                .collect();
            tl.project(&tl.canon(w.arity(), &SparseVec::unit(w.op as usize), &entries)?)
        })
    }
}

/// `S^n_A(M, E_1..E_m)`: coinvariants of the symmetric group permuting the
/// `n` copies of `M`.
pub fn symmetric_product(a: &Arc<OperadAlgebra>, m: &Arc<AModule>, n: usize, extras: &[Arc<AModule>]) -> Result<Arc<AModule>> {
    let mut slots = vec![module_slot(m).symmetric()];
    slots.extend(extras.iter().map(module_slot));
    let mut shape = vec![n];
    shape.extend(std::iter::repeat_n(1, extras.len()));
    let name = format!("S^{n}_{}({})", a.name(), m.name());
    let spec = envelope_spec(a, slots, vec![shape], name.clone())?;
    Ok(AModule::from_words(name, a, Arc::new(Lax::build(spec)?)))
}

/// `S*_A(M)` up to symmetric degree `max_n`, with the unit `A → S*_A(M)`.
pub fn free_a_algebra(a: &Arc<OperadAlgebra>, m: &Arc<AModule>, max_n: usize) -> Result<(Arc<OperadAlgebra>, GradedMap)> {
    free_a_algebra_with(a, module_slot(m).symmetric(), max_n)
}

/// As `free_a_algebra`, with an explicit slot for `M` (a plain slot gives
/// the free module case directly).
pub fn free_a_algebra_with(a: &Arc<OperadAlgebra>, slot: SlotType, max_n: usize) -> Result<(Arc<OperadAlgebra>, GradedMap)> {
    let name = format!("S*_{}(M)", a.name());
    let spec = envelope_spec(a, vec![slot], (0..=max_n).map(|k| vec![k]).collect(), name.clone())?;
    let lax = Arc::new(Lax::build(spec)?);
    let unit = algebra_into_words(a, &lax)?;
    Ok((Arc::new(OperadAlgebra::from_slotted_words(name, lax)), unit))
}

/// The map `A → L` sending `a` to the slotless word `η(a)`.
pub fn algebra_into_words(a: &OperadAlgebra, lax: &Lax) -> Result<GradedMap> {
    let cols = (0..a.dim())
        .map(|b| lax.project(&lax.canon(1, a.operad().unit(), &[Fed::Elem(b as u32)])?))
        .collect::<Result<Vec<_>>>()?;
    GradedMap::new(a.carrier().space().clone(), lax.carrier().space().clone(), 0, cols)
}

/// `S*_A(M, E) = ⊕_n S^n_A(M, E)` as a module over `S*_A(M)`, with its
/// word model.
pub fn free_sam_module(
    s: &Arc<OperadAlgebra>,
    m_slot: SlotType,
    e_slot: SlotType,
    max_n: usize,
) -> Result<(Arc<AModule>, Arc<Lax>)> {
    let sl = s.words().ok_or_else(|| Error::Dimension("S*_A(M) must be built from words".into()))?.clone();
    let base = sl.spec().clone();
    let mut spec = base.clone();
    spec.name = "S*_A(M,E)".into();
    spec.slots = vec![m_slot, e_slot];
    spec.shapes = (0..=max_n).map(|k| vec![k, 1]).collect();
    let lax = Arc::new(Lax::build(spec)?);
    let ml = lax.clone();
    let act: Arc<ActionFn> = Arc::new(move |p, cs, y| {
        let mut words: Vec<&Word> = cs.iter().map(|&c| sl.word(c)).collect();
        words.push(ml.word(y));
        ml.project(&ml.compose_words(cs.len() + 1, p, &words)?)
    });
    Ok((AModule::from_fn("S*_A(M,E)", s, lax.carrier().clone(), Some(lax.weight_cap()), act), lax))
}

/// `H_A(M_2..M_m; N)`: `A`-linear maps out of the words with a hole in the
/// first slot, graded by weight. An element of weight `s` is defined on
/// words of weight at most `cap − s`.
pub struct LaxHom {
    pub module: Arc<AModule>,
    /// Words with the hole followed by the other factors.
    pub source: Arc<Lax>,
    pub target: Arc<AModule>,
    blocks: Arc<Vec<HomBlock>>,
    /// Per basis element: block index and position in the block.
    index: Vec<(usize, usize)>,
}

struct HomBlock {
    weight: u32,
    degree: i32,
    unknowns: Vec<(usize, usize)>,
    /// Free unknown carrying each basis vector.
    free: Vec<usize>,
    basis: Vec<GradedMap>,
}

impl fmt::Debug for LaxHom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaxHom(dim {})", self.module.dim())
    }
}

fn hom_domain(l: &Lax, s: u32) -> impl Fn(usize) -> bool + '_ {
    move |i| l.carrier().space().weight(i) + s <= l.weight_cap()
}

impl LaxHom {
    pub fn element(&self, i: usize) -> &GradedMap {
        let (b, k) = self.index[i];
        &self.blocks[b].basis[k]
    }

    pub fn weight_of(&self, i: usize) -> u32 {
        self.blocks[self.index[i].0].weight
    }

    /// Coordinates of an `A`-linear map of weight `s` (evaluated on the
    /// truncated domain).
    pub fn coords(&self, phi: &GradedMap, s: u32) -> Result<SparseVec> {
        coords_in(&self.blocks, &self.source, phi, s)
    }
}

fn coords_in(blocks: &[HomBlock], l: &Lax, phi: &GradedMap, s: u32) -> Result<SparseVec> {
    let dom = hom_domain(l, s);
    let mut out = SparseVec::new();
    let mut offset = 0;
    let mut recon: Option<GradedMap> = None;
    for blk in blocks {
        if blk.weight == s && blk.degree == phi.degree() {
            let mut acc = GradedMap::zero(phi.source().clone(), phi.target().clone(), phi.degree());
            for (k, &f) in blk.free.iter().enumerate() {
                let (j, i) = blk.unknowns[f];
                let c = phi.col(i).get(j);
                if !c.is_zero() {
                    out.add_at(offset + k, &c);
                    acc = acc.add(&blk.basis[k].scale(&c))?;
                }
            }
            recon = Some(acc);
        }
        offset += blk.basis.len();
    }
    let recon = recon.unwrap_or_else(|| GradedMap::zero(phi.source().clone(), phi.target().clone(), phi.degree()));
    for i in 0..phi.cols().len() {
        if dom(i) && recon.col(i) != phi.col(i) {
            return Err(Error::IllDefinedQuotient("map is not A-linear of the expected weight".into()));
        }
    }
    Ok(out)
}

/// Builds `H_A(M_2..M_m; N)` for homogeneous weights `0..=cap`.
pub fn lax_hom(a: &Arc<OperadAlgebra>, others: &[Arc<AModule>], n: &Arc<AModule>, max_inputs: usize) -> Result<LaxHom> {
    let mut slots = vec![hole()];
    slots.extend(others.iter().map(module_slot));
    let name = format!("L_{}", a.name());
    let spec = envelope_spec(a, slots, vec![vec![1; others.len() + 1]], name)?;
    let l = Arc::new(Lax::build(spec)?);
    let lmod = AModule::from_words("L", a, l.clone());
    let lsp = l.carrier().space().clone();
    let nsp = n.carrier().space().clone();
    let cap = l.weight_cap();
    let mut blocks = Vec::new();
    let degrees: std::collections::BTreeSet<i32> = {
        let mut d = std::collections::BTreeSet::new();
        for i in 0..lsp.dim() {
            for j in 0..nsp.dim() {
                d.insert(nsp.degree(j) - lsp.degree(i));
            }
        }
        d
    };
    for s in 0..=cap {
        for &deg in &degrees {
            let dom = hom_domain(&l, s);
            let unknowns: Vec<(usize, usize)> = crate::linalg::map_unknowns(&lsp, &nsp, deg)
                .into_iter()
                .filter(|&(j, i)| dom(i) && nsp.weight(j) == lsp.weight(i) + s)
                .collect();
            if unknowns.is_empty() {
                continue;
            }
            // linearity is imposed on the truncated domain
            let mut sys = MapSystem::new(&lmod, n, deg, unknowns.clone());
            sys.linear(max_inputs, cap - s, &dom)?;
            let null = sys.system().nullspace();
            if null.is_empty() {
                continue;
            }
            let free: Vec<usize> = null
                .iter()
                .map(|x| {
                    // the free unknown is the one coordinate where only this vector is nonzero
                    x.iter().map(|(i, _)| i).find(|i| null.iter().filter(|y| !y.get(*i).is_zero()).count() == 1).expect("free variable")
                })
                .collect();
            let basis = null.iter().map(|x| map_from_unknowns(lsp.clone(), nsp.clone(), deg, &unknowns, x)).collect();
            blocks.push(HomBlock { weight: s, degree: deg, unknowns, free, basis });
        }
    }
    let mut index = Vec::new();
    let mut hb = Vec::new();
    for (b, blk) in blocks.iter().enumerate() {
        for k in 0..blk.basis.len() {
            index.push((b, k));
            hb.push(Basis::new(blk.degree, blk.weight, format!("h{}", hb.len())));
        }
    }
    let hsp = Arc::new(GradedSpace::new(hb));
    // differential ∂φ = ∂_N φ − (−1)^{|φ|} φ ∂_L
    let mut dcols = Vec::with_capacity(index.len());
    for &(b, k) in &index {
        let phi = &blocks[b].basis[k];
        let d = n
            .carrier()
            .differential()
            .compose(phi)?
            .sub(&phi.compose(l.carrier().differential())?.scale(&sign(phi.degree() % 2 != 0)))?;
        dcols.push(coords_in(&blocks, &l, &d, blocks[b].weight)?);
    }
    let dh = GradedMap::new(hsp.clone(), hsp.clone(), 1, dcols)?;
    let carrier = Complex::new(hsp, dh)?;
    let blocks = Arc::new(blocks);
    let index_arc = Arc::new(index.clone());
    let (bl, ll, nn, aa) = (blocks.clone(), l.clone(), n.clone(), a.clone());
    let act: Arc<ActionFn> = Arc::new(move |p, cs, i| {
        let (b, k) = index_arc[i];
        let phi = &bl[b].basis[k];
        let op = aa.operad();
        let kk = cs.len();
        let pdeg = op.degree(kk + 1, p);
        let asp = aa.carrier().space();
        let cdeg: i32 = cs.iter().map(|&c| asp.degree(c)).sum();
        let cw: u32 = cs.iter().map(|&c| asp.weight(c)).sum();
        let s2 = bl[b].weight + cw;
        if s2 > ll.weight_cap() {
            return Ok(SparseVec::new());
        }
        let dom = hom_domain(&ll, s2);
        let mut sub: Vec<Fed> = cs.iter().map(|&c| Fed::Elem(c as u32)).collect();
        sub.push(Fed::Slot(0, 0));
        let mut cols = Vec::with_capacity(ll.dim());
        for wi in 0..ll.dim() {
            if !dom(wi) {
                cols.push(SparseVec::new());
                continue;
            }
            let w = ll.word(wi);
            let hole_pos = w.gens.len();
            let before: i32 = ll.word_degree(w) - slot_degrees(&ll, w);
            let ins = ll.substitute(w.arity(), &SparseVec::unit(w.op as usize), &w.entries(), hole_pos, kk + 1, &SparseVec::unit(p), &sub)?;
            let v = phi.apply(&ll.project(&ins)?);
            let sg = sign(odd(pdeg + cdeg, before + phi.degree()));
            cols.push(v.scaled(&sg));
        }
        let psi = GradedMap::new(ll.carrier().space().clone(), nn.carrier().space().clone(), phi.degree() + pdeg + cdeg, cols)?;
        coords_in(&bl, &ll, &psi, s2)
    });
    let module = AModule::from_fn(format!("H_{}", a.name()), a, carrier, Some(cap), act);
    Ok(LaxHom { module, source: l, target: n.clone(), blocks, index })
}

/// Degree carried by the slots after the hole's position (the hole itself
/// has degree zero).
fn slot_degrees(l: &Lax, w: &Word) -> i32 {
    w.slots.iter().map(|&(t, x)| l.spec().slots[t as usize].space().space().degree(x as usize)).sum()
}

/// The bijection `Hom(P_A(M_1, M_2..), N) → Hom(M_1, H_A(M_2..; N))`.
/// `g` must be an `A`-linear map of degree zero; `f(m)(w) = ± g(w[m])`.
pub fn adjoint_transpose(p: &LaxProduct, h: &LaxHom, g: &GradedMap) -> Result<GradedMap> {
    let m1 = &p.factors[0];
    let l = &h.source;
    let pl = &p.words;
    let msp = m1.carrier().space().clone();
    let mut cols = Vec::with_capacity(msp.dim());
    for m in 0..msp.dim() {
        let s = msp.weight(m);
        let dom = hom_domain(l, s);
        let mdeg = msp.degree(m);
        let mut pcols = Vec::with_capacity(l.dim());
        for wi in 0..l.dim() {
            if !dom(wi) {
                pcols.push(SparseVec::new());
                continue;
            }
            let w = l.word(wi);
            let before = l.word_degree(w) - slot_degrees(l, w);
            let entries: Vec<Fed> = w
                .entries()
                .into_iter()
                .map(|f| if f == Fed::Slot(0, 0) { Fed::Slot(0, m as u32) } else { f })
                .collect();
            let v = pl.project(&pl.canon(w.arity(), &SparseVec::unit(w.op as usize), &entries)?)?;
            pcols.push(g.apply(&v).scaled(&sign(odd(mdeg, before))));
        }
        let phi = GradedMap::new(l.carrier().space().clone(), h.target.carrier().space().clone(), mdeg + g.degree(), pcols)?;
        cols.push(h.coords(&phi, s)?);
    }
    GradedMap::new(msp, h.module.carrier().space().clone(), g.degree(), cols)
}

/// The inverse of `adjoint_transpose`.
pub fn adjoint_untranspose(p: &LaxProduct, h: &LaxHom, f: &GradedMap) -> Result<GradedMap> {
    let l = &h.source;
    let pl = &p.words;
    let msp = p.factors[0].carrier().space();
    pl.map_from_words(h.target.carrier().space().clone(), f.degree(), |w| {
        let pos = w.slots.iter().position(|&(t, _)| t == 0).expect("first factor present");
        let m = w.slots[pos].1 as usize;
        let entries: Vec<Fed> = w
            .entries()
            .into_iter()
            .map(|e| if e == Fed::Slot(0, m as u32) { Fed::Slot(0, 0) } else { e })
            .collect();
        let lw = l.canon(w.arity(), &SparseVec::unit(w.op as usize), &entries)?;
        let mut out = SparseVec::new();
        for (hi, c) in f.col(m).iter() {
            let phi = h.element(hi);
            for (word, x) in &lw {
                let before = l.word_degree(word) - slot_degrees(l, word);
                let li = l.project(&single(word))?;
                out.add_scaled(&phi.apply(&li), &(c * x * sign(odd(msp.degree(m), before))));
            }
        }
        Ok(out)
    })
}

fn single(w: &Word) -> WordVec {
    let mut v = WordVec::new();
    add_word(&mut v, w.clone(), &Rational::one());
    v
}

/// A derivation `A → M`.
#[derive(Clone, Debug)]
pub struct Derivation {
    pub algebra: Arc<OperadAlgebra>,
    pub target: Arc<AModule>,
    pub map: GradedMap,
}

/// `d(μ(p; a)) = Σ_i ± ν(p·π_i; a without a_i; d a_i)`, with `π_i` moving
/// input `i` last, and `[∂, d] = 0`.
pub fn check_derivation(d: &Derivation, max_arity: usize) -> AxiomReport {
    let mut r = AxiomReport::default();
    if let Err(e) = check_derivation_into(d, max_arity, &mut r) {
        r.fail("derivation.evaluation", &[], e.to_string());
    }
    r
}

fn leibniz_rhs(a: &OperadAlgebra, m: &AModule, map: &GradedMap, k: usize, p: usize, xs: &[usize]) -> Result<SparseVec> {
    let op = a.operad();
    let asp = a.carrier().space();
    let delta = map.degree();
    let mut out = SparseVec::new();
    let mut before = op.degree(k, p);
    for i in 0..k {
        let di = map.col(xs[i]).clone();
        if !di.is_zero() {
            // entries with d(a_i) moved to the end
            let mut order: Vec<usize> = (0..k).filter(|&j| j != i).collect();
            order.push(i);
            let pi = Permutation::new(order.clone())?;
            let degs: Vec<i32> = order
                .iter()
                .map(|&j| if j == i { asp.degree(xs[j]) + delta } else { asp.degree(xs[j]) })
                .collect();
            let po = op.act(k, &SparseVec::unit(p), &pi);
            let cs: Vec<SparseVec> = order[..k - 1].iter().map(|&j| SparseVec::unit(xs[j])).collect();
            let v = m.act(&po, &cs, &di)?;
            let s = sign(odd(delta, before) ^ pi.koszul_odd(&degs));
            out.add_scaled(&v, &s);
        }
        before += asp.degree(xs[i]);
    }
    Ok(out)
}

fn check_derivation_into(d: &Derivation, max_arity: usize, r: &mut AxiomReport) -> Result<()> {
    let a = &d.algebra;
    let op = a.operad();
    let cap = max_arity.min(op.arity_cap());
    let wcap = d.target.weight_cap().unwrap_or(u32::MAX);
    let asp = a.carrier().space();
    for k in 0..=cap {
        for xs in crate::algebra::tuples(a.dim(), k) {
            if xs.iter().map(|&x| asp.weight(x)).sum::<u32>() > wcap {
                continue;
            }
            for p in 0..op.dim(k) {
                let lhs = d.map.apply(&a.mult_basis(k, p, &xs)?);
                let rhs = leibniz_rhs(a, &d.target, &d.map, k, p, &xs)?;
                r.check(lhs == rhs, "derivation.leibniz", &[k, p], || format!("at {xs:?}"));
            }
        }
    }
    let s = sign(d.map.degree() % 2 != 0);
    let c = d
        .target
        .carrier()
        .differential()
        .compose(&d.map)?
        .sub(&d.map.compose(a.carrier().differential())?.scale(&s))?;
    r.check(c.is_zero(), "derivation.chain", &[], || "[∂, d] ≠ 0".into());
    Ok(())
}

/// The derivation of a free algebra extending `φ: V → M` on generators.
pub fn derivation_from_map(a: &Arc<OperadAlgebra>, m: &Arc<AModule>, phi: &GradedMap) -> Result<Derivation> {
    let lax = a
        .words()
        .filter(|_| a.is_free())
        .ok_or_else(|| Error::Dimension("derivations from generator values need a free algebra".into()))?
        .clone();
    let op = a.operad();
    let delta = phi.degree();
    let pres = a.presentation()?;
    let map = lax.map_from_words(m.carrier().space().clone(), delta, |w| {
        let k = w.arity();
        let mut out = SparseVec::new();
        let mut before = op.degree(k, w.op as usize);
        for i in 0..k {
            let g = w.gens[i] as usize;
            let di = phi.col(g).clone();
            if !di.is_zero() {
                let mut order: Vec<usize> = (0..k).filter(|&j| j != i).collect();
                order.push(i);
                let pi = Permutation::new(order.clone())?;
                let degs: Vec<i32> = order
                    .iter()
                    .map(|&j| pres.degree[w.gens[j] as usize] + if j == i { delta } else { 0 })
                    .collect();
                let po = op.act(k, &SparseVec::unit(w.op as usize), &pi);
                let cs: Vec<SparseVec> = order[..k - 1].iter().map(|&j| pres.gen_elems[w.gens[j] as usize].clone()).collect();
                let v = m.act(&po, &cs, &di)?;
                out.add_scaled(&v, &sign(odd(delta, before) ^ pi.koszul_odd(&degs)));
            }
            before += pres.degree[g];
        }
        Ok(out)
    })?;
    Ok(Derivation { algebra: a.clone(), target: m.clone(), map })
}

/// Restriction of a derivation of a free algebra to its generators.
pub fn restrict_to_generators(d: &Derivation) -> Result<GradedMap> {
    let gens = d.algebra.generators();
    let n = gens.len();
    let p = d.algebra.presentation()?;
    let sp = Arc::new(GradedSpace::new(
        (0..n).map(|g| Basis::new(p.degree[g], p.weight[g], p.label[g].clone())).collect(),
    ));
    let cols = gens.iter().map(|g| d.map.apply(g)).collect();
    GradedMap::new(sp, d.target.carrier().space().clone(), d.map.degree(), cols)
}

/// Basis of the weight-preserving derivations `A → M` of the given degree
/// that commute with differentials.
pub fn derivations(a: &Arc<OperadAlgebra>, m: &AModule, degree: i32, max_arity: usize) -> Result<Vec<GradedMap>> {
    let asp = a.carrier().space().clone();
    let msp = m.carrier().space().clone();
    let op = a.operad();
    let unknowns = map_unknowns_weighted(&asp, &msp, degree);
    let mut by_col: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for (u, &(j, i)) in unknowns.iter().enumerate() {
        by_col.entry(i).or_default().push((u, j));
    }
    let cols_of = |i: usize| by_col.get(&i).cloned().unwrap_or_default();
    let wcap = m.weight_cap().unwrap_or(u32::MAX);
    let mut b = SystemBuilder::<(u8, usize, usize, Vec<usize>, usize)>::new(unknowns.len());
    let s = sign(degree % 2 != 0);
    for i in 0..asp.dim() {
        for (u, j) in cols_of(i) {
            for (z, c) in m.carrier().differential().col(j).iter() {
                b.add_term((0, i, z, vec![], 0), u, c);
            }
        }
        for (l, c) in a.carrier().differential().col(i).iter() {
            for (u, j) in cols_of(l) {
                b.add_term((0, i, j, vec![], 0), u, &-(c * &s));
            }
        }
    }
    for k in 0..=max_arity.min(op.arity_cap()) {
        for xs in crate::algebra::tuples(a.dim(), k) {
            if xs.iter().map(|&x| asp.weight(x)).sum::<u32>() > wcap {
                continue;
            }
            for p in 0..op.dim(k) {
                let prod = a.mult_basis(k, p, &xs)?;
                for (i, c) in prod.iter() {
                    for (u, j) in cols_of(i) {
                        b.add_term((1, k, p, xs.clone(), j), u, c);
                    }
                }
                // each unknown column enters the Leibniz sum linearly
                for pos in 0..k {
                    for (u, j) in cols_of(xs[pos]) {
                        let unit_map = map_from_unknowns(
                            asp.clone(),
                            msp.clone(),
                            degree,
                            &[(j, xs[pos])],
                            &SparseVec::unit(0),
                        );
                        let mut ys = xs.clone();
                        // isolate the contribution of position `pos`
                        let v = leibniz_single(a, m, &unit_map, k, p, &mut ys, pos)?;
                        for (z, c) in v.iter() {
                            b.add_term((1, k, p, xs.clone(), z), u, &-c.clone());
                        }
                    }
                }
            }
        }
    }
    Ok(b.build()
        .nullspace()
        .iter()
        .map(|x| map_from_unknowns(asp.clone(), msp.clone(), degree, &unknowns, x))
        .collect())
}

/// The Leibniz term of position `pos` alone.
fn leibniz_single(a: &OperadAlgebra, m: &AModule, map: &GradedMap, k: usize, p: usize, xs: &mut [usize], pos: usize) -> Result<SparseVec> {
    let op = a.operad();
    let asp = a.carrier().space();
    let delta = map.degree();
    let before = op.degree(k, p) + xs[..pos].iter().map(|&x| asp.degree(x)).sum::<i32>();
    let di = map.col(xs[pos]).clone();
    if di.is_zero() {
        return Ok(SparseVec::new());
    }
    let mut order: Vec<usize> = (0..k).filter(|&j| j != pos).collect();
    order.push(pos);
    let pi = Permutation::new(order.clone())?;
    let degs: Vec<i32> = order
        .iter()
        .map(|&j| if j == pos { asp.degree(xs[j]) + delta } else { asp.degree(xs[j]) })
        .collect();
    let po = op.act(k, &SparseVec::unit(p), &pi);
    let cs: Vec<SparseVec> = order[..k - 1].iter().map(|&j| SparseVec::unit(xs[j])).collect();
    let v = m.act(&po, &cs, &di)?;
    Ok(v.scaled(&sign(odd(delta, before) ^ pi.koszul_odd(&degs))))
}

/// The generators of a presented algebra as a complex (their linear
/// differential; nonlinear terms are dropped).
pub fn generator_complex(a: &OperadAlgebra) -> Result<Complex> {
    let p = a.presentation()?;
    let n = p.degree.len();
    let sp = Arc::new(GradedSpace::new(
        (0..n).map(|g| Basis::new(p.degree[g], p.weight[g], p.label[g].clone())).collect(),
    ));
    let cols = (0..n)
        .map(|g| {
            let mut v = SparseVec::new();
            for (f, c) in &p.diff[g].linear {
                if let Fed::Gen(z) = f {
                    v.add_at(*z as usize, c);
                }
            }
            v
        })
        .collect();
    Complex::new(sp.clone(), GradedMap::new(sp.clone(), sp, 1, cols)?)
}

/// The universal derivation `d: A → Ω_A`. For a free algebra `Ω_A` is the
/// free module on the generators, with differential twisted by `d` of
/// the nonlinear part of `∂` on generators; otherwise it is the quotient of
/// `U(A) ⊗ A` by the Leibniz relations.
pub fn kahler(a: &Arc<OperadAlgebra>) -> Result<(Arc<AModule>, Derivation)> {
    if a.is_free() {
        let pres = a.presentation()?.clone();
        let v = generator_complex(a)?;
        // nonlinear parts of ∂g, differentiated
        let src = a.words().expect("free algebras are word algebras").clone();
        let dimage = |f: Fed| -> Result<Image> {
            Ok(match f {
                Fed::Gen(g) => Image { linear: vec![(Fed::Slot(0, g), Rational::one())], words: WordVec::new() },
                _ => Image::default(),
            })
        };
        let mut extra = Vec::with_capacity(pres.diff.len());
        let mut needs = false;
        // build Ω once without extras to differentiate words in its ambient
        let spec0 = envelope_spec(a, vec![SlotType::plain(v.clone())], vec![vec![1]], "Ω0".into())?;
        let spec0 = crate::lax::LaxSpec { slots: vec![SlotType::plain(v.clone())], ..spec0 };
        for g in 0..pres.diff.len() {
            let mut e = WordVec::new();
            for (w, c) in &pres.diff[g].words {
                needs = true;
                add_words(&mut e, &derive_plain(&spec0, w, &dimage)?, c);
            }
            extra.push(e);
        }
        let slot = SlotType {
            kind: SlotKind::Plain { space: v.clone(), extra: if needs { Some(extra) } else { None } },
            symmetric: false,
        };
        let name = format!("Ω_{}", a.name());
        let spec = envelope_spec(a, vec![slot], vec![vec![1]], name.clone())?;
        let lax = Arc::new(Lax::build(spec)?);
        let mut omega = (*AModule::from_words(name, a, lax.clone())).clone();
        omega.free_over = Some(v);
        let omega = Arc::new(omega);
        let map = src.map_from_words(lax.carrier().space().clone(), 0, |w| {
            lax.project(&lax.derive_word(w, 0, None, &dimage)?)
        })?;
        Ok((omega.clone(), Derivation { algebra: a.clone(), target: omega, map }))
    } else {
        let name = format!("Ω_{}", a.name());
        let mut spec = envelope_spec(a, vec![SlotType::plain(a.carrier().clone())], vec![vec![1]], name.clone())?;
        spec.leibniz = Some(0);
        let lax = Arc::new(Lax::build(spec)?);
        let omega = AModule::from_words(name, a, lax.clone());
        let cols = (0..a.dim())
            .map(|b| {
                let mut v = WordVec::new();
                for (o, c) in a.operad().unit().iter() {
                    add_word(&mut v, Word { op: o as u32, gens: vec![], slots: vec![(0, b as u32)] }, c);
                }
                lax.project(&v)
            })
            .collect::<Result<Vec<_>>>()?;
        let map = GradedMap::new(a.carrier().space().clone(), lax.carrier().space().clone(), 0, cols)?;
        Ok((omega.clone(), Derivation { algebra: a.clone(), target: omega, map }))
    }
}

/// Applies a degree-zero derivation to a word, producing words of the given
/// spec (without building its quotient).
fn derive_plain(spec: &crate::lax::LaxSpec, w: &Word, image: &dyn Fn(Fed) -> Result<Image>) -> Result<WordVec> {
    crate::lax::derive_with_spec(spec, w, 0, image)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{basis_space, free_algebra, weight_profile};
    use crate::operad::{ass_operad, com_operad};

    fn poly(cap: u32) -> Arc<OperadAlgebra> {
        Arc::new(free_algebra(Arc::new(com_operad(cap as usize + 2)), &basis_space(&["x"], 0), cap).unwrap())
    }

    #[test]
    fn self_and_free_modules() {
        let a = poly(3);
        let m = AModule::over_itself(&a);
        assert!(check_module(&m, 2).is_ok());
        let f = free_module(&a, &basis_space(&["w"], 0)).unwrap();
        assert_eq!(weight_profile(f.carrier(), 3), vec![0, 1, 1, 1]);
        let r = check_module(&f, 2);
        assert!(r.is_ok(), "{:?}", r.failures.first());
    }

    #[test]
    fn lax_products_of_small_arity() {
        let a = poly(3);
        let p0 = lax_product(&a, &[]).unwrap();
        assert_eq!(weight_profile(p0.module.carrier(), 3), weight_profile(a.carrier(), 3));
        let m = AModule::over_itself(&a);
        let p1 = lax_product(&a, std::slice::from_ref(&m)).unwrap();
        assert_eq!(weight_profile(p1.module.carrier(), 3), weight_profile(a.carrier(), 3));
    }

    #[test]
    fn kahler_of_polynomials() {
        let a = poly(3);
        let (omega, d) = kahler(&a).unwrap();
        // dx, x dx, x² dx with dx of weight one
        assert_eq!(weight_profile(omega.carrier(), 3), vec![0, 1, 1, 1]);
        assert!(check_derivation(&d, 3).is_ok());
        let ders = derivations(&a, &omega, 0, 3).unwrap().len();
        let maps = module_maps(&omega, &omega, 0, 2).unwrap().len();
        assert_eq!(ders, maps);
    }

    #[test]
    fn euler_derivation() {
        let a = poly(3);
        let m = AModule::over_itself(&a);
        let v = basis_space(&["x"], 0);
        let x = a.generators()[0].clone();
        let phi = GradedMap::new(v.space().clone(), a.carrier().space().clone(), 0, vec![x]).unwrap();
        let d = derivation_from_map(&a, &m, &phi).unwrap();
        assert!(check_derivation(&d, 3).is_ok());
        for i in 0..a.dim() {
            let w = a.carrier().space().weight(i) as i64;
            assert_eq!(d.map.col(i), &SparseVec::unit(i).scaled(&Rational::from_integer(w)));
        }
        assert_eq!(restrict_to_generators(&d).unwrap(), phi);
    }

    #[test]
    fn ass_modules() {
        let a = Arc::new(free_algebra(Arc::new(ass_operad(4)), &basis_space(&["x"], 0), 2).unwrap());
        let m = AModule::over_itself(&a);
        assert!(check_module(&m, 2).is_ok());
    }
}
