//! Connections, jet modules and Atiyah classes.

use std::sync::Arc;

use num_traits::{One, Zero};

use crate::algebra::expand;
use crate::complexes::{extension_class_with_section, ChainMap, Complex};
use crate::error::{Error, Result};
use crate::lax::{Fed, SlotKind};
use crate::linalg::{direct_sum_map, sign, GradedMap, GradedSpace, Rational, SparseVec};
use crate::modules::{
    is_chain, is_linear, lax_product, module_null_homotopy, probe_inputs, AModule, ActionFn, Derivation,
    LaxProduct, MapSystem,
};

fn odd(a: i32, b: i32) -> bool {
    a % 2 != 0 && b % 2 != 0
}

/// `J_d E = E ⊕ P_A(M, E)` with its jet sequence `P_A(M,E) → J_d E → E`.
#[derive(Clone, Debug)]
pub struct JetModule {
    pub module: Arc<AModule>,
    pub derivation: Derivation,
    /// `P_A(M, E)`, with `M` in slot 0 and `E` in slot 1.
    pub product: LaxProduct,
    pub jet: Arc<AModule>,
    pub inclusion: ChainMap,
    pub projection: ChainMap,
    /// Number of generators up to which linearity is tested.
    pub max_inputs: usize,
}

/// `Σ_i ± p(c_1.., d c_i, .., c_k, e)` in `P_A(M, E)`, for `p ∈ O(k+1)`.
pub fn leibniz_term(product: &LaxProduct, d: &Derivation, p: &SparseVec, cs: &[SparseVec], e: &SparseVec) -> Result<SparseVec> {
    let lax = &product.words;
    let a = &d.algebra;
    let asp = a.carrier().space();
    let op = a.operad();
    let k = cs.len();
    let delta = d.map.degree();
    let mut out = SparseVec::new();
    for (coef, idx) in expand(cs) {
        for (pi, pc) in p.iter() {
            let mut before = op.degree(k + 1, pi);
            for i in 0..k {
                for (m, mc) in d.map.col(idx[i]).iter() {
                    let mut entries: Vec<Fed> = idx.iter().map(|&c| Fed::Elem(c as u32)).collect();
                    entries[i] = Fed::Slot(0, m as u32);
                    for (ei, ec) in e.iter() {
                        let mut en = entries.clone();
                        en.push(Fed::Slot(1, ei as u32));
                        let words = lax.canon(k + 1, &SparseVec::unit(pi), &en)?;
                        let c = &coef * pc * mc * ec * sign(odd(delta, before));
                        out.add_scaled(&lax.project(&words)?, &c);
                    }
                }
                before += asp.degree(idx[i]);
            }
        }
    }
    Ok(out)
}

/// Builds the jet module of `E` for a derivation `d: A → M`.
pub fn jet_module(e: &Arc<AModule>, d: &Derivation, max_inputs: usize) -> Result<JetModule> {
    let a = e.algebra().clone();
    let product = lax_product(&a, &[d.target.clone(), e.clone()])?;
    let pm = product.module.clone();
    let de = e.dim();
    let (space, _) = GradedSpace::direct_sum(&[e.carrier().space(), pm.carrier().space()]);
    let space = Arc::new(space);
    let diff = direct_sum_map(&[e.carrier().differential(), pm.carrier().differential()])?
        .with_spaces(space.clone(), space.clone())?;
    let carrier = Complex::new(space.clone(), diff)?;
    let (ee, pp, dd, prod) = (e.clone(), pm.clone(), d.clone(), product.clone());
    let act: Arc<ActionFn> = Arc::new(move |p, cs, y| {
        if y < de {
            let mut v = ee.act_basis(p, cs, y)?;
            let cv: Vec<SparseVec> = cs.iter().map(|&c| SparseVec::unit(c)).collect();
            let l = leibniz_term(&prod, &dd, &SparseVec::unit(p), &cv, &SparseVec::unit(y))?;
            v.add(&l.reindex(|j| Some(j + de)));
            Ok(v)
        } else {
            Ok(pp.act_basis(p, cs, y - de)?.reindex(|j| Some(j + de)))
        }
    });
    let jet = AModule::from_fn(format!("J({})", e.name()), &a, carrier.clone(), e.weight_cap(), act);
    let inc = GradedMap::new(
        pm.carrier().space().clone(),
        space.clone(),
        0,
        (0..pm.dim()).map(|j| SparseVec::unit(j + de)).collect(),
    )?;
    let proj = GradedMap::new(
        space.clone(),
        e.carrier().space().clone(),
        0,
        (0..space.dim()).map(|j| if j < de { SparseVec::unit(j) } else { SparseVec::new() }).collect(),
    )?;
    let inclusion = ChainMap::new(pm.carrier().clone(), carrier.clone(), inc)?;
    let projection = ChainMap::new(carrier, e.carrier().clone(), proj)?;
    crate::complexes::check_exact(&inclusion, &projection)?;
    Ok(JetModule { module: e.clone(), derivation: d.clone(), product, jet, inclusion, projection, max_inputs })
}

/// A map `∇: E → P_A(M, E)` of degree zero. It is a connection when it
/// satisfies the Leibniz diagrams and commutes with differentials, and a
/// free connection when it only satisfies the diagrams.
#[derive(Clone, Debug)]
pub struct Connection {
    pub jet: Arc<JetModule>,
    pub map: GradedMap,
}

impl Connection {
    pub fn is_chain_map(&self) -> Result<bool> {
        is_chain(&self.map, self.jet.module.carrier(), self.jet.product.module.carrier())
    }

    /// Whether the Leibniz diagrams commute.
    pub fn is_derivative(&self) -> Result<bool> {
        leibniz_diagrams(&self.jet, &self.map)
    }
}

fn leibniz_diagrams(jet: &JetModule, nabla: &GradedMap) -> Result<bool> {
    let e = &jet.module;
    let pm = &jet.product.module;
    let a = e.algebra();
    let op = a.operad();
    let wcap = e.weight_cap().unwrap_or(u32::MAX).min(pm.weight_cap().unwrap_or(u32::MAX));
    for (cs, _, cw) in probe_inputs(a, jet.max_inputs.min(op.arity_cap() - 1), wcap) {
        let k = cs.len();
        for p in 0..op.dim(k + 1) {
            let pv = SparseVec::unit(p);
            for y in 0..e.dim() {
                if e.carrier().space().weight(y) + cw > wcap {
                    continue;
                }
                let yv = SparseVec::unit(y);
                let lhs = nabla.apply(&e.act(&pv, &cs, &yv)?);
                let mut rhs = leibniz_term(&jet.product, &jet.derivation, &pv, &cs, &yv)?;
                rhs.add(&pm.act(&pv, &cs, nabla.col(y))?);
                if lhs != rhs {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// The two verdicts on a candidate `∇`: the Leibniz diagrams, and whether
/// `(id, ∇): E → J_d E` is `A`-linear.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SplittingVerdict {
    pub diagrams: bool,
    pub splitting: bool,
}

impl SplittingVerdict {
    pub fn agree(&self) -> bool {
        self.diagrams == self.splitting
    }
}

/// `(id, ∇)` as a map into the jet module.
pub fn splitting_map(jet: &JetModule, nabla: &GradedMap) -> Result<GradedMap> {
    let de = jet.module.dim();
    let cols = (0..de)
        .map(|i| {
            let mut v = SparseVec::unit(i);
            v.add(&nabla.col(i).reindex(|j| Some(j + de)));
            v
        })
        .collect();
    GradedMap::new(jet.module.carrier().space().clone(), jet.jet.carrier().space().clone(), 0, cols)
}

pub fn connection_splitting_test(jet: &JetModule, nabla: &GradedMap) -> Result<SplittingVerdict> {
    let diagrams = leibniz_diagrams(jet, nabla)?;
    let s = splitting_map(jet, nabla)?;
    let splitting = is_linear(&s, &jet.module, &jet.jet, jet.max_inputs)?;
    Ok(SplittingVerdict { diagrams, splitting })
}

/// The connection on `F_A(W)` inserting `d` at each algebra input of a word.
pub fn canonical_connection(jet: &Arc<JetModule>) -> Result<Connection> {
    let e = &jet.module;
    let not_free = || Error::NotFreeModule(e.name().to_string());
    let lax = e.words().ok_or_else(not_free)?;
    if e.free_over().is_none() || !matches!(lax.spec().slots.as_slice(), [s] if matches!(s.kind, SlotKind::Plain { .. })) {
        return Err(not_free());
    }
    let gens = e.algebra().generators().to_vec();
    let pm = jet.product.module.carrier().space().clone();
    let map = lax.map_from_words(pm, 0, |w| {
        let (_, x) = w.slots[0];
        let unit = lax.project(&lax.canon(1, lax.operad().unit(), &[Fed::Slot(0, x)])?)?;
        let cs: Vec<SparseVec> = w.gens.iter().map(|&g| gens[g as usize].clone()).collect();
        leibniz_term(&jet.product, &jet.derivation, &SparseVec::unit(w.op as usize), &cs, &unit)
    })?;
    Ok(Connection { jet: jet.clone(), map })
}

/// Solves the Leibniz diagrams for a weight-preserving `∇`; `None` when the
/// truncated system has no solution.
pub fn find_free_connection(jet: &Arc<JetModule>) -> Result<Option<Connection>> {
    let e = &jet.module;
    let pm = &jet.product.module;
    let wcap = e.weight_cap().unwrap_or(u32::MAX).min(pm.weight_cap().unwrap_or(u32::MAX));
    let mut sys = MapSystem::weighted(e, pm, 0);
    let rhs = |p: usize, cs: &[SparseVec], y: usize| {
        leibniz_term(&jet.product, &jet.derivation, &SparseVec::unit(p), cs, &SparseVec::unit(y))
    };
    sys.linear_affine(jet.max_inputs, wcap, &|_| true, Some(&rhs))?;
    Ok(sys.system().solve().map(|x| Connection { jet: jet.clone(), map: sys.to_map(&x) }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AtiyahRoute {
    Connection,
    Extension,
}

/// A representative `E → P_A(M, E)[1]` of the Atiyah class.
#[derive(Clone, Debug)]
pub struct AtiyahClass {
    pub representative: GradedMap,
    pub route: AtiyahRoute,
}

fn check_representative(jet: &JetModule, rep: &GradedMap) -> Result<()> {
    if !is_chain(rep, jet.module.carrier(), jet.product.module.carrier())? {
        return Err(Error::Axiom("Atiyah representative is not a chain map".into()));
    }
    if !is_linear(rep, &jet.module, &jet.product.module, jet.max_inputs)? {
        return Err(Error::Axiom("Atiyah representative is not A-linear".into()));
    }
    Ok(())
}

/// `−[∂, ∇] = ∇∂ − ∂∇` for a free connection.
pub fn atiyah_from_connection(nabla: &Connection) -> Result<AtiyahClass> {
    let jet = &nabla.jet;
    if !nabla.is_derivative()? {
        return Err(Error::Axiom("not a free connection".into()));
    }
    let rep = nabla
        .map
        .compose(jet.module.carrier().differential())?
        .sub(&jet.product.module.carrier().differential().compose(&nabla.map)?)?;
    check_representative(jet, &rep)?;
    Ok(AtiyahClass { representative: rep, route: AtiyahRoute::Connection })
}

/// The class of the jet sequence: for an `A`-linear section `s` of
/// `J_d E → E`, the map `E → P_A(M,E)[1]` through which `−[∂, s]` factors
/// (the sign of the cone differential `−∂ + f + ∂`).
pub fn atiyah_from_extension(jet: &JetModule) -> Result<AtiyahClass> {
    let e = &jet.module;
    let j = &jet.jet;
    let de = e.dim();
    let wcap = e.weight_cap().unwrap_or(u32::MAX).min(j.weight_cap().unwrap_or(u32::MAX));
    let mut sys = MapSystem::weighted(e, j, 0);
    sys.linear(jet.max_inputs, wcap, &|_| true)?;
    let unknowns = sys.unknowns().to_vec();
    for i in 0..de {
        for (u, &(r, c)) in unknowns.iter().enumerate() {
            if c == i && r < de {
                let rhs = if r == i { Rational::one() } else { Rational::zero() };
                sys.constraint((i, r), &[(u, Rational::one())], &rhs);
            }
        }
    }
    let x = sys
        .system()
        .solve()
        .ok_or_else(|| Error::NoWitness("no A-linear section of the jet sequence within the caps".into()))?;
    let section = sys.to_map(&x);
    let class = extension_class_with_section(&jet.inclusion, &jet.projection, &section)?;
    let rep = class.class.neg();
    check_representative(jet, &rep)?;
    Ok(AtiyahClass { representative: rep, route: AtiyahRoute::Extension })
}

/// An `A`-linear `h` with `[∂, h] = a − b`, witnessing that two
/// representatives define the same class.
pub fn atiyah_agreement(jet: &JetModule, a: &AtiyahClass, b: &AtiyahClass) -> Result<Option<GradedMap>> {
    let diff = a.representative.sub(&b.representative)?;
    module_null_homotopy(&jet.module, &jet.product.module, &diff, jet.max_inputs)
}

/// `(∇_1..∇_m)` on `P_A(E_1..E_m)`, landing in `P_A(M, E_1..E_m)`.
#[derive(Clone, Debug)]
pub struct ProductConnection {
    pub source: LaxProduct,
    pub target: LaxProduct,
    pub map: GradedMap,
}

/// Inserts `d` at each algebra input and `∇_j` at each module input.
pub fn product_connection(d: &Derivation, conns: &[&Connection]) -> Result<ProductConnection> {
    let a = d.algebra.clone();
    let factors: Vec<Arc<AModule>> = conns.iter().map(|c| c.jet.module.clone()).collect();
    let source = lax_product(&a, &factors)?;
    let mut tf = vec![d.target.clone()];
    tf.extend(factors.iter().cloned());
    let target = lax_product(&a, &tf)?;
    let (sl, tl) = (&source.words, &target.words);
    let gens = a.generators().to_vec();
    let pres = a.presentation()?.clone();
    let map = sl.map_from_words(tl.carrier().space().clone(), 0, |w| {
        let n = w.arity();
        let o = SparseVec::unit(w.op as usize);
        let shifted: Vec<Fed> = w
            .entries()
            .into_iter()
            .map(|f| match f {
                Fed::Slot(t, x) => Fed::Slot(t + 1, x),
                other => other,
            })
            .collect();
        let mut out = SparseVec::new();
        // algebra inputs
        let mut before = sl.operad().degree(n, w.op as usize);
        for (i, &g) in w.gens.iter().enumerate() {
            let dg = d.map.apply(&gens[g as usize]);
            for (m, c) in dg.iter() {
                let mut e = shifted.clone();
                e[i] = Fed::Slot(0, m as u32);
                let s = sign(odd(d.map.degree(), before));
                out.add_scaled(&tl.project(&tl.canon(n, &o, &e)?)?, &(c * s));
            }
            before += pres.degree[g as usize];
        }
        // module inputs
        for (j, &(t, x)) in w.slots.iter().enumerate() {
            let pos = w.gens.len() + j;
            let cj = conns[t as usize];
            let pl = &cj.jet.product.words;
            for (z, c) in cj.map.col(x as usize).iter() {
                let pw = pl.word(z);
                let sub: Vec<Fed> = pw
                    .entries()
                    .into_iter()
                    .map(|f| match f {
                        Fed::Slot(0, m) => Fed::Slot(0, m),
                        Fed::Slot(_, y) => Fed::Slot(t + 1, y),
                        other => other,
                    })
                    .collect();
                let v = tl.substitute(n, &o, &shifted, pos, pw.arity(), &SparseVec::unit(pw.op as usize), &sub)?;
                out.add_scaled(&tl.project(&v)?, c);
            }
        }
        Ok(out)
    })?;
    Ok(ProductConnection { source, target, map })
}

/// `P_A(id, f): P_A(M, E) → P_A(M, E_1..E_m)` for `f: E → P_A(E_1..E_m)`.
fn product_with_identity(jet: &JetModule, pc: &ProductConnection, f: &GradedMap) -> Result<GradedMap> {
    let pl = &jet.product.words;
    let (sl, tl) = (&pc.source.words, &pc.target.words);
    pl.map_from_words(tl.carrier().space().clone(), f.degree(), |w| {
        let n = w.arity();
        let o = SparseVec::unit(w.op as usize);
        let entries = w.entries();
        let pos = entries.iter().position(|f| matches!(f, Fed::Slot(1, _))).expect("E slot");
        let Fed::Slot(_, e) = entries[pos] else { unreachable!() };
        let mut out = SparseVec::new();
        for (z, c) in f.col(e as usize).iter() {
            let fw = sl.word(z);
            let sub: Vec<Fed> = fw
                .entries()
                .into_iter()
                .map(|x| match x {
                    Fed::Slot(t, y) => Fed::Slot(t + 1, y),
                    other => other,
                })
                .collect();
            let v = tl.substitute(n, &o, &entries, pos, fw.arity(), &SparseVec::unit(fw.op as usize), &sub)?;
            out.add_scaled(&tl.project(&v)?, c);
        }
        Ok(out)
    })
}

/// `∇f = (∇_1..∇_m) ∘ f − P_A(id, f) ∘ ∇` for `f: E → P_A(E_1..E_m)`.
pub fn derivative_of_morphism(f: &GradedMap, nabla: &Connection, pc: &ProductConnection) -> Result<GradedMap> {
    let first = pc.map.compose(f)?;
    let second = product_with_identity(&nabla.jet, pc, f)?.compose(&nabla.map)?;
    first.sub(&second)
}
