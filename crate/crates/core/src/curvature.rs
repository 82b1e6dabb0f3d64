//! Curvature forms on free algebras over a module, Bianchi witnesses, and
//! the Maurer–Cartan deformation pipeline with gauge transport.
//!
//! `S*_A(M)` is modelled by words in the generators of `A` and a symmetric
//! slot holding the generators of the free module `M`, so derivations are
//! fixed by their values on both kinds of input.

use std::sync::Arc;

use num_traits::One;

use crate::algebra::{free_algebra_with, OperadAlgebra};
use crate::complexes::null_homotopy;
use crate::connection::{canonical_connection, jet_module, Connection};
use crate::error::{Error, Result};
use crate::lax::{add_words, Fed, Image, Lax, SlotKind, SlotType, Word, WordVec};
use crate::linalg::{qf, GradedMap, Rational, SparseVec};
use crate::modules::{free_a_algebra_with, free_sam_module, generator_complex, kahler, AModule, Derivation, LaxProduct};

/// `w` rewritten in `target`, with slot types renamed by `remap`.
fn reword(target: &Lax, w: &Word, remap: &dyn Fn(u16) -> u16) -> Result<WordVec> {
    let entries: Vec<Fed> = w
        .entries()
        .into_iter()
        .map(|f| match f {
            Fed::Slot(t, x) => Fed::Slot(remap(t), x),
            other => other,
        })
        .collect();
    target.canon(w.arity(), &SparseVec::unit(w.op as usize), &entries)
}

fn vec_to_words(target: &Lax, source: &Lax, v: &SparseVec, remap: &dyn Fn(u16) -> u16) -> Result<WordVec> {
    let mut out = WordVec::new();
    for (i, c) in v.iter() {
        add_words(&mut out, &reword(target, source.word(i), remap)?, c);
    }
    Ok(out)
}

/// `p(x_1..x_n)` for combinations of words, expanded multilinearly.
fn compose_vecs(target: &Lax, n: usize, p: usize, inputs: &[WordVec]) -> Result<WordVec> {
    let mut acc: Vec<(Rational, Vec<&Word>)> = vec![(Rational::one(), Vec::new())];
    for input in inputs {
        let mut next = Vec::new();
        for (c, ws) in &acc {
            for (w, d) in input {
                let mut ws = ws.clone();
                ws.push(w);
                next.push((c * d, ws));
            }
        }
        acc = next;
    }
    let mut out = WordVec::new();
    for (c, ws) in acc {
        add_words(&mut out, &target.compose_words(n, p, &ws)?, &c);
    }
    Ok(out)
}

/// `w` with slot types renamed, as a raw word (its shape need not be one
/// the target allows on its own).
fn raw_reword(w: &Word, to: u16) -> WordVec {
    let mut v = WordVec::new();
    let slots = w.slots.iter().map(|&(_, x)| (to, x)).collect();
    v.insert(Word { op: w.op, gens: w.gens.clone(), slots }, Rational::one());
    v
}

/// Flattens an element of a lax product of free modules into `target`,
/// sending factor `t` to the slot type `slot_of[t]`.
fn flatten_product(target: &Lax, product: &LaxProduct, v: &SparseVec, slot_of: &[u16]) -> Result<WordVec> {
    let pl = &product.words;
    let unit = target.operad().unit().clone();
    let mut out = WordVec::new();
    for (i, c) in v.iter() {
        let w = pl.word(i);
        let inputs = w
            .entries()
            .into_iter()
            .map(|f| match f {
                Fed::Slot(t, m) => {
                    let fl = product.factors[t as usize].words().ok_or_else(|| {
                        Error::NotFreeModule(product.factors[t as usize].name().to_string())
                    })?;
                    Ok(raw_reword(fl.word(m as usize), slot_of[t as usize]))
                }
                Fed::Gen(g) => Ok(unit
                    .iter()
                    .map(|(o, u)| (Word { op: o as u32, gens: vec![g], slots: vec![] }, u.clone()))
                    .collect()),
                Fed::Elem(_) => unreachable!("canonical words hold no elements"),
            })
            .collect::<Result<Vec<_>>>()?;
        add_words(&mut out, &compose_vecs(target, w.arity(), w.op as usize, &inputs)?, c);
    }
    Ok(out)
}

/// The derivation of `lax` of the given degree with the given values on
/// generators and slot entries.
pub fn derivation_on(lax: &Lax, degree: i32, image: &dyn Fn(Fed) -> Result<WordVec>) -> Result<GradedMap> {
    let img = |f: Fed| -> Result<Image> { Ok(Image { linear: vec![], words: image(f)? }) };
    lax.derivation_map(degree, &img, true)
}

/// `[x, y] = xy − (−1)^{|x||y|} yx`.
pub fn bracket(x: &GradedMap, y: &GradedMap) -> Result<GradedMap> {
    let xy = x.compose(y)?;
    let yx = y.compose(x)?;
    if (x.degree() * y.degree()) % 2 != 0 {
        xy.add(&yx)
    } else {
        xy.sub(&yx)
    }
}

/// `Σ (1/n!) (ad q)^n x`, stopping once a term vanishes. `q` must raise a
/// bounded grading, so at most `bound` terms are nonzero.
pub fn exp_ad(q: &GradedMap, x: &GradedMap, bound: usize) -> Result<GradedMap> {
    let mut total = x.clone();
    let mut term = x.clone();
    for n in 1..=bound + 1 {
        term = bracket(q, &term)?.scale(&qf(1, n as i64));
        if term.is_zero() {
            return Ok(total);
        }
        total = total.add(&term)?;
    }
    Err(Error::truncation("exp(ad Q)", "the series did not terminate within the symmetric cap"))
}

fn slot_count(lax: &Lax, i: usize, t: u16) -> usize {
    lax.word(i).slots.iter().filter(|s| s.0 == t).count()
}

/// Keeps the rows of `f` whose target word holds `n` entries of slot type `t`.
fn rows_with(f: &GradedMap, lax: &Lax, t: u16, n: usize) -> Result<GradedMap> {
    let cols = f
        .cols()
        .iter()
        .map(|c| c.reindex(|j| (slot_count(lax, j, t) == n).then_some(j)))
        .collect();
    GradedMap::new(f.source().clone(), f.target().clone(), f.degree(), cols)
}

/// Whether `f` sends words with `n` entries of slot type `t` to words with
/// exactly `n + by`.
pub fn raises_slots(f: &GradedMap, lax: &Lax, t: u16, by: usize) -> bool {
    f.cols().iter().enumerate().all(|(i, c)| {
        let n = slot_count(lax, i, t) + by;
        c.iter().all(|(j, _)| slot_count(lax, j, t) == n)
    })
}

/// `S*_A(M)` for a derivation `d: A → M` into a free module, with the
/// inclusions of `A` and `M`.
#[derive(Clone, Debug)]
pub struct SymmetricAlgebra {
    pub derivation: Derivation,
    pub algebra: Arc<OperadAlgebra>,
    pub words: Arc<Lax>,
    pub max_n: usize,
    pub unit: GradedMap,
    pub inclusion: GradedMap,
}

fn single_plain_slot(m: &AModule) -> Result<SlotType> {
    let not_free = || Error::NotFreeModule(m.name().to_string());
    let lax = m.words().ok_or_else(not_free)?;
    match lax.spec().slots.as_slice() {
        [s] if matches!(s.kind, SlotKind::Plain { .. }) => Ok(s.clone()),
        _ => Err(not_free()),
    }
}

pub fn symmetric_algebra(d: &Derivation, max_n: usize) -> Result<SymmetricAlgebra> {
    let m = &d.target;
    let slot = single_plain_slot(m)?;
    let (s, unit) = free_a_algebra_with(&d.algebra, SlotType { symmetric: true, ..slot }, max_n)?;
    let words = s.words().expect("word algebra").clone();
    let ml = m.words().expect("checked free").clone();
    let inclusion = ml.map_from_words(words.carrier().space().clone(), 0, |w| {
        words.project(&reword(&words, w, &|t| t)?)
    })?;
    Ok(SymmetricAlgebra { derivation: d.clone(), algebra: s, words, max_n, unit, inclusion })
}

impl SymmetricAlgebra {
    /// `d(g)` for generator `g` of `A`, as words of `S*_A(M)`.
    fn d_of_generator(&self, g: usize) -> Result<WordVec> {
        let d = &self.derivation;
        let ml = d.target.words().expect("free module");
        let v = d.map.apply(&d.algebra.generators()[g]);
        vec_to_words(&self.words, ml, &v, &|t| t)
    }

    /// The element `[1; w_j]` of `M` for a generator `w_j`.
    pub fn module_generator(&self, j: usize) -> Result<SparseVec> {
        let ml = self.derivation.target.words().expect("free module");
        ml.project(&ml.canon(1, ml.operad().unit(), &[Fed::Slot(0, j as u32)])?)
    }

    /// Elements of `A`, as words of `S*_A(M)`.
    fn algebra_words(&self, v: &SparseVec) -> Result<WordVec> {
        let a = &self.derivation.algebra;
        let unit = a.operad().unit();
        let mut out = WordVec::new();
        for (b, c) in v.iter() {
            add_words(&mut out, &self.words.canon(1, unit, &[Fed::Elem(b as u32)])?, c);
        }
        Ok(out)
    }

    /// The differential of `S*_A(M)`.
    pub fn differential(&self) -> &GradedMap {
        self.words.carrier().differential()
    }

    /// `R ∘ ι_M` restricted to the rows of symmetric degree `n`.
    pub fn component(&self, f: &GradedMap, n: usize) -> Result<GradedMap> {
        rows_with(&f.compose(&self.inclusion)?, &self.words, 0, n)
    }

    /// Elements of `P_A(M, M)` pushed to `S^2_A(M)`.
    pub fn symmetrise(&self, product: &LaxProduct, f: &GradedMap) -> Result<GradedMap> {
        let cols = f
            .cols()
            .iter()
            .map(|c| self.words.project(&flatten_product(&self.words, product, c, &[0, 0])?))
            .collect::<Result<Vec<_>>>()?;
        GradedMap::new(f.source().clone(), self.words.carrier().space().clone(), f.degree(), cols)
    }
}

/// A derivation of `S*_A(M)` (or of `S*_A(M, E)`) as a matrix.
#[derive(Clone, Debug)]
pub struct FreeDerivation {
    pub map: GradedMap,
}

/// `Q_∇`: `d` on `A` and `∇` (symmetrised) on the generators of `M`.
pub fn q_nabla(sa: &SymmetricAlgebra, nabla: &Connection) -> Result<FreeDerivation> {
    let product = &nabla.jet.product;
    let image = |f: Fed| -> Result<WordVec> {
        match f {
            Fed::Gen(g) => sa.d_of_generator(g as usize),
            Fed::Slot(_, j) => {
                let v = nabla.map.apply(&sa.module_generator(j as usize)?);
                flatten_product(&sa.words, product, &v, &[0, 0])
            }
            Fed::Elem(_) => unreachable!("canonical words hold no elements"),
        }
    };
    Ok(FreeDerivation { map: derivation_on(&sa.words, 0, &image)? })
}

/// The canonical connection on `M` and its `Q_∇`.
pub fn canonical_q(sa: &SymmetricAlgebra) -> Result<(Connection, FreeDerivation)> {
    let m = &sa.derivation.target;
    let jet = Arc::new(jet_module(m, &sa.derivation, 2)?);
    let nabla = canonical_connection(&jet)?;
    let q = q_nabla(sa, &nabla)?;
    Ok((nabla, q))
}

/// Whether `q` restricts to `d` on `A` and satisfies the Leibniz rule on
/// binary products of basis elements.
pub fn is_free_derivation(sa: &SymmetricAlgebra, q: &GradedMap) -> Result<bool> {
    let d = &sa.derivation;
    if q.compose(&sa.unit)? != sa.inclusion.compose(&d.map)? {
        return Ok(false);
    }
    let s = &sa.algebra;
    let sp = s.carrier().space();
    let op = s.operad();
    let cap = sa.words.weight_cap();
    for p in 0..op.dim(2) {
        let pv = SparseVec::unit(p);
        let pdeg = op.degree(2, p);
        for x in 0..s.dim() {
            for y in 0..s.dim() {
                if sp.weight(x) + sp.weight(y) > cap {
                    continue;
                }
                let (xv, yv) = (SparseVec::unit(x), SparseVec::unit(y));
                let lhs = q.apply(&s.mult(2, &pv, &[xv.clone(), yv.clone()])?);
                let mut rhs = s.mult(2, &pv, &[q.apply(&xv), yv.clone()])?;
                let sg = crate::linalg::sign((q.degree() * (pdeg + sp.degree(x))) % 2 != 0);
                rhs.add_scaled(&s.mult(2, &pv, &[xv, q.apply(&yv)])?, &sg);
                if lhs != rhs {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// `exp(ad Q) ∂` with its components `M → S^n_A(M)`.
#[derive(Clone, Debug)]
pub struct CurvatureForm {
    pub map: GradedMap,
    pub components: Vec<GradedMap>,
}

pub fn total_curvature(sa: &SymmetricAlgebra, q: &FreeDerivation) -> Result<CurvatureForm> {
    let map = exp_ad(&q.map, sa.differential(), sa.max_n)?;
    let components = (0..=sa.max_n).map(|n| sa.component(&map, n)).collect::<Result<Vec<_>>>()?;
    Ok(CurvatureForm { map, components })
}

/// `S*_A(M, E)` for a free module `E`, as a module over `S*_A(M)`.
#[derive(Clone, Debug)]
pub struct SymmetricModule {
    pub base: SymmetricAlgebra,
    /// `E` itself.
    pub source: Arc<AModule>,
    pub module: Arc<AModule>,
    pub words: Arc<Lax>,
    pub inclusion: GradedMap,
}

pub fn symmetric_module(sa: &SymmetricAlgebra, e: &Arc<AModule>) -> Result<SymmetricModule> {
    let slot = single_plain_slot(e)?;
    // the extra differential of E refers to its own slot type 0
    let kind = match slot.kind {
        SlotKind::Plain { space, extra } => SlotKind::Plain {
            space,
            extra: extra.map(|ex| {
                ex.into_iter()
                    .map(|v| {
                        v.into_iter()
                            .map(|(mut w, c)| {
                                for s in &mut w.slots {
                                    s.0 = 1;
                                }
                                (w, c)
                            })
                            .collect()
                    })
                    .collect()
            }),
        },
        k => k,
    };
    let m_slot = sa.words.spec().slots[0].clone();
    let (module, words) = free_sam_module(&sa.algebra, m_slot, SlotType { kind, symmetric: false }, sa.max_n)?;
    let el = e.words().expect("free module").clone();
    let inclusion = el.map_from_words(words.carrier().space().clone(), 0, |w| {
        words.project(&reword(&words, w, &|_| 1)?)
    })?;
    Ok(SymmetricModule { base: sa.clone(), source: e.clone(), module, words, inclusion })
}

impl SymmetricModule {
    pub fn differential(&self) -> &GradedMap {
        self.words.carrier().differential()
    }

    pub fn component(&self, f: &GradedMap, n: usize) -> Result<GradedMap> {
        rows_with(&f.compose(&self.inclusion)?, &self.words, 0, n)
    }

    /// Elements of `P_A(M, E)` pushed to `S^1_A(M, E)`.
    pub fn flatten(&self, product: &LaxProduct, f: &GradedMap) -> Result<GradedMap> {
        let cols = f
            .cols()
            .iter()
            .map(|c| self.words.project(&flatten_product(&self.words, product, c, &[0, 1])?))
            .collect::<Result<Vec<_>>>()?;
        GradedMap::new(f.source().clone(), self.words.carrier().space().clone(), f.degree(), cols)
    }
}

/// `D_∇`: `Q` on `S*_A(M)` and `∇_E` on the generators of `E`.
pub fn d_nabla(sm: &SymmetricModule, q_nabla: &Connection, nabla_e: &Connection) -> Result<FreeDerivation> {
    let sa = &sm.base;
    let el = nabla_e.jet.module.words().ok_or_else(|| Error::NotFreeModule(nabla_e.jet.module.name().to_string()))?;
    let image = |f: Fed| -> Result<WordVec> {
        match f {
            Fed::Gen(g) => sa.d_of_generator(g as usize),
            Fed::Slot(0, j) => {
                let v = q_nabla.map.apply(&sa.module_generator(j as usize)?);
                flatten_product(&sa.words, &q_nabla.jet.product, &v, &[0, 0])
            }
            Fed::Slot(_, j) => {
                let unit = el.project(&el.canon(1, el.operad().unit(), &[Fed::Slot(0, j)])?)?;
                let v = nabla_e.map.apply(&unit);
                flatten_product(&sm.words, &nabla_e.jet.product, &v, &[0, 1])
            }
            Fed::Elem(_) => unreachable!("canonical words hold no elements"),
        }
    };
    Ok(FreeDerivation { map: derivation_on(&sm.words, 0, &image)? })
}

/// Whether `d` restricts to `∇_E` on `E` and satisfies
/// `D(s·e) = Q(s)·e ± s·D(e)` for binary actions of basis elements.
pub fn is_free_q_derivation(sm: &SymmetricModule, q: &FreeDerivation, d: &FreeDerivation, nabla_e: &Connection) -> Result<bool> {
    if d.map.compose(&sm.inclusion)? != sm.flatten(&nabla_e.jet.product, &nabla_e.map)? {
        return Ok(false);
    }
    let s = &sm.base.algebra;
    let (ssp, esp) = (s.carrier().space(), sm.words.carrier().space());
    let op = s.operad();
    let cap = sm.words.weight_cap();
    for p in 0..op.dim(2) {
        let pv = SparseVec::unit(p);
        for x in 0..s.dim() {
            for y in 0..sm.words.dim() {
                if ssp.weight(x) + esp.weight(y) > cap {
                    continue;
                }
                let (xv, yv) = (SparseVec::unit(x), SparseVec::unit(y));
                let lhs = d.map.apply(&sm.module.act(&pv, std::slice::from_ref(&xv), &yv)?);
                let mut rhs = sm.module.act(&pv, &[q.map.apply(&xv)], &yv)?;
                let sg = crate::linalg::sign((d.map.degree() * (op.degree(2, p) + ssp.degree(x))) % 2 != 0);
                rhs.add_scaled(&sm.module.act(&pv, &[xv], &d.map.apply(&yv))?, &sg);
                if lhs != rhs {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// `exp(ad D) ∂` on `S*_A(M, E)` with its components `E → S^n_A(M, E)`.
pub fn total_curvature_module(sm: &SymmetricModule, d: &FreeDerivation) -> Result<CurvatureForm> {
    let map = exp_ad(&d.map, sm.differential(), sm.base.max_n)?;
    let components = (0..=sm.base.max_n).map(|n| sm.component(&map, n)).collect::<Result<Vec<_>>>()?;
    Ok(CurvatureForm { map, components })
}

/// `α̂`, the composite `α̂ ∘ α`, a null-homotopy `h` of it and the bracket
/// `[∂, R^{(3)}]` (resp. `[∂, T^{(2)}]`) from the curvature form.
#[derive(Clone, Debug)]
pub struct BianchiWitness {
    pub alpha: GradedMap,
    pub alpha_hat: GradedMap,
    pub composite: GradedMap,
    pub homotopy: GradedMap,
    pub curvature_bracket: GradedMap,
}

fn degree_one_bracket(d_target: &GradedMap, r: &GradedMap, d_source: &GradedMap) -> Result<GradedMap> {
    d_target.compose(r)?.add(&r.compose(d_source)?)
}

/// The Bianchi identity for `M`: `α = R^{(2)}`, `α̂` its `A`-linear
/// extension to `S*_A(M)`.
pub fn bianchi_witness(sa: &SymmetricAlgebra, r: &CurvatureForm) -> Result<BianchiWitness> {
    if sa.max_n < 3 {
        return Err(Error::truncation("Bianchi witness", "needs symmetric degree 3"));
    }
    let alpha = r.components[2].clone();
    let image = |f: Fed| -> Result<WordVec> {
        match f {
            Fed::Slot(_, j) => Ok(sa.words.lift(&alpha.apply(&sa.module_generator(j as usize)?))),
            _ => Ok(WordVec::new()),
        }
    };
    let alpha_hat = derivation_on(&sa.words, 1, &image)?;
    let composite = alpha_hat.compose(&alpha)?;
    let m = sa.derivation.target.carrier();
    let homotopy = null_homotopy(&composite, m, sa.words.carrier())
        .ok_or_else(|| Error::NoWitness("no null-homotopy of the Bianchi composite".into()))?;
    let curvature_bracket = degree_one_bracket(sa.differential(), &r.components[3], m.differential())?;
    Ok(BianchiWitness { alpha, alpha_hat, composite, homotopy, curvature_bracket })
}

/// The Bianchi identity for `E`: `α_E = T^{(1)}`, with `α̂_E` acting by `α`
/// on `M` and by `α_E` on `E`.
pub fn bianchi_witness_module(sm: &SymmetricModule, r: &CurvatureForm, t: &CurvatureForm) -> Result<BianchiWitness> {
    let sa = &sm.base;
    if sa.max_n < 2 {
        return Err(Error::truncation("Bianchi witness", "needs symmetric degree 2"));
    }
    let alpha_e = t.components[1].clone();
    let alpha = r.components[2].clone();
    let el = sm.source.words().expect("free module").clone();
    let image = |f: Fed| -> Result<WordVec> {
        match f {
            Fed::Slot(0, j) => Ok(sa.words.lift(&alpha.apply(&sa.module_generator(j as usize)?))),
            Fed::Slot(_, j) => {
                let unit = el.project(&el.canon(1, el.operad().unit(), &[Fed::Slot(0, j)])?)?;
                Ok(sm.words.lift(&alpha_e.apply(&unit)))
            }
            _ => Ok(WordVec::new()),
        }
    };
    let alpha_hat = derivation_on(&sm.words, 1, &image)?;
    let composite = alpha_hat.compose(&alpha_e)?;
    let e = sm.source.carrier();
    let homotopy = null_homotopy(&composite, e, sm.words.carrier())
        .ok_or_else(|| Error::NoWitness("no null-homotopy of the Bianchi composite".into()))?;
    let curvature_bracket = degree_one_bracket(sm.differential(), &t.components[2], e.differential())?;
    Ok(BianchiWitness { alpha: alpha_e, alpha_hat, composite, homotopy, curvature_bracket })
}

/// A degree-one map from the generators of a free word algebra into it,
/// given per generator input (`Gen` or, for `S*_A(M)`, `Slot`).
#[derive(Clone, Debug)]
pub struct McElement {
    pub words: Arc<Lax>,
    pub values: Vec<(Fed, SparseVec)>,
}

impl McElement {
    /// `g` on the generators of `A = F_O(V)`.
    pub fn on_algebra(a: &OperadAlgebra, values: Vec<SparseVec>) -> Result<McElement> {
        let words = a.words().ok_or_else(|| Error::Dimension("a word algebra is required".into()))?.clone();
        Ok(McElement { words, values: values.into_iter().enumerate().map(|(i, v)| (Fed::Gen(i as u32), v)).collect() })
    }

    pub fn zero(a: &OperadAlgebra) -> Result<McElement> {
        let n = a.presentation()?.degree.len();
        McElement::on_algebra(a, vec![SparseVec::new(); n])
    }

    fn value(&self, f: Fed) -> Option<&SparseVec> {
        self.values.iter().find(|(g, _)| *g == f).map(|(_, v)| v)
    }

    /// `ĝ`, the derivation extending `g`.
    pub fn hat(&self) -> Result<GradedMap> {
        hat_of(&self.words, &self.values, 1)
    }

    /// `(∂ + ĝ)²`.
    pub fn defect(&self) -> Result<GradedMap> {
        let d = self.words.carrier().differential().add(&self.hat()?)?;
        d.compose(&d)
    }
}

fn hat_of(lax: &Lax, values: &[(Fed, SparseVec)], degree: i32) -> Result<GradedMap> {
    let image = |f: Fed| -> Result<WordVec> {
        Ok(values.iter().find(|(g, _)| *g == f).map(|(_, v)| lax.lift(v)).unwrap_or_default())
    };
    derivation_on(lax, degree, &image)
}

/// Whether `∂ + ĝ` squares to zero within the caps.
pub fn mc_check(g: &McElement) -> Result<bool> {
    Ok(g.defect()?.is_zero())
}

/// `A(g)`: the free algebra with differential `∂ + ĝ`.
pub fn deform(a: &OperadAlgebra, g: &McElement) -> Result<Arc<OperadAlgebra>> {
    let pres = a.presentation()?;
    let lax = a.words().ok_or_else(|| Error::Dimension("a word algebra is required".into()))?;
    let v = generator_complex(a)?;
    let extra = (0..pres.diff.len())
        .map(|i| {
            let mut w = pres.diff[i].words.clone();
            if let Some(x) = g.value(Fed::Gen(i as u32)) {
                add_words(&mut w, &lax.lift(x), &Rational::one());
            }
            w
        })
        .collect();
    Ok(Arc::new(free_algebra_with(a.operad().clone(), &v, lax.weight_cap(), Some(extra))?))
}

/// `M(g)`: the free module on the generators with the differential making
/// `d: A(g) → M(g)` a morphism.
pub fn deform_module(a: &OperadAlgebra, g: &McElement) -> Result<(Arc<AModule>, Derivation)> {
    kahler(&deform(a, g)?)
}

/// The curvature of the deformed module: `R(g)_∇ = exp(ad ∇) ∂(g)` and the
/// induced element `R̂(g) = R(g)_∇ − ∂_0` on `S*_A(M)`.
#[derive(Clone, Debug)]
pub struct CurvatureMc {
    pub deformed: SymmetricAlgebra,
    pub undeformed: SymmetricAlgebra,
    pub q: FreeDerivation,
    pub curvature: CurvatureForm,
    pub element: McElement,
}

pub fn curvature_mc(a: &Arc<OperadAlgebra>, g: &McElement, max_n: usize) -> Result<CurvatureMc> {
    let ag = deform(a, g)?;
    let (_, dg) = kahler(&ag)?;
    let deformed = symmetric_algebra(&dg, max_n)?;
    let (_, d0) = kahler(a)?;
    let undeformed = symmetric_algebra(&d0, max_n)?;
    let (s1, s0) = (deformed.words.carrier().space(), undeformed.words.carrier().space());
    if s1.basis() != s0.basis() {
        return Err(Error::Dimension("deformation changed the word basis".into()));
    }
    let (_, q) = canonical_q(&deformed)?;
    let curvature = total_curvature(&deformed, &q)?;
    let r_hat = curvature.map.sub(undeformed.differential())?.with_spaces(s0.clone(), s0.clone())?;
    let lax = &undeformed.words;
    let mut values = Vec::new();
    for (gi, gen) in a.generators().iter().enumerate() {
        let x = undeformed.unit.apply(gen);
        values.push((Fed::Gen(gi as u32), r_hat.apply(&x)));
    }
    for j in 0..generator_complex(a)?.dim() {
        let x = undeformed.inclusion.apply(&undeformed.module_generator(j)?);
        values.push((Fed::Slot(0, j as u32), r_hat.apply(&x)));
    }
    Ok(CurvatureMc { deformed, undeformed: undeformed.clone(), q, curvature, element: McElement { words: lax.clone(), values } })
}

/// A formal family `g(t) = Σ_k t^k g_k` of maps on the generators.
#[derive(Clone, Debug)]
pub struct GaugeFamily {
    pub algebra: Arc<OperadAlgebra>,
    pub coefficients: Vec<McElement>,
    pub order: usize,
}

fn series_coeff(xi: &[Vec<SparseVec>], k: usize, n: usize) -> Vec<SparseVec> {
    xi.get(k).cloned().unwrap_or_else(|| vec![SparseVec::new(); n])
}

/// Solves `ĝ′(t) = [ξ̂(t), ∂ + ĝ(t)]` up to `t^order`; `xi[k][i]` is the
/// coefficient of `t^k` in `ξ(v_i)`.
pub fn gauge_flow(a: &Arc<OperadAlgebra>, g0: &McElement, xi: &[Vec<SparseVec>], order: usize) -> Result<GaugeFamily> {
    let lax = a.words().ok_or_else(|| Error::Dimension("a word algebra is required".into()))?.clone();
    let gens = a.generators().to_vec();
    let n = gens.len();
    let xi_hats = (0..order)
        .map(|k| {
            let vals: Vec<(Fed, SparseVec)> =
                series_coeff(xi, k, n).into_iter().enumerate().map(|(i, v)| (Fed::Gen(i as u32), v)).collect();
            hat_of(&lax, &vals, 0)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut coefficients = vec![g0.clone()];
    let mut ds = vec![lax.carrier().differential().add(&g0.hat()?)?];
    for k in 0..order {
        let mut acc = GradedMap::zero(lax.carrier().space().clone(), lax.carrier().space().clone(), 1);
        for i in 0..=k {
            acc = acc.add(&bracket(&xi_hats[i], &ds[k - i])?)?;
        }
        let acc = acc.scale(&qf(1, k as i64 + 1));
        let values: Vec<SparseVec> = gens.iter().map(|x| acc.apply(x)).collect();
        let gk = McElement::on_algebra(a, values)?;
        ds.push(gk.hat()?);
        coefficients.push(gk);
    }
    Ok(GaugeFamily { algebra: a.clone(), coefficients, order })
}

impl GaugeFamily {
    /// The coefficients of `t^k`, `k = 0..=2·order`, of `(∂ + ĝ(t))²`.
    pub fn defect_coefficients(&self) -> Result<Vec<GradedMap>> {
        let lax = &self.coefficients[0].words;
        let mut ds = vec![lax.carrier().differential().add(&self.coefficients[0].hat()?)?];
        for g in &self.coefficients[1..] {
            ds.push(g.hat()?);
        }
        let t = self.order;
        (0..=2 * t)
            .map(|k| {
                let mut acc = GradedMap::zero(lax.carrier().space().clone(), lax.carrier().space().clone(), 2);
                for i in k.saturating_sub(t)..=k.min(t) {
                    acc = acc.add(&ds[i].compose(&ds[k - i])?)?;
                }
                Ok(acc)
            })
            .collect()
    }

    /// `g(t_0)` for a rational `t_0`.
    pub fn evaluate(&self, t0: &Rational) -> McElement {
        let base = &self.coefficients[0];
        let mut values: Vec<(Fed, SparseVec)> = base.values.iter().map(|(f, _)| (*f, SparseVec::new())).collect();
        let mut power = Rational::one();
        for g in &self.coefficients {
            for (slot, (_, v)) in values.iter_mut().zip(&g.values) {
                slot.1.add_scaled(v, &power);
            }
            power = &power * t0;
        }
        McElement { words: base.words.clone(), values }
    }
}

/// Per order `k < T`, whether the `t^k` coefficients of `d/dt R̂(g(t))` and
/// `[exp(ad ∇) ξ̂(t), ∂_0 + R̂(g(t))]` agree. With `exp_ad_xi` off, `ξ̂` is
/// used without the exponential.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransportReport {
    pub orders: Vec<bool>,
}

impl TransportReport {
    pub fn holds(&self) -> bool {
        self.orders.iter().all(|&b| b)
    }
}

/// `X^S`: a derivation of `A` given on generators, extended to `S*_A(M)` by
/// `x ↦ X(x)` and `dx ↦ d(X(x))`.
fn lift_to_s(sa: &SymmetricAlgebra, values: &[SparseVec], degree: i32) -> Result<GradedMap> {
    let d = &sa.derivation;
    let ml = d.target.words().expect("free module");
    let image = |f: Fed| -> Result<WordVec> {
        match f {
            Fed::Gen(i) => sa.algebra_words(&values[i as usize]),
            Fed::Slot(_, j) => vec_to_words(&sa.words, ml, &d.map.apply(&values[j as usize]), &|t| t),
            Fed::Elem(_) => unreachable!("canonical words hold no elements"),
        }
    };
    derivation_on(&sa.words, degree, &image)
}

pub fn gauge_transport_check(
    family: &GaugeFamily,
    xi: &[Vec<SparseVec>],
    max_n: usize,
    exp_ad_xi: bool,
) -> Result<TransportReport> {
    let a = &family.algebra;
    let (_, d0) = kahler(a)?;
    let sa = symmetric_algebra(&d0, max_n)?;
    let (_, q) = canonical_q(&sa)?;
    let n = a.generators().len();
    let values = |g: &McElement| -> Vec<SparseVec> {
        (0..n).map(|i| g.value(Fed::Gen(i as u32)).cloned().unwrap_or_default()).collect()
    };
    let t = family.order;
    let mut rs = Vec::with_capacity(t + 1);
    for (k, g) in family.coefficients.iter().enumerate() {
        let mut x = lift_to_s(&sa, &values(g), 1)?;
        if k == 0 {
            x = x.add(sa.differential())?;
        }
        rs.push(exp_ad(&q.map, &x, max_n)?);
    }
    let xs = (0..t)
        .map(|k| {
            let x = lift_to_s(&sa, &series_coeff(xi, k, n), 0)?;
            if exp_ad_xi {
                exp_ad(&q.map, &x, max_n)
            } else {
                Ok(x)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut orders = Vec::with_capacity(t);
    for k in 0..t {
        let lhs = rs[k + 1].scale(&Rational::from_integer(k as i64 + 1));
        let mut rhs = GradedMap::zero(lhs.source().clone(), lhs.target().clone(), 1);
        for i in 0..=k {
            rhs = rhs.add(&bracket(&xs[i], &rs[k - i])?)?;
        }
        orders.push(lhs == rhs);
    }
    Ok(TransportReport { orders })
}
