//! Words over an operad: the common engine behind free algebras, enveloping
//! algebras, Kähler differentials, lax and symmetric products.
//!
//! A word `[o; g_1..g_n | x_1..x_s]` is an operation `o ∈ O(n+s)` fed with
//! algebra generators `g_i` followed by slot entries `x_j`. Words are kept
//! in a canonical order (generators sorted, slots sorted by type, symmetric
//! slots also by basis), so the coinvariant relations reduce to stabilizer
//! relations among equal neighbours. Everything else (module relations,
//! multiplication relations of a tabulated algebra, Leibniz relations) is
//! generated explicitly over the truncated ambient and quotiented out.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::complexes::Complex;
use crate::error::{Error, Result};
use crate::linalg::{
    quotient_by_echelon, sign, Basis, Echelon, GradedMap, GradedSpace, Quotient, Rational, SparseVec,
};
use crate::operad::Operad;
use crate::perm::Permutation;

/// An operation together with its canonical inputs.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word {
    pub op: u32,
    pub gens: Vec<u32>,
    pub slots: Vec<(u16, u32)>,
}

impl Word {
    pub fn arity(&self) -> usize {
        self.gens.len() + self.slots.len()
    }

    pub fn entries(&self) -> Vec<Fed> {
        self.gens
            .iter()
            .map(|&g| Fed::Gen(g))
            .chain(self.slots.iter().map(|&(t, x)| Fed::Slot(t, x)))
            .collect()
    }
}

/// Linear combination of words.
pub type WordVec = BTreeMap<Word, Rational>;

pub fn add_word(v: &mut WordVec, w: Word, c: &Rational) {
    if c.is_zero() {
        return;
    }
    match v.entry(w) {
        Entry::Occupied(mut e) => {
            *e.get_mut() += c;
            if e.get().is_zero() {
                e.remove();
            }
        }
        Entry::Vacant(e) => {
            e.insert(c.clone());
        }
    }
}

pub fn add_words(v: &mut WordVec, other: &WordVec, c: &Rational) {
    for (w, x) in other {
        add_word(v, w.clone(), &(x * c));
    }
}

/// An input of an operation before canonicalization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Fed {
    /// A generator of the coefficient algebra.
    Gen(u32),
    /// A basis element of the coefficient algebra, still to be decomposed.
    Elem(u32),
    /// A basis element of the slot space of the given type.
    Slot(u16, u32),
}

/// `coeff · op(gens)`: one term of the decomposition of an algebra element.
#[derive(Clone, Debug)]
pub struct Term {
    pub coeff: Rational,
    pub arity: usize,
    pub op: SparseVec,
    pub gens: Vec<u32>,
}

/// How a coefficient algebra is generated: its generators, their
/// differentials as words, and a decomposition of each basis element.
#[derive(Clone, Debug)]
pub struct Presentation {
    /// Each generator as an element of the algebra (empty for raw generators).
    pub gen_elems: Vec<SparseVec>,
    pub degree: Vec<i32>,
    pub weight: Vec<u32>,
    pub label: Vec<String>,
    /// `∂g`: a linear part plus slotless words.
    pub diff: Vec<Image>,
    /// Per algebra basis element, its expansion in generators.
    pub decomp: Vec<Vec<Term>>,
    pub elem_degree: Vec<i32>,
    pub elem_weight: Vec<u32>,
    /// Multiplication relations are needed (tabulated algebras).
    pub table: Option<Arc<dyn TableMult>>,
}

/// Multiplication of a tabulated algebra, as needed by the word engine.
pub trait TableMult: Send + Sync + fmt::Debug {
    /// `μ(p; b_1..b_k)` for basis elements.
    fn mult(&self, k: usize, p: usize, bs: &[usize]) -> Result<SparseVec>;
}

/// The action of the coefficient algebra on a module slot.
pub trait ModuleAction: Send + Sync + fmt::Debug {
    fn carrier(&self) -> &Complex;
    /// `ν(p; g_1..g_k; y)` for `p ∈ O(k+1)` and generators `g_i`.
    fn act_gens(&self, p: usize, gens: &[u32], y: usize) -> Result<SparseVec>;
}

#[derive(Clone, Debug)]
pub enum SlotKind {
    /// The free module over a complex; `extra` optionally adds, per basis
    /// element, words to its differential.
    Plain { space: Complex, extra: Option<Vec<WordVec>> },
    Module(Arc<dyn ModuleAction>),
}

#[derive(Clone, Debug)]
pub struct SlotType {
    pub kind: SlotKind,
    pub symmetric: bool,
}

impl SlotType {
    pub fn plain(space: Complex) -> Self {
        SlotType { kind: SlotKind::Plain { space, extra: None }, symmetric: false }
    }

    pub fn module(m: Arc<dyn ModuleAction>) -> Self {
        SlotType { kind: SlotKind::Module(m), symmetric: false }
    }

    pub fn symmetric(mut self) -> Self {
        self.symmetric = true;
        self
    }

    pub fn space(&self) -> &Complex {
        match &self.kind {
            SlotKind::Plain { space, .. } => space,
            SlotKind::Module(m) => m.carrier(),
        }
    }
}

/// Everything needed to build a word quotient.
#[derive(Clone, Debug)]
pub struct LaxSpec {
    pub name: String,
    pub operad: Arc<Operad>,
    pub pres: Arc<Presentation>,
    pub slots: Vec<SlotType>,
    /// Allowed slot counts per type.
    pub shapes: Vec<Vec<usize>>,
    pub weight_cap: u32,
    /// Words with more generators than this vanish.
    pub gen_limit: Option<usize>,
    /// Impose `x ↦ [1; x]` as a derivation on this slot type (its space
    /// must be the coefficient algebra, presented by all of its basis).
    pub leibniz: Option<u16>,
}

impl LaxSpec {
    pub fn new(name: impl Into<String>, operad: Arc<Operad>, pres: Arc<Presentation>, weight_cap: u32) -> Self {
        LaxSpec {
            name: name.into(),
            operad,
            pres,
            slots: Vec::new(),
            shapes: vec![vec![]],
            weight_cap,
            gen_limit: None,
            leibniz: None,
        }
    }

    pub fn with_slots(mut self, slots: Vec<SlotType>, shapes: Vec<Vec<usize>>) -> Self {
        self.slots = slots;
        self.shapes = shapes;
        self
    }
}

/// Image of one input under a derivation: a linear replacement plus words
/// to be inserted in its place.
#[derive(Clone, Debug, Default)]
pub struct Image {
    pub linear: Vec<(Fed, Rational)>,
    pub words: WordVec,
}

impl Image {
    pub fn is_zero(&self) -> bool {
        self.linear.is_empty() && self.words.is_empty()
    }
}

/// The quotient of the truncated word ambient by all relations.
#[derive(Debug)]
pub struct Lax {
    spec: LaxSpec,
    words: Vec<Word>,
    index: HashMap<Word, usize>,
    quotient: Quotient,
    carrier: Complex,
}

fn koszul(a: i32, b: i32) -> bool {
    a % 2 != 0 && b % 2 != 0
}

/// Sorted multisets drawn from `0..n` of the given size.
fn multisets(n: usize, size: usize) -> Vec<Vec<u32>> {
    fn rec(n: usize, size: usize, from: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in from..n {
            cur.push(i as u32);
            rec(n, size, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, size, 0, &mut Vec::new(), &mut out);
    out
}

impl Lax {
    pub fn spec(&self) -> &LaxSpec {
        &self.spec
    }

    pub fn operad(&self) -> &Arc<Operad> {
        &self.spec.operad
    }

    pub fn presentation(&self) -> &Arc<Presentation> {
        &self.spec.pres
    }

    pub fn carrier(&self) -> &Complex {
        &self.carrier
    }

    pub fn dim(&self) -> usize {
        self.carrier.dim()
    }

    pub fn weight_cap(&self) -> u32 {
        self.spec.weight_cap
    }

    /// The representative word of a quotient basis element.
    pub fn word(&self, i: usize) -> &Word {
        &self.words[self.quotient.section[i]]
    }

    pub fn ambient_dim(&self) -> usize {
        self.words.len()
    }

    /// The basis element represented by a word, if it is a representative.
    pub fn basis_of(&self, w: &Word) -> Option<usize> {
        let a = *self.index.get(w)?;
        self.quotient.section.binary_search(&a).ok()
    }

    fn fed_degree(&self, f: Fed) -> i32 {
        fed_degree_in(&self.spec, f)
    }

    fn fed_weight(&self, f: Fed) -> u32 {
        fed_weight_in(&self.spec, f)
    }

    fn op_degree(&self, n: usize, o: u32) -> i32 {
        self.spec.operad.degree(n, o as usize)
    }

    pub fn word_degree(&self, w: &Word) -> i32 {
        self.op_degree(w.arity(), w.op) + w.entries().iter().map(|&f| self.fed_degree(f)).sum::<i32>()
    }

    pub fn word_weight(&self, w: &Word) -> u32 {
        w.entries().iter().map(|&f| self.fed_weight(f)).sum()
    }

    /// `o(entries)` as a combination of canonical words. Elements of the
    /// coefficient algebra are expanded through the presentation; words of
    /// too high weight, too many generators or a disallowed shape vanish.
    pub fn canon(&self, n: usize, o: &SparseVec, entries: &[Fed]) -> Result<WordVec> {
        canon_in(&self.spec, n, o, entries)
    }

    /// Substitutes `sub` (words of arity `k`) for the input at position `i`.
    pub fn insert(&self, n: usize, o: &SparseVec, entries: &[Fed], i: usize, sub: &WordVec) -> Result<WordVec> {
        insert_in(&self.spec, n, o, entries, i, sub)
    }

    /// `o(e_1.., p(sub), ..e_n)` with `p ∈ O(k)` substituted at position `i`.
    #[allow(clippy::too_many_arguments)]
    pub fn substitute(
        &self,
        n: usize,
        o: &SparseVec,
        entries: &[Fed],
        i: usize,
        k: usize,
        p: &SparseVec,
        sub: &[Fed],
    ) -> Result<WordVec> {
        substitute_in(&self.spec, n, o, entries, i, k, p, sub)
    }

    /// Applies a derivation of degree `delta` given by its values on
    /// generators and slot entries; `op` optionally contributes a term
    /// acting on the operation (used for the differential).
    pub fn derive_word(
        &self,
        w: &Word,
        delta: i32,
        op: Option<&dyn Fn(usize, &SparseVec) -> SparseVec>,
        image: &dyn Fn(Fed) -> Result<Image>,
    ) -> Result<WordVec> {
        derive_in(&self.spec, w, delta, op, image)
    }

    pub fn diff_word(&self, w: &Word) -> Result<WordVec> {
        diff_in(&self.spec, w)
    }

    /// Coordinates in the quotient of a combination of words.
    pub fn project(&self, v: &WordVec) -> Result<SparseVec> {
        let amb = self.ambient_vec(v)?;
        Ok(self.quotient.reduce(&amb))
    }

    fn ambient_vec(&self, v: &WordVec) -> Result<SparseVec> {
        ambient_vec_in(&self.spec.name, &self.index, v)
    }

    /// A combination of representative words for a quotient vector.
    pub fn lift(&self, v: &SparseVec) -> WordVec {
        let mut out = WordVec::new();
        for (i, c) in v.iter() {
            add_word(&mut out, self.word(i).clone(), c);
        }
        out
    }

    /// `ν(p; c_1..c_k; w)` for `p ∈ O(k+1)`, coefficient-algebra basis
    /// elements `c_i` and a quotient basis element `w`.
    pub fn act(&self, p: usize, cs: &[usize], w: usize) -> Result<SparseVec> {
        let word = self.word(w).clone();
        let k = cs.len();
        let n = word.arity();
        let operad = &self.spec.operad;
        let comp = operad.partial_basis(k + 1, p, k, n, word.op as usize)?;
        let cdeg: i32 = cs.iter().map(|&c| self.spec.pres.elem_degree[c]).sum();
        let s = sign(koszul(self.op_degree(n, word.op), cdeg));
        let mut entries: Vec<Fed> = cs.iter().map(|&c| Fed::Elem(c as u32)).collect();
        entries.extend(word.entries());
        let v = self.canon(k + n, &comp.scaled(&s), &entries)?;
        self.project(&v)
    }

    /// `μ(p; w_1..w_k)` for quotient basis elements: the operations are
    /// composed and the inputs concatenated.
    pub fn compose(&self, k: usize, p: usize, ws: &[usize]) -> Result<SparseVec> {
        let words: Vec<&Word> = ws.iter().map(|&i| self.word(i)).collect();
        let v = self.compose_words(k, p, &words)?;
        self.project(&v)
    }

    /// `p(w_1..w_k)` for words whose slot types are those of this engine.
    pub fn compose_words(&self, k: usize, p: usize, words: &[&Word]) -> Result<WordVec> {
        let inner: Vec<(usize, usize)> = words.iter().map(|w| (w.arity(), w.op as usize)).collect();
        let m: usize = inner.iter().map(|x| x.0).sum();
        let total_w: u32 = words.iter().map(|w| self.word_weight(w)).sum();
        if total_w > self.spec.weight_cap {
            return Ok(WordVec::new());
        }
        let comp = self.spec.operad.gamma_basis(k, p, &inner)?;
        // move each operation left past the inputs of the earlier words
        let mut odd = false;
        let mut seen = 0;
        let mut entries = Vec::with_capacity(m);
        for w in words {
            let od = self.op_degree(w.arity(), w.op);
            odd ^= koszul(od, seen);
            for f in w.entries() {
                seen += self.fed_degree(f);
                entries.push(f);
            }
        }
        self.canon(m, &comp.scaled(&sign(odd)), &entries)
    }

    /// The relation span, one combination of ambient words per echelon row.
    pub fn relations(&self) -> Vec<WordVec> {
        self.quotient
            .relations()
            .rows()
            .map(|row| {
                let mut v = WordVec::new();
                for (a, c) in row.iter() {
                    add_word(&mut v, self.words[a].clone(), c);
                }
                v
            })
            .collect()
    }

    /// The quotient map from the ambient, as words to coordinates.
    pub fn projection(&self) -> &GradedMap {
        &self.quotient.projection
    }

    /// A linear map out of the carrier, determined on representative words.
    pub fn map_from_words(
        &self,
        target: Arc<GradedSpace>,
        degree: i32,
        f: impl Fn(&Word) -> Result<SparseVec>,
    ) -> Result<GradedMap> {
        let cols = (0..self.dim()).map(|i| f(self.word(i))).collect::<Result<Vec<_>>>()?;
        GradedMap::new(self.carrier.space().clone(), target, degree, cols)
    }

    /// The endomorphism of the carrier induced by a derivation given on
    /// inputs. The caller is responsible for it preserving the relations;
    /// `check` verifies this on every relation row.
    pub fn derivation_map(&self, delta: i32, image: &dyn Fn(Fed) -> Result<Image>, check: bool) -> Result<GradedMap> {
        if check {
            for row in self.quotient.relations().rows() {
                let mut acc = WordVec::new();
                for (a, c) in row.iter() {
                    add_words(&mut acc, &self.derive_word(&self.words[a], delta, None, image)?, c);
                }
                if !self.project(&acc)?.is_zero() {
                    return Err(Error::IllDefinedQuotient(format!(
                        "derivation does not preserve the relations of {}",
                        self.spec.name
                    )));
                }
            }
        }
        let sp = self.carrier.space().clone();
        self.map_from_words(sp, delta, |w| self.project(&self.derive_word(w, delta, None, image)?))
    }

    /// Builds the quotient: enumerates the truncated ambient, generates all
    /// relations, and induces the differential (checked to preserve them).
    pub fn build(spec: LaxSpec) -> Result<Lax> {
        let words = enumerate(&spec)?;
        let index: HashMap<Word, usize> = words.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
        let mut ech = Echelon::new();
        for r in relations(&spec, &words)? {
            if !r.is_empty() {
                ech.insert(ambient_vec_in(&spec.name, &index, &r)?);
            }
        }
        let pre = PreLax { spec: &spec };
        let basis: Vec<Basis> = words
            .iter()
            .map(|w| Basis::new(pre.degree(w), pre.weight(w), pre.label(w)))
            .collect();
        let ambient = Arc::new(GradedSpace::new(basis));
        // the differential must preserve the relation span
        let mut damb: HashMap<usize, SparseVec> = HashMap::new();
        let mut dcol = |a: usize| -> Result<SparseVec> {
            if let Some(v) = damb.get(&a) {
                return Ok(v.clone());
            }
            let v = ambient_vec_in(&spec.name, &index, &diff_in(&spec, &words[a])?)?;
            damb.insert(a, v.clone());
            Ok(v)
        };
        for row in ech.rows() {
            let mut acc = SparseVec::new();
            for (a, c) in row.iter() {
                acc.add_scaled(&dcol(a)?, c);
            }
            if !ech.reduce(&acc).is_zero() {
                return Err(Error::IllDefinedQuotient(format!(
                    "differential does not preserve the relations of {}",
                    spec.name
                )));
            }
        }
        let quotient = quotient_by_echelon(ambient, ech);
        let cols = quotient
            .section
            .iter()
            .map(|&a| Ok(quotient.reduce(&dcol(a)?)))
            .collect::<Result<Vec<_>>>()?;
        let d = GradedMap::new(quotient.space.clone(), quotient.space.clone(), 1, cols)?;
        let carrier = Complex::new(quotient.space.clone(), d)?;
        Ok(Lax { spec, words, index, quotient, carrier })
    }
}

/// Degree/weight/label helpers usable before the quotient exists.
struct PreLax<'a> {
    spec: &'a LaxSpec,
}

impl PreLax<'_> {
    fn fed_degree(&self, f: Fed) -> i32 {
        fed_degree_in(self.spec, f)
    }

    fn degree(&self, w: &Word) -> i32 {
        self.spec.operad.degree(w.arity(), w.op as usize)
            + w.entries().iter().map(|&f| self.fed_degree(f)).sum::<i32>()
    }

    fn weight(&self, w: &Word) -> u32 {
        w.entries().iter().map(|&f| fed_weight_in(self.spec, f)).sum()
    }

    fn label(&self, w: &Word) -> String {
        let op = self.spec.operad.components()[w.arity()].space().label(w.op as usize).to_string();
        let gens: Vec<&str> = w.gens.iter().map(|&g| self.spec.pres.label[g as usize].as_str()).collect();
        let slots: Vec<String> = w
            .slots
            .iter()
            .map(|&(t, x)| self.spec.slots[t as usize].space().space().label(x as usize).to_string())
            .collect();
        if slots.is_empty() {
            format!("{op}({})", gens.join(","))
        } else {
            format!("{op}({}|{})", gens.join(","), slots.join(","))
        }
    }
}

/// Applies a derivation to a word of `spec` without building its quotient.
pub fn derive_with_spec(spec: &LaxSpec, w: &Word, delta: i32, image: &dyn Fn(Fed) -> Result<Image>) -> Result<WordVec> {
    derive_in(spec, w, delta, None, image)
}

/// Applies a derivation of degree `delta` given by its values on inputs;
/// `op` optionally contributes a term acting on the operation.
fn derive_in(
    spec: &LaxSpec,
    w: &Word,
    delta: i32,
    op: Option<&dyn Fn(usize, &SparseVec) -> SparseVec>,
    image: &dyn Fn(Fed) -> Result<Image>,
) -> Result<WordVec> {
    let n = w.arity();
    let entries = w.entries();
    let o = SparseVec::unit(w.op as usize);
    let mut out = WordVec::new();
    if let Some(f) = op {
        let d = f(n, &o);
        if !d.is_zero() {
            add_words(&mut out, &canon_in(spec, n, &d, &entries)?, &Rational::one());
        }
    }
    let mut before = spec.operad.degree(n, w.op as usize);
    for i in 0..n {
        let img = image(entries[i])?;
        if !img.is_zero() {
            let s = sign(koszul(delta, before));
            for (f, c) in &img.linear {
                let mut e = entries.clone();
                e[i] = *f;
                add_words(&mut out, &canon_in(spec, n, &o, &e)?, &(c * &s));
            }
            if !img.words.is_empty() {
                add_words(&mut out, &insert_in(spec, n, &o, &entries, i, &img.words)?, &s);
            }
        }
        before += fed_degree_in(spec, entries[i]);
    }
    Ok(out)
}

fn diff_in(spec: &LaxSpec, w: &Word) -> Result<WordVec> {
    let dop = |n: usize, o: &SparseVec| spec.operad.components()[n].differential().apply(o);
    derive_in(spec, w, 1, Some(&dop), &|f| diff_image_in(spec, f))
}

fn fed_degree_in(spec: &LaxSpec, f: Fed) -> i32 {
    match f {
        Fed::Gen(g) => spec.pres.degree[g as usize],
        Fed::Elem(b) => spec.pres.elem_degree[b as usize],
        Fed::Slot(t, x) => spec.slots[t as usize].space().space().degree(x as usize),
    }
}

fn fed_weight_in(spec: &LaxSpec, f: Fed) -> u32 {
    match f {
        Fed::Gen(g) => spec.pres.weight[g as usize],
        Fed::Elem(b) => spec.pres.elem_weight[b as usize],
        Fed::Slot(t, x) => spec.slots[t as usize].space().space().weight(x as usize),
    }
}

fn diff_image_in(spec: &LaxSpec, f: Fed) -> Result<Image> {
    Ok(match f {
        Fed::Gen(g) => spec.pres.diff[g as usize].clone(),
        Fed::Elem(_) => unreachable!("canonical words hold no elements"),
        Fed::Slot(t, x) => {
            let st = &spec.slots[t as usize];
            let linear = st
                .space()
                .differential()
                .col(x as usize)
                .iter()
                .map(|(z, c)| (Fed::Slot(t, z as u32), c.clone()))
                .collect();
            let words = match &st.kind {
                SlotKind::Plain { extra: Some(e), .. } => e[x as usize].clone(),
                _ => WordVec::new(),
            };
            Image { linear, words }
        }
    })
}

fn ambient_vec_in(name: &str, index: &HashMap<Word, usize>, v: &WordVec) -> Result<SparseVec> {
    let mut out = SparseVec::new();
    for (w, c) in v {
        let i = index.get(w).ok_or_else(|| {
            Error::truncation(name.to_string(), format!("word {w:?} lies outside the truncated ambient"))
        })?;
        out.add_at(*i, c);
    }
    Ok(out)
}

fn canon_in(spec: &LaxSpec, n: usize, o: &SparseVec, entries: &[Fed]) -> Result<WordVec> {
    let mut out = WordVec::new();
    let total_w: u32 = entries
        .iter()
        .map(|&f| fed_weight_in(spec, f))
        .sum();
    if total_w > spec.weight_cap || o.is_zero() {
        return Ok(out);
    }
    let operad = &spec.operad;
    let mut stack: Vec<(Rational, usize, SparseVec, Vec<Fed>)> = vec![(Rational::one(), n, o.clone(), entries.to_vec())];
    while let Some((coeff, n, o, entries)) = stack.pop() {
        if let Some(i) = entries.iter().position(|f| matches!(f, Fed::Elem(_))) {
            let Fed::Elem(b) = entries[i] else { unreachable!() };
            let before: i32 = entries[..i].iter().map(|&f| fed_degree_in(spec, f)).sum();
            let terms = spec.pres.decomp.get(b as usize).ok_or_else(|| {
                Error::Dimension(format!("{}: the coefficient algebra has no decomposition into generators", spec.name))
            })?;
            for t in terms {
                let m = n + t.arity - 1;
                if m > operad.arity_cap() {
                    return Err(Error::truncation(
                        spec.name.clone(),
                        format!("arity {m} exceeds the operad cap {}", operad.arity_cap()),
                    ));
                }
                let pdeg = t.op.iter().next().map_or(0, |(j, _)| operad.degree(t.arity, j));
                let comp = operad.partial(n, &o, i, t.arity, &t.op)?;
                if comp.is_zero() {
                    continue;
                }
                let c = &coeff * &t.coeff * sign(koszul(pdeg, before));
                let mut e = Vec::with_capacity(m);
                e.extend_from_slice(&entries[..i]);
                e.extend(t.gens.iter().map(|&g| Fed::Gen(g)));
                e.extend_from_slice(&entries[i + 1..]);
                stack.push((c, m, comp, e));
            }
            continue;
        }
        finish(spec, &coeff, n, &o, &entries, &mut out)?;
    }
    Ok(out)
}

fn finish(spec: &LaxSpec, coeff: &Rational, n: usize, o: &SparseVec, entries: &[Fed], out: &mut WordVec) -> Result<()> {
    let ngens = entries.iter().filter(|f| matches!(f, Fed::Gen(_))).count();
    if spec.gen_limit.is_some_and(|l| ngens > l) {
        return Ok(());
    }
    let key = |f: Fed| match f {
        Fed::Gen(g) => (0u8, 0u16, g),
        Fed::Slot(t, x) => (1, t, if spec.slots[t as usize].symmetric { x } else { 0 }),
        Fed::Elem(_) => unreachable!(),
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| key(entries[i]));
    let sorted: Vec<Fed> = order.iter().map(|&i| entries[i]).collect();
    let mut gens = Vec::with_capacity(ngens);
    let mut slots = Vec::new();
    let mut counts = vec![0usize; spec.slots.len()];
    for f in &sorted {
        match *f {
            Fed::Gen(g) => gens.push(g),
            Fed::Slot(t, x) => {
                counts[t as usize] += 1;
                slots.push((t, x));
            }
            Fed::Elem(_) => unreachable!(),
        }
    }
    if !spec.shapes.contains(&counts) {
        return Ok(());
    }
    let (o2, odd) = if order.iter().enumerate().all(|(j, &i)| i == j) {
        (o.clone(), false)
    } else {
        let pi = Permutation::new(order.clone())?;
        let degs: Vec<i32> = sorted.iter().map(|&f| fed_degree_in(spec, f)).collect();
        (spec.operad.act(n, o, &pi), pi.koszul_odd(&degs))
    };
    let c = coeff * sign(odd);
    for (b, x) in o2.iter() {
        add_word(out, Word { op: b as u32, gens: gens.clone(), slots: slots.clone() }, &(x * &c));
    }
    Ok(())
}

fn insert_in(spec: &LaxSpec, n: usize, o: &SparseVec, entries: &[Fed], i: usize, sub: &WordVec) -> Result<WordVec> {
    let mut out = WordVec::new();
    for (w, c) in sub {
        let v = substitute_in(spec, n, o, entries, i, w.arity(), &SparseVec::unit(w.op as usize), &w.entries())?;
        add_words(&mut out, &v, c);
    }
    Ok(out)
}

/// `o(e_1.., p(sub), ..e_n)` with `p(sub)` at position `i`, as canonical words.
#[allow(clippy::too_many_arguments)]
fn substitute_in(
    spec: &LaxSpec,
    n: usize,
    o: &SparseVec,
    entries: &[Fed],
    i: usize,
    k: usize,
    p: &SparseVec,
    sub: &[Fed],
) -> Result<WordVec> {
    let operad = &spec.operad;
    let m = n + k - 1;
    let e: Vec<Fed> = entries[..i]
        .iter()
        .chain(sub)
        .chain(&entries[i + 1..])
        .copied()
        .collect();
    let wt: u32 = e.iter().map(|&f| fed_weight_in(spec, f)).sum();
    if wt > spec.weight_cap || p.is_zero() {
        return Ok(WordVec::new());
    }
    if m > operad.arity_cap() {
        return Err(Error::truncation(
            spec.name.clone(),
            format!("arity {m} exceeds the operad cap {}", operad.arity_cap()),
        ));
    }
    let before: i32 = entries[..i].iter().map(|&f| fed_degree_in(spec, f)).sum();
    let pdeg = p.iter().next().map_or(0, |(j, _)| operad.degree(k, j));
    let comp = operad.partial(n, o, i, k, p)?;
    canon_in(spec, m, &comp.scaled(&sign(koszul(pdeg, before))), &e)
}

/// Slot tuples (sorted by type, then basis for symmetric types) for one shape.
fn slot_tuples(spec: &LaxSpec, shape: &[usize]) -> Result<Vec<Vec<(u16, u32)>>> {
    let mut acc: Vec<Vec<(u16, u32)>> = vec![vec![]];
    for (t, &c) in shape.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let st = &spec.slots[t];
        let dim = st.space().dim();
        let choices: Vec<Vec<u32>> = if st.symmetric {
            multisets(dim, c)
        } else if c == 1 {
            (0..dim as u32).map(|x| vec![x]).collect()
        } else {
            return Err(Error::Dimension(format!(
                "slot type {t} of {} is not symmetric but occurs {c} times",
                spec.name
            )));
        };
        let mut next = Vec::new();
        for a in &acc {
            for ch in &choices {
                let mut v = a.clone();
                v.extend(ch.iter().map(|&x| (t as u16, x)));
                next.push(v);
            }
        }
        acc = next;
    }
    Ok(acc)
}

/// Sorted generator multisets within a weight budget and length bound.
fn gen_multisets(spec: &LaxSpec, budget: u32, max_len: usize) -> Result<Vec<Vec<u32>>> {
    let p = &spec.pres;
    let limit = spec.gen_limit.unwrap_or(usize::MAX).min(max_len);
    if limit == usize::MAX && p.weight.contains(&0) {
        return Err(Error::truncation(
            spec.name.clone(),
            "generators of weight zero need an explicit generator limit",
        ));
    }
    fn rec(p: &Presentation, from: usize, budget: u32, limit: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        out.push(cur.clone());
        if cur.len() == limit {
            return;
        }
        for g in from..p.weight.len() {
            if p.weight[g] <= budget {
                cur.push(g as u32);
                rec(p, g, budget - p.weight[g], limit, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(p, 0, budget, limit, &mut Vec::new(), &mut out);
    Ok(out)
}

fn enumerate(spec: &LaxSpec) -> Result<Vec<Word>> {
    let cap = spec.operad.arity_cap();
    let mut words = Vec::new();
    for shape in &spec.shapes {
        let s: usize = shape.iter().sum();
        if s > cap {
            return Err(Error::truncation(spec.name.clone(), format!("{s} slots exceed the operad cap {cap}")));
        }
        for slots in slot_tuples(spec, shape)? {
            let ws: u32 = slots.iter().map(|&(t, x)| fed_weight_in(spec, Fed::Slot(t, x))).sum();
            if ws > spec.weight_cap {
                continue;
            }
            for gens in gen_multisets(spec, spec.weight_cap - ws, usize::MAX)? {
                let n = gens.len() + s;
                if n > cap {
                    return Err(Error::truncation(
                        spec.name.clone(),
                        format!("words of arity {n} fit the weight cap but exceed the operad cap {cap}"),
                    ));
                }
                for op in 0..spec.operad.dim(n) {
                    words.push(Word { op: op as u32, gens: gens.clone(), slots: slots.clone() });
                }
            }
        }
    }
    // words with more generators first, so relations eliminate them
    let key = |w: &Word| (fed_sum_weight(spec, w), std::cmp::Reverse(w.gens.len()), w.clone());
    words.sort_by_cached_key(key);
    words.dedup();
    Ok(words)
}

fn fed_sum_weight(spec: &LaxSpec, w: &Word) -> u32 {
    w.entries().iter().map(|&f| fed_weight_in(spec, f)).sum()
}

/// All relations of the quotient, as word combinations.
fn relations(spec: &LaxSpec, words: &[Word]) -> Result<Vec<WordVec>> {
    let operad = &spec.operad;
    let cap = operad.arity_cap();
    let mut rels = Vec::new();
    // stabilizers of equal neighbours
    for w in words {
        let entries = w.entries();
        let n = entries.len();
        for i in 0..n.saturating_sub(1) {
            let same = match (entries[i], entries[i + 1]) {
                (Fed::Gen(a), Fed::Gen(b)) => a == b,
                (Fed::Slot(t, x), Fed::Slot(u, y)) => t == u && x == y && spec.slots[t as usize].symmetric,
                _ => false,
            };
            if !same {
                continue;
            }
            let d = fed_degree_in(spec, entries[i]);
            let swapped = operad.act_generator_basis(n, w.op as usize, i);
            let mut r = WordVec::new();
            add_word(&mut r, w.clone(), &Rational::one());
            let s = -sign(d % 2 != 0);
            for (b, c) in swapped.iter() {
                add_word(&mut r, Word { op: b as u32, ..w.clone() }, &(c * &s));
            }
            rels.push(r);
        }
    }
    // module slots
    for (t, st) in spec.slots.iter().enumerate() {
        let SlotKind::Module(m) = &st.kind else { continue };
        for w in words {
            let entries = w.entries();
            for (pos, &f) in entries.iter().enumerate() {
                let Fed::Slot(u, y) = f else { continue };
                if u as usize != t {
                    continue;
                }
                let n = w.arity();
                let budget = spec.weight_cap - fed_sum_weight(spec, w);
                let before: i32 = entries[..pos].iter().map(|&e| fed_degree_in(spec, e)).sum();
                for b in gen_multisets(spec, budget, cap.saturating_sub(n))? {
                    let k = b.len();
                    if n + k > cap {
                        continue;
                    }
                    for p in 0..operad.dim(k + 1) {
                        let nu = m.act_gens(p, &b, y as usize)?;
                        let mut r = WordVec::new();
                        for (z, c) in nu.iter() {
                            let mut e = entries.clone();
                            e[pos] = Fed::Slot(u, z as u32);
                            add_words(&mut r, &canon_in(spec, n, &SparseVec::unit(w.op as usize), &e)?, c);
                        }
                        let comp = operad.partial_basis(n, w.op as usize, pos, k + 1, p)?;
                        let s = -sign(koszul(operad.degree(k + 1, p), before));
                        let e: Vec<Fed> = entries[..pos]
                            .iter()
                            .copied()
                            .chain(b.iter().map(|&g| Fed::Gen(g)))
                            .chain(entries[pos..].iter().copied())
                            .collect();
                        add_words(&mut r, &canon_in(spec, n + k, &comp, &e)?, &s);
                        rels.push(r);
                    }
                }
            }
        }
    }
    // multiplication of a tabulated coefficient algebra
    if let Some(table) = &spec.pres.table {
        let rests: BTreeSet<Vec<Fed>> = words
            .iter()
            .map(|w| w.entries())
            .collect();
        for rest in &rests {
            let r = rest.len();
            let wr: u32 = rest.iter().map(|&f| fed_weight_in(spec, f)).sum();
            let budget = spec.weight_cap - wr;
            for b in gen_multisets(spec, budget, cap.saturating_sub(r))? {
                let k = b.len();
                if r + k > cap {
                    continue;
                }
                let elems: Vec<usize> = b.iter().map(|&g| elem_of_gen(spec, g)).collect::<Result<_>>()?;
                for p in 0..operad.dim(k) {
                    let prod = table.mult(k, p, &elems)?;
                    for o in 0..operad.dim(r + 1) {
                        let mut rel = WordVec::new();
                        let comp = operad.partial_basis(r + 1, o, 0, k, p)?;
                        let e: Vec<Fed> = b.iter().map(|&g| Fed::Gen(g)).chain(rest.iter().copied()).collect();
                        add_words(&mut rel, &canon_in(spec, r + k, &comp, &e)?, &Rational::one());
                        for (z, c) in prod.iter() {
                            let mut e = vec![Fed::Elem(z as u32)];
                            e.extend(rest.iter().copied());
                            add_words(&mut rel, &canon_in(spec, r + 1, &SparseVec::unit(o), &e)?, &-c);
                        }
                        rels.push(rel);
                    }
                }
            }
        }
    }
    if let Some(t) = spec.leibniz {
        rels.extend(leibniz_relations(spec, words, t)?);
    }
    Ok(rels)
}

fn elem_of_gen(spec: &LaxSpec, g: u32) -> Result<usize> {
    let v = &spec.pres.gen_elems[g as usize];
    match (v.nnz(), v.leading()) {
        (1, Some((i, c))) if c.is_one() => Ok(i),
        _ => Err(Error::Dimension("tabulated algebras are presented by their basis".into())),
    }
}

/// `[..., μ(p; c) in the slot, ...] = Σ_j [... p∘(c_1..slot c_j..c_k) ...]`.
fn leibniz_relations(spec: &LaxSpec, words: &[Word], t: u16) -> Result<Vec<WordVec>> {
    let operad = &spec.operad;
    let cap = operad.arity_cap();
    let table = spec
        .pres
        .table
        .as_ref()
        .ok_or_else(|| Error::Dimension("Leibniz relations need a tabulated algebra".into()))?;
    let mut contexts = BTreeSet::new();
    for w in words {
        let entries = w.entries();
        if let Some(pos) = entries.iter().position(|f| matches!(f, Fed::Slot(u, _) if *u == t)) {
            let mut e = entries.clone();
            e[pos] = Fed::Slot(t, u32::MAX);
            contexts.insert((w.op, e, pos, fed_sum_weight(spec, w) - fed_weight_in(spec, entries[pos])));
        }
    }
    let mut rels = Vec::new();
    for (op, entries, pos, wctx) in contexts {
        let n = entries.len();
        let before: i32 = entries[..pos].iter().map(|&e| fed_degree_in(spec, e)).sum();
        for b in gen_multisets(spec, spec.weight_cap - wctx, cap + 1 - n)? {
            let k = b.len();
            if n + k - 1 > cap {
                continue;
            }
            let elems: Vec<usize> = b.iter().map(|&g| elem_of_gen(spec, g)).collect::<Result<_>>()?;
            for p in 0..operad.dim(k) {
                let prod = table.mult(k, p, &elems)?;
                let mut rel = WordVec::new();
                for (z, c) in prod.iter() {
                    let mut e = entries.clone();
                    e[pos] = Fed::Slot(t, z as u32);
                    add_words(&mut rel, &canon_in(spec, n, &SparseVec::unit(op as usize), &e)?, c);
                }
                if k > 0 {
                    let comp = operad.partial_basis(n, op as usize, pos, k, p)?;
                    let s = -sign(koszul(operad.degree(k, p), before));
                    for j in 0..k {
                        let e: Vec<Fed> = entries[..pos]
                            .iter()
                            .copied()
                            .chain(b.iter().enumerate().map(|(l, &g)| {
                                if l == j {
                                    Fed::Slot(t, elems[l] as u32)
                                } else {
                                    Fed::Gen(g)
                                }
                            }))
                            .chain(entries[pos + 1..].iter().copied())
                            .collect();
                        add_words(&mut rel, &canon_in(spec, n + k - 1, &comp, &e)?, &s);
                    }
                }
                rels.push(rel);
            }
        }
    }
    Ok(rels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multisets_count() {
        assert_eq!(multisets(3, 2).len(), 6);
        assert_eq!(multisets(2, 0), vec![Vec::<u32>::new()]);
    }
}
