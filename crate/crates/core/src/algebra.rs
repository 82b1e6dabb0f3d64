//! Algebras over an operad, monoids, tensor and enveloping algebras.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_traits::One;

use crate::complexes::{tensor, Complex};
use crate::error::{Error, Result};
use crate::lax::{add_word, Fed, Image, Lax, LaxSpec, Presentation, SlotType, TableMult, Term, Word, WordVec};
use crate::linalg::{sign, solve, GradedMap, GradedSpace, Quotient, Rational, SparseVec, Subspace};
use crate::operad::{AxiomReport, Operad};
use crate::perm::flatten;

/// Expands a tuple of vectors into weighted tuples of basis indices.
pub fn expand(xs: &[SparseVec]) -> Vec<(Rational, Vec<usize>)> {
    let mut acc = vec![(Rational::one(), Vec::new())];
    for x in xs {
        let mut next = Vec::with_capacity(acc.len() * x.nnz());
        for (c, idx) in &acc {
            for (i, y) in x.iter() {
                let mut v = idx.clone();
                v.push(i);
                next.push((c * y, v));
            }
        }
        acc = next;
    }
    acc
}

fn odd(a: i32, b: i32) -> bool {
    a % 2 != 0 && b % 2 != 0
}

/// Multiplication given by matrices `μ_n: O(n)⊗A^{⊗n} → A`.
#[derive(Clone)]
pub struct Tabulated {
    dims: Vec<usize>,
    dim: usize,
    mult: Vec<GradedMap>,
}

impl fmt::Debug for Tabulated {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tabulated(dim {}, arities {})", self.dim, self.mult.len())
    }
}

impl TableMult for Tabulated {
    fn mult(&self, k: usize, p: usize, bs: &[usize]) -> Result<SparseVec> {
        let m = self
            .mult
            .get(k)
            .ok_or_else(|| Error::truncation("tabulated algebra", format!("no multiplication of arity {k}")))?;
        let mut idx = vec![p];
        idx.extend_from_slice(bs);
        let mut dims = vec![self.dims[k]];
        dims.extend(std::iter::repeat_n(self.dim, k));
        Ok(m.col(flatten(&idx, &dims)).clone())
    }
}

#[derive(Clone, Debug)]
pub enum AlgebraKind {
    /// Spanned by words in generators; the product composes words.
    Words(Arc<Lax>),
    Table(Arc<Tabulated>),
}

/// An algebra over an operad.
#[derive(Clone)]
pub struct OperadAlgebra {
    name: String,
    operad: Arc<Operad>,
    carrier: Complex,
    kind: AlgebraKind,
    pres: Option<Arc<Presentation>>,
    cache: Arc<Mutex<HashMap<(usize, usize, Vec<usize>), SparseVec>>>,
}

impl fmt::Debug for OperadAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OperadAlgebra({} over {}, dim {})", self.name, self.operad.name(), self.carrier.dim())
    }
}

/// Presentation with the basis of `v` as raw generators; `extra` adds words
/// to each generator's differential.
pub fn raw_presentation(v: &Complex, extra: Option<Vec<WordVec>>) -> Arc<Presentation> {
    let sp = v.space();
    let n = sp.dim();
    let diff = (0..n)
        .map(|i| Image {
            linear: v.differential().col(i).iter().map(|(z, c)| (Fed::Gen(z as u32), c.clone())).collect(),
            words: extra.as_ref().map(|e| e[i].clone()).unwrap_or_default(),
        })
        .collect();
    Arc::new(Presentation {
        gen_elems: vec![],
        degree: (0..n).map(|i| sp.degree(i)).collect(),
        weight: (0..n).map(|i| sp.weight(i).max(1)).collect(),
        label: (0..n).map(|i| sp.label(i).to_string()).collect(),
        diff,
        decomp: vec![],
        elem_degree: vec![],
        elem_weight: vec![],
        table: None,
    })
}

impl OperadAlgebra {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn operad(&self) -> &Arc<Operad> {
        &self.operad
    }

    pub fn carrier(&self) -> &Complex {
        &self.carrier
    }

    pub fn dim(&self) -> usize {
        self.carrier.dim()
    }

    pub fn kind(&self) -> &AlgebraKind {
        &self.kind
    }

    pub fn words(&self) -> Option<&Arc<Lax>> {
        match &self.kind {
            AlgebraKind::Words(l) => Some(l),
            AlgebraKind::Table(_) => None,
        }
    }

    /// How the algebra is generated, for building words over it.
    pub fn presentation(&self) -> Result<&Arc<Presentation>> {
        self.pres
            .as_ref()
            .ok_or_else(|| Error::Dimension(format!("{} carries no presentation by generators", self.name)))
    }

    /// Generators of the presentation, as elements.
    pub fn generators(&self) -> &[SparseVec] {
        self.pres.as_ref().map_or(&[], |p| &p.gen_elems)
    }

    /// True when no relations beyond coinvariance hold among generators.
    pub fn is_free(&self) -> bool {
        self.pres.as_ref().is_some_and(|p| p.table.is_none())
            && matches!(&self.kind, AlgebraKind::Words(l) if l.spec().slots.is_empty())
    }

    pub fn weight_cap(&self) -> Option<u32> {
        match &self.kind {
            AlgebraKind::Words(l) => Some(l.weight_cap()),
            AlgebraKind::Table(_) => None,
        }
    }

    /// `μ(p; b_1..b_k)` on basis elements.
    pub fn mult_basis(&self, k: usize, p: usize, bs: &[usize]) -> Result<SparseVec> {
        let key = (k, p, bs.to_vec());
        if let Some(v) = self.cache.lock().expect("cache").get(&key) {
            return Ok(v.clone());
        }
        let v = match &self.kind {
            AlgebraKind::Table(t) => t.mult(k, p, bs)?,
            AlgebraKind::Words(l) => l.compose(k, p, bs)?,
        };
        self.cache.lock().expect("cache").insert(key, v.clone());
        Ok(v)
    }

    /// `μ(p; x_1..x_k)`, multilinearly.
    pub fn mult(&self, k: usize, p: &SparseVec, xs: &[SparseVec]) -> Result<SparseVec> {
        let mut out = SparseVec::new();
        for (pi, pc) in p.iter() {
            for (c, idx) in expand(xs) {
                out.add_scaled(&self.mult_basis(k, pi, &idx)?, &(pc * &c));
            }
        }
        Ok(out)
    }

    /// The image of `μ_0: O(0) → A` applied to the unit-like operation, if any.
    pub fn constants(&self) -> Result<Vec<SparseVec>> {
        (0..self.operad.dim(0)).map(|p| self.mult_basis(0, p, &[])).collect()
    }

    /// An algebra spanned by slotless words, with its generators read off
    /// the underlying presentation.
    pub fn from_words(name: impl Into<String>, lax: Arc<Lax>) -> Result<OperadAlgebra> {
        if !lax.spec().slots.is_empty() {
            return Err(Error::Dimension("an algebra of words has no slots".into()));
        }
        let raw = lax.presentation();
        let operad = lax.operad().clone();
        let unit = operad.unit().clone();
        let mut gen_elems = Vec::new();
        for g in 0..raw.degree.len() {
            let mut v = WordVec::new();
            for (b, c) in unit.iter() {
                add_word(&mut v, Word { op: b as u32, gens: vec![g as u32], slots: vec![] }, c);
            }
            gen_elems.push(lax.project(&v)?);
        }
        let sp = lax.carrier().space();
        let decomp = (0..lax.dim())
            .map(|i| {
                let w = lax.word(i);
                vec![Term {
                    coeff: Rational::one(),
                    arity: w.arity(),
                    op: SparseVec::unit(w.op as usize),
                    gens: w.gens.clone(),
                }]
            })
            .collect();
        let pres = Presentation {
            gen_elems,
            decomp,
            elem_degree: (0..sp.dim()).map(|i| sp.degree(i)).collect(),
            elem_weight: (0..sp.dim()).map(|i| sp.weight(i)).collect(),
            ..(**raw).clone()
        };
        Ok(OperadAlgebra {
            name: name.into(),
            operad,
            carrier: lax.carrier().clone(),
            kind: AlgebraKind::Words(lax),
            pres: Some(Arc::new(pres)),
            cache: Default::default(),
        })
    }

    /// An algebra of words with slots (such as `S*_A(M)`), multiplied by
    /// composing words; it carries no presentation of its own.
    pub fn from_slotted_words(name: impl Into<String>, lax: Arc<Lax>) -> OperadAlgebra {
        OperadAlgebra {
            name: name.into(),
            operad: lax.operad().clone(),
            carrier: lax.carrier().clone(),
            kind: AlgebraKind::Words(lax),
            pres: None,
            cache: Default::default(),
        }
    }

    /// An algebra given by its multiplication matrices `μ_n` for
    /// `n = 0..mult.len()`, columns flat over `O(n)⊗A^{⊗n}`. Weight-zero
    /// basis elements must be constants (images of `μ_0`) unless a generator
    /// limit is used downstream.
    pub fn from_table(name: impl Into<String>, operad: Arc<Operad>, carrier: Complex, mult: Vec<GradedMap>) -> Result<Self> {
        let dim = carrier.dim();
        let dims: Vec<usize> = (0..mult.len()).map(|n| operad.dim(n)).collect();
        for (n, m) in mult.iter().enumerate() {
            let cols = dims[n] * dim.pow(n as u32);
            if m.cols().len() != cols || m.target().dim() != dim {
                return Err(Error::Dimension(format!("μ_{n} has the wrong shape")));
            }
        }
        let table = Arc::new(Tabulated { dims, dim, mult });
        let sp = carrier.space().clone();
        // constants: solve μ_0(p) = b for weight-zero basis elements
        let mu0 = if table.mult.is_empty() || operad.dim(0) == 0 {
            None
        } else {
            Some(GradedMap::new(operad.components()[0].space().clone(), sp.clone(), 0, table.mult[0].cols().to_vec())?)
        };
        let mut gens = Vec::new();
        let mut decomp = Vec::with_capacity(dim);
        for b in 0..dim {
            let constant = if sp.weight(b) == 0 {
                mu0.as_ref().and_then(|m| solve(m, &SparseVec::unit(b)))
            } else {
                None
            };
            match constant {
                Some(p) => decomp.push(vec![Term { coeff: Rational::one(), arity: 0, op: p, gens: vec![] }]),
                None => {
                    let g = gens.len() as u32;
                    gens.push(b);
                    decomp.push(vec![Term { coeff: Rational::one(), arity: 1, op: operad.unit().clone(), gens: vec![g] }]);
                }
            }
        }
        let diff = gens
            .iter()
            .map(|&b| Image {
                linear: carrier.differential().col(b).iter().map(|(z, c)| (Fed::Elem(z as u32), c.clone())).collect(),
                words: WordVec::new(),
            })
            .collect();
        let pres = Presentation {
            gen_elems: gens.iter().map(|&b| SparseVec::unit(b)).collect(),
            degree: gens.iter().map(|&b| sp.degree(b)).collect(),
            weight: gens.iter().map(|&b| sp.weight(b)).collect(),
            label: gens.iter().map(|&b| sp.label(b).to_string()).collect(),
            diff,
            decomp,
            elem_degree: (0..dim).map(|i| sp.degree(i)).collect(),
            elem_weight: (0..dim).map(|i| sp.weight(i)).collect(),
            table: Some(table.clone()),
        };
        Ok(OperadAlgebra {
            name: name.into(),
            operad,
            carrier,
            kind: AlgebraKind::Table(table),
            pres: Some(Arc::new(pres)),
            cache: Default::default(),
        })
    }

    /// Tabulates `f(n, p, bs)` for arities `0..=arity`.
    pub fn tabulate(
        name: impl Into<String>,
        operad: Arc<Operad>,
        carrier: Complex,
        arity: usize,
        f: impl Fn(usize, usize, &[usize]) -> SparseVec,
    ) -> Result<Self> {
        let dim = carrier.dim();
        let mut mult = Vec::new();
        for n in 0..=arity {
            let factors: Vec<&Complex> = std::iter::once(&operad.components()[n])
                .chain(std::iter::repeat_n(&carrier, n))
                .collect();
            let src = crate::complexes::tensor_power(&factors);
            let mut dims = vec![operad.dim(n)];
            dims.extend(std::iter::repeat_n(dim, n));
            let cols = (0..src.dim())
                .map(|flat| {
                    let idx = crate::perm::unflatten(flat, &dims);
                    f(n, idx[0], &idx[1..])
                })
                .collect();
            mult.push(GradedMap::new(src.space().clone(), carrier.space().clone(), 0, cols)?);
        }
        OperadAlgebra::from_table(name, operad, carrier, mult)
    }

    /// Replaces the multiplication of arity `k` (for mutation tests).
    pub fn with_table_entry(&self, k: usize, p: usize, bs: &[usize], value: SparseVec) -> Result<Self> {
        let AlgebraKind::Table(t) = &self.kind else {
            return Err(Error::Dimension("only tabulated algebras can be edited".into()));
        };
        let mut t = (**t).clone();
        let mut idx = vec![p];
        idx.extend_from_slice(bs);
        let mut dims = vec![t.dims[k]];
        dims.extend(std::iter::repeat_n(t.dim, k));
        let mut cols = t.mult[k].cols().to_vec();
        cols[flatten(&idx, &dims)] = value;
        t.mult[k] = GradedMap::new(t.mult[k].source().clone(), t.mult[k].target().clone(), 0, cols)?;
        OperadAlgebra::from_table(self.name.clone(), self.operad.clone(), self.carrier.clone(), t.mult)
    }
}

/// The free algebra `F_O(V)` up to weight `w` (generators have weight at
/// least one).
pub fn free_algebra(operad: Arc<Operad>, v: &Complex, w: u32) -> Result<OperadAlgebra> {
    free_algebra_with(operad, v, w, None)
}

/// `F_O(V)` with each generator's differential extended by words.
pub fn free_algebra_with(operad: Arc<Operad>, v: &Complex, w: u32, extra: Option<Vec<WordVec>>) -> Result<OperadAlgebra> {
    let name = format!("F_{}", operad.name());
    let spec = LaxSpec::new(name.clone(), operad, raw_presentation(v, extra), w);
    OperadAlgebra::from_words(name, Arc::new(Lax::build(spec)?))
}

/// Coinvariants of a complex under an action given by the generators
/// `s_1..s_{n-1}`: the quotient by `x − x·s_i`, with its projection.
pub fn coinvariants(x: &Complex, generators: &[GradedMap]) -> Result<(Complex, GradedMap)> {
    let sp = x.space().clone();
    let mut rel = Subspace::zero(sp.clone());
    for s in generators {
        for i in 0..sp.dim() {
            rel.insert(SparseVec::unit(i).sub(s.col(i)));
        }
    }
    let q: Quotient = crate::linalg::quotient(sp, &rel);
    let d = q.projection.compose(x.differential())?;
    let cols = q.section.iter().map(|&a| d.col(a).clone()).collect();
    let dq = GradedMap::new(q.space.clone(), q.space.clone(), 1, cols)?;
    // the projection must intertwine the differentials
    if d != dq.compose(&q.projection)? {
        return Err(Error::IllDefinedQuotient("the action does not commute with the differential".into()));
    }
    Ok((Complex::new(q.space.clone(), dq)?, q.projection))
}

/// An associative unital algebra in complexes.
#[derive(Clone, Debug)]
pub struct Monoid {
    pub carrier: Complex,
    /// `carrier ⊗ carrier → carrier`, columns flat with the left factor slowest.
    pub mul: GradedMap,
    pub unit: SparseVec,
}

impl Monoid {
    pub fn product(&self, x: &SparseVec, y: &SparseVec) -> SparseVec {
        let n = self.carrier.dim();
        let mut out = SparseVec::new();
        for (i, a) in x.iter() {
            for (j, b) in y.iter() {
                out.add_scaled(self.mul.col(i * n + j), &(a * b));
            }
        }
        out
    }
}

pub fn check_monoid(m: &Monoid) -> AxiomReport {
    let mut r = AxiomReport::default();
    let n = m.carrier.dim();
    let e = |i: usize| SparseVec::unit(i);
    for i in 0..n {
        r.check(m.product(&m.unit, &e(i)) == e(i), "monoid.unit.left", &[i], || "1·x ≠ x".into());
        r.check(m.product(&e(i), &m.unit) == e(i), "monoid.unit.right", &[i], || "x·1 ≠ x".into());
        for j in 0..n {
            let xy = m.product(&e(i), &e(j));
            for k in 0..n {
                let lhs = m.product(&xy, &e(k));
                let rhs = m.product(&e(i), &m.product(&e(j), &e(k)));
                r.check(lhs == rhs, "monoid.associativity", &[i, j, k], || "(xy)z ≠ x(yz)".into());
            }
        }
    }
    // Leibniz: ∂(xy) = ∂x·y + (-1)^{|x|} x·∂y
    let d = m.carrier.differential();
    for i in 0..n {
        let di = d.col(i).clone();
        let s = sign(m.carrier.space().degree(i) % 2 != 0);
        for j in 0..n {
            let lhs = d.apply(&m.product(&e(i), &e(j)));
            let mut rhs = m.product(&di, &e(j));
            rhs.add_scaled(&m.product(&e(i), d.col(j)), &s);
            r.check(lhs == rhs, "monoid.differential", &[i, j], || "∂ is not a derivation".into());
        }
    }
    if !d.apply(&m.unit).is_zero() {
        r.fail("monoid.unit.closed", &[], "∂1 ≠ 0");
    }
    r
}

/// Exhaustive check of the algebra axioms up to the given arity: unit,
/// equivariance under adjacent transpositions, partial associativity and
/// compatibility with differentials.
pub fn check_algebra(a: &OperadAlgebra, max_arity: usize) -> AxiomReport {
    let mut r = AxiomReport::default();
    let op = a.operad();
    let cap = max_arity.min(op.arity_cap());
    let dim = a.dim();
    let deg = |i: usize| a.carrier().space().degree(i);
    let run = |r: &mut AxiomReport| -> Result<()> {
        for x in 0..dim {
            let v = a.mult(1, op.unit(), &[SparseVec::unit(x)])?;
            r.check(v == SparseVec::unit(x), "algebra.unit", &[x], || "μ(η; x) ≠ x".into());
        }
        for n in 0..=cap {
            for tuple in tuples(dim, n) {
                let tdeg: Vec<i32> = tuple.iter().map(|&i| deg(i)).collect();
                for p in 0..op.dim(n) {
                    let base = a.mult_basis(n, p, &tuple)?;
                    // equivariance: μ(p·s_i; x) = ± μ(p; s_i x)
                    for i in 0..n.saturating_sub(1) {
                        let ps = op.act_generator_basis(n, p, i);
                        let mut sw = tuple.clone();
                        sw.swap(i, i + 1);
                        let lhs = a.mult(n, &ps, &tuple.iter().map(|&t| SparseVec::unit(t)).collect::<Vec<_>>())?;
                        let rhs = a.mult_basis(n, p, &sw)?.scaled(&sign(odd(tdeg[i], tdeg[i + 1])));
                        r.check(lhs == rhs, "algebra.equivariance", &[n, p, i], || format!("at {tuple:?}"));
                    }
                    // differential
                    let lhs = a.carrier().differential().apply(&base);
                    let dp = op.components()[n].differential().apply(&SparseVec::unit(p));
                    let xs: Vec<SparseVec> = tuple.iter().map(|&t| SparseVec::unit(t)).collect();
                    let mut rhs = a.mult(n, &dp, &xs)?;
                    let mut before = op.degree(n, p);
                    for i in 0..n {
                        let mut ys = xs.clone();
                        ys[i] = a.carrier().differential().col(tuple[i]).clone();
                        rhs.add_scaled(&a.mult_basis_vec(n, p, &ys)?, &sign(before % 2 != 0));
                        before += tdeg[i];
                    }
                    r.check(lhs == rhs, "algebra.differential", &[n, p], || format!("at {tuple:?}"));
                }
            }
        }
        // partial associativity: μ(p∘_i q; x) = ± μ(p; .., μ(q; ..), ..)
        for n in 1..=cap {
            for k in 0..=cap + 1 - n {
                let m = n + k - 1;
                if m > cap {
                    continue;
                }
                for tuple in tuples(dim, m) {
                    let tdeg: Vec<i32> = tuple.iter().map(|&i| deg(i)).collect();
                    for p in 0..op.dim(n) {
                        for q in 0..op.dim(k) {
                            for i in 0..n {
                                let comp = op.partial_basis(n, p, i, k, q)?;
                                let xs: Vec<SparseVec> = tuple.iter().map(|&t| SparseVec::unit(t)).collect();
                                let lhs = a.mult(m, &comp, &xs)?;
                                let inner = a.mult_basis(k, q, &tuple[i..i + k])?;
                                let mut ys: Vec<SparseVec> = xs[..i].to_vec();
                                ys.push(inner);
                                ys.extend_from_slice(&xs[i + k..]);
                                let before: i32 = tdeg[..i].iter().sum();
                                let rhs = a.mult_basis_vec(n, p, &ys)?.scaled(&sign(odd(op.degree(k, q), before)));
                                r.check(lhs == rhs, "algebra.associativity", &[n, p, i, k, q], || format!("at {tuple:?}"));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    };
    if let Err(e) = run(&mut r) {
        r.fail("algebra.evaluation", &[], e.to_string());
    }
    r
}

impl OperadAlgebra {
    /// `μ(p; y_1..y_n)` for a basis operation and vector inputs.
    pub fn mult_basis_vec(&self, n: usize, p: usize, ys: &[SparseVec]) -> Result<SparseVec> {
        self.mult(n, &SparseVec::unit(p), ys)
    }
}

/// All tuples of basis indices of length `n`.
pub fn tuples(dim: usize, n: usize) -> Vec<Vec<usize>> {
    let mut acc = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::with_capacity(acc.len() * dim);
        for t in &acc {
            for i in 0..dim {
                let mut v = t.clone();
                v.push(i);
                next.push(v);
            }
        }
        acc = next;
    }
    acc
}

/// `A` presented by all of its basis elements, with no relations imposed:
/// the generators of the tensor algebra.
fn tensor_presentation(a: &OperadAlgebra) -> Arc<Presentation> {
    let sp = a.carrier().space();
    let n = sp.dim();
    let unit = a.operad().unit().clone();
    Arc::new(Presentation {
        gen_elems: (0..n).map(SparseVec::unit).collect(),
        degree: (0..n).map(|i| sp.degree(i)).collect(),
        weight: (0..n).map(|i| sp.weight(i)).collect(),
        label: (0..n).map(|i| sp.label(i).to_string()).collect(),
        diff: (0..n)
            .map(|i| Image {
                linear: a.carrier().differential().col(i).iter().map(|(z, c)| (Fed::Gen(z as u32), c.clone())).collect(),
                words: WordVec::new(),
            })
            .collect(),
        decomp: (0..n)
            .map(|i| vec![Term { coeff: Rational::one(), arity: 1, op: unit.clone(), gens: vec![i as u32] }])
            .collect(),
        elem_degree: (0..n).map(|i| sp.degree(i)).collect(),
        elem_weight: (0..n).map(|i| sp.weight(i)).collect(),
        table: None,
    })
}

/// The hole: a single degree-zero slot marking where a module element goes.
pub fn hole() -> SlotType {
    SlotType::plain(Complex::unit())
}

/// A monoid of words with one hole, multiplied by inserting the right
/// factor into the hole of the left one.
fn hole_monoid(lax: &Lax) -> Result<Monoid> {
    let n = lax.dim();
    let sq = tensor(lax.carrier(), lax.carrier());
    let times = |x: &Word, y: &WordVec| -> Result<WordVec> {
        lax.insert(x.arity(), &SparseVec::unit(x.op as usize), &x.entries(), x.arity() - 1, y)
    };
    let single = |w: &Word| {
        let mut v = WordVec::new();
        add_word(&mut v, w.clone(), &Rational::one());
        v
    };
    let mut cols = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            cols.push(lax.project(&times(lax.word(i), &single(lax.word(j)))?)?);
        }
    }
    // relations must be a two-sided ideal for the product to descend
    for r in lax.relations() {
        for j in 0..n {
            let y = lax.word(j);
            let mut left = WordVec::new();
            for (w, c) in &r {
                crate::lax::add_words(&mut left, &times(w, &single(y))?, c);
            }
            if !lax.project(&left)?.is_zero() || !lax.project(&times(y, &r)?)?.is_zero() {
                return Err(Error::IllDefinedQuotient(format!(
                    "multiplication of {} does not respect its relations",
                    lax.spec().name
                )));
            }
        }
    }
    let mul = GradedMap::new(sq.space().clone(), lax.carrier().space().clone(), 0, cols)?;
    let mut u = WordVec::new();
    for (b, c) in lax.operad().unit().iter() {
        add_word(&mut u, Word { op: b as u32, gens: vec![], slots: vec![(0, 0)] }, c);
    }
    let unit = lax.project(&u)?;
    Ok(Monoid { carrier: lax.carrier().clone(), mul, unit })
}

/// `T(A) = ⊕_n O(n+1) ⊗_{S_n} A^{⊗n}`, keeping words with at most
/// `max_inputs` algebra inputs.
pub fn tensor_algebra(a: &OperadAlgebra, max_inputs: usize) -> Result<(Monoid, Arc<Lax>)> {
    let w = a.weight_cap().unwrap_or(u32::MAX / 2);
    let mut spec = LaxSpec::new(format!("T({})", a.name()), a.operad().clone(), tensor_presentation(a), w)
        .with_slots(vec![hole()], vec![vec![1]]);
    spec.gen_limit = Some(max_inputs);
    let lax = Arc::new(Lax::build(spec)?);
    Ok((hole_monoid(&lax)?, lax))
}

/// The enveloping monoid together with its word model.
#[derive(Clone, Debug)]
pub struct Envelope {
    pub monoid: Monoid,
    pub words: Arc<Lax>,
}

/// Words over `A` with the given slots.
pub fn envelope_spec(a: &OperadAlgebra, slots: Vec<SlotType>, shapes: Vec<Vec<usize>>, name: String) -> Result<LaxSpec> {
    let w = a.weight_cap().unwrap_or(u32::MAX / 2);
    Ok(LaxSpec::new(name, a.operad().clone(), a.presentation()?.clone(), w).with_slots(slots, shapes))
}

/// `U(A)`, the universal enveloping monoid: words with one hole modulo the
/// relations making `A` act. `gen_limit` bounds the number of algebra
/// inputs when `A` has weight-zero generators.
pub fn universal_envelope(a: &OperadAlgebra, gen_limit: Option<usize>) -> Result<Envelope> {
    let mut spec = envelope_spec(a, vec![hole()], vec![vec![1]], format!("U({})", a.name()))?;
    spec.gen_limit = gen_limit;
    let lax = Arc::new(Lax::build(spec)?);
    let monoid = hole_monoid(&lax)?;
    Ok(Envelope { monoid, words: lax })
}

/// Weight dimensions of a carrier, as a vector indexed by weight.
pub fn weight_profile(c: &Complex, cap: u32) -> Vec<usize> {
    let wd: BTreeMap<u32, usize> = c.space().weight_dims();
    (0..=cap).map(|w| wd.get(&w).copied().unwrap_or(0)).collect()
}

/// A space spanned by labels, all in the given degree and weight one.
pub fn basis_space(labels: &[&str], degree: i32) -> Complex {
    let sp = GradedSpace::new(
        labels.iter().map(|l| crate::linalg::Basis::new(degree, 1, *l)).collect(),
    );
    Complex::zero_differential(Arc::new(sp))
}
