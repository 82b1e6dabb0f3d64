//! Truncated operads in cochain complexes.
//!
//! Composition is stored in simultaneous form `γ(o; p_1, …, p_n)`; partial
//! compositions insert the unit. Built-in operads compute their structure
//! constants on demand, table operads look them up.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_traits::One;

use crate::complexes::{inner_hom, tensor_power, Complex};
use crate::error::{Error, Result};
use crate::linalg::{sign, Basis, GradedMap, GradedSpace, Rational, SparseVec};
use crate::perm::{block_permutation, flatten, sum, unflatten, Permutation};

/// One failed diagram: a stable identifier, the arity tuple, and details.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomFailure {
    pub diagram: String,
    pub tuple: Vec<usize>,
    pub detail: String,
}

impl fmt::Display for AxiomFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {:?}: {}", self.diagram, self.tuple, self.detail)
    }
}

/// Outcome of an exhaustive axiom check. Empty iff every diagram commutes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AxiomReport {
    pub checked: usize,
    pub failures: Vec<AxiomFailure>,
}

impl AxiomReport {
    pub fn is_ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn fail(&mut self, diagram: &str, tuple: &[usize], detail: impl Into<String>) {
        // one entry per diagram and tuple keeps reports readable
        if self
            .failures
            .iter()
            .any(|f| f.diagram == diagram && f.tuple == tuple)
        {
            return;
        }
        self.failures.push(AxiomFailure {
            diagram: diagram.to_string(),
            tuple: tuple.to_vec(),
            detail: detail.into(),
        });
    }

    pub fn check(&mut self, ok: bool, diagram: &str, tuple: &[usize], detail: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.fail(diagram, tuple, detail());
        }
    }

    pub fn merge(&mut self, other: AxiomReport) {
        self.checked += other.checked;
        for f in other.failures {
            self.fail(&f.diagram, &f.tuple, f.detail);
        }
    }

    pub fn failed_diagrams(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self.failures.iter().map(|f| f.diagram.as_str()).collect();
        out.dedup();
        out
    }
}

/// Structure constants of an operad given by explicit matrices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperadTable {
    /// `actions[n][i]` is the right action of the transposition `(i, i+1)`
    /// on `O(n)`.
    pub actions: Vec<Vec<GradedMap>>,
    /// Keyed by `(n, m_1, …, m_n)`; columns indexed by the flat basis of
    /// `O(n) ⊗ O(m_1) ⊗ … ⊗ O(m_n)`, first factor slowest.
    pub gamma: BTreeMap<Vec<usize>, GradedMap>,
}

#[derive(Clone, Debug)]
enum Kind {
    Ass,
    Com,
    End { v: Complex },
    Table(OperadTable),
}

type CompKey = (usize, usize, usize, usize, usize);

pub struct Operad {
    name: String,
    cap: usize,
    components: Vec<Complex>,
    unit: SparseVec,
    kind: Kind,
    ass_index: Vec<HashMap<Vec<usize>, usize>>,
    ass_words: Vec<Vec<Vec<usize>>>,
    partial_cache: Mutex<HashMap<CompKey, SparseVec>>,
}

impl fmt::Debug for Operad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Operad")
            .field("name", &self.name)
            .field("cap", &self.cap)
            .field("dims", &self.components.iter().map(|c| c.dim()).collect::<Vec<_>>())
            .finish()
    }
}

impl Clone for Operad {
    fn clone(&self) -> Self {
        Operad {
            name: self.name.clone(),
            cap: self.cap,
            components: self.components.clone(),
            unit: self.unit.clone(),
            kind: self.kind.clone(),
            ass_index: self.ass_index.clone(),
            ass_words: self.ass_words.clone(),
            partial_cache: Mutex::new(HashMap::new()),
        }
    }
}

fn word_label(w: &[usize]) -> String {
    if w.is_empty() {
        return "()".into();
    }
    w.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join("")
}

/// The associative operad: `Ass(n)` has one basis vector per permutation
/// word `w`, acting by `a_1…a_n ↦ a_{w_1}⋯a_{w_n}`.
pub fn ass_operad(cap: usize) -> Operad {
    let mut components = Vec::new();
    let mut index = Vec::new();
    let mut words_by_arity = Vec::new();
    for n in 0..=cap {
        let words = Permutation::all(n);
        let mut map = HashMap::new();
        let mut basis = Vec::new();
        for (k, w) in words.iter().enumerate() {
            map.insert(w.images().to_vec(), k);
            basis.push(Basis::new(0, 0, word_label(w.images())));
        }
        components.push(Complex::zero_differential(Arc::new(GradedSpace::new(basis))));
        index.push(map);
        words_by_arity.push(words.iter().map(|w| w.images().to_vec()).collect());
    }
    let unit = if cap >= 1 { SparseVec::unit(0) } else { SparseVec::new() };
    Operad {
        name: "Ass".into(),
        cap,
        components,
        unit,
        kind: Kind::Ass,
        ass_index: index,
        ass_words: words_by_arity,
        partial_cache: Mutex::new(HashMap::new()),
    }
}

/// The commutative operad: `Com(n) = 1` with trivial actions.
pub fn com_operad(cap: usize) -> Operad {
    let components = (0..=cap)
        .map(|n| {
            Complex::zero_differential(Arc::new(GradedSpace::new(vec![Basis::new(
                0,
                0,
                format!("c{n}"),
            )])))
        })
        .collect();
    Operad {
        name: "Com".into(),
        cap,
        components,
        unit: SparseVec::unit(0),
        kind: Kind::Com,
        ass_index: Vec::new(),
        ass_words: Vec::new(),
        partial_cache: Mutex::new(HashMap::new()),
    }
}

/// The endomorphism operad `End_V(n) = [V^{⊗n}, V]`.
pub fn end_operad(v: &Complex, cap: usize) -> Operad {
    let mut components = Vec::new();
    for n in 0..=cap {
        let vs: Vec<&Complex> = vec![v; n];
        components.push(inner_hom(&tensor_power(&vs), v));
    }
    let d = v.dim();
    let unit = SparseVec::from_pairs((0..d).map(|j| (j * d + j, Rational::one())));
    Operad {
        name: "End".into(),
        cap,
        components,
        unit,
        kind: Kind::End { v: v.clone() },
        ass_index: Vec::new(),
        ass_words: Vec::new(),
        partial_cache: Mutex::new(HashMap::new()),
    }
}

impl Operad {
    /// An operad from explicit matrices. No axioms are checked here.
    pub fn from_table(
        name: impl Into<String>,
        components: Vec<Complex>,
        unit: SparseVec,
        table: OperadTable,
    ) -> Result<Operad> {
        if components.is_empty() {
            return Err(Error::Schema("an operad needs at least arity 0".into()));
        }
        let cap = components.len() - 1;
        if table.actions.len() != components.len() {
            return Err(Error::Schema("one action list per arity".into()));
        }
        for (n, gens) in table.actions.iter().enumerate() {
            if gens.len() != n.saturating_sub(1) {
                return Err(Error::Schema(format!("arity {n} needs {} generators", n.saturating_sub(1))));
            }
        }
        Ok(Operad {
            name: name.into(),
            cap,
            components,
            unit,
            kind: Kind::Table(table),
            ass_index: Vec::new(),
            ass_words: Vec::new(),
            partial_cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity_cap(&self) -> usize {
        self.cap
    }

    pub fn component(&self, n: usize) -> Result<&Complex> {
        self.components.get(n).ok_or_else(|| {
            Error::truncation(format!("{} operad", self.name), format!("arity {n} exceeds cap {}", self.cap))
        })
    }

    pub fn components(&self) -> &[Complex] {
        &self.components
    }

    pub fn dim(&self, n: usize) -> usize {
        self.components.get(n).map_or(0, |c| c.dim())
    }

    pub fn degree(&self, n: usize, i: usize) -> i32 {
        self.components[n].space().degree(i)
    }

    pub fn unit(&self) -> &SparseVec {
        &self.unit
    }

    pub fn is_commutative_builtin(&self) -> bool {
        matches!(self.kind, Kind::Com)
    }

    /// `true` when every component sits in degree 0 with zero differential,
    /// so no Koszul signs from the operad arise.
    pub fn is_concentrated_in_degree_zero(&self) -> bool {
        self.components.iter().all(|c| {
            c.space().basis().iter().all(|b| b.degree == 0) && c.differential().is_zero()
        })
    }

    fn check_arity(&self, n: usize) -> Result<()> {
        if n > self.cap {
            return Err(Error::truncation(
                format!("{} operad", self.name),
                format!("arity {n} exceeds cap {}", self.cap),
            ));
        }
        Ok(())
    }

    /// `γ(o; p_1, …, p_n)` on basis vectors; `inner[i] = (m_i, p_i)`.
    pub fn gamma_basis(&self, n: usize, o: usize, inner: &[(usize, usize)]) -> Result<SparseVec> {
        debug_assert_eq!(inner.len(), n);
        let m: usize = inner.iter().map(|x| x.0).sum();
        self.check_arity(n)?;
        self.check_arity(m)?;
        for &(mi, _) in inner {
            self.check_arity(mi)?;
        }
        Ok(match &self.kind {
            Kind::Com => SparseVec::unit(0),
            Kind::Ass => {
                let w = &self.ass_words[n][o];
                let words: Vec<&Vec<usize>> = inner.iter().map(|&(mi, p)| &self.ass_words[mi][p]).collect();
                let mut offs = Vec::with_capacity(n);
                let mut acc = 0;
                for &(mi, _) in inner {
                    offs.push(acc);
                    acc += mi;
                }
                let mut out = Vec::with_capacity(m);
                for &k in w {
                    out.extend(words[k].iter().map(|&l| offs[k] + l));
                }
                SparseVec::unit(self.ass_index[m][&out])
            }
            Kind::End { v } => end_gamma(v, n, o, inner),
            Kind::Table(t) => {
                let mut key = vec![n];
                key.extend(inner.iter().map(|x| x.0));
                let g = t.gamma.get(&key).ok_or_else(|| {
                    Error::truncation(format!("{} operad", self.name), format!("no composition for {key:?}"))
                })?;
                let mut idx = vec![o];
                idx.extend(inner.iter().map(|x| x.1));
                let dims: Vec<usize> = key.iter().map(|&a| self.dim(a)).collect();
                g.col(flatten(&idx, &dims)).clone()
            }
        })
    }

    /// Multilinear `γ` on vectors.
    pub fn gamma(&self, n: usize, o: &SparseVec, inner: &[(usize, SparseVec)]) -> Result<SparseVec> {
        let mut out = SparseVec::new();
        let mut stack: Vec<(Vec<(usize, usize)>, Rational)> = vec![(Vec::new(), Rational::one())];
        for (mi, p) in inner {
            let mut next = Vec::new();
            for (pre, c) in &stack {
                for (b, x) in p.iter() {
                    let mut q = pre.clone();
                    q.push((*mi, b));
                    next.push((q, c * x));
                }
            }
            stack = next;
        }
        for (o_b, oc) in o.iter() {
            for (args, c) in &stack {
                out.add_scaled(&self.gamma_basis(n, o_b, args)?, &(oc * c));
            }
        }
        Ok(out)
    }

    /// `o ∘_i p = γ(o; η, …, p, …, η)` on basis vectors, cached.
    pub fn partial_basis(&self, n: usize, o: usize, i: usize, k: usize, p: usize) -> Result<SparseVec> {
        let key = (n, o, i, k, p);
        if let Some(v) = self.partial_cache.lock().expect("cache lock").get(&key) {
            return Ok(v.clone());
        }
        let inner: Vec<(usize, SparseVec)> = (0..n)
            .map(|j| if j == i { (k, SparseVec::unit(p)) } else { (1, self.unit.clone()) })
            .collect();
        let v = self.gamma(n, &SparseVec::unit(o), &inner)?;
        self.partial_cache.lock().expect("cache lock").insert(key, v.clone());
        Ok(v)
    }

    /// `o ∘_i p` on vectors.
    pub fn partial(&self, n: usize, o: &SparseVec, i: usize, k: usize, p: &SparseVec) -> Result<SparseVec> {
        let mut out = SparseVec::new();
        for (ob, oc) in o.iter() {
            for (pb, pc) in p.iter() {
                out.add_scaled(&self.partial_basis(n, ob, i, k, pb)?, &(oc * pc));
            }
        }
        Ok(out)
    }

    /// Right action of the transposition `(i, i+1)` on a basis vector of `O(n)`.
    pub fn act_generator_basis(&self, n: usize, o: usize, i: usize) -> SparseVec {
        self.act_basis(n, o, &Permutation::transposition(n, i))
    }

    /// Right action `o·σ` on a basis vector.
    pub fn act_basis(&self, n: usize, o: usize, sigma: &Permutation) -> SparseVec {
        match &self.kind {
            Kind::Com => SparseVec::unit(o),
            Kind::Ass => {
                let inv = sigma.inverse();
                let moved: Vec<usize> = self.ass_words[n][o].iter().map(|&k| inv.apply(k)).collect();
                SparseVec::unit(self.ass_index[n][&moved])
            }
            Kind::End { v } => end_act(v, n, o, sigma),
            Kind::Table(t) => {
                let mut cur = SparseVec::unit(o);
                for &a in &sigma.adjacent_word() {
                    cur = t.actions[n][a].apply(&cur);
                }
                cur
            }
        }
    }

    pub fn act(&self, n: usize, o: &SparseVec, sigma: &Permutation) -> SparseVec {
        if sigma.is_identity() {
            return o.clone();
        }
        let mut out = SparseVec::new();
        for (b, c) in o.iter() {
            out.add_scaled(&self.act_basis(n, b, sigma), c);
        }
        out
    }

    /// Matrix of the right action of `(i, i+1)` on `O(n)`.
    pub fn action_generator(&self, n: usize, i: usize) -> GradedMap {
        let sp = self.components[n].space().clone();
        let cols = (0..sp.dim()).map(|b| self.act_generator_basis(n, b, i)).collect();
        GradedMap::new(sp.clone(), sp, 0, cols).expect("actions preserve degree")
    }

    /// All composition tuples `(n, m_1, …, m_n)` with `n, Σm ≤ cap`.
    pub fn composition_tuples(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for n in 0..=self.cap {
            for ms in compositions_up_to(n, self.cap) {
                let mut key = vec![n];
                key.extend(ms);
                out.push(key);
            }
        }
        out
    }

    /// Materializes all structure constants, e.g. for saving or mutation.
    pub fn to_table(&self) -> OperadTable {
        let actions = (0..=self.cap)
            .map(|n| (0..n.saturating_sub(1)).map(|i| self.action_generator(n, i)).collect())
            .collect();
        let mut gamma = BTreeMap::new();
        for key in self.composition_tuples() {
            let n = key[0];
            let dims: Vec<usize> = key.iter().map(|&a| self.dim(a)).collect();
            let factors: Vec<&Complex> = key.iter().map(|&a| &self.components[a]).collect();
            let src = tensor_power(&factors);
            let m: usize = key[1..].iter().sum();
            let total: usize = dims.iter().product();
            let cols = (0..total)
                .map(|flat| {
                    let idx = unflatten(flat, &dims);
                    let inner: Vec<(usize, usize)> = key[1..].iter().copied().zip(idx[1..].iter().copied()).collect();
                    self.gamma_basis(n, idx[0], &inner).expect("within cap")
                })
                .collect();
            let g = GradedMap::new(src.space().clone(), self.components[m].space().clone(), 0, cols)
                .expect("composition is homogeneous");
            gamma.insert(key, g);
        }
        OperadTable { actions, gamma }
    }

    /// A table copy of this operad.
    pub fn tabulated(&self) -> Operad {
        Operad::from_table(self.name.clone(), self.components.clone(), self.unit.clone(), self.to_table())
            .expect("materialized table is well formed")
    }

    pub fn table(&self) -> Option<&OperadTable> {
        match &self.kind {
            Kind::Table(t) => Some(t),
            _ => None,
        }
    }

    pub fn table_mut(&mut self) -> Option<&mut OperadTable> {
        self.partial_cache.lock().expect("cache lock").clear();
        match &mut self.kind {
            Kind::Table(t) => Some(t),
            _ => None,
        }
    }
}

/// All `(m_1, …, m_n)` with `m_i ≥ 0` and `Σ m_i ≤ total`.
pub fn compositions_up_to(n: usize, total: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    fn rec(i: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for v in 0..=left {
            cur[i] = v;
            rec(i + 1, left - v, cur, out);
        }
        cur[i] = 0;
    }
    rec(0, total, &mut cur, &mut out);
    out
}

fn end_decode(v: &Complex, n: usize, o: usize) -> (Vec<usize>, usize) {
    let d = v.dim();
    let tuple = unflatten(o / d, &vec![d; n]);
    (tuple, o % d)
}

fn end_encode(v: &Complex, tuple: &[usize], out: usize) -> usize {
    let d = v.dim();
    flatten(tuple, &vec![d; tuple.len()]) * d + out
}

fn tuple_degree(v: &Complex, t: &[usize]) -> i32 {
    t.iter().map(|&i| v.space().degree(i)).sum()
}

fn end_gamma(v: &Complex, n: usize, o: usize, inner: &[(usize, usize)]) -> SparseVec {
    let (wanted, out) = end_decode(v, n, o);
    let mut inputs = Vec::new();
    let mut odd = false;
    let mut prev_input_deg = 0i32;
    for (k, &(mk, p)) in inner.iter().enumerate() {
        let (t, j) = end_decode(v, mk, p);
        if j != wanted[k] {
            return SparseVec::new();
        }
        let g_deg = v.space().degree(j) - tuple_degree(v, &t);
        // g_k passes the inputs of g_1, …, g_{k-1}
        if g_deg % 2 != 0 && prev_input_deg % 2 != 0 {
            odd = !odd;
        }
        prev_input_deg += tuple_degree(v, &t);
        inputs.extend(t);
    }
    SparseVec::from_pairs([(end_encode(v, &inputs, out), sign(odd))])
}

fn end_act(v: &Complex, n: usize, o: usize, sigma: &Permutation) -> SparseVec {
    // (f·σ)(x) = f(σ·x); f = [w ↦ out] picks x = σ^{-1}·w
    let (w, out) = end_decode(v, n, o);
    let x: Vec<usize> = (0..n).map(|i| w[sigma.apply(i)]).collect();
    let degrees: Vec<i32> = x.iter().map(|&i| v.space().degree(i)).collect();
    let odd = sigma.koszul_odd(&degrees);
    SparseVec::from_pairs([(end_encode(v, &x, out), sign(odd))])
}

/// Exhaustive verification of the operad axioms on basis elements.
///
/// Associativity and equivariance are checked in partial-composition form:
/// `γ` must agree with iterated `∘_i`, and the `∘_i` must satisfy the
/// sequential and parallel laws and be equivariant. Together with the unit
/// laws this is equivalent to the simultaneous axioms while touching far
/// fewer basis tuples.
pub fn check_operad(op: &Operad) -> AxiomReport {
    let mut r = AxiomReport::default();
    check_actions(op, &mut r);
    check_units(op, &mut r);
    check_differential(op, &mut r);
    check_equivariance(op, &mut r);
    check_associativity(op, &mut r);
    r
}

pub fn check_actions(op: &Operad, r: &mut AxiomReport) {
    for n in 2..=op.cap {
        let gens: Vec<GradedMap> = (0..n - 1).map(|i| op.action_generator(n, i)).collect();
        let comp = &op.components[n];
        for (i, g) in gens.iter().enumerate() {
            let sq = g.compose(g).expect("endomorphism");
            r.check(sq == GradedMap::identity(comp.space().clone()), "operad.action.involution", &[n, i], || {
                format!("generator {i} does not square to the identity")
            });
            let chain = comp.differential().compose(g).expect("endo") == g.compose(comp.differential()).expect("endo");
            r.check(chain, "operad.action.chain", &[n, i], || format!("generator {i} is not a chain map"));
            if i + 1 < n - 1 {
                let h = &gens[i + 1];
                let lhs = g.compose(h).unwrap().compose(g).unwrap();
                let rhs = h.compose(g).unwrap().compose(h).unwrap();
                r.check(lhs == rhs, "operad.action.braid", &[n, i], || format!("braid relation fails at {i}"));
            }
            for (j, h) in gens.iter().enumerate().skip(i + 2) {
                let ok = g.compose(h).unwrap() == h.compose(g).unwrap();
                r.check(ok, "operad.action.commute", &[n, i, j], || format!("generators {i} and {j} do not commute"));
            }
        }
    }
}

pub fn check_units(op: &Operad, r: &mut AxiomReport) {
    if op.cap == 0 {
        return;
    }
    for m in 0..=op.cap {
        for p in 0..op.dim(m) {
            let lhs = op.gamma(1, op.unit(), &[(m, SparseVec::unit(p))]);
            r.check(lhs.as_ref().ok() == Some(&SparseVec::unit(p)), "operad.unit.left", &[m], || {
                format!("γ(η; basis {p}) = {lhs:?}")
            });
        }
    }
    for n in 0..=op.cap {
        for o in 0..op.dim(n) {
            let inner: Vec<(usize, SparseVec)> = (0..n).map(|_| (1, op.unit().clone())).collect();
            let rhs = op.gamma(n, &SparseVec::unit(o), &inner);
            r.check(rhs.as_ref().ok() == Some(&SparseVec::unit(o)), "operad.unit.right", &[n], || {
                format!("γ(basis {o}; η, …, η) = {rhs:?}")
            });
        }
    }
}

/// Iterates over all basis tuples of the listed arities.
fn basis_tuples(op: &Operad, arities: &[usize]) -> Vec<Vec<usize>> {
    let dims: Vec<usize> = arities.iter().map(|&a| op.dim(a)).collect();
    let total: usize = dims.iter().product();
    (0..total).map(|f| unflatten(f, &dims)).collect()
}

/// `(n, i, k)` with `i < n` and `n + k - 1 ≤ cap`.
fn partial_shapes(cap: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for n in 1..=cap {
        for k in 0..=cap + 1 - n {
            for i in 0..n {
                out.push((n, i, k));
            }
        }
    }
    out
}

pub fn check_differential(op: &Operad, r: &mut AxiomReport) {
    if op.components.iter().all(|c| c.differential().is_zero()) {
        return;
    }
    // ∂(o ∘_i p) = ∂o ∘_i p + (-1)^{|o|} o ∘_i ∂p
    for (n, i, k) in partial_shapes(op.cap) {
        let m = n + k - 1;
        for o in 0..op.dim(n) {
            let ov = SparseVec::unit(o);
            let dov = op.components[n].differential().apply(&ov);
            for p in 0..op.dim(k) {
                let pv = SparseVec::unit(p);
                let dpv = op.components[k].differential().apply(&pv);
                let lhs = op.components[m]
                    .differential()
                    .apply(&op.partial(n, &ov, i, k, &pv).unwrap_or_default());
                let mut rhs = op.partial(n, &dov, i, k, &pv).unwrap_or_default();
                rhs.add_scaled(
                    &op.partial(n, &ov, i, k, &dpv).unwrap_or_default(),
                    &sign(op.degree(n, o) % 2 != 0),
                );
                r.check(lhs == rhs, "operad.differential", &[n, i, k], || format!("basis ({o}, {p})"));
            }
        }
    }
}

pub fn check_equivariance(op: &Operad, r: &mut AxiomReport) {
    let perms: Vec<Vec<Permutation>> = (0..=op.cap).map(Permutation::all).collect();
    for (n, i, k) in partial_shapes(op.cap) {
        let m = n + k - 1;
        let mut blocks = vec![1; n];
        for sigma in &perms[n] {
            blocks[i] = k;
            let bp = block_permutation(sigma, &blocks).expect("sizes match");
            // (o·σ) ∘_i p = (o ∘_{σ(i)} p) · σ̃
            for o in 0..op.dim(n) {
                let moved = op.act_basis(n, o, sigma);
                for p in 0..op.dim(k) {
                    let pv = SparseVec::unit(p);
                    let lhs = op.partial(n, &moved, i, k, &pv).unwrap_or_default();
                    let inner = op.partial(n, &SparseVec::unit(o), sigma.apply(i), k, &pv).unwrap_or_default();
                    let rhs = op.act(m, &inner, &bp);
                    r.check(lhs == rhs, "operad.equivariance.block", &[n, i, k], || {
                        format!("σ = {sigma}, basis ({o}, {p})")
                    });
                }
            }
        }
        // o ∘_i (p·τ) = (o ∘_i p) · (1 ⊕ τ ⊕ 1)
        for tau in &perms[k] {
            if tau.is_identity() {
                continue;
            }
            let taus: Vec<Permutation> = (0..n)
                .map(|j| if j == i { tau.clone() } else { Permutation::identity(1) })
                .collect();
            let total = sum(&taus);
            for o in 0..op.dim(n) {
                let ov = SparseVec::unit(o);
                for p in 0..op.dim(k) {
                    let lhs = op.partial(n, &ov, i, k, &op.act_basis(k, p, tau)).unwrap_or_default();
                    let rhs = op.act(m, &op.partial_basis(n, o, i, k, p).unwrap_or_default(), &total);
                    r.check(lhs == rhs, "operad.equivariance.sum", &[n, i, k], || {
                        format!("τ = {tau}, basis ({o}, {p})")
                    });
                }
            }
        }
    }
}

pub fn check_associativity(op: &Operad, r: &mut AxiomReport) {
    let cap = op.cap;
    // γ(o; p_1, …, p_n) is iterated ∘_i; inputs of arity ≤ 1 go first so
    // intermediate arities stay within the cap, out-of-order insertions
    // contribute Koszul signs
    for key in op.composition_tuples() {
        let n = key[0];
        if n < 2 {
            continue;
        }
        let ms = &key[1..];
        let mut order: Vec<usize> = (0..n).filter(|&i| ms[i] <= 1).collect();
        order.extend((0..n).filter(|&i| ms[i] > 1));
        for idx in basis_tuples(op, &key) {
            let inner: Vec<(usize, usize)> = ms.iter().copied().zip(idx[1..].iter().copied()).collect();
            let lhs = op.gamma_basis(n, idx[0], &inner).unwrap_or_default();
            let mut cur = SparseVec::unit(idx[0]);
            let mut arity = n;
            let mut done = vec![false; n];
            let mut odd = false;
            for &i in &order {
                let pos: usize = (0..i).map(|j| if done[j] { ms[j] } else { 1 }).sum();
                let deg = op.degree(ms[i], idx[1 + i]);
                for j in i + 1..n {
                    if done[j] && deg % 2 != 0 && op.degree(ms[j], idx[1 + j]) % 2 != 0 {
                        odd = !odd;
                    }
                }
                cur = op.partial(arity, &cur, pos, ms[i], &SparseVec::unit(idx[1 + i])).unwrap_or_default();
                arity = arity + ms[i] - 1;
                done[i] = true;
            }
            let rhs = cur.scaled(&sign(odd));
            r.check(lhs == rhs, "operad.associativity.decomposition", &key, || format!("basis {idx:?}"));
        }
    }
    // (o ∘_i p) ∘_{i+j} q = o ∘_i (p ∘_j q)
    for (n, i, k) in partial_shapes(cap) {
        if k == 0 {
            continue;
        }
        for l in 0..=(cap + 2).saturating_sub(n + k) {
            for j in 0..k {
                for o in 0..op.dim(n) {
                    let ov = SparseVec::unit(o);
                    for p in 0..op.dim(k) {
                        let op_ = op.partial_basis(n, o, i, k, p).unwrap_or_default();
                        for qb in 0..op.dim(l) {
                            let qv = SparseVec::unit(qb);
                            let lhs = op.partial(n + k - 1, &op_, i + j, l, &qv).unwrap_or_default();
                            let pq = op.partial_basis(k, p, j, l, qb).unwrap_or_default();
                            let rhs = op.partial(n, &ov, i, k + l - 1, &pq).unwrap_or_default();
                            r.check(lhs == rhs, "operad.associativity.sequential", &[n, k, l, i, j], || {
                                format!("basis ({o}, {p}, {qb})")
                            });
                        }
                    }
                }
            }
        }
    }
    // (o ∘_i p) ∘_{j+k-1} q = (-1)^{|p||q|} (o ∘_j q) ∘_i p  for i < j
    for n in 2..=cap {
        for k in 0..=cap + 1 - n {
            for l in 0..=(cap + 2).saturating_sub(n + k) {
                if n + l - 1 > cap {
                    continue;
                }
                for i in 0..n {
                    for j in i + 1..n {
                        for o in 0..op.dim(n) {
                            for p in 0..op.dim(k) {
                                let pv = SparseVec::unit(p);
                                let op_ = op.partial_basis(n, o, i, k, p).unwrap_or_default();
                                for qb in 0..op.dim(l) {
                                    let qv = SparseVec::unit(qb);
                                    let lhs = op.partial(n + k - 1, &op_, j + k - 1, l, &qv).unwrap_or_default();
                                    let oq = op.partial_basis(n, o, j, l, qb).unwrap_or_default();
                                    let odd = op.degree(k, p) % 2 != 0 && op.degree(l, qb) % 2 != 0;
                                    let rhs = op.partial(n + l - 1, &oq, i, k, &pv).unwrap_or_default().scaled(&sign(odd));
                                    r.check(lhs == rhs, "operad.associativity.parallel", &[n, k, l, i, j], || {
                                        format!("basis ({o}, {p}, {qb})")
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::q;

    #[test]
    fn ass_dimensions_and_unit() {
        let a = ass_operad(4);
        assert_eq!(a.dim(3), 6);
        assert_eq!(a.dim(0), 1);
        assert_eq!(a.unit(), &SparseVec::unit(0));
        // γ(id_2; id_1, id_2) = id_3
        let g = a.gamma_basis(2, 0, &[(1, 0), (2, 0)]).unwrap();
        assert_eq!(g, SparseVec::unit(0));
    }

    #[test]
    fn com_is_one_dimensional_with_trivial_action() {
        let c = com_operad(4);
        for n in 0..=4 {
            assert_eq!(c.dim(n), 1);
            for i in 0..n.saturating_sub(1) {
                assert_eq!(c.action_generator(n, i).col(0), &SparseVec::unit(0));
            }
        }
    }

    #[test]
    fn end_dimensions() {
        let v = Complex::zero_differential(Arc::new(GradedSpace::from_dims(&[(0, 2)])));
        let e = end_operad(&v, 3);
        assert_eq!(e.dim(2), 8);
        let one = end_operad(&Complex::unit(), 3);
        for n in 0..=3 {
            assert_eq!(one.dim(n), 1);
        }
    }

    #[test]
    fn builtins_pass_small_checks() {
        assert!(check_operad(&com_operad(3)).is_ok());
        assert!(check_operad(&ass_operad(3)).is_ok());
        let s = Arc::new(GradedSpace::from_dims(&[(0, 1), (1, 1)]));
        let d = GradedMap::new(s.clone(), s.clone(), 1, vec![SparseVec::unit(1), SparseVec::new()]).unwrap();
        let v = Complex::new(s, d).unwrap();
        let report = check_operad(&end_operad(&v, 3));
        assert!(report.is_ok(), "{:?}", report.failures.first());
    }

    #[test]
    fn flipped_sign_is_caught() {
        let mut a = ass_operad(3).tabulated();
        let t = a.table_mut().unwrap();
        let key = vec![2, 2, 1];
        let g = t.gamma.get_mut(&key).unwrap();
        let mut cols = g.cols().to_vec();
        cols[0] = cols[0].scaled(&q(-1));
        *g = GradedMap::new(g.source().clone(), g.target().clone(), 0, cols).unwrap();
        let report = check_operad(&a);
        assert!(!report.is_ok());
        assert!(report.failed_diagrams().iter().any(|d| d.starts_with("operad.associativity")));
    }
}
