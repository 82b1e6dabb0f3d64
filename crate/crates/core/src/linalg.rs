//! Exact rational linear algebra over finite graded vector spaces.
//!
//! Spaces carry a flat, ordered basis; every basis vector has a cohomological
//! degree and a non-negative weight. Maps are stored column-sparse and are
//! homogeneous of a fixed degree, so the per-degree blocks of the usual
//! presentation are just slices of the flat matrix.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use crate::rational::Rational;

pub fn q(n: i64) -> Rational {
    Rational::from_integer(n)
}

pub fn qf(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

/// Parses `"p/q"` or `"p"`; the result is always reduced.
pub fn parse_rational(s: &str) -> Result<Rational> {
    s.trim()
        .parse()
        .map_err(|_| Error::Schema(format!("not a rational number: {:?}", s.trim())))
}

/// Canonical text form: `"p"` for integers, `"p/q"` otherwise.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

/// `(-1)^k` as a rational.
pub fn sign(odd: bool) -> Rational {
    if odd {
        -Rational::one()
    } else {
        Rational::one()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Basis {
    pub degree: i32,
    pub weight: u32,
    pub label: String,
}

impl Basis {
    pub fn new(degree: i32, weight: u32, label: impl Into<String>) -> Self {
        Basis {
            degree,
            weight,
            label: label.into(),
        }
    }
}

/// A finite-dimensional graded rational vector space with an ordered basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct GradedSpace {
    basis: Vec<Basis>,
}

impl GradedSpace {
    pub fn new(basis: Vec<Basis>) -> Self {
        GradedSpace { basis }
    }

    pub fn zero() -> Self {
        GradedSpace { basis: Vec::new() }
    }

    /// The monoidal unit: one basis vector in degree 0.
    pub fn unit() -> Self {
        GradedSpace::new(vec![Basis::new(0, 0, "1")])
    }

    /// Space with the given dimension in each degree, labelled `e{deg}_{k}`.
    pub fn from_dims(dims: &[(i32, usize)]) -> Self {
        let mut basis = Vec::new();
        for &(deg, n) in dims {
            for k in 0..n {
                basis.push(Basis::new(deg, 0, format!("e{deg}_{k}")));
            }
        }
        GradedSpace::new(basis)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Basis] {
        &self.basis
    }

    pub fn degree(&self, i: usize) -> i32 {
        self.basis[i].degree
    }

    pub fn weight(&self, i: usize) -> u32 {
        self.basis[i].weight
    }

    pub fn label(&self, i: usize) -> &str {
        &self.basis[i].label
    }

    /// Nonzero dimensions per degree.
    pub fn dims(&self) -> BTreeMap<i32, usize> {
        let mut out = BTreeMap::new();
        for b in &self.basis {
            *out.entry(b.degree).or_insert(0) += 1;
        }
        out
    }

    pub fn dim_in(&self, degree: i32) -> usize {
        self.basis.iter().filter(|b| b.degree == degree).count()
    }

    /// Nonzero dimensions per weight.
    pub fn weight_dims(&self) -> BTreeMap<u32, usize> {
        let mut out = BTreeMap::new();
        for b in &self.basis {
            *out.entry(b.weight).or_insert(0) += 1;
        }
        out
    }

    /// Per-degree ordered label lists.
    pub fn labels_by_degree(&self) -> BTreeMap<i32, Vec<String>> {
        let mut out: BTreeMap<i32, Vec<String>> = BTreeMap::new();
        for b in &self.basis {
            out.entry(b.degree).or_default().push(b.label.clone());
        }
        out
    }

    pub fn indices_of_degree(&self, degree: i32) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.degree(i) == degree).collect()
    }

    /// Two spaces have the same shape when their degree sequences agree.
    pub fn same_shape(&self, other: &GradedSpace) -> bool {
        self.dim() == other.dim()
            && self
                .basis
                .iter()
                .zip(&other.basis)
                .all(|(a, b)| a.degree == b.degree)
    }

    pub fn degree_range(&self) -> Option<(i32, i32)> {
        let lo = self.basis.iter().map(|b| b.degree).min()?;
        let hi = self.basis.iter().map(|b| b.degree).max()?;
        Some((lo, hi))
    }

    /// Direct sum; returns the offsets of each summand in the flat basis.
    pub fn direct_sum(parts: &[&GradedSpace]) -> (GradedSpace, Vec<usize>) {
        let mut basis = Vec::new();
        let mut offsets = Vec::new();
        for p in parts {
            offsets.push(basis.len());
            basis.extend(p.basis.iter().cloned());
        }
        (GradedSpace::new(basis), offsets)
    }

    /// Tensor product with basis pairs `(i, j)` in row-major order.
    pub fn tensor(a: &GradedSpace, b: &GradedSpace) -> GradedSpace {
        let mut basis = Vec::with_capacity(a.dim() * b.dim());
        for x in &a.basis {
            for y in &b.basis {
                basis.push(Basis::new(
                    x.degree + y.degree,
                    x.weight + y.weight,
                    format!("{}⊗{}", x.label, y.label),
                ));
            }
        }
        GradedSpace::new(basis)
    }

    /// `X[k]`: degree `n` of the result is degree `n + k` of `X`.
    pub fn shift(&self, k: i32) -> GradedSpace {
        GradedSpace::new(
            self.basis
                .iter()
                .map(|b| Basis::new(b.degree - k, b.weight, b.label.clone()))
                .collect(),
        )
    }

    pub fn dual(&self) -> GradedSpace {
        GradedSpace::new(
            self.basis
                .iter()
                .map(|b| Basis::new(-b.degree, b.weight, format!("{}*", b.label)))
                .collect(),
        )
    }
}

/// Admissible degree window; constructions whose output leaves it fail
/// with `TruncationExceeded`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeWindow {
    pub lo: i32,
    pub hi: i32,
}

impl DegreeWindow {
    pub fn new(lo: i32, hi: i32) -> Self {
        DegreeWindow { lo, hi }
    }

    pub fn contains(&self, d: i32) -> bool {
        self.lo <= d && d <= self.hi
    }

    pub fn admit(&self, space: &GradedSpace, construction: &str) -> Result<()> {
        if let Some((lo, hi)) = space.degree_range() {
            if lo < self.lo || hi > self.hi {
                return Err(Error::truncation(
                    construction,
                    format!("degrees {lo}..{hi} leave window {}..{}", self.lo, self.hi),
                ));
            }
        }
        Ok(())
    }
}

impl Default for DegreeWindow {
    fn default() -> Self {
        DegreeWindow::new(-2, 3)
    }
}

/// Sparse rational vector indexed by basis position.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SparseVec {
    entries: BTreeMap<usize, Rational>,
}

impl SparseVec {
    pub fn new() -> Self {
        SparseVec::default()
    }

    pub fn unit(i: usize) -> Self {
        let mut v = SparseVec::new();
        v.entries.insert(i, Rational::one());
        v
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, Rational)>) -> Self {
        let mut v = SparseVec::new();
        for (i, c) in pairs {
            v.add_at(i, &c);
        }
        v
    }

    pub fn from_dense(values: &[Rational]) -> Self {
        SparseVec::from_pairs(values.iter().cloned().enumerate())
    }

    pub fn to_dense(&self, len: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); len];
        for (&i, c) in &self.entries {
            out[i] = c.clone();
        }
        out
    }

    pub fn get(&self, i: usize) -> Rational {
        self.entries.get(&i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add_at(&mut self, i: usize, c: &Rational) {
        if c.is_zero() {
            return;
        }
        match self.entries.get_mut(&i) {
            Some(x) => {
                *x += c;
                if x.is_zero() {
                    self.entries.remove(&i);
                }
            }
            None => {
                self.entries.insert(i, c.clone());
            }
        }
    }

    pub fn add_scaled(&mut self, other: &SparseVec, c: &Rational) {
        if c.is_zero() {
            return;
        }
        for (&i, x) in &other.entries {
            self.add_at(i, &(x * c));
        }
    }

    pub fn add(&mut self, other: &SparseVec) {
        for (&i, x) in &other.entries {
            self.add_at(i, x);
        }
    }

    pub fn scaled(&self, c: &Rational) -> SparseVec {
        if c.is_zero() {
            return SparseVec::new();
        }
        SparseVec {
            entries: self.entries.iter().map(|(&i, x)| (i, x * c)).collect(),
        }
    }

    pub fn neg(&self) -> SparseVec {
        SparseVec {
            entries: self.entries.iter().map(|(&i, x)| (i, -x)).collect(),
        }
    }

    pub fn sub(&self, other: &SparseVec) -> SparseVec {
        let mut out = self.clone();
        out.add_scaled(other, &-Rational::one());
        out
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Rational)> {
        self.entries.iter().map(|(&i, c)| (i, c))
    }

    pub fn leading(&self) -> Option<(usize, &Rational)> {
        self.entries.iter().next().map(|(&i, c)| (i, c))
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.keys().next_back().copied()
    }

    /// Re-indexes entries; indices mapped to `None` are dropped.
    pub fn reindex(&self, f: impl Fn(usize) -> Option<usize>) -> SparseVec {
        let mut out = SparseVec::new();
        for (&i, c) in &self.entries {
            if let Some(j) = f(i) {
                out.add_at(j, c);
            }
        }
        out
    }

    fn range_from(&self, from: usize) -> impl Iterator<Item = (usize, &Rational)> {
        self.entries.range(from..).map(|(&i, c)| (i, c))
    }
}

/// A homogeneous linear map of fixed degree between graded spaces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedMap {
    source: Arc<GradedSpace>,
    target: Arc<GradedSpace>,
    degree: i32,
    cols: Vec<SparseVec>,
}

impl GradedMap {
    /// Builds a map from its columns, validating shapes and homogeneity.
    pub fn new(
        source: Arc<GradedSpace>,
        target: Arc<GradedSpace>,
        degree: i32,
        cols: Vec<SparseVec>,
    ) -> Result<Self> {
        if cols.len() != source.dim() {
            return Err(Error::Dimension(format!(
                "{} columns for a source of dimension {}",
                cols.len(),
                source.dim()
            )));
        }
        for (i, col) in cols.iter().enumerate() {
            for (j, _) in col.iter() {
                if j >= target.dim() {
                    return Err(Error::Dimension(format!(
                        "row {j} out of range for target dimension {}",
                        target.dim()
                    )));
                }
                if target.degree(j) != source.degree(i) + degree {
                    return Err(Error::Dimension(format!(
                        "entry ({j},{i}) maps degree {} to {} in a map of degree {degree}",
                        source.degree(i),
                        target.degree(j)
                    )));
                }
            }
        }
        Ok(GradedMap {
            source,
            target,
            degree,
            cols,
        })
    }

    /// Builds a map, silently discarding entries that break homogeneity.
    /// Used where the entries are known to be homogeneous up to zero terms.
    pub(crate) fn new_unchecked(
        source: Arc<GradedSpace>,
        target: Arc<GradedSpace>,
        degree: i32,
        cols: Vec<SparseVec>,
    ) -> Self {
        debug_assert_eq!(cols.len(), source.dim());
        GradedMap {
            source,
            target,
            degree,
            cols,
        }
    }

    pub fn zero(source: Arc<GradedSpace>, target: Arc<GradedSpace>, degree: i32) -> Self {
        let cols = vec![SparseVec::new(); source.dim()];
        GradedMap {
            source,
            target,
            degree,
            cols,
        }
    }

    pub fn identity(space: Arc<GradedSpace>) -> Self {
        let cols = (0..space.dim()).map(SparseVec::unit).collect();
        GradedMap {
            source: space.clone(),
            target: space,
            degree: 0,
            cols,
        }
    }

    pub fn from_fn(
        source: Arc<GradedSpace>,
        target: Arc<GradedSpace>,
        degree: i32,
        f: impl Fn(usize) -> SparseVec,
    ) -> Result<Self> {
        let cols = (0..source.dim()).map(f).collect();
        GradedMap::new(source, target, degree, cols)
    }

    pub fn source(&self) -> &Arc<GradedSpace> {
        &self.source
    }

    pub fn target(&self) -> &Arc<GradedSpace> {
        &self.target
    }

    pub fn degree(&self) -> i32 {
        self.degree
    }

    pub fn col(&self, i: usize) -> &SparseVec {
        &self.cols[i]
    }

    pub fn cols(&self) -> &[SparseVec] {
        &self.cols
    }

    pub fn entry(&self, row: usize, col: usize) -> Rational {
        self.cols[col].get(row)
    }

    pub fn apply(&self, v: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (i, c) in v.iter() {
            out.add_scaled(&self.cols[i], c);
        }
        out
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &GradedMap) -> Result<GradedMap> {
        if !other.target.same_shape(&self.source) {
            return Err(Error::Dimension(format!(
                "cannot compose: inner target has dimension {}, outer source {}",
                other.target.dim(),
                self.source.dim()
            )));
        }
        Ok(GradedMap {
            source: other.source.clone(),
            target: self.target.clone(),
            degree: self.degree + other.degree,
            cols: other.cols.iter().map(|c| self.apply(c)).collect(),
        })
    }

    fn check_parallel(&self, other: &GradedMap) -> Result<()> {
        if !self.source.same_shape(&other.source)
            || !self.target.same_shape(&other.target)
            || self.degree != other.degree
        {
            return Err(Error::Dimension("maps are not parallel".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &GradedMap) -> Result<GradedMap> {
        self.check_parallel(other)?;
        let cols = self
            .cols
            .iter()
            .zip(&other.cols)
            .map(|(a, b)| {
                let mut c = a.clone();
                c.add(b);
                c
            })
            .collect();
        Ok(GradedMap {
            cols,
            ..self.clone()
        })
    }

    pub fn sub(&self, other: &GradedMap) -> Result<GradedMap> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rational) -> GradedMap {
        GradedMap {
            cols: self.cols.iter().map(|v| v.scaled(c)).collect(),
            ..self.clone()
        }
    }

    pub fn neg(&self) -> GradedMap {
        GradedMap {
            cols: self.cols.iter().map(|v| v.neg()).collect(),
            ..self.clone()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(|c| c.is_zero())
    }

    /// Same entries, reinterpreted between other spaces of the same shape.
    pub fn with_spaces(&self, source: Arc<GradedSpace>, target: Arc<GradedSpace>) -> Result<Self> {
        GradedMap::new(source, target, self.degree, self.cols.clone())
    }

    /// Same entries with a new nominal degree (used for shifted targets).
    pub fn with_degree(
        &self,
        source: Arc<GradedSpace>,
        target: Arc<GradedSpace>,
        degree: i32,
    ) -> Result<Self> {
        GradedMap::new(source, target, degree, self.cols.clone())
    }

    /// Dense block from source degree `n` to target degree `n + degree`.
    pub fn block(&self, n: i32) -> Vec<Vec<Rational>> {
        let src = self.source.indices_of_degree(n);
        let tgt = self.target.indices_of_degree(n + self.degree);
        tgt.iter()
            .map(|&r| src.iter().map(|&c| self.cols[c].get(r)).collect())
            .collect()
    }

    pub fn rank(&self) -> usize {
        let mut ech = Echelon::new();
        for c in &self.cols {
            ech.insert(c.clone());
        }
        ech.rank()
    }

    /// Rank of the block starting in source degree `n`.
    pub fn rank_in(&self, n: i32) -> usize {
        let mut ech = Echelon::new();
        for i in self.source.indices_of_degree(n) {
            ech.insert(self.cols[i].clone());
        }
        ech.rank()
    }

    pub fn transpose(&self) -> GradedMap {
        let mut cols = vec![SparseVec::new(); self.target.dim()];
        for (i, c) in self.cols.iter().enumerate() {
            for (j, x) in c.iter() {
                cols[j].add_at(i, x);
            }
        }
        GradedMap {
            source: Arc::new(self.target.dual()),
            target: Arc::new(self.source.dual()),
            degree: self.degree,
            cols,
        }
    }
}

impl fmt::Display for GradedMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "map of degree {} ({} -> {})",
            self.degree,
            self.source.dim(),
            self.target.dim()
        )?;
        for (i, c) in self.cols.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            write!(f, "  {} ->", self.source.label(i))?;
            for (j, x) in c.iter() {
                write!(f, " {}·{}", format_rational(x), self.target.label(j))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Incremental row echelon form. Each stored row has pivot coefficient 1 at
/// its smallest index; pivots are unique.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: BTreeMap<usize, SparseVec>,
}

impl Echelon {
    pub fn new() -> Self {
        Echelon::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.keys().copied()
    }

    pub fn is_pivot(&self, i: usize) -> bool {
        self.rows.contains_key(&i)
    }

    pub fn rows(&self) -> impl Iterator<Item = &SparseVec> {
        self.rows.values()
    }

    /// Remainder of `v` after eliminating every pivot coordinate.
    pub fn reduce(&self, v: &SparseVec) -> SparseVec {
        let mut cur = v.clone();
        let mut from = 0usize;
        loop {
            let hit = cur
                .range_from(from)
                .find(|(i, _)| self.rows.contains_key(i))
                .map(|(i, c)| (i, c.clone()));
            match hit {
                Some((p, c)) => {
                    cur.add_scaled(&self.rows[&p], &-c);
                    from = p + 1;
                }
                None => return cur,
            }
        }
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.reduce(v).is_zero()
    }

    /// Inserts `v`; returns `true` if it enlarged the span.
    pub fn insert(&mut self, v: SparseVec) -> bool {
        let r = self.reduce(&v);
        match r.leading() {
            None => false,
            Some((p, c)) => {
                let inv = c.recip();
                self.rows.insert(p, r.scaled(&inv));
                true
            }
        }
    }
}

/// Echelon form that records, for each row, the combination of inserted
/// vectors producing it.
#[derive(Clone, Debug, Default)]
struct TrackedEchelon {
    rows: BTreeMap<usize, (SparseVec, SparseVec)>,
}

impl TrackedEchelon {
    /// Returns `(remainder, combination)` with `v - Σ combination·inputs = remainder`
    /// expressed through recipes.
    fn reduce(&self, v: &SparseVec, recipe: &SparseVec) -> (SparseVec, SparseVec) {
        let mut cur = v.clone();
        let mut rec = recipe.clone();
        let mut from = 0usize;
        loop {
            let hit = cur
                .range_from(from)
                .find(|(i, _)| self.rows.contains_key(i))
                .map(|(i, c)| (i, c.clone()));
            match hit {
                Some((p, c)) => {
                    let (row, row_rec) = &self.rows[&p];
                    cur.add_scaled(row, &-c.clone());
                    rec.add_scaled(row_rec, &-c);
                    from = p + 1;
                }
                None => return (cur, rec),
            }
        }
    }

    fn insert(&mut self, v: &SparseVec, recipe: SparseVec) -> Option<SparseVec> {
        let (r, rec) = self.reduce(v, &recipe);
        match r.leading() {
            None => Some(rec),
            Some((p, c)) => {
                let inv = c.recip();
                self.rows.insert(p, (r.scaled(&inv), rec.scaled(&inv)));
                None
            }
        }
    }
}

/// A graded subspace, stored as an echelon basis of homogeneous vectors.
#[derive(Clone, Debug)]
pub struct Subspace {
    ambient: Arc<GradedSpace>,
    ech: Echelon,
}

impl Subspace {
    pub fn zero(ambient: Arc<GradedSpace>) -> Self {
        Subspace {
            ambient,
            ech: Echelon::new(),
        }
    }

    pub fn whole(ambient: Arc<GradedSpace>) -> Self {
        let mut s = Subspace::zero(ambient.clone());
        for i in 0..ambient.dim() {
            s.ech.insert(SparseVec::unit(i));
        }
        s
    }

    /// Span of homogeneous generators.
    pub fn span(ambient: Arc<GradedSpace>, gens: impl IntoIterator<Item = SparseVec>) -> Self {
        let mut s = Subspace::zero(ambient);
        for g in gens {
            s.ech.insert(g);
        }
        s
    }

    pub fn ambient(&self) -> &Arc<GradedSpace> {
        &self.ambient
    }

    pub fn echelon(&self) -> &Echelon {
        &self.ech
    }

    pub fn dim(&self) -> usize {
        self.ech.rank()
    }

    pub fn dims(&self) -> BTreeMap<i32, usize> {
        let mut out = BTreeMap::new();
        for p in self.ech.pivots() {
            *out.entry(self.ambient.degree(p)).or_insert(0) += 1;
        }
        out
    }

    pub fn dim_in(&self, degree: i32) -> usize {
        self.ech
            .pivots()
            .filter(|&p| self.ambient.degree(p) == degree)
            .count()
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.ech.contains(v)
    }

    pub fn generators(&self) -> Vec<SparseVec> {
        self.ech.rows().cloned().collect()
    }

    pub fn insert(&mut self, v: SparseVec) -> bool {
        self.ech.insert(v)
    }
}

/// Kernel of `f`, computed degree by degree.
pub fn kernel(f: &GradedMap) -> Subspace {
    let src = f.source.clone();
    let mut gens = Vec::new();
    for deg in src.dims().keys() {
        let mut ech = TrackedEchelon::default();
        for i in src.indices_of_degree(*deg) {
            if let Some(k) = ech.insert(f.col(i), SparseVec::unit(i)) {
                gens.push(k);
            }
        }
    }
    Subspace::span(src, gens)
}

pub fn image(f: &GradedMap) -> Subspace {
    Subspace::span(f.target.clone(), f.cols.iter().cloned())
}

/// Some `x` with `f(x) = y`, or `None`. Pivoting scans the columns of `f`
/// in order, so the solution is supported on the earliest independent
/// columns.
pub fn solve(f: &GradedMap, y: &SparseVec) -> Option<SparseVec> {
    let mut ech = TrackedEchelon::default();
    for (i, c) in f.cols.iter().enumerate() {
        ech.insert(c, SparseVec::unit(i));
    }
    let (rem, rec) = ech.reduce(y, &SparseVec::new());
    if rem.is_zero() {
        Some(rec.neg())
    } else {
        None
    }
}

/// Solves `f ∘ x = y` for a map `x` of degree `deg(y) - deg(f)`.
pub fn solve_map(f: &GradedMap, y: &GradedMap) -> Option<GradedMap> {
    let mut ech = TrackedEchelon::default();
    for (i, c) in f.cols.iter().enumerate() {
        ech.insert(c, SparseVec::unit(i));
    }
    let mut cols = Vec::with_capacity(y.cols.len());
    for c in &y.cols {
        let (rem, rec) = ech.reduce(c, &SparseVec::new());
        if !rem.is_zero() {
            return None;
        }
        cols.push(rec.neg());
    }
    GradedMap::new(
        y.source.clone(),
        f.source.clone(),
        y.degree - f.degree,
        cols,
    )
    .ok()
}

/// Quotient of a space by a subspace, with a chosen complement basis made
/// of the non-pivot coordinates.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub space: Arc<GradedSpace>,
    pub projection: GradedMap,
    /// Ambient coordinate of each quotient basis vector.
    pub section: Vec<usize>,
    rel: Echelon,
    position: BTreeMap<usize, usize>,
}

impl Quotient {
    pub fn reduce(&self, v: &SparseVec) -> SparseVec {
        let r = self.rel.reduce(v);
        r.reindex(|i| self.position.get(&i).copied())
    }

    pub fn relations(&self) -> &Echelon {
        &self.rel
    }

    /// The section as a map quotient → ambient.
    pub fn section_map(&self) -> GradedMap {
        let cols = self.section.iter().map(|&i| SparseVec::unit(i)).collect();
        GradedMap::new_unchecked(
            self.space.clone(),
            self.projection.source.clone(),
            0,
            cols,
        )
    }
}

pub fn quotient(ambient: Arc<GradedSpace>, rel: &Subspace) -> Quotient {
    quotient_by_echelon(ambient, rel.ech.clone())
}

pub(crate) fn quotient_by_echelon(ambient: Arc<GradedSpace>, rel: Echelon) -> Quotient {
    let section: Vec<usize> = (0..ambient.dim()).filter(|&i| !rel.is_pivot(i)).collect();
    let position: BTreeMap<usize, usize> =
        section.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let space = Arc::new(GradedSpace::new(
        section.iter().map(|&i| ambient.basis()[i].clone()).collect(),
    ));
    let cols = (0..ambient.dim())
        .map(|i| {
            rel.reduce(&SparseVec::unit(i))
                .reindex(|j| position.get(&j).copied())
        })
        .collect();
    let projection = GradedMap::new_unchecked(ambient, space.clone(), 0, cols);
    Quotient {
        space,
        projection,
        section,
        rel,
        position,
    }
}

/// Affine linear system `Σ_j a_ij x_j = b_i` over the rationals.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    unknowns: usize,
    ech: Echelon,
    inconsistent: bool,
}

impl LinearSystem {
    pub fn new(unknowns: usize) -> Self {
        LinearSystem {
            unknowns,
            ech: Echelon::new(),
            inconsistent: false,
        }
    }

    pub fn unknowns(&self) -> usize {
        self.unknowns
    }

    /// Adds the equation `row · x = rhs`.
    pub fn add_equation(&mut self, row: &SparseVec, rhs: &Rational) {
        if self.inconsistent {
            return;
        }
        let mut aug = row.clone();
        debug_assert!(aug.max_index().is_none_or(|m| m < self.unknowns));
        aug.add_at(self.unknowns, rhs);
        let r = self.ech.reduce(&aug);
        match r.leading() {
            None => {}
            Some((p, _)) if p == self.unknowns => self.inconsistent = true,
            Some(_) => {
                self.ech.insert(r);
            }
        }
    }

    pub fn is_consistent(&self) -> bool {
        !self.inconsistent
    }

    pub fn rank(&self) -> usize {
        self.ech.rank()
    }

    /// Dimension of the solution set of the homogeneous system.
    pub fn nullity(&self) -> usize {
        self.unknowns - self.ech.rank()
    }

    /// A basis of the solutions of the homogeneous system.
    pub fn nullspace(&self) -> Vec<SparseVec> {
        let pivots: Vec<usize> = self.ech.pivots().collect();
        let free: Vec<usize> = (0..self.unknowns).filter(|i| !self.ech.is_pivot(*i)).collect();
        free.iter()
            .map(|&f| {
                let mut x = SparseVec::unit(f);
                for &p in pivots.iter().rev() {
                    let row = &self.ech.rows[&p];
                    let mut val = Rational::zero();
                    for (j, c) in row.iter() {
                        if j != p && j < self.unknowns {
                            val -= c * x.get(j);
                        }
                    }
                    x.add_at(p, &val);
                }
                x
            })
            .collect()
    }

    /// Particular solution with all free unknowns set to zero.
    pub fn solve(&self) -> Option<SparseVec> {
        if self.inconsistent {
            return None;
        }
        let mut x = SparseVec::new();
        let pivots: Vec<usize> = self.ech.pivots().collect();
        for &p in pivots.iter().rev() {
            let row = &self.ech.rows[&p];
            let mut val = row.get(self.unknowns);
            for (j, c) in row.iter() {
                if j != p && j < self.unknowns {
                    val -= c * x.get(j);
                }
            }
            x.add_at(p, &val);
        }
        Some(x)
    }
}

/// Collects sparse equations keyed by an arbitrary label, so callers can
/// add contributions term by term before solving.
#[derive(Clone, Debug)]
pub struct SystemBuilder<K: Ord> {
    unknowns: usize,
    rows: BTreeMap<K, (SparseVec, Rational)>,
}

impl<K: Ord> SystemBuilder<K> {
    pub fn new(unknowns: usize) -> Self {
        SystemBuilder {
            unknowns,
            rows: BTreeMap::new(),
        }
    }

    pub fn add_term(&mut self, eq: K, unknown: usize, c: &Rational) {
        if c.is_zero() {
            return;
        }
        self.rows
            .entry(eq)
            .or_insert_with(|| (SparseVec::new(), Rational::zero()))
            .0
            .add_at(unknown, c);
    }

    pub fn add_rhs(&mut self, eq: K, c: &Rational) {
        if c.is_zero() {
            return;
        }
        self.rows
            .entry(eq)
            .or_insert_with(|| (SparseVec::new(), Rational::zero()))
            .1 += c;
    }

    pub fn build(&self) -> LinearSystem {
        let mut sys = LinearSystem::new(self.unknowns);
        for (row, rhs) in self.rows.values() {
            sys.add_equation(row, rhs);
        }
        sys
    }
}

/// Enumerates the entries `(row, col)` a homogeneous map of the given degree
/// may have; the position in the returned list is the unknown index.
pub fn map_unknowns(source: &GradedSpace, target: &GradedSpace, degree: i32) -> Vec<(usize, usize)> {
    let mut by_degree: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    for j in 0..target.dim() {
        by_degree.entry(target.degree(j)).or_default().push(j);
    }
    let mut out = Vec::new();
    for i in 0..source.dim() {
        if let Some(rows) = by_degree.get(&(source.degree(i) + degree)) {
            for &j in rows {
                out.push((j, i));
            }
        }
    }
    out
}

/// As `map_unknowns`, restricted to entries preserving weight.
pub fn map_unknowns_weighted(source: &GradedSpace, target: &GradedSpace, degree: i32) -> Vec<(usize, usize)> {
    map_unknowns(source, target, degree)
        .into_iter()
        .filter(|&(j, i)| source.weight(i) == target.weight(j))
        .collect()
}

/// Assembles a map from a solution vector over `map_unknowns`.
pub fn map_from_unknowns(
    source: Arc<GradedSpace>,
    target: Arc<GradedSpace>,
    degree: i32,
    unknowns: &[(usize, usize)],
    x: &SparseVec,
) -> GradedMap {
    let mut cols = vec![SparseVec::new(); source.dim()];
    for (k, c) in x.iter() {
        let (j, i) = unknowns[k];
        cols[i].add_at(j, c);
    }
    GradedMap::new_unchecked(source, target, degree, cols)
}

/// Dense matrix helper used for small hand-built examples.
pub fn map_from_rows(
    source: Arc<GradedSpace>,
    target: Arc<GradedSpace>,
    degree: i32,
    rows: &[Vec<Rational>],
) -> Result<GradedMap> {
    if rows.len() != target.dim() || rows.iter().any(|r| r.len() != source.dim()) {
        return Err(Error::Dimension("row matrix does not match spaces".into()));
    }
    let cols = (0..source.dim())
        .map(|c| SparseVec::from_pairs((0..target.dim()).map(|r| (r, rows[r][c].clone()))))
        .collect();
    GradedMap::new(source, target, degree, cols)
}

/// Induced map on a direct sum.
pub fn direct_sum_map(parts: &[&GradedMap]) -> Result<GradedMap> {
    let srcs: Vec<&GradedSpace> = parts.iter().map(|m| m.source.as_ref()).collect();
    let tgts: Vec<&GradedSpace> = parts.iter().map(|m| m.target.as_ref()).collect();
    let (src, so) = GradedSpace::direct_sum(&srcs);
    let (tgt, to) = GradedSpace::direct_sum(&tgts);
    let degree = parts.first().map_or(0, |m| m.degree);
    let mut cols = Vec::with_capacity(src.dim());
    for (k, m) in parts.iter().enumerate() {
        if m.degree != degree {
            return Err(Error::Dimension("summands of different degrees".into()));
        }
        for c in &m.cols {
            cols.push(c.reindex(|j| Some(j + to[k])));
        }
        let _ = so[k];
    }
    GradedMap::new(Arc::new(src), Arc::new(tgt), degree, cols)
}

/// Induced map on a tensor product, without any sign.
pub fn tensor_map(f: &GradedMap, g: &GradedMap) -> GradedMap {
    let src = GradedSpace::tensor(&f.source, &g.source);
    let tgt = GradedSpace::tensor(&f.target, &g.target);
    let gt = g.target.dim();
    let mut cols = Vec::with_capacity(src.dim());
    for fc in &f.cols {
        for gc in &g.cols {
            let mut v = SparseVec::new();
            for (i, a) in fc.iter() {
                for (j, b) in gc.iter() {
                    v.add_at(i * gt + j, &(a * b));
                }
            }
            cols.push(v);
        }
    }
    GradedMap::new_unchecked(Arc::new(src), Arc::new(tgt), f.degree + g.degree, cols)
}

/// Induced map on a shift: the same matrix between shifted spaces.
pub fn shift_map(f: &GradedMap, k: i32) -> GradedMap {
    GradedMap::new_unchecked(
        Arc::new(f.source.shift(k)),
        Arc::new(f.target.shift(k)),
        f.degree,
        f.cols.clone(),
    )
}

pub fn is_positive(r: &Rational) -> bool {
    r.is_positive()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(dims: &[(i32, usize)]) -> Arc<GradedSpace> {
        Arc::new(GradedSpace::from_dims(dims))
    }

    #[test]
    fn identity_composes_trivially() {
        let s = sp(&[(0, 2), (1, 1)]);
        let f = GradedMap::new(
            s.clone(),
            s.clone(),
            0,
            vec![
                SparseVec::from_pairs([(0, q(2)), (1, q(3))]),
                SparseVec::unit(0),
                SparseVec::from_pairs([(2, qf(1, 2))]),
            ],
        )
        .unwrap();
        let id = GradedMap::identity(s);
        assert_eq!(id.compose(&f).unwrap(), f);
        assert_eq!(f.compose(&id).unwrap(), f);
    }

    #[test]
    fn degrees_add_under_composition() {
        let a = sp(&[(0, 1)]);
        let b = sp(&[(1, 1)]);
        let c = sp(&[(2, 1)]);
        let g = GradedMap::new(a, b.clone(), 1, vec![SparseVec::unit(0)]).unwrap();
        let f = GradedMap::new(b, c, 1, vec![SparseVec::unit(0)]).unwrap();
        assert_eq!(f.compose(&g).unwrap().degree(), 2);
    }

    #[test]
    fn composition_matches_entrywise_product() {
        let s = sp(&[(0, 2)]);
        let a = [[q(1), qf(2, 3)], [q(-4), qf(1, 5)]];
        let b = [[qf(7, 2), q(0)], [q(3), qf(-1, 9)]];
        let fa = map_from_rows(s.clone(), s.clone(), 0, &a.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap();
        let fb = map_from_rows(s.clone(), s.clone(), 0, &b.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap();
        let prod = fa.compose(&fb).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut expect = q(0);
                for k in 0..2 {
                    expect += &a[i][k] * &b[k][j];
                }
                assert_eq!(prod.entry(i, j), expect);
            }
        }
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let f = GradedMap::identity(sp(&[(0, 2)]));
        let g = GradedMap::identity(sp(&[(0, 3)]));
        assert!(matches!(f.compose(&g), Err(Error::Dimension(_))));
    }

    #[test]
    fn inhomogeneous_entry_is_rejected() {
        let r = GradedMap::new(sp(&[(0, 1)]), sp(&[(1, 1)]), 0, vec![SparseVec::unit(0)]);
        assert!(r.is_err());
    }

    #[test]
    fn kernel_and_image_of_zero_and_identity() {
        let s = sp(&[(0, 3)]);
        let z = GradedMap::zero(s.clone(), s.clone(), 0);
        assert_eq!(kernel(&z).dim(), 3);
        assert_eq!(image(&z).dim(), 0);
        let id = GradedMap::identity(s);
        assert_eq!(kernel(&id).dim(), 0);
        assert_eq!(image(&id).dim(), 3);
    }

    #[test]
    fn kernel_of_row_one_one() {
        let f = map_from_rows(sp(&[(0, 2)]), sp(&[(0, 1)]), 0, &[vec![q(1), q(1)]]).unwrap();
        let k = kernel(&f);
        assert_eq!(k.dim(), 1);
        assert!(k.contains(&SparseVec::from_pairs([(0, q(1)), (1, q(-1))])));
    }

    #[test]
    fn solve_examples() {
        let s = sp(&[(0, 2)]);
        let y = SparseVec::from_pairs([(0, qf(3, 4)), (1, q(-2))]);
        assert_eq!(solve(&GradedMap::identity(s.clone()), &y), Some(y.clone()));
        assert_eq!(solve(&GradedMap::zero(s.clone(), s.clone(), 0), &y), None);
        let f = map_from_rows(s, sp(&[(0, 1)]), 0, &[vec![q(1), q(1)]]).unwrap();
        assert_eq!(solve(&f, &SparseVec::unit(0)), Some(SparseVec::unit(0)));
    }

    #[test]
    fn quotient_examples() {
        let s = sp(&[(0, 3)]);
        let q0 = quotient(s.clone(), &Subspace::zero(s.clone()));
        assert_eq!(q0.space.dim(), 3);
        assert_eq!(q0.projection, GradedMap::identity(s.clone()).with_spaces(s.clone(), q0.space.clone()).unwrap());
        let qa = quotient(s.clone(), &Subspace::whole(s.clone()));
        assert_eq!(qa.space.dim(), 0);
        let rel = Subspace::span(s.clone(), [SparseVec::from_pairs([(0, q(1)), (2, q(-1))])]);
        let q1 = quotient(s, &rel);
        assert_eq!(q1.space.dim(), 2);
        assert_eq!(q1.projection.rank(), 2);
        for g in rel.generators() {
            assert!(q1.projection.apply(&g).is_zero());
        }
    }

    #[test]
    fn shift_and_tensor_dimensions() {
        let s = GradedSpace::from_dims(&[(0, 1)]);
        assert_eq!(s.shift(1).dims(), BTreeMap::from([(-1, 1)]));
        let a = GradedSpace::from_dims(&[(0, 2)]);
        let b = GradedSpace::from_dims(&[(0, 3)]);
        assert_eq!(GradedSpace::tensor(&a, &b).dims(), BTreeMap::from([(0, 6)]));
        let x = GradedSpace::from_dims(&[(0, 1), (1, 1)]);
        assert_eq!(
            GradedSpace::tensor(&x, &x).dims(),
            BTreeMap::from([(0, 1), (1, 2), (2, 1)])
        );
    }

    #[test]
    fn linear_system_free_unknowns_vanish() {
        let mut sys = LinearSystem::new(3);
        sys.add_equation(&SparseVec::from_pairs([(0, q(1)), (2, q(1))]), &q(2));
        sys.add_equation(&SparseVec::from_pairs([(1, q(1))]), &q(5));
        let x = sys.solve().unwrap();
        assert_eq!(x.get(0), q(2));
        assert_eq!(x.get(1), q(5));
        assert_eq!(x.get(2), q(0));
        assert_eq!(sys.nullity(), 1);
        sys.add_equation(&SparseVec::from_pairs([(0, q(2)), (2, q(2))]), &q(5));
        assert!(sys.solve().is_none());
    }

    #[test]
    fn rational_text_round_trip() {
        for s in ["0", "-3", "7/2", "-1/6"] {
            assert_eq!(format_rational(&parse_rational(s).unwrap()), s);
        }
        assert_eq!(format_rational(&parse_rational("4/6").unwrap()), "2/3");
        assert!(parse_rational("1/0").is_err());
    }
}
