//! Versioned JSON definition files.
//!
//! Rationals are written as `"p/q"` strings so files round-trip bit-exactly.
//! Matrices are sparse triplet lists `[row, col, "p/q"]`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::algebra::{check_algebra, free_algebra, OperadAlgebra};
use crate::complexes::{tensor_power, Complex};
use crate::curvature::McElement;
use crate::lax::{Word, WordVec};
use crate::modules::{free_module_twisted, kahler, AModule};
use crate::error::{Error, Result};
use crate::linalg::{format_rational, parse_rational, Basis, GradedMap, GradedSpace, Rational, SparseVec};
use crate::operad::{ass_operad, check_operad, com_operad, AxiomReport, Operad, OperadTable};

pub const OPERAD_SCHEMA: &str = "operad/v1";

/// A sparse matrix entry `[row, col, value]`.
pub type Entry = (usize, usize, String);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisDef {
    pub degree: i32,
    #[serde(default)]
    pub weight: u32,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexDef {
    pub basis: Vec<BasisDef>,
    #[serde(default)]
    pub differential: Vec<Entry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionDef {
    pub arity: usize,
    pub generator: usize,
    pub matrix: Vec<Entry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaDef {
    pub tuple: Vec<usize>,
    pub matrix: Vec<Entry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperadDef {
    pub schema: String,
    pub name: String,
    pub arity_cap: usize,
    pub components: Vec<ComplexDef>,
    pub unit: Vec<(usize, String)>,
    pub actions: Vec<ActionDef>,
    pub gamma: Vec<GammaDef>,
}

pub fn entries_of(m: &GradedMap) -> Vec<Entry> {
    let mut out = Vec::new();
    for (c, col) in m.cols().iter().enumerate() {
        for (r, x) in col.iter() {
            out.push((r, c, format_rational(x)));
        }
    }
    out
}

pub fn vector_entries(v: &SparseVec) -> Vec<(usize, String)> {
    v.iter().map(|(i, x)| (i, format_rational(x))).collect()
}

pub fn parse_vector(entries: &[(usize, String)], dim: usize) -> Result<SparseVec> {
    let mut v = SparseVec::new();
    for (i, x) in entries {
        if *i >= dim {
            return Err(Error::Schema(format!("vector index {i} out of range {dim}")));
        }
        v.add_at(*i, &parse_rational(x)?);
    }
    Ok(v)
}

pub fn parse_map(
    entries: &[Entry],
    source: Arc<GradedSpace>,
    target: Arc<GradedSpace>,
    degree: i32,
) -> Result<GradedMap> {
    let mut cols = vec![SparseVec::new(); source.dim()];
    for (r, c, x) in entries {
        if *c >= source.dim() || *r >= target.dim() {
            return Err(Error::Schema(format!("matrix entry ({r}, {c}) out of range")));
        }
        cols[*c].add_at(*r, &parse_rational(x)?);
    }
    GradedMap::new(source, target, degree, cols).map_err(|e| Error::Schema(e.to_string()))
}

pub fn complex_def(c: &Complex) -> ComplexDef {
    ComplexDef {
        basis: c
            .space()
            .basis()
            .iter()
            .map(|b| BasisDef { degree: b.degree, weight: b.weight, label: b.label.clone() })
            .collect(),
        differential: entries_of(c.differential()),
    }
}

pub fn parse_complex(def: &ComplexDef) -> Result<Complex> {
    let space = Arc::new(GradedSpace::new(
        def.basis.iter().map(|b| Basis::new(b.degree, b.weight, b.label.clone())).collect(),
    ));
    let d = parse_map(&def.differential, space.clone(), space.clone(), 1)?;
    Complex::new(space, d).map_err(|e| Error::Schema(e.to_string()))
}

pub fn operad_def(op: &Operad) -> OperadDef {
    let table = match op.table() {
        Some(t) => t.clone(),
        None => op.to_table(),
    };
    let mut actions = Vec::new();
    for (n, gens) in table.actions.iter().enumerate() {
        for (i, g) in gens.iter().enumerate() {
            actions.push(ActionDef { arity: n, generator: i, matrix: entries_of(g) });
        }
    }
    OperadDef {
        schema: OPERAD_SCHEMA.into(),
        name: op.name().into(),
        arity_cap: op.arity_cap(),
        components: op.components().iter().map(complex_def).collect(),
        unit: vector_entries(op.unit()),
        actions,
        gamma: table
            .gamma
            .iter()
            .map(|(k, g)| GammaDef { tuple: k.clone(), matrix: entries_of(g) })
            .collect(),
    }
}

pub fn parse_operad(def: &OperadDef) -> Result<Operad> {
    if def.schema != OPERAD_SCHEMA {
        return Err(Error::Schema(format!("expected schema {OPERAD_SCHEMA}, found {}", def.schema)));
    }
    if def.components.len() != def.arity_cap + 1 {
        return Err(Error::Schema("one component per arity 0..=arity_cap".into()));
    }
    let components = def.components.iter().map(parse_complex).collect::<Result<Vec<_>>>()?;
    if def.arity_cap == 0 || components[1].dim() == 0 {
        return Err(Error::Schema("an operad needs a unit in arity 1".into()));
    }
    let unit = parse_vector(&def.unit, components[1].dim())?;
    let mut actions: Vec<Vec<Option<GradedMap>>> =
        (0..=def.arity_cap).map(|n| vec![None; n.saturating_sub(1)]).collect();
    for a in &def.actions {
        let slot = actions
            .get_mut(a.arity)
            .and_then(|v| v.get_mut(a.generator))
            .ok_or_else(|| Error::Schema(format!("no generator {} in arity {}", a.generator, a.arity)))?;
        let sp = components[a.arity].space().clone();
        let m = parse_map(&a.matrix, sp.clone(), sp.clone(), 0)?;
        if m.rank() != sp.dim() {
            return Err(Error::Schema(format!(
                "action of generator {} in arity {} is not bijective",
                a.generator, a.arity
            )));
        }
        *slot = Some(m);
    }
    let actions = actions
        .into_iter()
        .enumerate()
        .map(|(n, gens)| {
            gens.into_iter()
                .enumerate()
                .map(|(i, g)| g.ok_or_else(|| Error::Schema(format!("missing generator {i} in arity {n}"))))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut gamma = BTreeMap::new();
    for g in &def.gamma {
        let (&n, ms) = g
            .tuple
            .split_first()
            .ok_or_else(|| Error::Schema("empty composition tuple".into()))?;
        let m: usize = ms.iter().sum();
        if ms.len() != n || n > def.arity_cap || m > def.arity_cap || ms.iter().any(|&a| a > def.arity_cap) {
            return Err(Error::Schema(format!("bad composition tuple {:?}", g.tuple)));
        }
        let factors: Vec<&Complex> = g.tuple.iter().map(|&a| &components[a]).collect();
        let src = tensor_power(&factors);
        let map = parse_map(&g.matrix, src.space().clone(), components[m].space().clone(), 0)?;
        gamma.insert(g.tuple.clone(), map);
    }
    let op = Operad::from_table(def.name.clone(), components, unit, OperadTable { actions, gamma })?;
    for key in op.composition_tuples() {
        if op.table().is_some_and(|t| !t.gamma.contains_key(&key)) {
            return Err(Error::Schema(format!("missing composition for tuple {key:?}")));
        }
    }
    Ok(op)
}

pub fn operad_to_json(op: &Operad) -> String {
    serde_json::to_string_pretty(&operad_def(op)).expect("definitions serialize")
}

pub fn operad_from_json(text: &str) -> Result<Operad> {
    let def: OperadDef = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    parse_operad(&def)
}

/// Loads an operad and checks its axioms. With `strict`, a failing report
/// is an error; otherwise it is returned for the caller to surface.
pub fn load_operad(path: &Path, strict: bool) -> Result<(Operad, AxiomReport)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let op = operad_from_json(&text)?;
    let report = check_operad(&op);
    if strict && !report.is_ok() {
        return Err(Error::Axiom(report.failures[0].to_string()));
    }
    Ok((op, report))
}

pub fn save_operad(op: &Operad, path: &Path) -> Result<()> {
    std::fs::write(path, operad_to_json(op)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub const ALGEBRA_SCHEMA: &str = "algebra/v1";
pub const MODULE_SCHEMA: &str = "module/v1";
pub const MC_SCHEMA: &str = "mc/v1";

/// Where an operad comes from. Built-in caps default to the loader's.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperadRef {
    Builtin {
        name: String,
        #[serde(default)]
        arity_cap: Option<usize>,
    },
    File(PathBuf),
    Inline(Box<OperadDef>),
}

/// A term `coeff · μ(p; x_{g_1}, …, x_{g_n})` with `p` the `op`-th basis
/// element of `O(n)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermDef {
    pub coeff: String,
    pub gens: Vec<usize>,
    #[serde(default)]
    pub op: usize,
}

/// A module term: like [`TermDef`] with one module generator in the last input.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleTermDef {
    pub coeff: String,
    pub gens: Vec<usize>,
    pub slot: usize,
    #[serde(default)]
    pub op: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgebraStructure {
    /// `F_O(V)` truncated at a weight cap.
    Free { generators: ComplexDef, weight_cap: u32 },
    /// Explicit `μ_n` matrices, columns flat over `O(n)⊗A^{⊗n}`.
    Table { carrier: ComplexDef, mult: Vec<Vec<Entry>> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraDef {
    pub schema: String,
    pub name: String,
    pub operad: OperadRef,
    pub structure: AlgebraStructure,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgebraRef {
    File(PathBuf),
    Inline(Box<AlgebraDef>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModuleStructure {
    /// `F_A(W)`, optionally with `∂w_i` corrected by the listed terms.
    Free {
        generators: ComplexDef,
        #[serde(default)]
        twist: Option<Vec<Vec<ModuleTermDef>>>,
    },
    /// `A` over itself.
    Algebra,
    /// The Kähler differentials of a free algebra.
    Kahler,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleDef {
    pub schema: String,
    pub name: String,
    pub algebra: AlgebraRef,
    pub structure: ModuleStructure,
}

/// A Maurer–Cartan datum on a free algebra: `g` on each generator and an
/// optional gauge family `ξ(t) = Σ ξ_k t^k`, listed by power of `t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct McDef {
    pub schema: String,
    pub name: String,
    pub algebra: AlgebraRef,
    pub g: Vec<Vec<TermDef>>,
    #[serde(default)]
    pub xi: Vec<Vec<Vec<TermDef>>>,
    /// Symmetric degree kept in `S*_A(M)`.
    #[serde(default = "default_max_n")]
    pub max_n: usize,
}

fn default_max_n() -> usize {
    3
}

/// Overrides and policy applied while loading definition files.
#[derive(Clone, Debug, Default)]
pub struct LoadOptions {
    pub arity_cap: Option<usize>,
    pub weight_cap: Option<u32>,
    pub strict: bool,
}

/// A loaded object with the axiom failures met on the way, which are
/// warnings unless loading was strict.
#[derive(Clone, Debug)]
pub struct Loaded<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

pub struct Loader {
    pub options: LoadOptions,
    base: PathBuf,
    warnings: Vec<String>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))
}

fn expect_schema(found: &str, want: &str) -> Result<()> {
    if found == want {
        Ok(())
    } else {
        Err(Error::Schema(format!("expected schema {want}, found {found}")))
    }
}

/// Reads the `schema` field of any definition file.
pub fn schema_of(path: &Path) -> Result<String> {
    #[derive(Deserialize)]
    struct Head {
        schema: String,
    }
    Ok(read_json::<Head>(path)?.schema)
}

impl Loader {
    /// Relative references resolve against `base`.
    pub fn new(options: LoadOptions, base: impl Into<PathBuf>) -> Self {
        Loader { options, base: base.into(), warnings: Vec::new() }
    }

    pub fn for_file(options: LoadOptions, path: &Path) -> Self {
        Loader::new(options, path.parent().map(Path::to_path_buf).unwrap_or_default())
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    fn finish<T>(&mut self, value: T) -> Loaded<T> {
        Loaded { value, warnings: std::mem::take(&mut self.warnings) }
    }

    fn screen(&mut self, what: &str, report: AxiomReport) -> Result<()> {
        if report.is_ok() {
            return Ok(());
        }
        if self.options.strict {
            return Err(Error::Axiom(format!("{what}: {}", report.failures[0])));
        }
        self.warnings.extend(report.failures.iter().map(|f| format!("{what}: {f}")));
        Ok(())
    }

    /// `default_cap` is used for built-ins when neither the file nor the
    /// options fix one.
    pub fn operad(&mut self, r: &OperadRef, default_cap: usize) -> Result<Arc<Operad>> {
        let op = match r {
            OperadRef::Builtin { name, arity_cap } => {
                let cap = self.options.arity_cap.or(*arity_cap).unwrap_or(default_cap);
                match name.as_str() {
                    "com" => com_operad(cap),
                    "ass" => ass_operad(cap),
                    other => return Err(Error::Schema(format!("unknown built-in operad {other:?}"))),
                }
            }
            OperadRef::File(p) => {
                let op = parse_operad(&read_json(&self.resolve(p))?)?;
                let report = check_operad(&op);
                self.screen(op.name(), report)?;
                op
            }
            OperadRef::Inline(def) => {
                let op = parse_operad(def)?;
                let report = check_operad(&op);
                self.screen(op.name(), report)?;
                op
            }
        };
        Ok(Arc::new(op))
    }

    pub fn algebra_def(&mut self, def: &AlgebraDef) -> Result<Arc<OperadAlgebra>> {
        expect_schema(&def.schema, ALGEBRA_SCHEMA)?;
        match &def.structure {
            AlgebraStructure::Free { generators, weight_cap } => {
                let w = self.options.weight_cap.unwrap_or(*weight_cap);
                let v = parse_complex(generators)?;
                if v.space().basis().iter().any(|b| b.weight == 0) {
                    return Err(Error::Schema("free generators need positive weight".into()));
                }
                let op = self.operad(&def.operad, w as usize + 4)?;
                Ok(Arc::new(free_algebra(op, &v, w)?))
            }
            AlgebraStructure::Table { carrier, mult } => {
                let op = self.operad(&def.operad, mult.len().saturating_sub(1).max(1))?;
                let c = parse_complex(carrier)?;
                let sp = c.space().clone();
                let maps = mult
                    .iter()
                    .enumerate()
                    .map(|(n, entries)| {
                        let mut factors = vec![op.component(n)?];
                        factors.extend(std::iter::repeat_n(&c, n));
                        parse_map(entries, tensor_power(&factors).space().clone(), sp.clone(), 0)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let a = OperadAlgebra::from_table(def.name.clone(), op, c, maps)?;
                let report = check_algebra(&a, mult.len().saturating_sub(1));
                self.screen(&def.name, report)?;
                Ok(Arc::new(a))
            }
        }
    }

    pub fn algebra_ref(&mut self, r: &AlgebraRef) -> Result<Arc<OperadAlgebra>> {
        match r {
            AlgebraRef::File(p) => {
                let path = self.resolve(p);
                let def: AlgebraDef = read_json(&path)?;
                let saved = std::mem::replace(&mut self.base, path.parent().map(Path::to_path_buf).unwrap_or_default());
                let a = self.algebra_def(&def);
                self.base = saved;
                a
            }
            AlgebraRef::Inline(def) => self.algebra_def(def),
        }
    }

    pub fn module_def(&mut self, def: &ModuleDef) -> Result<Arc<AModule>> {
        expect_schema(&def.schema, MODULE_SCHEMA)?;
        let a = self.algebra_ref(&def.algebra)?;
        match &def.structure {
            ModuleStructure::Algebra => Ok(AModule::over_itself(&a)),
            ModuleStructure::Kahler => Ok(kahler(&a)?.0),
            ModuleStructure::Free { generators, twist } => {
                let w = parse_complex(generators)?;
                let extra = match twist {
                    None => None,
                    Some(rows) => {
                        if rows.len() != w.dim() {
                            return Err(Error::Schema("one twist row per module generator".into()));
                        }
                        Some(rows.iter().map(|row| module_terms(&a, row, w.dim())).collect::<Result<Vec<_>>>()?)
                    }
                };
                let e = free_module_twisted(&a, &w, extra)?;
                if !e.carrier().squares_to_zero() {
                    return Err(Error::Schema(format!("twisted differential of {} does not square to zero", def.name)));
                }
                Ok(e)
            }
        }
    }

    pub fn mc_def(&mut self, def: &McDef) -> Result<McData> {
        expect_schema(&def.schema, MC_SCHEMA)?;
        let a = self.algebra_ref(&def.algebra)?;
        if !a.is_free() {
            return Err(Error::Schema("Maurer–Cartan data needs a free algebra".into()));
        }
        let n = a.generators().len();
        let per_generator = |rows: &[Vec<TermDef>]| -> Result<Vec<SparseVec>> {
            if rows.len() != n {
                return Err(Error::Schema(format!("expected {n} generator values, found {}", rows.len())));
            }
            rows.iter().map(|r| polynomial(&a, r)).collect()
        };
        let g = McElement::on_algebra(&a, per_generator(&def.g)?)?;
        let xi = def.xi.iter().map(|k| per_generator(k)).collect::<Result<Vec<_>>>()?;
        Ok(McData { algebra: a, g, xi, max_n: def.max_n })
    }

    /// Top-level loads take `path` as given and resolve what it references
    /// against its directory.
    fn enter<D: serde::de::DeserializeOwned>(&mut self, path: &Path) -> Result<D> {
        let def = read_json(path)?;
        self.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(def)
    }

    pub fn load_algebra(&mut self, path: &Path) -> Result<Loaded<Arc<OperadAlgebra>>> {
        let def: AlgebraDef = self.enter(path)?;
        let a = self.algebra_def(&def)?;
        Ok(self.finish(a))
    }

    pub fn load_module(&mut self, path: &Path) -> Result<Loaded<Arc<AModule>>> {
        let def: ModuleDef = self.enter(path)?;
        let m = self.module_def(&def)?;
        Ok(self.finish(m))
    }

    pub fn load_mc(&mut self, path: &Path) -> Result<Loaded<McData>> {
        let def: McDef = self.enter(path)?;
        let m = self.mc_def(&def)?;
        Ok(self.finish(m))
    }
}

/// A parsed Maurer–Cartan file.
#[derive(Clone, Debug)]
pub struct McData {
    pub algebra: Arc<OperadAlgebra>,
    pub g: McElement,
    pub xi: Vec<Vec<SparseVec>>,
    pub max_n: usize,
}

fn generator(a: &OperadAlgebra, i: usize) -> Result<SparseVec> {
    a.generators()
        .get(i)
        .cloned()
        .ok_or_else(|| Error::Schema(format!("no generator {i} in {}", a.name())))
}

/// Evaluates a list of terms in `a`.
pub fn polynomial(a: &OperadAlgebra, terms: &[TermDef]) -> Result<SparseVec> {
    let mut out = SparseVec::new();
    for t in terms {
        let n = t.gens.len();
        if t.op >= a.operad().dim(n) {
            return Err(Error::Schema(format!("no operation {} in arity {n}", t.op)));
        }
        let xs = t.gens.iter().map(|&i| generator(a, i)).collect::<Result<Vec<_>>>()?;
        out.add_scaled(&a.mult(n, &SparseVec::unit(t.op), &xs)?, &parse_rational(&t.coeff)?);
    }
    Ok(out)
}

fn module_terms(a: &OperadAlgebra, terms: &[ModuleTermDef], rank: usize) -> Result<WordVec> {
    let ngen = a.generators().len();
    let mut out = WordVec::new();
    for t in terms {
        let n = t.gens.len() + 1;
        if t.op >= a.operad().dim(n) || t.slot >= rank || t.gens.iter().any(|&g| g >= ngen) {
            return Err(Error::Schema(format!("bad module term {t:?}")));
        }
        let w = Word { op: t.op as u32, gens: t.gens.iter().map(|&g| g as u32).collect(), slots: vec![(0, t.slot as u32)] };
        let c = parse_rational(&t.coeff)?;
        let slot = out.entry(w).or_insert_with(Rational::zero);
        *slot += c;
    }
    out.retain(|_, c| !c.is_zero());
    Ok(out)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::operad::{ass_operad, com_operad};

    #[test]
    fn ass_round_trip() {
        let a = ass_operad(3);
        let back = operad_from_json(&operad_to_json(&a)).unwrap();
        assert_eq!(back.table().unwrap(), &a.to_table());
        assert_eq!(back.unit(), a.unit());
        assert!(check_operad(&back).is_ok());
    }

    #[test]
    fn singular_action_is_rejected() {
        let mut def = operad_def(&com_operad(2));
        def.actions[0].matrix.clear();
        assert!(matches!(parse_operad(&def), Err(Error::Schema(_))));
    }

    #[test]
    fn wrong_schema_is_rejected() {
        let mut def = operad_def(&com_operad(2));
        def.schema = "operad/v0".into();
        assert!(matches!(parse_operad(&def), Err(Error::Schema(_))));
    }
}
