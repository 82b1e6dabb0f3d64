use std::path::{Path, PathBuf};
use std::sync::Arc;

use operadic::algebra::{check_algebra, OperadAlgebra};
use operadic::complexes::{commutator, Complex};
use operadic::connection::{
    atiyah_agreement, atiyah_from_connection, atiyah_from_extension, canonical_connection, find_free_connection,
    jet_module, AtiyahClass,
};
use operadic::curvature::{
    bianchi_witness, bianchi_witness_module, curvature_mc, d_nabla, deform, deform_module, gauge_flow,
    gauge_transport_check, is_free_derivation, is_free_q_derivation, mc_check, raises_slots, symmetric_module,
    total_curvature_module, McElement,
};
use operadic::error::{Error, Result};
use operadic::io::{parse_operad, schema_of, Loader, McData, ALGEBRA_SCHEMA, MC_SCHEMA, MODULE_SCHEMA, OPERAD_SCHEMA};
use operadic::linalg::GradedMap;
use operadic::modules::{check_module, kahler, AModule};
use operadic::operad::check_operad;

use crate::report::{Report, Status};
use crate::Flags;

const DEFAULT_ORDER: usize = 3;
/// Inputs per operation used by the module checkers.
const MODULE_INPUTS: usize = 2;

fn loader(f: &Flags, path: &Path) -> Loader {
    Loader::for_file(f.options(), path)
}

fn window(report: &mut Report, f: &Flags, label: &str, c: &Complex) {
    let Some((lo, hi)) = f.degrees else { return };
    let outside = c.space().basis().iter().filter(|b| b.degree < lo || b.degree > hi).count();
    let check = format!("{label} lies in degrees {lo}:{hi}");
    if outside == 0 {
        report.push(check, Status::Pass, None);
    } else {
        report.push(check, Status::Truncated, Some(format!("{outside} basis elements outside the window")));
    }
}

fn failures(r: &operadic::operad::AxiomReport) -> Option<String> {
    (!r.is_ok()).then(|| r.failures.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))
}

/// A report whose only failures are caps being hit is truncation-limited.
fn axioms(report: &mut Report, check: String, r: &operadic::operad::AxiomReport) {
    let truncated = |f: &operadic::operad::AxiomFailure| f.detail.contains("truncation exceeded");
    let status = if r.is_ok() {
        Status::Pass
    } else if r.failures.iter().all(truncated) {
        Status::Truncated
    } else {
        Status::Fail
    };
    report.push(check, status, failures(r));
}

pub fn check(report: &mut Report, f: &Flags, paths: &[PathBuf]) -> Result<()> {
    if paths.is_empty() {
        return Err(Error::Schema("no input files".into()));
    }
    for path in paths {
        let schema = schema_of(path)?;
        let mut l = loader(f, path);
        match schema.as_str() {
            OPERAD_SCHEMA => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::Io(e.to_string()))?;
                let def = serde_json::from_str(&text).map_err(|e| Error::Schema(e.to_string()))?;
                let op = parse_operad(&def)?;
                axioms(report, format!("operad {} axioms", op.name()), &check_operad(&op));
            }
            ALGEBRA_SCHEMA => {
                let a = l.load_algebra(path)?;
                report.warnings.extend(a.warnings);
                let arity = f.arity_cap.unwrap_or(3).min(a.value.operad().arity_cap());
                axioms(report, format!("algebra {} axioms", a.value.name()), &check_algebra(&a.value, arity));
                window(report, f, a.value.name(), a.value.carrier());
            }
            MODULE_SCHEMA => {
                let e = l.load_module(path)?;
                report.warnings.extend(e.warnings);
                axioms(report, format!("module {} axioms", e.value.name()), &check_module(&e.value, MODULE_INPUTS));
                window(report, f, e.value.name(), e.value.carrier());
            }
            MC_SCHEMA => {
                let m = l.load_mc(path)?;
                report.warnings.extend(m.warnings);
                report.check(format!("{} solves the Maurer–Cartan equation", path.display()), mc_check(&m.value.g))?;
            }
            other => return Err(Error::Schema(format!("{}: unknown schema {other}", path.display()))),
        }
    }
    Ok(())
}

fn weight_table(report: &mut Report, name: &str, c: &Complex) {
    report.table(format!("{name} by weight"), c.space().weight_dims());
    report.table(format!("{name} by degree"), c.space().dims());
}

pub fn free(report: &mut Report, f: &Flags, path: &Path) -> Result<()> {
    let mut l = loader(f, path);
    let (name, carrier, warnings) = match schema_of(path)?.as_str() {
        ALGEBRA_SCHEMA => {
            let a = l.load_algebra(path)?;
            (a.value.name().to_string(), a.value.carrier().clone(), a.warnings)
        }
        MODULE_SCHEMA => {
            let e = l.load_module(path)?;
            (e.value.name().to_string(), e.value.carrier().clone(), e.warnings)
        }
        other => return Err(Error::Schema(format!("free expects an algebra or module, found {other}"))),
    };
    report.warnings.extend(warnings);
    weight_table(report, &name, &carrier);
    report.pass_if(format!("{name} differential squares to zero"), carrier.squares_to_zero());
    window(report, f, &name, &carrier);
    Ok(())
}

fn zero_class(c: &AtiyahClass) -> AtiyahClass {
    let r = &c.representative;
    AtiyahClass {
        representative: GradedMap::zero(r.source().clone(), r.target().clone(), r.degree()),
        route: c.route,
    }
}

pub fn atiyah(report: &mut Report, f: &Flags, path: &Path) -> Result<()> {
    let e = loader(f, path).load_module(path)?;
    report.warnings.extend(e.warnings);
    let e = e.value;
    window(report, f, e.name(), e.carrier());
    let (_, d) = kahler(e.algebra())?;
    let jet = Arc::new(jet_module(&e, &d, MODULE_INPUTS)?);
    let nabla = if e.free_over().is_some() {
        report.findings.insert("connection".into(), "canonical".into());
        Some(canonical_connection(&jet)?)
    } else {
        report.findings.insert("connection".into(), "solved".into());
        find_free_connection(&jet)?
    };
    let Some(nabla) = nabla else {
        report.push("a free connection exists", Status::Fail, None);
        return Ok(());
    };
    report.check("connection satisfies the Leibniz rule", nabla.is_derivative())?;
    let conn = atiyah_from_connection(&nabla)?;
    let ext = atiyah_from_extension(&jet)?;
    report.matrix("atiyah class (connection)", &conn.representative);
    report.matrix("atiyah class (extension)", &ext.representative);
    match atiyah_agreement(&jet, &conn, &ext)? {
        Some(h) => {
            report.push("connection and extension classes agree", Status::Pass, None);
            report.witness("agreement homotopy", &h);
        }
        None => report.push("connection and extension classes agree", Status::Fail, None),
    }
    let vanishes = atiyah_agreement(&jet, &conn, &zero_class(&conn))?;
    let class = if vanishes.is_some() { "0" } else { "nonzero" };
    report.findings.insert("class".into(), class.into());
    if let Some(h) = vanishes {
        report.witness("null-homotopy of the class", &h);
    }
    Ok(())
}

/// An MC file, or an algebra file read as `g = 0`.
fn load_mc_or_algebra(report: &mut Report, f: &Flags, path: &Path) -> Result<McData> {
    let mut l = loader(f, path);
    match schema_of(path)?.as_str() {
        MC_SCHEMA => {
            let m = l.load_mc(path)?;
            report.warnings.extend(m.warnings);
            Ok(m.value)
        }
        ALGEBRA_SCHEMA => {
            let a = l.load_algebra(path)?;
            report.warnings.extend(a.warnings);
            let g = McElement::zero(&a.value)?;
            Ok(McData { algebra: a.value, g, xi: Vec::new(), max_n: 3 })
        }
        other => Err(Error::Schema(format!("expected an algebra or Maurer–Cartan file, found {other}"))),
    }
}

pub fn curvature(report: &mut Report, f: &Flags, path: &Path) -> Result<()> {
    let data = load_mc_or_algebra(report, f, path)?;
    window(report, f, data.algebra.name(), data.algebra.carrier());
    if !report.check("g solves the Maurer–Cartan equation", mc_check(&data.g))? {
        return Ok(());
    }
    let c = curvature_mc(&data.algebra, &data.g, data.max_n)?;
    let sa = &c.deformed;
    let m = &sa.derivation.target;
    report.table("S_A(M) by weight", sa.words.carrier().space().weight_dims());
    report.check("Q is a derivation of S_A(M)", is_free_derivation(sa, &c.q.map))?;
    report.pass_if("Q raises symmetric degree by one", raises_slots(&c.q.map, &sa.words, 0, 1));

    let r = &c.curvature;
    report.pass_if("R^(0) = 0", r.components[0].is_zero());
    report.pass_if("R^(1) = differential of M", r.components[1] == sa.inclusion.compose(m.carrier().differential())?);
    let jet = Arc::new(jet_module(m, &sa.derivation, MODULE_INPUTS)?);
    let nabla = canonical_connection(&jet)?;
    let atiyah = atiyah_from_connection(&nabla)?;
    report.pass_if("R^(2) = -[∂, ∇]", r.components[2] == sa.symmetrise(&jet.product, &atiyah.representative)?);
    report.pass_if("[R, R] = 0", r.map.compose(&r.map)?.is_zero());
    report.matrix("R^(2)", &r.components[2]);

    let sm = symmetric_module(sa, m)?;
    let d = d_nabla(&sm, &nabla, &nabla)?;
    report.check("D is a Q-derivation of S_A(M, M)", is_free_q_derivation(&sm, &c.q, &d, &nabla))?;
    let t = total_curvature_module(&sm, &d)?;
    report.pass_if("T^(0) = differential of M", t.components[0] == sm.inclusion.compose(m.carrier().differential())?);
    report.pass_if("T^(1) = -[∂, ∇]", t.components[1] == sm.flatten(&jet.product, &atiyah.representative)?);
    report.pass_if("[T, T] = 0", t.map.compose(&t.map)?.is_zero());

    if data.max_n < 3 {
        report.findings.insert("bianchi".into(), "skipped below symmetric degree 3".into());
        return Ok(());
    }
    let b = bianchi_witness(sa, r);
    if report.check("Bianchi homotopy found", b.as_ref().map(|_| true).map_err(Clone::clone))? {
        let b = b?;
        let holds = commutator(&b.homotopy, m.carrier(), sa.words.carrier())? == b.composite;
        report.pass_if("[∂, h] = α̂∘α", holds);
        report.pass_if("α̂∘α = -[∂, R^(3)]", b.composite == b.curvature_bracket.neg());
        report.witness("Bianchi homotopy", &b.homotopy);
    }
    let bm = bianchi_witness_module(&sm, r, &t);
    if report.check("module Bianchi homotopy found", bm.as_ref().map(|_| true).map_err(Clone::clone))? {
        let bm = bm?;
        let holds = commutator(&bm.homotopy, m.carrier(), sm.words.carrier())? == bm.composite;
        report.pass_if("module [∂, h] = α̂∘α", holds);
        report.pass_if("module α̂∘α = -[∂, T^(2)]", bm.composite == bm.curvature_bracket.neg());
        report.witness("module Bianchi homotopy", &bm.homotopy);
    }
    Ok(())
}

fn module_dims(report: &mut Report, name: &str, e: &AModule) {
    report.table(format!("{name} by weight"), e.carrier().space().weight_dims());
}

fn algebra_dims(report: &mut Report, name: &str, a: &OperadAlgebra) {
    report.table(format!("{name} by weight"), a.carrier().space().weight_dims());
}

pub fn mc(report: &mut Report, f: &Flags, path: &Path) -> Result<()> {
    let data = load_mc_or_algebra(report, f, path)?;
    let a = &data.algebra;
    window(report, f, a.name(), a.carrier());
    let solves = report.check("g solves the Maurer–Cartan equation", mc_check(&data.g))?;
    report.matrix("g", &data.g.hat()?);
    if !solves {
        report.matrix("MC defect", &data.g.defect()?);
        return Ok(());
    }
    let ag = deform(a, &data.g)?;
    algebra_dims(report, "A(g)", &ag);
    report.pass_if("A(g) differential squares to zero", ag.carrier().squares_to_zero());
    let (mg, _) = deform_module(a, &data.g)?;
    module_dims(report, "M(g)", &mg);
    let r = check_module(&mg, MODULE_INPUTS);
    axioms(report, "M(g) module axioms".into(), &r);

    let c = curvature_mc(a, &data.g, data.max_n)?;
    report.check("R(g) solves the Maurer–Cartan equation on S_A(M)", mc_check(&c.element))?;

    if data.xi.is_empty() {
        return Ok(());
    }
    let order = f.order.unwrap_or(DEFAULT_ORDER);
    let fam = gauge_flow(a, &data.g, &data.xi, order)?;
    let defects = fam.defect_coefficients()?;
    let clean = defects.iter().take(order + 1).all(GradedMap::is_zero);
    report.pass_if(format!("gauge flow defect vanishes through order {order}"), clean);
    for (k, g) in fam.coefficients.iter().enumerate() {
        report.matrix(format!("g_{k}"), &g.hat()?);
    }
    let transport = gauge_transport_check(&fam, &data.xi, data.max_n, true)?;
    let detail = (!transport.holds()).then(|| format!("orders {:?}", transport.orders));
    let status = if transport.holds() { Status::Pass } else { Status::Fail };
    report.push("R(g(t)) is transported by exp(ad ∇) ξ", status, detail);
    let mutated = gauge_transport_check(&fam, &data.xi, data.max_n, false)?;
    let seen = if mutated.holds() { "undetected" } else { "detected" };
    report.findings.insert("transport without exp(ad ∇)".into(), seen.into());
    Ok(())
}
