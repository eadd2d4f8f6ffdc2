//! JSON documents for matrices and factor trees.
//!
//! Matrix file:
//!
//! ```json
//! { "n": 3, "entries": [[re, im], ...] }
//! ```
//!
//! with `4^n` row-major entries. Factor-tree file: a header (`format`,
//! `version`, `n_total`, `phase`, `report`) followed by `factors`, one record
//! per factor in product order. Floats are written with 17 significant digits.

use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use serde::ser::Error as _;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;
use serde_json::{Map, Value};

use crate::basis::CartanKind;
use crate::error::{Error, Result};
use crate::factor::{Factor, FactorKind, FactorTree};
use crate::linalg::ComplexMatrix;
use crate::metrics::DecompositionReport;

pub const TREE_FORMAT: &str = "cartan-factor-tree";
pub const TREE_VERSION: u64 = 1;

/// An `f64` serialized in `{:.16e}` form.
#[derive(Clone, Copy)]
struct Precise(f64);

impl fmt::Display for Precise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.16e}", self.0)
    }
}

impl Serialize for Precise {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(S::Error::custom(format!("cannot write non-finite value {}", self.0)));
        }
        RawValue::from_string(self.to_string()).map_err(S::Error::custom)?.serialize(s)
    }
}

fn entries(m: &ComplexMatrix) -> Vec<[Precise; 2]> {
    let mut out = Vec::with_capacity(m.len());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            out.push([Precise(m[(r, c)].re), Precise(m[(r, c)].im)]);
        }
    }
    out
}

#[derive(Serialize)]
struct MatrixDoc {
    n: usize,
    entries: Vec<[Precise; 2]>,
}

#[derive(Serialize)]
struct ReportDoc {
    approx_error: Precise,
    wall_time: Precise,
    subspace_errors: Vec<(String, Precise)>,
    optimizer_stats: Vec<(String, usize)>,
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum FactorBody {
    GlobalPhase { phase: Precise },
    SubUnitary { level: usize, entries: Vec<[Precise; 2]> },
    LastQubit { level: usize, entries: Vec<[Precise; 2]> },
    CartanExp { level: usize, basis: String, terms: Vec<(String, Precise)> },
}

#[derive(Serialize)]
struct FactorDoc {
    index: usize,
    label: String,
    subspace_error: Precise,
    #[serde(flatten)]
    body: FactorBody,
}

#[derive(Serialize)]
struct TreeDoc {
    format: &'static str,
    version: u64,
    n_total: usize,
    phase: Precise,
    report: ReportDoc,
    factors: Vec<FactorDoc>,
}

fn to_json<T: Serialize>(doc: &T) -> Result<String> {
    serde_json::to_string_pretty(doc).map_err(|e| Error::InvalidInput(e.to_string()))
}

/// Qubit count of a square power-of-two matrix.
pub fn qubits_of(m: &ComplexMatrix) -> Result<usize> {
    let dim = m.nrows();
    if dim != m.ncols() || !dim.is_power_of_two() {
        return Err(Error::InvalidInput(format!("{}x{} is not a qubit-register matrix", m.nrows(), m.ncols())));
    }
    Ok(dim.trailing_zeros() as usize)
}

pub fn write_matrix(m: &ComplexMatrix) -> Result<String> {
    to_json(&MatrixDoc { n: qubits_of(m)?, entries: entries(m) })
}

pub fn write_tree(tree: &FactorTree) -> Result<String> {
    let r = &tree.report;
    let report = ReportDoc {
        approx_error: Precise(r.approx_error),
        wall_time: Precise(r.wall_time),
        subspace_errors: r.subspace_errors.iter().map(|(l, e)| (l.clone(), Precise(*e))).collect(),
        optimizer_stats: r.optimizer_stats.clone(),
    };
    let factors = tree
        .factors
        .iter()
        .enumerate()
        .map(|(index, f)| {
            let body = match &f.kind {
                FactorKind::GlobalPhase { phase } => FactorBody::GlobalPhase { phase: Precise(*phase) },
                FactorKind::SubUnitary { level, payload } => {
                    FactorBody::SubUnitary { level: *level, entries: entries(payload) }
                }
                FactorKind::LastQubit { level, payload } => {
                    FactorBody::LastQubit { level: *level, entries: entries(payload) }
                }
                FactorKind::CartanExp { level, basis, terms } => FactorBody::CartanExp {
                    level: *level,
                    basis: basis.name(*level),
                    terms: terms.iter().map(|(l, c)| (l.clone(), Precise(*c))).collect(),
                },
            };
            FactorDoc { index, label: f.label.clone(), subspace_error: Precise(f.subspace_error), body }
        })
        .collect();
    to_json(&TreeDoc {
        format: TREE_FORMAT,
        version: TREE_VERSION,
        n_total: tree.n_total,
        phase: Precise(tree.phase),
        report,
        factors,
    })
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, at: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| Error::parse(at, format!("missing field `{key}`")))
}

fn as_object<'a>(v: &'a Value, at: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::parse(at, "expected an object"))
}

fn as_array<'a>(v: &'a Value, at: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| Error::parse(at, "expected an array"))
}

fn as_f64(v: &Value, at: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| Error::parse(at, "expected a number"))
}

fn as_usize(v: &Value, at: &str) -> Result<usize> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| Error::parse(at, "expected a nonnegative integer"))
}

fn as_str<'a>(v: &'a Value, at: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| Error::parse(at, "expected a string"))
}

fn read_entries(v: &Value, dim: usize, at: &str) -> Result<ComplexMatrix> {
    let list = as_array(v, at)?;
    if list.len() != dim * dim {
        return Err(Error::parse(at, format!("expected {} entries, found {}", dim * dim, list.len())));
    }
    let mut vals = Vec::with_capacity(list.len());
    for (i, e) in list.iter().enumerate() {
        let loc = format!("{at}[{i}]");
        let pair = as_array(e, &loc)?;
        if pair.len() != 2 {
            return Err(Error::parse(&loc, "expected a [re, im] pair"));
        }
        vals.push(Complex64::new(as_f64(&pair[0], &loc)?, as_f64(&pair[1], &loc)?));
    }
    Ok(ComplexMatrix::from_row_slice(dim, dim, &vals))
}

fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text)
        .map_err(|e| Error::parse(format!("line {}, column {}", e.line(), e.column()), e.to_string()))
}

/// Parses a matrix document; returns the qubit count and the matrix.
pub fn read_matrix(text: &str) -> Result<(usize, ComplexMatrix)> {
    let doc = parse_json(text)?;
    let obj = as_object(&doc, "document")?;
    let n = as_usize(field(obj, "n", "document")?, "n")?;
    if !(1..=12).contains(&n) {
        return Err(Error::parse("n", format!("qubit count {n} out of range")));
    }
    let m = read_entries(field(obj, "entries", "document")?, 1 << n, "entries")?;
    Ok((n, m))
}

fn read_terms(v: &Value, at: &str) -> Result<Vec<(String, f64)>> {
    as_array(v, at)?
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let loc = format!("{at}[{i}]");
            let pair = as_array(t, &loc)?;
            if pair.len() != 2 {
                return Err(Error::parse(&loc, "expected a [label, coefficient] pair"));
            }
            Ok((as_str(&pair[0], &loc)?.to_owned(), as_f64(&pair[1], &loc)?))
        })
        .collect()
}

fn read_factor(v: &Value, at: &str) -> Result<Factor> {
    let obj = as_object(v, at)?;
    let loc = |k: &str| format!("{at}.{k}");
    let kind_name = as_str(field(obj, "kind", at)?, &loc("kind"))?;
    let label = match obj.get("label") {
        Some(l) => as_str(l, &loc("label"))?.to_owned(),
        None => String::new(),
    };
    let subspace_error = match obj.get("subspace_error") {
        Some(e) => as_f64(e, &loc("subspace_error"))?,
        None => 0.0,
    };
    let level = || as_usize(field(obj, "level", at)?, &loc("level"));
    let kind = match kind_name {
        "global_phase" => FactorKind::GlobalPhase { phase: as_f64(field(obj, "phase", at)?, &loc("phase"))? },
        "sub_unitary" => {
            let level = level()?;
            if !(3..=13).contains(&level) {
                return Err(Error::parse(loc("level"), "sub-unitary level must be at least 3"));
            }
            let payload = read_entries(field(obj, "entries", at)?, 1 << (level - 1), &loc("entries"))?;
            FactorKind::SubUnitary { level, payload }
        }
        "last_qubit" => {
            let level = level()?;
            let payload = read_entries(field(obj, "entries", at)?, 2, &loc("entries"))?;
            FactorKind::LastQubit { level, payload }
        }
        "cartan_exp" => {
            let level = level()?;
            let name = as_str(field(obj, "basis", at)?, &loc("basis"))?;
            let (basis, basis_level) =
                CartanKind::parse(name).ok_or_else(|| Error::parse(loc("basis"), format!("unknown basis {name:?}")))?;
            if basis_level != level {
                return Err(Error::parse(loc("basis"), format!("basis {name} declared on a level-{level} factor")));
            }
            FactorKind::CartanExp { level, basis, terms: read_terms(field(obj, "terms", at)?, &loc("terms"))? }
        }
        other => return Err(Error::parse(loc("kind"), format!("unknown factor kind {other:?}"))),
    };
    Ok(Factor { label, kind, subspace_error })
}

fn read_report(v: &Value, at: &str) -> Result<DecompositionReport> {
    let obj = as_object(v, at)?;
    let mut report = DecompositionReport {
        approx_error: as_f64(field(obj, "approx_error", at)?, &format!("{at}.approx_error"))?,
        ..Default::default()
    };
    if let Some(t) = obj.get("wall_time") {
        report.wall_time = as_f64(t, &format!("{at}.wall_time"))?;
    }
    if let Some(list) = obj.get("subspace_errors") {
        report.subspace_errors = read_terms(list, &format!("{at}.subspace_errors"))?;
    }
    if let Some(list) = obj.get("optimizer_stats") {
        let loc = format!("{at}.optimizer_stats");
        for (i, item) in as_array(list, &loc)?.iter().enumerate() {
            let iloc = format!("{loc}[{i}]");
            let pair = as_array(item, &iloc)?;
            if pair.len() != 2 {
                return Err(Error::parse(&iloc, "expected a [label, count] pair"));
            }
            report.optimizer_stats.push((as_str(&pair[0], &iloc)?.to_owned(), as_usize(&pair[1], &iloc)?));
        }
    }
    Ok(report)
}

pub fn read_tree(text: &str) -> Result<FactorTree> {
    let doc = parse_json(text)?;
    let obj = as_object(&doc, "document")?;
    let format = as_str(field(obj, "format", "document")?, "format")?;
    if format != TREE_FORMAT {
        return Err(Error::parse("format", format!("expected {TREE_FORMAT:?}, found {format:?}")));
    }
    let version = field(obj, "version", "document")?.as_u64();
    if version != Some(TREE_VERSION) {
        return Err(Error::parse("version", format!("unsupported version {version:?}")));
    }
    let n_total = as_usize(field(obj, "n_total", "document")?, "n_total")?;
    if !(2..=12).contains(&n_total) {
        return Err(Error::parse("n_total", format!("register size {n_total} out of range")));
    }
    let phase = as_f64(field(obj, "phase", "document")?, "phase")?;
    let report = match obj.get("report") {
        Some(r) => read_report(r, "report")?,
        None => DecompositionReport::default(),
    };
    let list = as_array(field(obj, "factors", "document")?, "factors")?;
    let mut factors = Vec::with_capacity(list.len());
    for (i, f) in list.iter().enumerate() {
        let at = format!("factors[{i}]");
        if let Some(index) = f.get("index") {
            if as_usize(index, &format!("{at}.index"))? != i {
                return Err(Error::parse(format!("{at}.index"), "factor records are out of order"));
            }
        }
        factors.push(read_factor(f, &at)?);
    }
    let mut tree = FactorTree::new(n_total, phase, factors);
    tree.report = report;
    Ok(tree)
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

pub fn load_matrix(path: &Path) -> Result<(usize, ComplexMatrix)> {
    read_matrix(&read_file(path)?)
}

pub fn save_matrix(path: &Path, m: &ComplexMatrix) -> Result<()> {
    write_file(path, &write_matrix(m)?)
}

pub fn load_tree(path: &Path) -> Result<FactorTree> {
    read_tree(&read_file(path)?)
}

pub fn save_tree(path: &Path, tree: &FactorTree) -> Result<()> {
    write_file(path, &write_tree(tree)?)
}
