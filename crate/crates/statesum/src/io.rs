//! JSON readers and writers for the documented file formats.
//!
//! * Triangulation: `dim`, `vertices` (id → height), `simplices`, `signs`,
//!   `boundary` (name → facet list).
//! * Stratified complex: the triangulation fields plus `strata`
//!   (list of `{dim, label, simplices}`) and optional `ends` (mark names).
//! * Algebra: `dim`, optional `labels`, dense `mu`, `eta`, `eps`,
//!   optional `delta`.
//! * Category: `labels`, `unit`, `dual`, sparse `N` (admissible triples),
//!   sparse `F` (`{key, value}` with six label names per key), `d`, `phi`.
//!   Inverse associator entries are derived on load, never stored.
//! * Weights: `psi` (stratum dimension → scalar).
//!
//! Scalars are rational strings `"p/q"`, plain integers, or `[re, im]`
//! pairs, matching the scalar implementations.  Serialization is canonical:
//! object keys are emitted in sorted order, so equal data produces equal
//! bytes.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::euler::{
    build_stratified, unstratified, EulerError, EulerWeights, StratifiedComplex, Stratum,
};
use crate::frob::{FrobError, FrobeniusData};
use crate::fusioncat::{FKey, FusionData, FusionError};
use crate::mesh::{build_triangulation, Height, MeshError, Triangulation, VertexId};
use crate::scalar::{parse_ratio_str, Scalar, ScalarError};

#[derive(Debug, Error)]
pub enum IoError {
    /// The text is not valid JSON; positions are 1-based.
    #[error("parse error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    /// The JSON is well formed but does not match the documented format.
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Frob(#[from] FrobError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error(transparent)]
    Euler(#[from] EulerError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

fn parse_root(text: &str) -> Result<Value, IoError> {
    serde_json::from_str(text).map_err(|e| IoError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn as_object<'a>(v: &'a Value, what: &str) -> Result<&'a Map<String, Value>, IoError> {
    v.as_object().ok_or_else(|| IoError::Format(format!("{what} must be a JSON object")))
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value, IoError> {
    obj.get(key).ok_or_else(|| IoError::Format(format!("missing field `{key}`")))
}

fn as_array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>, IoError> {
    v.as_array().ok_or_else(|| IoError::Format(format!("{what} must be an array")))
}

fn as_str<'a>(v: &'a Value, what: &str) -> Result<&'a str, IoError> {
    v.as_str().ok_or_else(|| IoError::Format(format!("{what} must be a string")))
}

fn as_usize(v: &Value, what: &str) -> Result<usize, IoError> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| IoError::Format(format!("{what} must be a nonnegative integer")))
}

fn parse_height(v: &Value, what: &str) -> Result<Height, IoError> {
    match v {
        Value::String(s) => Ok(parse_ratio_str(s)?),
        Value::Number(n) => n
            .as_i64()
            .map(|x| Height::from_integer(x.into()))
            .ok_or_else(|| IoError::Format(format!("{what} must be an integer or \"p/q\""))),
        _ => Err(IoError::Format(format!("{what} must be an integer or \"p/q\""))),
    }
}

fn parse_simplex(v: &Value, what: &str) -> Result<Vec<VertexId>, IoError> {
    as_array(v, what)?
        .iter()
        .map(|x| {
            x.as_u64()
                .map(|id| id as VertexId)
                .ok_or_else(|| IoError::Format(format!("{what} entries must be vertex ids")))
        })
        .collect()
}

fn scalar_from<S: Scalar>(v: &Value, what: &str) -> Result<S, IoError> {
    S::from_json(v).map_err(|e| IoError::Format(format!("{what}: {e}")))
}

// ---------------------------------------------------------------------------
// Triangulations
// ---------------------------------------------------------------------------

fn triangulation_from_value(root: &Value) -> Result<Triangulation, IoError> {
    let obj = as_object(root, "a triangulation")?;
    let dim = as_usize(field(obj, "dim")?, "`dim`")? as u8;

    let mut heights: BTreeMap<VertexId, Height> = BTreeMap::new();
    for (key, value) in as_object(field(obj, "vertices")?, "`vertices`")? {
        let id: VertexId = key
            .parse()
            .map_err(|_| IoError::Format(format!("vertex id `{key}` is not an integer")))?;
        heights.insert(id, parse_height(value, &format!("height of vertex {key}"))?);
    }

    let simplices: Vec<Vec<VertexId>> = as_array(field(obj, "simplices")?, "`simplices`")?
        .iter()
        .map(|s| parse_simplex(s, "`simplices`"))
        .collect::<Result<_, _>>()?;

    let signs: Vec<i8> = as_array(field(obj, "signs")?, "`signs`")?
        .iter()
        .map(|v| match v.as_i64() {
            Some(1) => Ok(1i8),
            Some(-1) => Ok(-1i8),
            _ => Err(IoError::Format("`signs` entries must be 1 or -1".into())),
        })
        .collect::<Result<_, _>>()?;

    let mut boundary: BTreeMap<String, Vec<Vec<VertexId>>> = BTreeMap::new();
    if let Some(b) = obj.get("boundary") {
        for (name, facets) in as_object(b, "`boundary`")? {
            let list = as_array(facets, "boundary facet list")?
                .iter()
                .map(|f| parse_simplex(f, "boundary facet"))
                .collect::<Result<_, _>>()?;
            boundary.insert(name.clone(), list);
        }
    }

    Ok(build_triangulation(dim, heights, simplices, signs, boundary)?)
}

pub fn triangulation_from_json(text: &str) -> Result<Triangulation, IoError> {
    triangulation_from_value(&parse_root(text)?)
}

fn triangulation_fields(t: &Triangulation) -> Map<String, Value> {
    let mut obj = Map::new();
    obj.insert("dim".into(), json!(t.dim()));
    let vertices: Map<String, Value> = t
        .heights()
        .iter()
        .map(|(v, h)| (v.to_string(), Value::String(h.to_string())))
        .collect();
    obj.insert("vertices".into(), Value::Object(vertices));
    obj.insert("simplices".into(), json!(t.simplices()));
    obj.insert("signs".into(), json!(t.signs()));
    let boundary: Map<String, Value> = t
        .boundary_marks()
        .iter()
        .map(|(name, facets)| (name.clone(), json!(facets.iter().collect::<Vec<_>>())))
        .collect();
    obj.insert("boundary".into(), Value::Object(boundary));
    obj
}

pub fn triangulation_to_json(t: &Triangulation) -> Value {
    Value::Object(triangulation_fields(t))
}

// ---------------------------------------------------------------------------
// Stratified complexes
// ---------------------------------------------------------------------------

/// Parse a stratified complex.  A file without a `strata` field is read as
/// a plain triangulation with a single bulk stratum.
pub fn stratified_from_json(text: &str) -> Result<StratifiedComplex, IoError> {
    let root = parse_root(text)?;
    let underlying = triangulation_from_value(&root)?;
    let obj = as_object(&root, "a stratified complex")?;

    let Some(strata_value) = obj.get("strata") else {
        if obj.contains_key("ends") {
            return Err(IoError::Format("`ends` requires `strata`".into()));
        }
        return Ok(unstratified(underlying));
    };

    let strata = as_array(strata_value, "`strata`")?
        .iter()
        .map(|s| {
            let so = as_object(s, "a stratum")?;
            let label = as_str(field(so, "label")?, "stratum `label`")?.to_string();
            let dim = as_usize(field(so, "dim")?, "stratum `dim`")? as u8;
            let simplices: BTreeSet<Vec<VertexId>> =
                as_array(field(so, "simplices")?, "stratum `simplices`")?
                    .iter()
                    .map(|x| parse_simplex(x, "stratum simplex").map(|mut s| {
                        s.sort_unstable();
                        s
                    }))
                    .collect::<Result<_, _>>()?;
            Ok(Stratum { label, dim, simplices })
        })
        .collect::<Result<Vec<_>, IoError>>()?;

    let mut ends = BTreeSet::new();
    if let Some(e) = obj.get("ends") {
        for name in as_array(e, "`ends`")? {
            ends.insert(as_str(name, "end name")?.to_string());
        }
    }

    Ok(build_stratified(underlying, strata, ends)?)
}

pub fn stratified_to_json(x: &StratifiedComplex) -> Value {
    let mut obj = triangulation_fields(x.underlying());
    let strata: Vec<Value> = x
        .strata()
        .iter()
        .map(|s| {
            json!({
                "dim": s.dim,
                "label": s.label,
                "simplices": s.simplices.iter().collect::<Vec<_>>(),
            })
        })
        .collect();
    obj.insert("strata".into(), Value::Array(strata));
    if !x.ends().is_empty() {
        obj.insert("ends".into(), json!(x.ends().iter().collect::<Vec<_>>()));
    }
    Value::Object(obj)
}

// ---------------------------------------------------------------------------
// Algebras
// ---------------------------------------------------------------------------

fn tensor3_from<S: Scalar>(v: &Value, n: usize, what: &str) -> Result<Vec<Vec<Vec<S>>>, IoError> {
    let outer = as_array(v, what)?;
    if outer.len() != n {
        return Err(IoError::Format(format!("{what} must have {n} rows")));
    }
    outer
        .iter()
        .map(|row| {
            let mid = as_array(row, what)?;
            if mid.len() != n {
                return Err(IoError::Format(format!("{what} rows must have {n} columns")));
            }
            mid.iter()
                .map(|col| {
                    let inner = as_array(col, what)?;
                    if inner.len() != n {
                        return Err(IoError::Format(format!("{what} cells must have {n} entries")));
                    }
                    inner.iter().map(|x| scalar_from::<S>(x, what)).collect()
                })
                .collect()
        })
        .collect()
}

fn vector_from<S: Scalar>(v: &Value, n: usize, what: &str) -> Result<Vec<S>, IoError> {
    let arr = as_array(v, what)?;
    if arr.len() != n {
        return Err(IoError::Format(format!("{what} must have {n} entries")));
    }
    arr.iter().map(|x| scalar_from::<S>(x, what)).collect()
}

pub fn algebra_from_json<S: Scalar>(text: &str) -> Result<FrobeniusData<S>, IoError> {
    let root = parse_root(text)?;
    let obj = as_object(&root, "an algebra")?;
    let n = as_usize(field(obj, "dim")?, "`dim`")?;
    let labels = match obj.get("labels") {
        Some(v) => Some(
            as_array(v, "`labels`")?
                .iter()
                .map(|x| as_str(x, "label").map(str::to_string))
                .collect::<Result<Vec<_>, _>>()?,
        ),
        None => None,
    };
    let mu = tensor3_from::<S>(field(obj, "mu")?, n, "`mu`")?;
    let eta = vector_from::<S>(field(obj, "eta")?, n, "`eta`")?;
    let eps = vector_from::<S>(field(obj, "eps")?, n, "`eps`")?;
    let delta = match obj.get("delta") {
        Some(v) => Some(tensor3_from::<S>(v, n, "`delta`")?),
        None => None,
    };
    Ok(FrobeniusData::new(mu, eta, eps, delta, labels)?)
}

pub fn algebra_to_json<S: Scalar>(a: &FrobeniusData<S>) -> Value {
    let tensor3 = |t: &Vec<Vec<Vec<S>>>| -> Value {
        json!(t
            .iter()
            .map(|row| row
                .iter()
                .map(|col| col.iter().map(S::to_json).collect::<Vec<_>>())
                .collect::<Vec<_>>())
            .collect::<Vec<_>>())
    };
    let mut obj = Map::new();
    obj.insert("dim".into(), json!(a.dim));
    obj.insert("labels".into(), json!(a.labels));
    obj.insert("mu".into(), tensor3(&a.mu));
    obj.insert("eta".into(), json!(a.eta.iter().map(S::to_json).collect::<Vec<_>>()));
    obj.insert("eps".into(), json!(a.eps.iter().map(S::to_json).collect::<Vec<_>>()));
    if let Some(delta) = &a.delta {
        obj.insert("delta".into(), tensor3(delta));
    }
    Value::Object(obj)
}

// ---------------------------------------------------------------------------
// Categories
// ---------------------------------------------------------------------------

pub fn category_from_json<S: Scalar>(text: &str) -> Result<FusionData<S>, IoError> {
    let root = parse_root(text)?;
    let obj = as_object(&root, "a category")?;

    let labels: Vec<String> = as_array(field(obj, "labels")?, "`labels`")?
        .iter()
        .map(|x| as_str(x, "label").map(str::to_string))
        .collect::<Result<_, _>>()?;
    let mut index: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, name) in labels.iter().enumerate() {
        if index.insert(name.as_str(), i).is_some() {
            return Err(IoError::Format(format!("duplicate label {name:?}")));
        }
    }
    let resolve = |v: &Value, what: &str| -> Result<usize, IoError> {
        let name = as_str(v, what)?;
        index
            .get(name)
            .copied()
            .ok_or_else(|| IoError::Format(format!("{what}: unknown label {name:?}")))
    };

    let unit = resolve(field(obj, "unit")?, "`unit`")?;
    let dual_values = as_array(field(obj, "dual")?, "`dual`")?;
    if dual_values.len() != labels.len() {
        return Err(IoError::Format("`dual` must list one label per label".into()));
    }
    let dual: Vec<usize> =
        dual_values.iter().map(|v| resolve(v, "`dual`")).collect::<Result<_, _>>()?;

    let mut n: BTreeSet<(usize, usize, usize)> = BTreeSet::new();
    for triple in as_array(field(obj, "N")?, "`N`")? {
        let t = as_array(triple, "`N` entry")?;
        if t.len() != 3 {
            return Err(IoError::Format("`N` entries must be label triples".into()));
        }
        n.insert((
            resolve(&t[0], "`N` entry")?,
            resolve(&t[1], "`N` entry")?,
            resolve(&t[2], "`N` entry")?,
        ));
    }

    let mut f: BTreeMap<FKey, S> = BTreeMap::new();
    for entry in as_array(field(obj, "F")?, "`F`")? {
        let eo = as_object(entry, "an `F` entry")?;
        let key_values = as_array(field(eo, "key")?, "`F` key")?;
        if key_values.len() != 6 {
            return Err(IoError::Format("`F` keys must list six labels".into()));
        }
        let mut key = [0usize; 6];
        for (slot, v) in key.iter_mut().zip(key_values) {
            *slot = resolve(v, "`F` key")?;
        }
        let value = scalar_from::<S>(field(eo, "value")?, "`F` value")?;
        if f.insert((key[0], key[1], key[2], key[3], key[4], key[5]), value).is_some() {
            return Err(IoError::Format(format!("duplicate `F` key {key:?}")));
        }
    }

    let d = vector_from::<S>(field(obj, "d")?, labels.len(), "`d`")?;
    let phi = scalar_from::<S>(field(obj, "phi")?, "`phi`")?;

    Ok(FusionData::with_derived_fbar(labels, unit, dual, n, f, d, phi)?)
}

/// Serialize a category.  Inverse associator entries are never written;
/// they are rederived on load.
pub fn category_to_json<S: Scalar>(c: &FusionData<S>) -> Value {
    let name = |i: usize| c.labels[i].clone();
    let mut obj = Map::new();
    obj.insert("labels".into(), json!(c.labels));
    obj.insert("unit".into(), json!(name(c.unit)));
    obj.insert("dual".into(), json!(c.dual.iter().map(|&i| name(i)).collect::<Vec<_>>()));
    obj.insert(
        "N".into(),
        json!(c.n.iter().map(|&(a, b, cc)| vec![name(a), name(b), name(cc)]).collect::<Vec<_>>()),
    );
    let f: Vec<Value> = c
        .f
        .iter()
        .map(|(&(a, b, cc, dd, e, ff), v)| {
            json!({
                "key": [name(a), name(b), name(cc), name(dd), name(e), name(ff)],
                "value": v.to_json(),
            })
        })
        .collect();
    obj.insert("F".into(), Value::Array(f));
    obj.insert("d".into(), json!(c.d.iter().map(S::to_json).collect::<Vec<_>>()));
    obj.insert("phi".into(), c.phi.to_json());
    Value::Object(obj)
}

// ---------------------------------------------------------------------------
// Euler weights
// ---------------------------------------------------------------------------

pub fn weights_from_json<S: Scalar>(text: &str) -> Result<EulerWeights<S>, IoError> {
    let root = parse_root(text)?;
    let obj = as_object(&root, "a weight file")?;
    let mut psi = BTreeMap::new();
    for (key, value) in as_object(field(obj, "psi")?, "`psi`")? {
        let dim: u8 = key
            .parse()
            .map_err(|_| IoError::Format(format!("`psi` key `{key}` is not a dimension")))?;
        psi.insert(dim, scalar_from::<S>(value, "`psi` value")?);
    }
    Ok(EulerWeights { psi })
}

pub fn weights_to_json<S: Scalar>(w: &EulerWeights<S>) -> Value {
    let psi: Map<String, Value> =
        w.psi.iter().map(|(dim, v)| (dim.to_string(), v.to_json())).collect();
    json!({ "psi": psi })
}

/// Canonical rendering: pretty-printed with sorted keys and a trailing
/// newline, so equal values produce byte-identical files.
pub fn render_canonical(v: &Value) -> String {
    let mut text = serde_json::to_string_pretty(v).expect("JSON values render");
    text.push('\n');
    text
}

// ---------------------------------------------------------------------------
