//! JSON file formats.
//!
//! Every document carries `"format": 1`. A space is
//! `{"labels": [...], "dist": [[...]]}` (labels optional). A group is
//! `{"space": <path or inline space>, "perms": [[...]]}`; without `perms`
//! the full isometry group is used. Wherever a group is expected a bare
//! space is accepted and means the space with its full isometry group.
//! Relative paths resolve against the referring file's directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::group::{isometry_group, GSpace, IsometryGroup};
use crate::scalar::Scalar;
use crate::scenario::{ConvergenceScenario, SymmetryMode};
use crate::space::{validate_table, FiniteMetricSpace, ValidationReport};
use crate::triples::ApproxTriple;

pub const FORMAT: u64 = 1;

/// Reads a JSON document and checks its format version.
pub fn read_document(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    check_format(&value)?;
    Ok(value)
}

fn check_format(value: &Value) -> Result<()> {
    let obj = value
        .as_object()
        .ok_or_else(|| Error::Parse("expected a JSON object".into()))?;
    match obj.get("format") {
        None => Ok(()),
        Some(v) if v.as_u64() == Some(FORMAT) => Ok(()),
        Some(v) => Err(Error::Parse(format!("unsupported format {v}, expected {FORMAT}"))),
    }
}

fn field<'a>(value: &'a Value, key: &str) -> Result<&'a Value> {
    value
        .get(key)
        .ok_or_else(|| Error::Parse(format!("missing field {key:?}")))
}

fn index_list(value: &Value, what: &str) -> Result<Vec<usize>> {
    value
        .as_array()
        .ok_or_else(|| Error::Parse(format!("{what} must be an array of indices")))?
        .iter()
        .map(|v| {
            v.as_u64()
                .map(|i| i as usize)
                .ok_or_else(|| Error::Parse(format!("{what} contains {v}, expected an index")))
        })
        .collect()
}

fn raw_table<S: Scalar>(value: &Value) -> Result<(Vec<String>, Vec<Vec<S>>)> {
    let rows = field(value, "dist")?
        .as_array()
        .ok_or_else(|| Error::Parse("dist must be an array of rows".into()))?;
    let dist = rows
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(|| Error::Parse("each dist row must be an array".into()))?
                .iter()
                .map(S::from_json)
                .collect::<Result<Vec<S>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let labels = match value.get("labels") {
        None => (0..dist.len()).map(|i| i.to_string()).collect(),
        Some(l) => l
            .as_array()
            .ok_or_else(|| Error::Parse("labels must be an array".into()))?
            .iter()
            .map(|v| match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            })
            .collect(),
    };
    Ok((labels, dist))
}

/// Validates a space document without requiring it to be a metric.
pub fn validate_document<S: Scalar>(value: &Value) -> Result<ValidationReport> {
    let (labels, dist) = raw_table::<S>(value)?;
    validate_table(&labels, &dist)
}

pub fn space_from_json<S: Scalar>(value: &Value) -> Result<FiniteMetricSpace<S>> {
    let (labels, dist) = raw_table(value)?;
    FiniteMetricSpace::new(labels, dist)
}

pub fn space_to_json<S: Scalar>(space: &FiniteMetricSpace<S>) -> Value {
    json!({
        "format": FORMAT,
        "labels": space.labels(),
        "dist": space
            .table()
            .iter()
            .map(|row| row.iter().map(S::to_json).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    })
}

/// Resolves a value that is either an inline document or a path to one.
fn resolve(value: &Value, base: &Path) -> Result<(Value, PathBuf)> {
    match value {
        Value::String(p) => {
            let path = base.join(p);
            let doc = read_document(&path)?;
            let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
            Ok((doc, dir))
        }
        Value::Object(_) => {
            check_format(value)?;
            Ok((value.clone(), base.to_path_buf()))
        }
        other => Err(Error::Parse(format!("expected a path or an object, got {other}"))),
    }
}

/// A group document, or a bare space (full isometry group).
pub fn gspace_from_json<S: Scalar>(value: &Value, base: &Path) -> Result<GSpace<S>> {
    if value.get("dist").is_some() {
        return Ok(GSpace::full(space_from_json(value)?));
    }
    let (space_doc, _) = resolve(field(value, "space")?, base)?;
    let space = space_from_json(&space_doc)?;
    let group = match value.get("perms") {
        None => isometry_group(&space),
        Some(perms) => {
            let perms = perms
                .as_array()
                .ok_or_else(|| Error::Parse("perms must be an array".into()))?
                .iter()
                .map(|p| index_list(p, "perm"))
                .collect::<Result<Vec<_>>>()?;
            IsometryGroup::from_perms(space.len(), perms)?
        }
    };
    GSpace::new(space, group)
}

pub fn load_gspace<S: Scalar>(path: &Path) -> Result<GSpace<S>> {
    let doc = read_document(path)?;
    gspace_from_json(&doc, path.parent().unwrap_or(Path::new("")))
}

pub fn gspace_to_json<S: Scalar>(g: &GSpace<S>) -> Value {
    json!({
        "format": FORMAT,
        "space": space_to_json(g.space()),
        "perms": g.group().perms(),
    })
}

/// A triple with its two pairs.
pub struct TripleFile<S> {
    pub source: GSpace<S>,
    pub target: GSpace<S>,
    pub triple: ApproxTriple<S>,
}

pub fn triple_from_json<S: Scalar>(value: &Value, base: &Path) -> Result<TripleFile<S>> {
    let pair = |key: &str| -> Result<GSpace<S>> {
        let (doc, dir) = resolve(field(value, key)?, base)?;
        gspace_from_json(&doc, &dir)
    };
    let source = pair("source")?;
    let target = pair("target")?;
    let triple = ApproxTriple::new(
        &source,
        &target,
        index_list(field(value, "f")?, "f")?,
        index_list(field(value, "theta")?, "theta")?,
        index_list(field(value, "psi")?, "psi")?,
    )?;
    Ok(TripleFile {
        source,
        target,
        triple,
    })
}

pub fn load_triple<S: Scalar>(path: &Path) -> Result<TripleFile<S>> {
    let doc = read_document(path)?;
    triple_from_json(&doc, path.parent().unwrap_or(Path::new("")))
}

pub fn triple_to_json<S: Scalar>(source: &GSpace<S>, target: &GSpace<S>, t: &ApproxTriple<S>) -> Value {
    json!({
        "format": FORMAT,
        "source": gspace_to_json(source),
        "target": gspace_to_json(target),
        "f": t.f,
        "theta": t.theta,
        "psi": t.psi,
    })
}

/// `{"limit": <group>, "subgroup": [...], "schedule": [...], "seed": n,
/// "symmetry": "transport" | "recompute", "budget": n}`; `subgroup`
/// defaults to the trivial subgroup, `seed` to 0, `symmetry` to
/// `transport`, `budget` to one million nodes.
pub fn scenario_from_json<S: Scalar>(value: &Value, base: &Path) -> Result<ConvergenceScenario<S>> {
    let (limit_doc, dir) = resolve(field(value, "limit")?, base)?;
    let limit = gspace_from_json(&limit_doc, &dir)?;
    let subgroup = match value.get("subgroup") {
        Some(v) => index_list(v, "subgroup")?,
        None => vec![],
    };
    let schedule = field(value, "schedule")?
        .as_array()
        .ok_or_else(|| Error::Parse("schedule must be an array".into()))?
        .iter()
        .map(|v| {
            v.as_f64()
                .ok_or_else(|| Error::Parse(format!("schedule entry {v} is not a number")))
        })
        .collect::<Result<Vec<_>>>()?;
    let seed = value.get("seed").map_or(Ok(0), |v| {
        v.as_u64().ok_or_else(|| Error::Parse("seed must be a non-negative integer".into()))
    })?;
    let symmetry = match value.get("symmetry") {
        None => SymmetryMode::Transport,
        Some(v) => serde_json::from_value(v.clone())
            .map_err(|_| Error::Parse(format!("symmetry must be \"transport\" or \"recompute\", got {v}")))?,
    };
    let budget = value.get("budget").map_or(Ok(1_000_000), |v| {
        v.as_u64().ok_or_else(|| Error::Parse("budget must be a non-negative integer".into()))
    })?;
    Ok(ConvergenceScenario {
        limit,
        subgroup,
        schedule,
        seed,
        symmetry,
        budget,
    })
}

pub fn load_scenario<S: Scalar>(path: &Path) -> Result<ConvergenceScenario<S>> {
    let doc = read_document(path)?;
    scenario_from_json(&doc, path.parent().unwrap_or(Path::new("")))
}

/// `{"format": 1, "kind": kind, ...fields of body}`.
pub fn report<T: Serialize>(kind: &str, body: &T) -> Result<Value> {
    let mut out = Map::new();
    out.insert("format".into(), json!(FORMAT));
    out.insert("kind".into(), json!(kind));
    match serde_json::to_value(body)? {
        Value::Object(fields) => out.extend(fields),
        other => {
            out.insert("result".into(), other);
        }
    }
    Ok(Value::Object(out))
}
