use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::EventCoords;
use crate::omspace::{OrderMode, OrderedMeasureSpace};
use crate::relation::Relation;

use super::{id_order, read_file, write_file};

const FORMAT: &str = "oms-json";

/// Which relation lists a document carries.
#[derive(Deserialize, Clone, Copy, PartialEq, Eq, Debug)]
#[serde(rename_all = "snake_case")]
enum Kind {
    /// Only `causal`; the chronological order equals it.
    Causal,
    /// Only `chrono`; the causal order equals it.
    Chrono,
    Both,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OmsFile {
    format: String,
    version: u32,
    kind: Kind,
    closed: bool,
    points: Vec<PointRecord>,
    #[serde(default)]
    causal: Option<Vec<(u64, u64)>>,
    #[serde(default)]
    chrono: Option<Vec<(u64, u64)>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PointRecord {
    id: u64,
    weight: f64,
    #[serde(default)]
    coords: Option<Vec<f64>>,
}

/// Parses an `oms-json` document. `kind` names the relation lists present; a
/// missing list equals the other one.
pub fn from_oms_json(text: &str) -> Result<OrderedMeasureSpace> {
    let f: OmsFile = serde_json::from_str(text).map_err(|e| Error::Format(format!("oms-json: {e}")))?;
    if f.format != FORMAT || f.version != 1 {
        return Err(Error::Format(format!("expected format {FORMAT:?} version 1, got {:?} version {}", f.format, f.version)));
    }
    let present = (f.causal.is_some(), f.chrono.is_some());
    let expected = match f.kind {
        Kind::Causal => (true, false),
        Kind::Chrono => (false, true),
        Kind::Both => (true, true),
    };
    if present != expected {
        return Err(Error::Format(format!("kind {:?} does not match the relation lists present", f.kind)));
    }
    let n = f.points.len();
    let mut index = HashMap::with_capacity(n);
    for (k, p) in f.points.iter().enumerate() {
        if index.insert(p.id, k).is_some() {
            return Err(Error::DuplicateId(p.id));
        }
    }
    let with_coords = f.points.iter().filter(|p| p.coords.is_some()).count();
    if with_coords != 0 && with_coords != n {
        return Err(Error::Format("either every point or no point carries coords".into()));
    }
    let relation = |pairs: &[(u64, u64)]| -> Result<Relation> {
        let mut idx = Vec::with_capacity(pairs.len());
        for &(a, b) in pairs {
            let i = *index.get(&a).ok_or(Error::DanglingId(a))?;
            let j = *index.get(&b).ok_or(Error::DanglingId(b))?;
            if i == j {
                return Err(Error::NotPartialOrder { cycle: vec![a] });
            }
            idx.push((i, j));
        }
        Relation::from_pairs(n, idx)
    };
    let causal = f.causal.as_deref().map(relation).transpose()?;
    let chrono = f.chrono.as_deref().map(relation).transpose()?;
    if f.closed && [&causal, &chrono].iter().any(|r| r.as_ref().is_some_and(|r| !r.is_transitive())) {
        log::warn!("oms-json marked closed but its pairs are not transitive; closing");
    }
    let (causal, chrono) = match (causal, chrono) {
        (Some(c), Some(h)) => (c, h),
        (Some(c), None) => (c.clone(), c),
        (None, Some(h)) => (h.clone(), h),
        (None, None) => unreachable!("kind checked"),
    };
    let ids = f.points.iter().map(|p| p.id).collect();
    let weights = f.points.iter().map(|p| p.weight).collect();
    let coords = (with_coords == n && n > 0)
        .then(|| f.points.iter().map(|p| EventCoords(p.coords.clone().expect("checked"))).collect());
    OrderedMeasureSpace::new(ids, weights, coords, causal, chrono)
}

fn push_f64(out: &mut String, x: f64) {
    out.push_str(&serde_json::to_string(&x).expect("finite float"));
}

fn push_pairs(out: &mut String, space: &OrderedMeasureSpace, rel: &Relation) {
    let mut pairs: Vec<(u64, u64)> = rel.pairs().map(|(i, j)| (space.id(i), space.id(j))).collect();
    pairs.sort_unstable();
    if pairs.is_empty() {
        out.push_str("[]");
        return;
    }
    out.push_str("[\n");
    for (k, (a, b)) in pairs.iter().enumerate() {
        let _ = write!(out, "    [{a}, {b}]");
        out.push_str(if k + 1 < pairs.len() { ",\n" } else { "\n" });
    }
    out.push_str("  ]");
}

/// Canonical `oms-json` text: points by ascending id, pairs sorted by
/// `(id, id)`. With `closed = false` only covering pairs are written. The
/// chronological list is omitted (`"kind": "causal"`) when it equals the
/// causal one.
pub fn to_oms_json(space: &OrderedMeasureSpace, closed: bool) -> Result<String> {
    let both = space.causal() != space.chrono();
    let kind = if both { "both" } else { "causal" };
    let mut out = String::new();
    let _ = write!(out, "{{\n  \"format\": \"{FORMAT}\",\n  \"version\": 1,\n  \"kind\": \"{kind}\",\n  \"closed\": {closed},\n");
    out.push_str("  \"points\": [");
    let order = id_order(space.ids());
    for (k, &i) in order.iter().enumerate() {
        let _ = write!(out, "\n    {{\"id\": {}, \"weight\": ", space.id(i));
        push_f64(&mut out, space.weight(i));
        if let Some(c) = space.coords() {
            out.push_str(", \"coords\": [");
            for (m, x) in c[i].0.iter().enumerate() {
                if m > 0 {
                    out.push_str(", ");
                }
                push_f64(&mut out, *x);
            }
            out.push(']');
        }
        out.push('}');
        if k + 1 < order.len() {
            out.push(',');
        }
    }
    out.push_str(if order.is_empty() { "],\n" } else { "\n  ],\n" });
    let lists: &[(&str, OrderMode)] = if both { &[("causal", OrderMode::Causal), ("chrono", OrderMode::Chrono)] } else { &[("causal", OrderMode::Causal)] };
    for (k, (name, mode)) in lists.iter().enumerate() {
        let rel = space.relation(*mode);
        let rel = if closed { rel.clone() } else { rel.transitive_reduction()? };
        let _ = write!(out, "  \"{name}\": ");
        push_pairs(&mut out, space, &rel);
        out.push_str(if k + 1 < lists.len() { ",\n" } else { "\n" });
    }
    out.push_str("}\n");
    Ok(out)
}

pub fn load_oms(path: &Path) -> Result<OrderedMeasureSpace> {
    let bytes = read_file(path)?;
    let text = String::from_utf8(bytes).map_err(|e| Error::Format(format!("{}: not UTF-8: {e}", path.display())))?;
    from_oms_json(&text)
}

pub fn save_oms(space: &OrderedMeasureSpace, path: &Path, closed: bool) -> Result<()> {
    write_file(path, to_oms_json(space, closed)?.as_bytes())
}
