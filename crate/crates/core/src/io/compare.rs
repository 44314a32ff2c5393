use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::SigmaMatrix;
use crate::omspace::{OrderMode, OrderedMeasureSpace};
use crate::stats;

use super::write_file;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairError {
    pub p_id: u64,
    pub q_id: u64,
    pub count: usize,
    pub value: f64,
    pub reference: f64,
    pub rel_error: f64,
}

/// Relative errors of `a` against the reference `b`. When no pair passes the
/// filter, `empty` is set and the statistics are absent.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SigmaComparison {
    pub min_count: usize,
    pub n_pairs: usize,
    pub empty: bool,
    pub median: Option<f64>,
    pub p90: Option<f64>,
    pub max: Option<f64>,
    #[serde(skip)]
    pub pairs: Vec<PairError>,
}

/// Compares `a` with the reference `b` on causal pairs `p < q` whose open
/// diamond holds at least `min_count` points and where `b(p, q) != 0`.
pub fn compare_sigma(space: &OrderedMeasureSpace, a: &SigmaMatrix, b: &SigmaMatrix, min_count: usize) -> Result<SigmaComparison> {
    if a.len() != b.len() || a.len() != space.len() {
        return Err(Error::ShapeMismatch(format!(
            "sigma sizes {} and {} over a space of {} points",
            a.len(),
            b.len(),
            space.len()
        )));
    }
    let mut pairs = Vec::new();
    for p in 0..space.len() {
        for q in crate::bits::ones(space.future_words(p, OrderMode::Causal)) {
            if q == p {
                continue;
            }
            let count = space.interior_count(p, q);
            let (v, r) = (a.get(p, q), b.get(p, q));
            if count < min_count || r == 0.0 {
                continue;
            }
            pairs.push(PairError { p_id: space.id(p), q_id: space.id(q), count, value: v, reference: r, rel_error: ((v - r) / r).abs() });
        }
    }
    pairs.sort_by_key(|e| (e.p_id, e.q_id));
    let errs: Vec<f64> = pairs.iter().map(|e| e.rel_error).collect();
    Ok(SigmaComparison {
        min_count,
        n_pairs: pairs.len(),
        empty: pairs.is_empty(),
        median: stats::median(&errs),
        p90: stats::quantile(&errs, 0.9),
        max: errs.iter().copied().reduce(f64::max),
        pairs,
    })
}

/// Columns `p_id,q_id,count,value,reference,rel_error,provenance`.
pub fn write_comparison_csv(cmp: &SigmaComparison, path: &Path) -> Result<()> {
    let mut out = String::from("p_id,q_id,count,value,reference,rel_error,provenance\n");
    for e in &cmp.pairs {
        let _ = writeln!(out, "{},{},{},{},{},{},estimate", e.p_id, e.q_id, e.count, e.value, e.reference, e.rel_error);
    }
    write_file(path, out.as_bytes())
}
