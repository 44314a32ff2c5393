use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fld::DimensionEstimate;
use crate::hausdorff::ScanResult;
use crate::metrics::{DistanceMatrix, SigmaMatrix, SigmaSource};
use crate::omspace::OrderedMeasureSpace;

use super::{id_order, write_file, write_json};

/// How a reported number was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Closed form, or exact arithmetic on the input data.
    Exact,
    /// Statistical estimate from sampled data.
    Estimate,
    /// Cost of a validated cover.
    CertifiedUpperBound,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Exact => "exact",
            Provenance::Estimate => "estimate",
            Provenance::CertifiedUpperBound => "certified_upper_bound",
        }
    }

    pub fn of_sigma(source: SigmaSource) -> Self {
        match source {
            SigmaSource::Reconstructed => Provenance::Estimate,
            SigmaSource::ExactModel | SigmaSource::User => Provenance::Exact,
        }
    }
}

fn matrix_csv(space: &OrderedMeasureSpace, get: impl Fn(usize, usize) -> f64, prov: Provenance) -> String {
    let order = id_order(space.ids());
    let mut out = String::from("id");
    for &j in &order {
        let _ = write!(out, ",{}", space.id(j));
    }
    out.push_str(",provenance\n");
    for &i in &order {
        let _ = write!(out, "{}", space.id(i));
        for &j in &order {
            let _ = write!(out, ",{}", get(i, j) + 0.0);
        }
        let _ = writeln!(out, ",{}", prov.as_str());
    }
    out
}

/// Square CSV: header `id,<ids...>,provenance`, one row per point.
pub fn write_sigma_csv(space: &OrderedMeasureSpace, sigma: &SigmaMatrix, path: &Path) -> Result<()> {
    if sigma.len() != space.len() {
        return Err(Error::ShapeMismatch("sigma and space differ in size".into()));
    }
    write_file(path, matrix_csv(space, |i, j| sigma.get(i, j), Provenance::of_sigma(sigma.source())).as_bytes())
}

pub fn write_distance_csv(space: &OrderedMeasureSpace, d: &DistanceMatrix, prov: Provenance, path: &Path) -> Result<()> {
    if d.len() != space.len() {
        return Err(Error::ShapeMismatch("distance matrix and space differ in size".into()));
    }
    write_file(path, matrix_csv(space, |i, j| d.get(i, j), prov).as_bytes())
}

/// Columns `N,delta,cost,raw_cost,method,certified_bound,provenance`.
pub fn write_scan_csv(scan: &ScanResult, path: &Path) -> Result<()> {
    let mut out = String::from("N,delta,cost,raw_cost,method,certified_bound,provenance\n");
    for r in &scan.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.n,
            r.delta,
            r.cost,
            r.raw_cost,
            r.method,
            r.certified_bound,
            Provenance::CertifiedUpperBound.as_str()
        );
    }
    write_file(path, out.as_bytes())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimensionRecord {
    pub point_id: u64,
    pub value: f64,
    pub n_diamonds_used: usize,
    pub spread: f64,
    pub provenance: Provenance,
}

/// Records sorted by point id.
pub fn dimension_records(space: &OrderedMeasureSpace, estimates: &[(usize, DimensionEstimate)]) -> Vec<DimensionRecord> {
    let mut v: Vec<DimensionRecord> = estimates
        .iter()
        .map(|(b, e)| DimensionRecord {
            point_id: space.id(*b),
            value: e.value,
            n_diamonds_used: e.n_diamonds_used,
            spread: e.spread,
            provenance: Provenance::Estimate,
        })
        .collect();
    v.sort_by_key(|r| r.point_id);
    v
}

pub fn write_dimension_json(records: &[DimensionRecord], path: &Path) -> Result<()> {
    write_json(path, records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_csv_layout() {
        let x = OrderedMeasureSpace::chain(2);
        let s = SigmaMatrix::from_upper(2, &[(0, 1, 1.5)], SigmaSource::User).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        write_sigma_csv(&x, &s, &p).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "id,0,1,provenance\n0,0,1.5,exact\n1,-1.5,0,exact\n");
    }
}
