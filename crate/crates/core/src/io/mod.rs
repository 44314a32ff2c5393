//! File formats: `oms-json` spaces, `LORMAT01` dense matrices, CSV tables and
//! JSON reports. Everything is written in ascending point-id order so that
//! outputs are byte-reproducible.

mod compare;
mod lormat;
mod oms_json;
mod tables;

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

pub use compare::{compare_sigma, write_comparison_csv, PairError, SigmaComparison};
pub use lormat::{read_lormat, read_sigma_lormat, write_distance_lormat, write_lormat, write_sigma_lormat, LORMAT_MAGIC};
pub use oms_json::{from_oms_json, load_oms, save_oms, to_oms_json};
pub use tables::{dimension_records, write_dimension_json, write_distance_csv, write_scan_csv, write_sigma_csv, DimensionRecord, Provenance};

/// Writes `bytes` to `path`, mapping failures to [`Error::Write`].
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| Error::Write { path: path.to_path_buf(), source })
}

pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| Error::Read { path: path.to_path_buf(), source })
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_file(path, s.as_bytes())
}

/// Point indices in ascending id order.
pub fn id_order(ids: &[u64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_by_key(|&i| ids[i]);
    order
}
