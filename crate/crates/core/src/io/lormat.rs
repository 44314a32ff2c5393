use std::path::Path;

use crate::error::{Error, Result};
use crate::metrics::{DistanceMatrix, SigmaMatrix, SigmaSource};
use crate::omspace::OrderedMeasureSpace;

use super::{id_order, read_file, write_file};

pub const LORMAT_MAGIC: &[u8; 8] = b"LORMAT01";
const HEADER: usize = 16;

/// `LORMAT01` bytes for an `n x n` row-major matrix. Negative zeros are
/// written as `+0.0`.
pub fn write_lormat(n: usize, data: &[f64]) -> Result<Vec<u8>> {
    if data.len() != n * n {
        return Err(Error::ShapeMismatch(format!("{} entries for a {n} x {n} matrix", data.len())));
    }
    let n32 = u32::try_from(n).map_err(|_| Error::InvalidArgument("matrix too large for LORMAT01".into()))?;
    let mut out = Vec::with_capacity(HEADER + 8 * data.len());
    out.extend_from_slice(LORMAT_MAGIC);
    out.extend_from_slice(&n32.to_le_bytes());
    out.extend_from_slice(&[0; 4]);
    for x in data {
        out.extend_from_slice(&(x + 0.0).to_le_bytes());
    }
    Ok(out)
}

/// Parses `LORMAT01` bytes into `(n, row-major data)`.
pub fn read_lormat(bytes: &[u8]) -> Result<(usize, Vec<f64>)> {
    if bytes.len() < HEADER || &bytes[..8] != LORMAT_MAGIC {
        return Err(Error::Format("missing LORMAT01 magic".into()));
    }
    let n = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
    if bytes[12..16] != [0; 4] {
        return Err(Error::Format("LORMAT01 reserved bytes must be zero".into()));
    }
    let body = &bytes[HEADER..];
    if body.len() != 8 * n * n {
        return Err(Error::Format(format!("LORMAT01 body has {} bytes, expected {}", body.len(), 8 * n * n)));
    }
    Ok((n, body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect()))
}

/// Writes `sigma` with rows and columns in ascending point-id order.
pub fn write_sigma_lormat(space: &OrderedMeasureSpace, sigma: &SigmaMatrix, path: &Path) -> Result<()> {
    if sigma.len() != space.len() {
        return Err(Error::ShapeMismatch("sigma and space differ in size".into()));
    }
    let order = id_order(space.ids());
    let data: Vec<f64> = order.iter().flat_map(|&i| order.iter().map(move |&j| sigma.get(i, j))).collect();
    write_file(path, &write_lormat(space.len(), &data)?)
}

/// Writes a distance matrix with rows and columns in ascending point-id order.
pub fn write_distance_lormat(space: &OrderedMeasureSpace, d: &DistanceMatrix, path: &Path) -> Result<()> {
    if d.len() != space.len() {
        return Err(Error::ShapeMismatch("distance matrix and space differ in size".into()));
    }
    let order = id_order(space.ids());
    let data: Vec<f64> = order.iter().flat_map(|&i| order.iter().map(move |&j| d.get(i, j))).collect();
    write_file(path, &write_lormat(space.len(), &data)?)
}

/// Reads a matrix written by [`write_sigma_lormat`] back into the index order
/// of `space`.
pub fn read_sigma_lormat(space: &OrderedMeasureSpace, path: &Path, source: SigmaSource) -> Result<SigmaMatrix> {
    let (n, data) = read_lormat(&read_file(path)?)?;
    if n != space.len() {
        return Err(Error::ShapeMismatch(format!("matrix has {n} rows, space has {} points", space.len())));
    }
    let order = id_order(space.ids());
    let mut pos = vec![0; n];
    for (k, &i) in order.iter().enumerate() {
        pos[i] = k;
    }
    let dense = (0..n * n).map(|k| data[pos[k / n] * n + pos[k % n]]).collect();
    SigmaMatrix::from_dense(n, dense, source)
}
