//! Readers and writers for the flat binary vector formats.
//!
//! Every file starts with two little-endian `u32` values, `count` and `dim`,
//! followed by `count * dim` elements in row-major order:
//!
//! | extension | element |
//! |-----------|---------|
//! | `.fbin`   | `f32`   |
//! | `.u8bin`  | `u8`    |
//! | `.ibin`   | `u32`   |
//!
//! A ground-truth file is an id block (`.ibin` layout) immediately followed
//! by a distance block (`.fbin` layout) with the same header.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::metric::Metric;
use crate::truth::GroundTruth;
use crate::vectors::VectorSet;

const HEADER: u64 = 8;

struct Block {
    count: usize,
    dim: usize,
    payload: Vec<u8>,
}

fn read_block(reader: &mut impl Read, path: &Path, elem: u64, remaining: u64) -> Result<Block> {
    let mut header = [0u8; 8];
    if remaining < HEADER {
        return Err(Error::Truncated {
            path: path.to_owned(),
            expected: HEADER,
            found: remaining,
        });
    }
    reader.read_exact(&mut header)?;
    let count = u64::from(u32::from_le_bytes(header[0..4].try_into().unwrap()));
    let dim = u64::from(u32::from_le_bytes(header[4..8].try_into().unwrap()));
    let bytes = count
        .checked_mul(dim)
        .and_then(|x| x.checked_mul(elem))
        .filter(|&b| usize::try_from(b).is_ok())
        .ok_or_else(|| Error::HeaderOverflow {
            path: path.to_owned(),
            count,
            dim,
        })?;
    if remaining - HEADER < bytes {
        return Err(Error::Truncated {
            path: path.to_owned(),
            expected: HEADER + bytes,
            found: remaining,
        });
    }
    let mut payload = vec![0u8; bytes as usize];
    reader.read_exact(&mut payload)?;
    Ok(Block {
        count: count as usize,
        dim: dim as usize,
        payload,
    })
}

fn write_header(w: &mut impl Write, count: usize, dim: usize) -> Result<()> {
    let c = u32::try_from(count).map_err(|_| crate::error::invalid("count exceeds u32"))?;
    let d = u32::try_from(dim).map_err(|_| crate::error::invalid("dim exceeds u32"))?;
    w.write_all(&c.to_le_bytes())?;
    w.write_all(&d.to_le_bytes())?;
    Ok(())
}

fn open(path: &Path) -> Result<(BufReader<File>, u64)> {
    let f = File::open(path)?;
    let len = f.metadata()?.len();
    Ok((BufReader::new(f), len))
}

fn to_f32s(bytes: &[u8]) -> Vec<f32> {
    bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect()
}

fn to_u32s(bytes: &[u8]) -> Vec<u32> {
    bytes
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect()
}

fn vector_set(block: Block, data: Vec<f32>, metric: Metric) -> Result<VectorSet> {
    VectorSet::new(block.dim, metric, data)
}

/// Reads an `.fbin` file. Cosine sets are normalised on load.
pub fn read_fbin(path: impl AsRef<Path>, metric: Metric) -> Result<VectorSet> {
    let path = path.as_ref();
    let (mut r, len) = open(path)?;
    let block = read_block(&mut r, path, 4, len)?;
    let data = to_f32s(&block.payload);
    vector_set(block, data, metric)
}

pub fn write_fbin(path: impl AsRef<Path>, set: &VectorSet) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_header(&mut w, set.len(), set.dim())?;
    for x in set.as_slice() {
        w.write_all(&x.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a `.u8bin` file, widening every byte to `f32`.
pub fn read_u8bin(path: impl AsRef<Path>, metric: Metric) -> Result<VectorSet> {
    let path = path.as_ref();
    let (mut r, len) = open(path)?;
    let block = read_block(&mut r, path, 1, len)?;
    let data = block.payload.iter().map(|&b| f32::from(b)).collect();
    vector_set(block, data, metric)
}

/// Reads an `.ibin` file as `(rows, dim, values)`.
pub fn read_ibin(path: impl AsRef<Path>) -> Result<(usize, usize, Vec<u32>)> {
    let path = path.as_ref();
    let (mut r, len) = open(path)?;
    let block = read_block(&mut r, path, 4, len)?;
    let values = to_u32s(&block.payload);
    Ok((block.count, block.dim, values))
}

pub fn write_ibin(path: impl AsRef<Path>, rows: usize, dim: usize, values: &[u32]) -> Result<()> {
    if rows * dim != values.len() {
        return Err(crate::error::invalid("ibin shape does not match values"));
    }
    let mut w = BufWriter::new(File::create(path)?);
    write_header(&mut w, rows, dim)?;
    for x in values {
        w.write_all(&x.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Loads vectors by extension: `.u8bin` is widened, anything else is `f32`.
pub fn read_vectors(path: impl AsRef<Path>, metric: Metric) -> Result<VectorSet> {
    let path = path.as_ref();
    match path.extension().and_then(|e| e.to_str()) {
        Some("u8bin") => read_u8bin(path, metric),
        _ => read_fbin(path, metric),
    }
}

pub fn read_gt(path: impl AsRef<Path>) -> Result<GroundTruth> {
    let path = path.as_ref();
    let (mut r, len) = open(path)?;
    let ids = read_block(&mut r, path, 4, len)?;
    let used = HEADER + ids.payload.len() as u64;
    let dists = read_block(&mut r, path, 4, len - used)?;
    if ids.count != dists.count || ids.dim != dists.dim {
        return Err(Error::Corrupt(format!(
            "ground truth blocks disagree: {}x{} vs {}x{}",
            ids.count, ids.dim, dists.count, dists.dim
        )));
    }
    GroundTruth::new(ids.dim, to_u32s(&ids.payload), to_f32s(&dists.payload))
}

pub fn write_gt(path: impl AsRef<Path>, gt: &GroundTruth) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_header(&mut w, gt.len(), gt.k())?;
    for x in gt.all_ids() {
        w.write_all(&x.to_le_bytes())?;
    }
    write_header(&mut w, gt.len(), gt.k())?;
    for x in gt.all_dists() {
        w.write_all(&x.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}
