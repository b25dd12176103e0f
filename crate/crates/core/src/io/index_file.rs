//! The `ROAR` index file.
//!
//! All integers are little-endian.
//!
//! ```text
//! magic "ROAR" | version u32 | metric u8 | dim u32 | N u64 | medoid u64
//! nq u32 | M u32 | L u32
//! offsets (N + 1) x u64 | neighbor ids u32...
//! tombstone bitmap ceil(N / 8) bytes, bit i of byte i / 8 (LSB first)
//! bipartite flag u8
//! [ queries u64
//!   query->base offsets (queries + 1) x u64 | base ids u32...
//!   base->query offsets (N + 1) x u64 | query ids u32... ]
//! ```

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, BuildParams, RoarIndex};
use crate::metric::Metric;

pub const MAGIC: [u8; 4] = *b"ROAR";
pub const VERSION: u32 = 1;

/// Writes `index` and, when given, the bipartite graph to `path`.
pub fn save_index(
    path: impl AsRef<Path>,
    index: &RoarIndex,
    bipartite: Option<&BipartiteGraph>,
) -> Result<()> {
    let bytes = encode_index(index, bipartite)?;
    fs::write(path, bytes)?;
    Ok(())
}

/// Reads an index file written by [`save_index`].
pub fn load_index(path: impl AsRef<Path>) -> Result<(RoarIndex, Option<BipartiteGraph>)> {
    decode_index(&fs::read(path)?)
}

pub fn encode_index(index: &RoarIndex, bipartite: Option<&BipartiteGraph>) -> Result<Vec<u8>> {
    index.validate()?;
    let n = index.len();
    let mut out = Vec::with_capacity(64 + 8 * (n + 1) + 4 * index.edge_count());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(index.metric.code());
    let dim = u32::try_from(index.dim).map_err(|_| crate::error::invalid("dim exceeds u32"))?;
    out.extend_from_slice(&dim.to_le_bytes());
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&u64::from(index.medoid).to_le_bytes());
    for p in [index.params.nq, index.params.max_degree, index.params.search_l] {
        out.extend_from_slice(&p.to_le_bytes());
    }
    put_csr(&mut out, &index.adjacency);
    let mut bitmap = vec![0u8; n.div_ceil(8)];
    for (i, &dead) in index.tombstones.iter().enumerate() {
        if dead {
            bitmap[i / 8] |= 1 << (i % 8);
        }
    }
    out.extend_from_slice(&bitmap);
    match bipartite {
        None => out.push(0),
        Some(b) => {
            b.validate()?;
            if b.base_count() != n {
                return Err(crate::error::invalid(format!(
                    "bipartite graph covers {} base nodes, index has {n}",
                    b.base_count()
                )));
            }
            out.push(1);
            out.extend_from_slice(&(b.query_count() as u64).to_le_bytes());
            put_csr(&mut out, &b.query_out);
            put_csr(&mut out, &b.base_out);
        }
    }
    Ok(out)
}

pub fn decode_index(bytes: &[u8]) -> Result<(RoarIndex, Option<BipartiteGraph>)> {
    let mut r = Cursor { bytes, pos: 0 };
    let magic: [u8; 4] = r.take(4)?.try_into().unwrap();
    if magic != MAGIC {
        return Err(Error::BadMagic(magic));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let code = r.u8()?;
    let metric = Metric::from_code(code).ok_or_else(|| Error::Corrupt(format!("unknown metric code {code}")))?;
    let dim = r.u32()? as usize;
    let n64 = r.u64()?;
    let n = usize::try_from(n64)
        .ok()
        .filter(|&n| n <= u32::MAX as usize)
        .ok_or_else(|| Error::Corrupt(format!("node count {n64} too large")))?;
    let medoid = r.u64()?;
    if (n > 0 && medoid >= n64) || (n == 0 && medoid != 0) {
        return Err(Error::IdOutOfRange { id: medoid, bound: n64 });
    }
    let params = BuildParams {
        nq: r.u32()?,
        max_degree: r.u32()?,
        search_l: r.u32()?,
    };
    let adjacency = r.csr(n, n64)?;
    let bitmap = r.take(n.div_ceil(8))?;
    let tombstones = (0..n).map(|i| bitmap[i / 8] >> (i % 8) & 1 == 1).collect();
    let bipartite = match r.u8()? {
        0 => None,
        1 => {
            let q64 = r.u64()?;
            let q = usize::try_from(q64)
                .ok()
                .filter(|&q| q <= u32::MAX as usize)
                .ok_or_else(|| Error::Corrupt(format!("query count {q64} too large")))?;
            let query_out = r.csr(q, n64)?;
            let base_out = r.csr(n, q64)?;
            Some(BipartiteGraph::from_parts(query_out, base_out)?)
        }
        f => return Err(Error::Corrupt(format!("bad bipartite flag {f}"))),
    };
    if r.pos != bytes.len() {
        return Err(Error::Corrupt(format!(
            "{} trailing bytes",
            bytes.len() - r.pos
        )));
    }
    let index = RoarIndex::from_parts(metric, dim, adjacency, medoid as u32, params, tombstones)?;
    Ok((index, bipartite))
}

fn put_csr(out: &mut Vec<u8>, lists: &[Vec<u32>]) {
    let mut offset = 0u64;
    out.extend_from_slice(&offset.to_le_bytes());
    for l in lists {
        offset += l.len() as u64;
        out.extend_from_slice(&offset.to_le_bytes());
    }
    for l in lists {
        for &v in l {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(len)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Corrupt(format!("unexpected end of file at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    /// Reads `rows` lists whose entries must be below `bound`.
    fn csr(&mut self, rows: usize, bound: u64) -> Result<Vec<Vec<u32>>> {
        let raw = self.take(rows.checked_add(1).and_then(|r| r.checked_mul(8)).ok_or_else(|| {
            Error::Corrupt("offset table too large".into())
        })?)?;
        let offsets: Vec<u64> = raw
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        if offsets[0] != 0 || offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Corrupt("offsets are not monotone from zero".into()));
        }
        let total = usize::try_from(offsets[rows])
            .ok()
            .and_then(|t| t.checked_mul(4))
            .ok_or_else(|| Error::Corrupt("edge count too large".into()))?;
        let ids = self.take(total)?;
        let mut lists = Vec::with_capacity(rows);
        for w in offsets.windows(2) {
            let (a, b) = (w[0] as usize * 4, w[1] as usize * 4);
            let list: Vec<u32> = ids[a..b]
                .chunks_exact(4)
                .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
                .collect();
            if let Some(&bad) = list.iter().find(|&&v| u64::from(v) >= bound) {
                return Err(Error::IdOutOfRange {
                    id: u64::from(bad),
                    bound,
                });
            }
            lists.push(list);
        }
        Ok(lists)
    }
}
