//! Mask archive container: a JSON index followed by per-class run-length
//! payloads.
//!
//! Layout: `b"MSKA"`, version byte, three zero bytes, little-endian `u32`
//! index length, the UTF-8 JSON index, then the payload section. Each class
//! payload is a sequence of LEB128 run lengths over the row-major mask,
//! alternating background/foreground and starting with background.

use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maskset::{MaskEntry, MaskSet2D, View};

const MAGIC: &[u8; 4] = b"MSKA";
const VERSION: u8 = 1;
const PREAMBLE: usize = 12;

pub const EXTENSION: &str = "mska";

#[derive(Debug, Serialize, Deserialize)]
struct Index {
    view: View,
    rows: usize,
    cols: usize,
    #[serde(default)]
    source_id: String,
    classes: Vec<IndexEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct IndexEntry {
    name: String,
    derived: bool,
    area: usize,
    offset: usize,
    len: usize,
}

/// Run lengths of a row-major mask, starting with a (possibly empty)
/// background run.
pub fn rle_runs(mask: &Array2<bool>) -> Vec<u32> {
    let mut runs = Vec::new();
    let mut current = false;
    let mut n = 0u32;
    for &v in mask.iter() {
        if v != current {
            runs.push(n);
            current = v;
            n = 0;
        }
        n += 1;
    }
    runs.push(n);
    runs
}

pub fn rle_decode(runs: &[u32], dims: (usize, usize)) -> Result<Array2<bool>> {
    let total: u64 = runs.iter().map(|&r| r as u64).sum();
    if total != (dims.0 * dims.1) as u64 {
        return Err(Error::Format {
            offset: 0,
            message: format!("run lengths cover {total} pixels, mask has {}", dims.0 * dims.1),
        });
    }
    let mut data = Vec::with_capacity(dims.0 * dims.1);
    for (i, &r) in runs.iter().enumerate() {
        data.extend(std::iter::repeat_n(i % 2 == 1, r as usize));
    }
    Ok(Array2::from_shape_vec(dims, data).expect("length checked"))
}

fn write_varint(mut v: u32, out: &mut Vec<u8>) {
    loop {
        let byte = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

fn read_varints(bytes: &[u8], base: usize) -> Result<Vec<u32>> {
    let mut out = Vec::new();
    let mut v = 0u32;
    let mut shift = 0;
    for (i, &b) in bytes.iter().enumerate() {
        if shift > 28 {
            return Err(Error::Format {
                offset: base + i,
                message: "varint overflows u32".into(),
            });
        }
        v |= ((b & 0x7f) as u32) << shift;
        if b & 0x80 == 0 {
            out.push(v);
            v = 0;
            shift = 0;
        } else {
            shift += 7;
        }
    }
    if shift != 0 {
        return Err(Error::Format {
            offset: base + bytes.len(),
            message: "unterminated varint".into(),
        });
    }
    Ok(out)
}

pub fn encode(set: &MaskSet2D) -> Result<Vec<u8>> {
    let mut payload = Vec::new();
    let mut classes = Vec::with_capacity(set.len());
    for (name, entry) in set.iter() {
        let offset = payload.len();
        for r in rle_runs(&entry.mask) {
            write_varint(r, &mut payload);
        }
        classes.push(IndexEntry {
            name: name.to_string(),
            derived: entry.derived,
            area: entry.mask.iter().filter(|&&b| b).count(),
            offset,
            len: payload.len() - offset,
        });
    }
    let (rows, cols) = set.dims();
    let index = serde_json::to_vec(&Index {
        view: set.view(),
        rows,
        cols,
        source_id: set.source_id().to_string(),
        classes,
    })?;
    let mut out = Vec::with_capacity(PREAMBLE + index.len() + payload.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[VERSION, 0, 0, 0]);
    out.extend_from_slice(&(index.len() as u32).to_le_bytes());
    out.extend_from_slice(&index);
    out.extend_from_slice(&payload);
    Ok(out)
}

pub fn decode(bytes: &[u8]) -> Result<MaskSet2D> {
    if bytes.len() < PREAMBLE {
        return Err(Error::Format {
            offset: bytes.len(),
            message: "archive preamble truncated".into(),
        });
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Format {
            offset: 0,
            message: "not a mask archive".into(),
        });
    }
    if bytes[4] != VERSION {
        return Err(Error::Format {
            offset: 4,
            message: format!("unsupported archive version {}", bytes[4]),
        });
    }
    let index_len = u32::from_le_bytes([bytes[8], bytes[9], bytes[10], bytes[11]]) as usize;
    let payload_start = PREAMBLE + index_len;
    if bytes.len() < payload_start {
        return Err(Error::Truncated {
            expected: payload_start,
            actual: bytes.len(),
        });
    }
    let index: Index = serde_json::from_slice(&bytes[PREAMBLE..payload_start])?;
    let payload = &bytes[payload_start..];
    let dims = (index.rows, index.cols);
    let mut set = MaskSet2D::new(index.view, dims).with_source(index.source_id);
    for c in index.classes {
        let end = c.offset + c.len;
        if end > payload.len() {
            return Err(Error::Truncated {
                expected: payload_start + end,
                actual: bytes.len(),
            });
        }
        let runs = read_varints(&payload[c.offset..end], payload_start + c.offset)?;
        let mask = rle_decode(&runs, dims)?;
        set.insert_entry(c.name, MaskEntry { mask, derived: c.derived })?;
    }
    Ok(set)
}

pub fn save(set: &MaskSet2D, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode(set)?).map_err(|e| Error::io(path, e))
}

pub fn load(path: impl AsRef<Path>) -> Result<MaskSet2D> {
    let path = path.as_ref();
    decode(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
}
