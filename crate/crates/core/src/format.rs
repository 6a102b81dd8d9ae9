//! On-disk formats.
//!
//! A single table (`AMR1` record):
//!
//! ```text
//! "AMR1"              4 bytes
//! n_cols              u32 little-endian
//! n_rows              u32 little-endian
//! cells               row-major, row 0 column 0 first, 8 cells per byte,
//!                     most significant bit first, last byte zero-padded
//! ```
//!
//! A memory bundle (`AMB1`):
//!
//! ```text
//! "AMB1"              4 bytes
//! manifest length     u32 little-endian
//! manifest            UTF-8 JSON: {"labels": [..], "n_cols": N, "n_rows": M,
//!                                  "quantizer": {..} | null}
//! registers           one AMR1 record per label, in label order
//! ```

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::codec::QuantizerConfig;
use crate::error::{Error, Result};
use crate::memory::AssociativeMemory;
use crate::table::RelationTable;

pub const TABLE_MAGIC: &[u8; 4] = b"AMR1";
pub const BUNDLE_MAGIC: &[u8; 4] = b"AMB1";

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn dim_u32(v: usize) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::Format(format!("dimension {v} exceeds u32")))
}

fn read_magic(r: &mut impl Read, expected: &[u8; 4]) -> Result<()> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != expected {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&magic),
            String::from_utf8_lossy(expected)
        )));
    }
    Ok(())
}

pub fn write_table(w: &mut impl Write, t: &RelationTable) -> Result<()> {
    w.write_all(TABLE_MAGIC)?;
    w.write_all(&dim_u32(t.n_cols())?.to_le_bytes())?;
    w.write_all(&dim_u32(t.n_rows())?.to_le_bytes())?;
    let n = t.n_cols() * t.n_rows();
    let mut packed = vec![0u8; n.div_ceil(8)];
    for j in 0..t.n_rows() {
        for i in 0..t.n_cols() {
            if t.cell(i, j) {
                let k = j * t.n_cols() + i;
                packed[k / 8] |= 0x80 >> (k % 8);
            }
        }
    }
    w.write_all(&packed)?;
    Ok(())
}

pub fn read_table(r: &mut impl Read) -> Result<RelationTable> {
    read_magic(r, TABLE_MAGIC)?;
    let n_cols = read_u32(r)? as usize;
    let n_rows = read_u32(r)? as usize;
    let n = n_cols
        .checked_mul(n_rows)
        .ok_or_else(|| Error::Format("table too large".into()))?;
    let mut t = RelationTable::new(n_cols, n_rows)?;
    let mut packed = vec![0u8; n.div_ceil(8)];
    r.read_exact(&mut packed)?;
    for (k, byte) in packed.iter().enumerate() {
        for b in 0..8 {
            if byte & (0x80 >> b) != 0 {
                let idx = k * 8 + b;
                if idx >= n {
                    return Err(Error::Format("nonzero padding bits".into()));
                }
                t.set(idx % n_cols, idx / n_cols, true)?;
            }
        }
    }
    Ok(t)
}

pub fn table_to_bytes(t: &RelationTable) -> Vec<u8> {
    let mut out = Vec::new();
    write_table(&mut out, t).expect("writing to a Vec cannot fail");
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Manifest {
    labels: Vec<String>,
    n_cols: usize,
    n_rows: usize,
    quantizer: Option<QuantizerConfig>,
}

/// A memory together with the quantizer that produced its cues, if known.
#[derive(Clone, Debug, PartialEq)]
pub struct Bundle {
    pub memory: AssociativeMemory,
    pub quantizer: Option<QuantizerConfig>,
}

impl Bundle {
    pub fn new(memory: AssociativeMemory, quantizer: Option<QuantizerConfig>) -> Self {
        Self { memory, quantizer }
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        let (n_cols, n_rows) = self.memory.shape();
        let manifest = Manifest {
            labels: self.memory.labels().to_vec(),
            n_cols,
            n_rows,
            quantizer: self.quantizer,
        };
        let json = serde_json::to_vec(&manifest)?;
        w.write_all(BUNDLE_MAGIC)?;
        w.write_all(&dim_u32(json.len())?.to_le_bytes())?;
        w.write_all(&json)?;
        for reg in self.memory.registers() {
            write_table(w, reg)?;
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        read_magic(r, BUNDLE_MAGIC)?;
        let len = read_u32(r)? as usize;
        let mut json = vec![0u8; len];
        r.read_exact(&mut json)?;
        let manifest: Manifest = serde_json::from_slice(&json)?;
        if let Some(q) = &manifest.quantizer {
            if q.n_cols() != manifest.n_cols || q.levels != manifest.n_rows {
                return Err(Error::Format(format!(
                    "quantizer {}x{} with {} levels does not match {}x{} registers",
                    q.grid_rows, q.grid_cols, q.levels, manifest.n_cols, manifest.n_rows
                )));
            }
        }
        let mut registers = Vec::with_capacity(manifest.labels.len());
        for label in &manifest.labels {
            let t = read_table(r)?;
            if t.shape() != (manifest.n_cols, manifest.n_rows) {
                return Err(Error::Format(format!(
                    "register {label:?} is {}x{}, manifest says {}x{}",
                    t.n_cols(),
                    t.n_rows(),
                    manifest.n_cols,
                    manifest.n_rows
                )));
            }
            registers.push(t);
        }
        let mut trailing = [0u8; 1];
        if r.read(&mut trailing)? != 0 {
            return Err(Error::Format("trailing bytes after last register".into()));
        }
        let memory = AssociativeMemory::from_parts(
            manifest.labels,
            registers,
            manifest.n_cols,
            manifest.n_rows,
        )?;
        Ok(Self {
            memory,
            quantizer: manifest.quantizer,
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn from_bytes(mut bytes: &[u8]) -> Result<Self> {
        Self::read_from(&mut bytes)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}
