//! Bit-exact binary snapshot format "FLD1".
//!
//! Layout, all little-endian:
//!
//! | offset | size | content                          |
//! |--------|------|----------------------------------|
//! | 0      | 4    | magic ASCII `FLD1`               |
//! | 4      | 4    | u32 version (= 1)                |
//! | 8      | 4    | u32 dim (2 or 3)                 |
//! | 12     | 4    | u32 N (points per axis)          |
//! | 16     | 4    | u32 ncomp                        |
//! | 20     | 8    | f64 time                         |
//! | 28     | ...  | ncomp * N^dim f64 samples        |
//!
//! Samples are component-major, last spatial axis fastest. One snapshot
//! per file; pipeline files are named `<prefix>_t<index>.fld`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridField};

const MAGIC: [u8; 4] = *b"FLD1";
const VERSION: u32 = 1;
const HEADER_LEN: u64 = 28;

/// Write a field as one FLD1 file.
pub fn write_snapshot(f: &GridField, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(f.grid().dim() as u32).to_le_bytes())?;
    w.write_all(&(f.grid().n() as u32).to_le_bytes())?;
    w.write_all(&(f.ncomp() as u32).to_le_bytes())?;
    w.write_all(&f.time().to_le_bytes())?;
    for v in f.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Read one FLD1 file back into a field.
pub fn read_snapshot(path: impl AsRef<Path>) -> Result<GridField> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    read_exact_at(&mut r, &mut magic, 0)?;
    if magic != MAGIC {
        return Err(format_err(0, format!("bad magic {:?}", magic)));
    }
    let version = read_u32(&mut r, 4)?;
    if version != VERSION {
        return Err(format_err(4, format!("unsupported version {version}")));
    }
    let dim = read_u32(&mut r, 8)? as usize;
    if dim != 2 && dim != 3 {
        return Err(format_err(8, format!("dimension must be 2 or 3, got {dim}")));
    }
    let n = read_u32(&mut r, 12)? as usize;
    let grid = Grid::new(dim, n).map_err(|e| format_err(12, e.to_string()))?;
    let ncomp = read_u32(&mut r, 16)? as usize;
    if ncomp == 0 {
        return Err(format_err(16, "ncomp must be positive".into()));
    }
    let mut time_bytes = [0u8; 8];
    read_exact_at(&mut r, &mut time_bytes, 20)?;
    let time = f64::from_le_bytes(time_bytes);

    let count = ncomp
        .checked_mul(grid.points())
        .ok_or_else(|| format_err(16, "payload size overflows".into()))?;
    let mut data = Vec::with_capacity(count);
    let mut sample = [0u8; 8];
    for i in 0..count {
        let offset = HEADER_LEN + 8 * i as u64;
        read_exact_at(&mut r, &mut sample, offset)?;
        let v = f64::from_le_bytes(sample);
        if !v.is_finite() {
            return Err(format_err(offset, format!("non-finite sample {v}")));
        }
        data.push(v);
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(format_err(
            HEADER_LEN + 8 * count as u64,
            "trailing bytes after payload".into(),
        ));
    }
    GridField::from_data(grid, ncomp, time, data)
}

/// Snapshot file name for `<prefix>_t<index>.fld`.
pub fn snapshot_name(prefix: &str, index: usize) -> String {
    format!("{prefix}_t{index:06}.fld")
}

fn format_err(offset: u64, reason: String) -> Error {
    Error::Format { offset, reason }
}

fn read_u32(r: &mut impl Read, offset: u64) -> Result<u32> {
    let mut buf = [0u8; 4];
    read_exact_at(r, &mut buf, offset)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_exact_at(r: &mut impl Read, buf: &mut [u8], offset: u64) -> Result<()> {
    r.read_exact(buf)
        .map_err(|_| format_err(offset, "truncated payload".into()))
}
