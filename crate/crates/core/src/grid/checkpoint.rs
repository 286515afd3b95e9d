//! Binary amplitude snapshots.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic   8 bytes  "MGRAVCK1"
//! dims    u32
//! points  u32
//! extent  f64
//! step    u64
//! dt      f64
//! amplitudes  pointsᵈ × (re f64, im f64), row-major
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{Grid, C64};
use crate::error::{io_err, Error, Result};

const MAGIC: &[u8; 8] = b"MGRAVCK1";
const HEADER: usize = 8 + 4 + 4 + 8 + 8 + 8;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub grid: Grid,
    pub step: u64,
    pub dt: f64,
    pub amplitudes: Vec<C64>,
}

/// Writes to a sibling temporary file and renames it into place.
pub fn write_checkpoint(path: &Path, ck: &Checkpoint) -> Result<()> {
    if ck.amplitudes.len() != ck.grid.len() {
        return Err(Error::Checkpoint(format!(
            "{} amplitudes for a grid of {}",
            ck.amplitudes.len(),
            ck.grid.len()
        )));
    }
    let mut buf = Vec::with_capacity(HEADER + 16 * ck.amplitudes.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(ck.grid.dims() as u32).to_le_bytes());
    buf.extend_from_slice(&(ck.grid.points() as u32).to_le_bytes());
    buf.extend_from_slice(&ck.grid.extent().to_le_bytes());
    buf.extend_from_slice(&ck.step.to_le_bytes());
    buf.extend_from_slice(&ck.dt.to_le_bytes());
    for a in &ck.amplitudes {
        buf.extend_from_slice(&a.re.to_le_bytes());
        buf.extend_from_slice(&a.im.to_le_bytes());
    }
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
    f.write_all(&buf).map_err(io_err(&tmp))?;
    f.sync_all().map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    if bytes.len() < HEADER || &bytes[..8] != MAGIC {
        return Err(Error::Checkpoint(format!("{} is not a checkpoint", path.display())));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let grid = Grid::new(u32_at(8) as usize, u32_at(12) as usize, f64_at(16))
        .map_err(|e| Error::Checkpoint(format!("bad header: {e}")))?;
    let step = u64_at(24);
    let dt = f64_at(32);
    let expect = HEADER + 16 * grid.len();
    if bytes.len() != expect {
        return Err(Error::Checkpoint(format!("expected {expect} bytes, found {}", bytes.len())));
    }
    let amplitudes = bytes[HEADER..]
        .chunks_exact(16)
        .map(|c| {
            C64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    Ok(Checkpoint { grid, step, dt, amplitudes })
}
