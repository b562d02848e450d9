//! Binary (`BMF1`) and CSV serialization of sampled fields.

use std::io::{Read, Write};

use super::director::Director;
use super::grid::GridSpec;
use super::sampled::Field;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const MAGIC: &[u8; 4] = b"BMF1";

/// Writes the little-endian binary layout: magic, `u32 n`, `f64 R`, then
/// `n²` row-major `(x, y, z)` triples of `f64`.
pub fn write_binary<T: Real, W: Write>(field: &Field<T>, mut out: W) -> Result<()> {
    let g = field.grid();
    let n = u32::try_from(g.n()).map_err(|_| Error::Format("grid too large for u32".into()))?;
    out.write_all(MAGIC)?;
    out.write_all(&n.to_le_bytes())?;
    out.write_all(&g.half_width.as_f64().to_le_bytes())?;
    let mut buf = Vec::with_capacity(24 * g.n());
    for j in 0..g.n() {
        buf.clear();
        for d in field.row(j) {
            for c in d.to_array() {
                buf.extend_from_slice(&c.as_f64().to_le_bytes());
            }
        }
        out.write_all(&buf)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_binary<T: Real, R: Read>(mut input: R) -> Result<Field<T>> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic).map_err(|_| Error::Format("truncated header".into()))?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic, expected BMF1".into()));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    input.read_exact(&mut b4).map_err(|_| Error::Format("truncated header".into()))?;
    let n = u32::from_le_bytes(b4) as usize;
    input.read_exact(&mut b8).map_err(|_| Error::Format("truncated header".into()))?;
    let half_width = f64::from_le_bytes(b8);
    let grid = GridSpec::new(T::lit(half_width), n)?;
    let mut values = Vec::with_capacity(grid.len());
    let mut triple = [0u8; 24];
    for _ in 0..grid.len() {
        input.read_exact(&mut triple).map_err(|_| Error::Format("truncated payload".into()))?;
        let c = |k: usize| {
            let mut b = [0u8; 8];
            b.copy_from_slice(&triple[8 * k..8 * k + 8]);
            T::lit(f64::from_le_bytes(b))
        };
        values.push(Director::from_raw(c(0), c(1), c(2)));
    }
    let mut rest = [0u8; 1];
    if input.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after payload".into()));
    }
    Field::from_values(grid, values)
}

/// CSV export with header `x,y,mx,my,mz`; values use the shortest
/// round-trip decimal representation.
pub fn write_csv<T: Real, W: Write>(field: &Field<T>, mut out: W) -> Result<()> {
    let g = field.grid();
    writeln!(out, "x,y,mx,my,mz")?;
    for j in 0..g.n() {
        for i in 0..g.n() {
            let d = field.at(i, j);
            writeln!(
                out,
                "{},{},{},{},{}",
                g.coord(i).as_f64(),
                g.coord(j).as_f64(),
                d.x.as_f64(),
                d.y.as_f64(),
                d.z.as_f64()
            )?;
        }
    }
    out.flush()?;
    Ok(())
}
