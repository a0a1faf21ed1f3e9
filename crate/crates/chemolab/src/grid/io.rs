//! Field serialization: deterministic CSV and an exact binary dump.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use super::{Field, Grid, GridError};

/// Renders a float with 17 significant digits, enough to round-trip any f64.
/// Negative zero is normalized so reruns produce byte-identical files.
pub fn fmt_float(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{:.16e}", x)
}

/// Writes `i,value` (1D) or `i,j,value` (2D) rows with a header line.
pub fn write_field_csv(f: &Field, w: &mut impl Write) -> std::io::Result<()> {
    let g = f.grid();
    let (nx, ny) = g.cells();
    if g.dims() == 1 {
        writeln!(w, "i,value")?;
        for i in 0..nx {
            writeln!(w, "{},{}", i, fmt_float(f.values()[i]))?;
        }
    } else {
        writeln!(w, "i,j,value")?;
        for j in 0..ny {
            for i in 0..nx {
                writeln!(w, "{},{},{}", i, j, fmt_float(f.values()[g.idx(i, j)]))?;
            }
        }
    }
    Ok(())
}

pub fn write_field_csv_path(f: &Field, path: &Path) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_field_csv(f, &mut w)?;
    w.flush()
}

/// Binary dump layout, all little-endian:
/// `[dims: u64][nx: u64][ny: u64]*[lx: f64][ly: f64]*[values: f64 row-major]`
/// where the starred fields appear only for 2D grids.
pub fn write_field_binary(f: &Field, w: &mut impl Write) -> std::io::Result<()> {
    let g = f.grid();
    let (nx, ny) = g.cells();
    let (lx, ly) = g.extents();
    w.write_all(&(g.dims() as u64).to_le_bytes())?;
    w.write_all(&(nx as u64).to_le_bytes())?;
    if g.dims() == 2 {
        w.write_all(&(ny as u64).to_le_bytes())?;
    }
    w.write_all(&lx.to_le_bytes())?;
    if g.dims() == 2 {
        w.write_all(&ly.to_le_bytes())?;
    }
    for &x in f.values() {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_field_binary_path(f: &Field, path: &Path) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_field_binary(f, &mut w)?;
    w.flush()
}

/// Reads a binary dump back into a field, validating the header and that no
/// trailing bytes follow the payload.
pub fn read_field_binary(r: &mut impl Read) -> Result<Field, GridError> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)
        .map_err(|e| GridError::BadDump(format!("read failed: {e}")))?;
    let mut off = 0usize;
    let take_u64 = |buf: &[u8], off: &mut usize| -> Result<u64, GridError> {
        let end = *off + 8;
        if end > buf.len() {
            return Err(GridError::BadDump("truncated header".into()));
        }
        let v = u64::from_le_bytes(buf[*off..end].try_into().expect("8 bytes"));
        *off = end;
        Ok(v)
    };
    let dims = take_u64(&buf, &mut off)?;
    if dims != 1 && dims != 2 {
        return Err(GridError::BadDump(format!("dims must be 1 or 2, got {dims}")));
    }
    let nx = take_u64(&buf, &mut off)? as usize;
    let ny = if dims == 2 { take_u64(&buf, &mut off)? as usize } else { 1 };

    let take_f64 = |buf: &[u8], off: &mut usize| -> Result<f64, GridError> {
        let end = *off + 8;
        if end > buf.len() {
            return Err(GridError::BadDump("truncated header".into()));
        }
        let v = f64::from_le_bytes(buf[*off..end].try_into().expect("8 bytes"));
        *off = end;
        Ok(v)
    };
    let lx = take_f64(&buf, &mut off)?;
    let ly = if dims == 2 { take_f64(&buf, &mut off)? } else { 1.0 };

    let grid = if dims == 1 {
        Grid::line(lx, nx)?
    } else {
        Grid::rect((lx, ly), (nx, ny))?
    };

    let want = nx
        .checked_mul(ny)
        .and_then(|n| n.checked_mul(8))
        .ok_or_else(|| GridError::BadDump("cell count overflow".into()))?;
    let have = buf.len() - off;
    if have != want {
        return Err(GridError::BadDump(format!(
            "payload holds {have} bytes, header promises {want}"
        )));
    }
    let values: Vec<f64> = buf[off..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Field::from_values(grid, values)
}

pub fn read_field_binary_path(path: &Path) -> Result<Field, GridError> {
    let mut f = File::open(path).map_err(|e| GridError::BadDump(format!("{}: {e}", path.display())))?;
    read_field_binary(&mut f)
}
