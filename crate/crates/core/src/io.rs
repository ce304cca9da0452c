//! Binary field format.
//!
//! Layout (little endian): magic `GPFIELD\0`, version `u32`, `nx u64`,
//! `ny u64`, `h f64`, origin `2 x f64`, shape tag `u8` with two `f64`
//! parameters, `nx * ny` mask bytes (row-major, `j` outer), then the interior
//! values in storage order as interleaved `re, im` `f64` pairs.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{GpError, Result};
use crate::field::Field;
use crate::grid::{Grid, Shape};

const MAGIC: &[u8; 8] = b"GPFIELD\0";
const VERSION: u32 = 1;

fn shape_code(s: Shape) -> (u8, f64, f64) {
    match s {
        Shape::Disk { radius } => (0, radius, radius),
        Shape::Rectangle { half_x, half_y } => (1, half_x, half_y),
        Shape::Ellipse { semi_x, semi_y } => (2, semi_x, semi_y),
    }
}

fn shape_from_code(tag: u8, a: f64, b: f64) -> Result<Shape> {
    match tag {
        0 => Ok(Shape::Disk { radius: a }),
        1 => Ok(Shape::Rectangle { half_x: a, half_y: b }),
        2 => Ok(Shape::Ellipse { semi_x: a, semi_y: b }),
        t => Err(GpError::Format(format!("unknown shape tag {t}"))),
    }
}

pub fn write_field<W: Write>(mut w: W, u: &Field) -> Result<()> {
    let g = u.grid();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(g.nx() as u64).to_le_bytes())?;
    w.write_all(&(g.ny() as u64).to_le_bytes())?;
    w.write_all(&g.h().to_le_bytes())?;
    for o in g.origin() {
        w.write_all(&o.to_le_bytes())?;
    }
    let (tag, a, b) = shape_code(g.shape());
    w.write_all(&[tag])?;
    w.write_all(&a.to_le_bytes())?;
    w.write_all(&b.to_le_bytes())?;
    let mask: Vec<u8> = g.mask().iter().map(|&m| m as u8).collect();
    w.write_all(&mask)?;
    for v in u.values() {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn take<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)?;
    Ok(b)
}

fn f64_at<R: Read>(r: &mut R) -> Result<f64> {
    Ok(f64::from_le_bytes(take::<8, _>(r)?))
}

/// Reads a field and rebuilds its grid from the header. The stored mask must
/// match the rebuilt one.
pub fn read_field<R: Read>(mut r: R) -> Result<Field> {
    if &take::<8, _>(&mut r)? != MAGIC {
        return Err(GpError::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(take::<4, _>(&mut r)?);
    if version != VERSION {
        return Err(GpError::Format(format!("unsupported version {version}")));
    }
    let nx = u64::from_le_bytes(take::<8, _>(&mut r)?) as usize;
    let ny = u64::from_le_bytes(take::<8, _>(&mut r)?) as usize;
    if nx == 0 || ny == 0 || nx.saturating_mul(ny) > 1 << 32 {
        return Err(GpError::Format(format!("implausible lattice {nx} x {ny}")));
    }
    let h = f64_at(&mut r)?;
    let origin = [f64_at(&mut r)?, f64_at(&mut r)?];
    let tag = take::<1, _>(&mut r)?[0];
    let (a, b) = (f64_at(&mut r)?, f64_at(&mut r)?);
    let shape = shape_from_code(tag, a, b)?;
    shape.validate()?;
    let mut mask = vec![0u8; nx * ny];
    r.read_exact(&mut mask)?;
    let grid = Grid::assemble(shape, nx, ny, h, origin)?;
    if grid.mask().iter().zip(&mask).any(|(&m, &s)| m != (s != 0)) {
        return Err(GpError::Format("stored mask does not match the rebuilt grid".into()));
    }
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        values.push(Complex64::new(f64_at(&mut r)?, f64_at(&mut r)?));
    }
    Field::from_values(&grid, values)
}

pub fn save_field(path: &Path, u: &Field) -> Result<()> {
    write_field(BufWriter::new(File::create(path)?), u)
}

pub fn load_field(path: &Path) -> Result<Field> {
    read_field(BufReader::new(File::open(path)?))
}

/// Loads a field and checks that it lives on a grid equal to `grid`.
pub fn load_field_on(path: &Path, grid: &Arc<Grid>) -> Result<Field> {
    let f = load_field(path)?;
    if **f.grid() != **grid {
        return Err(GpError::GridMismatch);
    }
    Field::from_values(grid, f.into_values())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        for shape in [
            Shape::disk(1.3),
            Shape::Rectangle {
                half_x: 2.0,
                half_y: 1.0,
            },
            Shape::Ellipse {
                semi_x: 1.0,
                semi_y: 0.6,
            },
        ] {
            let g = Grid::build(shape, 0.07).unwrap();
            let u = Field::from_fn(&g, |x, y| Complex64::new(x.sin() + 1e-300, y.exp() / 3.0));
            let mut buf = Vec::new();
            write_field(&mut buf, &u).unwrap();
            let back = read_field(buf.as_slice()).unwrap();
            assert_eq!(**back.grid(), *g);
            assert_eq!(back.values(), u.values());
        }
    }

    #[test]
    fn corrupt_input_rejected() {
        let g = Grid::build(Shape::disk(1.0), 0.25).unwrap();
        let u = Field::zeros(&g);
        let mut buf = Vec::new();
        write_field(&mut buf, &u).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_field(bad.as_slice()), Err(GpError::Format(_))));
        assert!(read_field(&buf[..buf.len() - 3]).is_err());
        let mut flipped = buf.clone();
        let mask_start = 8 + 4 + 8 + 8 + 8 + 16 + 1 + 16;
        flipped[mask_start] ^= 1;
        assert!(matches!(read_field(flipped.as_slice()), Err(GpError::Format(_))));
    }

    #[test]
    fn grid_check_on_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.bin");
        let g = Grid::build(Shape::disk(1.0), 0.1).unwrap();
        save_field(&path, &Field::zeros(&g)).unwrap();
        assert!(load_field_on(&path, &g).is_ok());
        let other = Grid::build(Shape::disk(1.0), 0.05).unwrap();
        assert!(matches!(load_field_on(&path, &other), Err(GpError::GridMismatch)));
    }
}
