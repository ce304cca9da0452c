//! Vortex detection, phase circulation and image/CSV output.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{GpError, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::model::{tf_density, ModelParams};

type C = Complex64;

/// Default cut-off on `rho_TF / max rho_TF` below which minima are ignored.
pub const DEFAULT_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Vortex {
    pub x: f64,
    pub y: f64,
    /// Distance from the centre to the half-depth level of `rho`
    /// (a stand-in definition of the core radius).
    pub core_radius: f64,
    pub winding: i32,
}

/// Wraps an angle difference into `(-pi, pi]`.
fn wrap(d: f64) -> f64 {
    let mut d = d % (2.0 * PI);
    if d > PI {
        d -= 2.0 * PI;
    } else if d <= -PI {
        d += 2.0 * PI;
    }
    d
}

/// Winding number of the closed polygon of values.
fn loop_winding(vals: &[C]) -> Option<i32> {
    if vals.iter().any(|v| v.norm() == 0.0) {
        return None;
    }
    let total: f64 = (0..vals.len())
        .map(|i| wrap(vals[(i + 1) % vals.len()].arg() - vals[i].arg()))
        .sum();
    Some((total / (2.0 * PI)).round() as i32)
}

/// Phase circulation `(1 / 2 pi) oint d arg u` on a circle, sampled with
/// bilinear interpolation.
pub fn circulation(u: &Field, cx: f64, cy: f64, radius: f64, samples: usize) -> i32 {
    let vals: Vec<C> = (0..samples)
        .map(|s| {
            let t = 2.0 * PI * s as f64 / samples as f64;
            u.interpolate(cx + radius * t.cos(), cy + radius * t.sin())
        })
        .collect();
    loop_winding(&vals).unwrap_or(0)
}

const RING: [(i64, i64); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];

/// Vortices as maxima of `rho_TF - rho` over 3x3 lattice neighbourhoods
/// with nonzero phase winding on the surrounding 8-node ring, restricted to
/// `rho_TF > threshold * max rho_TF`.
pub fn detect_vortices(u: &Field, p: &ModelParams, threshold: f64) -> Result<Vec<Vortex>> {
    let g = u.grid().clone();
    let bg = tf_density(p, &g)?;
    let bg_max = bg.values().iter().map(|v| v.re).fold(0.0, f64::max);
    if bg_max <= 0.0 {
        return Ok(Vec::new());
    }
    let rho = u.density();
    let q: Vec<f64> = (0..g.len()).map(|k| bg.values()[k].re - rho[k]).collect();
    let idx = |i: i64, j: i64| -> Option<usize> {
        if i < 0 || j < 0 {
            None
        } else {
            g.interior_index(i as usize, j as usize)
        }
    };
    let mut out = Vec::new();
    for k in 0..g.len() {
        if bg.values()[k].re <= threshold * bg_max {
            continue;
        }
        let (i, j) = g.lattice_position(k);
        let (i, j) = (i as i64, j as i64);
        let ring: Option<Vec<usize>> = RING.iter().map(|&(di, dj)| idx(i + di, j + dj)).collect();
        let Some(ring) = ring else { continue };
        // strict maximum, ties broken by index
        let is_max = ring.iter().all(|&n| q[k] > q[n] || (q[k] == q[n] && k < n));
        if !is_max {
            continue;
        }
        let vals: Vec<C> = ring.iter().map(|&n| u.values()[n]).collect();
        let Some(winding) = loop_winding(&vals).filter(|&w| w != 0) else {
            continue;
        };
        let (x0, y0) = g.coords(k);
        let h = g.h();
        let vertex = |qm: f64, q0: f64, qp: f64| {
            let den = qm - 2.0 * q0 + qp;
            if den < 0.0 {
                (0.5 * (qm - qp) / den).clamp(-0.5, 0.5)
            } else {
                0.0
            }
        };
        let dx = vertex(q[ring[4]], q[k], q[ring[0]]);
        let dy = vertex(q[ring[6]], q[k], q[ring[2]]);
        out.push(Vortex {
            x: x0 + dx * h,
            y: y0 + dy * h,
            core_radius: core_radius(&g, &rho, bg.values()[k].re, k),
            winding,
        });
    }
    Ok(out)
}

/// Mean distance along the four lattice axes to where `rho` climbs halfway
/// from its central value to the background level.
fn core_radius(g: &Arc<Grid>, rho: &[f64], background: f64, k: usize) -> f64 {
    let level = rho[k] + 0.5 * (background - rho[k]);
    let (i0, j0) = g.lattice_position(k);
    let h = g.h();
    let mut total = 0.0;
    for (di, dj) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
        let mut prev = rho[k];
        let mut s = 1;
        let dist = loop {
            let (i, j) = (i0 as i64 + di * s, j0 as i64 + dj * s);
            let next = if i < 0 || j < 0 {
                None
            } else {
                g.interior_index(i as usize, j as usize)
            };
            let Some(n) = next else { break (s - 1) as f64 * h };
            let cur = rho[n];
            if cur >= level {
                let frac = if cur > prev { (level - prev) / (cur - prev) } else { 1.0 };
                break ((s - 1) as f64 + frac) * h;
            }
            prev = cur;
            s += 1;
        };
        total += dist;
    }
    (total / 4.0).max(0.5 * h)
}

/// Lattice image of `f(value)` with zeros outside the interior; rows run from
/// top (largest y) to bottom.
fn lattice_image(u: &Field, f: impl Fn(C) -> f64) -> (usize, usize, Vec<f64>) {
    let g = u.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let mut img = vec![0.0; nx * ny];
    for row in 0..ny {
        let j = ny - 1 - row;
        for i in 0..nx {
            if let Some(k) = g.interior_index(i, j) {
                img[row * nx + i] = f(u.values()[k]);
            }
        }
    }
    (nx, ny, img)
}

pub fn write_pgm16(path: &Path, width: usize, height: usize, pixels: &[u16]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "P5\n{width} {height}\n65535\n")?;
    for &p in pixels {
        w.write_all(&p.to_be_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_pgm16(path: &Path) -> Result<(usize, usize, Vec<u16>)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut header = Vec::new();
    let mut fields = Vec::new();
    while fields.len() < 4 {
        let mut line = String::new();
        if r.read_line(&mut line)? == 0 {
            return Err(GpError::Format("truncated PGM header".into()));
        }
        header.push(line.clone());
        fields.extend(
            line.split('#')
                .next()
                .unwrap_or("")
                .split_whitespace()
                .map(str::to_owned),
        );
    }
    if fields[0] != "P5" || fields[3] != "65535" {
        return Err(GpError::Format(format!("not a 16-bit P5 image: {header:?}")));
    }
    let parse = |s: &str| s.parse::<usize>().map_err(|e| GpError::Format(e.to_string()));
    let (w, h) = (parse(&fields[1])?, parse(&fields[2])?);
    let mut buf = vec![0u8; 2 * w * h];
    r.read_exact(&mut buf)?;
    Ok((
        w,
        h,
        buf.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect(),
    ))
}

fn quantize(v: f64, max: f64) -> u16 {
    if max <= 0.0 {
        0
    } else {
        ((v / max).clamp(0.0, 1.0) * 65535.0).round() as u16
    }
}

fn write_lattice_csv(path: &Path, u: &Field, name: &str, f: impl Fn(C) -> f64) -> Result<()> {
    let g = u.grid();
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "i,j,x,y,{name}")?;
    for (k, &v) in u.values().iter().enumerate() {
        let (i, j) = g.lattice_position(k);
        let (x, y) = g.coords(k);
        writeln!(w, "{i},{j},{x},{y},{}", f(v))?;
    }
    w.flush()?;
    Ok(())
}

/// `rho / max rho` as a 16-bit PGM at `path`, and raw `rho` as CSV next to it.
pub fn export_density(u: &Field, path: &Path) -> Result<()> {
    let (w, h, img) = lattice_image(u, |v| v.norm_sqr());
    let max = img.iter().cloned().fold(0.0, f64::max);
    let px: Vec<u16> = img.iter().map(|&v| quantize(v, max)).collect();
    write_pgm16(path, w, h, &px)?;
    write_lattice_csv(&path.with_extension("csv"), u, "density", |v| v.norm_sqr())
}

fn phase_0_2pi(v: C) -> f64 {
    v.arg().rem_euclid(2.0 * PI)
}

/// `arg u` in `[0, 2 pi)` as a 16-bit PGM, and raw phase as CSV next to it.
pub fn export_phase(u: &Field, path: &Path) -> Result<()> {
    let (w, h, img) = lattice_image(u, phase_0_2pi);
    let px: Vec<u16> = img.iter().map(|&v| quantize(v, 2.0 * PI)).collect();
    write_pgm16(path, w, h, &px)?;
    write_lattice_csv(&path.with_extension("csv"), u, "phase", phase_0_2pi)
}

/// Full-precision CSV of the field, one interior node per row.
pub fn export_field_csv(u: &Field, path: &Path) -> Result<()> {
    let g = u.grid();
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "i,j,x,y,re,im")?;
    for (k, v) in u.values().iter().enumerate() {
        let (i, j) = g.lattice_position(k);
        let (x, y) = g.coords(k);
        writeln!(w, "{i},{j},{x},{y},{},{}", v.re, v.im)?;
    }
    w.flush()?;
    Ok(())
}

pub fn import_field_csv(grid: &Arc<Grid>, path: &Path) -> Result<Field> {
    let r = BufReader::new(File::open(path)?);
    let mut values = vec![C::new(0.0, 0.0); grid.len()];
    let mut seen = vec![false; grid.len()];
    let bad = |m: String| GpError::Format(m);
    for (ln, line) in r.lines().enumerate().skip(1) {
        let line = line?;
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 {
            return Err(bad(format!("line {}: expected 6 columns", ln + 1)));
        }
        let i: usize = cols[0].parse().map_err(|e| bad(format!("line {}: {e}", ln + 1)))?;
        let j: usize = cols[1].parse().map_err(|e| bad(format!("line {}: {e}", ln + 1)))?;
        let re: f64 = cols[4].parse().map_err(|e| bad(format!("line {}: {e}", ln + 1)))?;
        let im: f64 = cols[5].parse().map_err(|e| bad(format!("line {}: {e}", ln + 1)))?;
        let k = grid
            .interior_index(i, j)
            .ok_or_else(|| bad(format!("line {}: node ({i}, {j}) is not interior", ln + 1)))?;
        values[k] = C::new(re, im);
        seen[k] = true;
    }
    if seen.iter().any(|s| !s) {
        return Err(bad("CSV does not cover every interior node".into()));
    }
    Field::from_values(grid, values)
}
