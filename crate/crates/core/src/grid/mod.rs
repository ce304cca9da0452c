//! Uniform Cartesian lattice with a masked interior.
//!
//! Nodes strictly inside the domain shape are unknowns; every other node
//! carries the homogeneous Dirichlet value 0. Lattice edges that leave the
//! domain are "cut": the boundary crossing sits a fraction `theta` of a cell
//! away from the interior node, and the Dirichlet form weights that edge by
//! `1/theta`. This keeps every operator symmetric while restoring second-order
//! accuracy on curved boundaries.

mod ops;

pub use ops::*;

use std::collections::VecDeque;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{GpError, Result};

/// Marker for a neighbour that is not an interior node.
pub const NONE: u32 = u32::MAX;

/// Smallest admissible cut fraction. Closer crossings are clamped so that the
/// Dirichlet form stays bounded by `1/THETA_MIN` per edge.
pub const THETA_MIN: f64 = 1e-2;

/// Relative slack used when classifying nodes, so that lattice points lying
/// on the boundary are robustly exterior.
const INSIDE_SLACK: f64 = 1e-10;

/// Domain descriptor, centred at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    Disk { radius: f64 },
    Rectangle { half_x: f64, half_y: f64 },
    Ellipse { semi_x: f64, semi_y: f64 },
}

impl Shape {
    pub fn disk(radius: f64) -> Self {
        Shape::Disk { radius }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        let valid = match *self {
            Shape::Disk { radius } => ok(radius),
            Shape::Rectangle { half_x, half_y } => ok(half_x) && ok(half_y),
            Shape::Ellipse { semi_x, semi_y } => ok(semi_x) && ok(semi_y),
        };
        if valid {
            Ok(())
        } else {
            Err(GpError::InvalidShape(format!("{self:?}")))
        }
    }

    /// Half extents of the bounding box.
    pub fn half_extent(&self) -> (f64, f64) {
        match *self {
            Shape::Disk { radius } => (radius, radius),
            Shape::Rectangle { half_x, half_y } => (half_x, half_y),
            Shape::Ellipse { semi_x, semi_y } => (semi_x, semi_y),
        }
    }

    /// Normalized level function: < 1 inside, 1 on the boundary.
    fn level(&self, x: f64, y: f64) -> f64 {
        match *self {
            Shape::Disk { radius } => (x * x + y * y) / (radius * radius),
            Shape::Rectangle { half_x, half_y } => (x.abs() / half_x).max(y.abs() / half_y),
            Shape::Ellipse { semi_x, semi_y } => (x / semi_x).powi(2) + (y / semi_y).powi(2),
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.level(x, y) < 1.0 - INSIDE_SLACK
    }

    /// Fraction `t` in (0, 1] such that `(x, y) + t (dx, dy)` is on the
    /// boundary, for an inside start point and an outside end point.
    fn crossing(&self, x: f64, y: f64, dx: f64, dy: f64) -> f64 {
        let t = match *self {
            Shape::Disk { radius } => quadratic_crossing(x, y, dx, dy, radius, radius),
            Shape::Ellipse { semi_x, semi_y } => quadratic_crossing(x, y, dx, dy, semi_x, semi_y),
            Shape::Rectangle { half_x, half_y } => {
                if dx != 0.0 {
                    (half_x * dx.signum() - x) / dx
                } else {
                    (half_y * dy.signum() - y) / dy
                }
            }
        };
        t.clamp(THETA_MIN, 1.0)
    }
}

fn quadratic_crossing(x: f64, y: f64, dx: f64, dy: f64, a: f64, b: f64) -> f64 {
    let (px, py, qx, qy) = (x / a, y / b, dx / a, dy / b);
    let qa = qx * qx + qy * qy;
    let qb = 2.0 * (px * qx + py * qy);
    let qc = px * px + py * py - 1.0;
    let disc = (qb * qb - 4.0 * qa * qc).max(0.0);
    // qc < 0 so the '+' root is the positive one
    (-qb + disc.sqrt()) / (2.0 * qa)
}

/// Neighbour directions in storage order.
pub const DIRS: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

#[derive(Debug)]
pub struct Grid {
    nx: usize,
    ny: usize,
    h: f64,
    origin: [f64; 2],
    shape: Shape,
    mask: Vec<bool>,
    full_to_interior: Vec<u32>,
    interior_to_full: Vec<u32>,
    pub(crate) x: Vec<f64>,
    pub(crate) y: Vec<f64>,
    pub(crate) r2: Vec<f64>,
    /// Interior neighbours `[east, west, north, south]`, `NONE` if absent.
    pub(crate) nbr: Vec<[u32; 4]>,
    /// Sum of `1/theta` over cut edges of each node.
    pub(crate) cut_weight: Vec<f64>,
    /// Diagonal of the (unscaled) negative Laplacian: interior degree + cut weight.
    pub(crate) lap_diag: Vec<f64>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && self.h == other.h
            && self.origin == other.origin
            && self.shape == other.shape
    }
}

impl Grid {
    /// Lattice whose spacing does not exceed `target_h`, with the origin as a node.
    pub fn build(shape: Shape, target_h: f64) -> Result<Arc<Grid>> {
        shape.validate()?;
        if !(target_h.is_finite() && target_h > 0.0) {
            return Err(GpError::InvalidParameter(format!("grid spacing {target_h}")));
        }
        let (hx, hy) = shape.half_extent();
        let half = hx.max(hy);
        let k = ((half / target_h) - 1e-9).ceil().max(1.0) as usize;
        Self::with_spacing(shape, half / k as f64)
    }

    /// Lattice with `n` (odd, >= 3) nodes across the longer axis of the shape.
    pub fn with_nodes(shape: Shape, n: usize) -> Result<Arc<Grid>> {
        shape.validate()?;
        if n < 3 || n.is_multiple_of(2) {
            return Err(GpError::InvalidParameter(format!(
                "node count per axis must be odd and >= 3, got {n}"
            )));
        }
        let (hx, hy) = shape.half_extent();
        Self::with_spacing(shape, hx.max(hy) / ((n - 1) / 2) as f64)
    }

    fn with_spacing(shape: Shape, h: f64) -> Result<Arc<Grid>> {
        let (hx, hy) = shape.half_extent();
        let kx = ((hx / h) - 1e-9).ceil().max(1.0) as usize;
        let ky = ((hy / h) - 1e-9).ceil().max(1.0) as usize;
        let (nx, ny) = (2 * kx + 1, 2 * ky + 1);
        let origin = [-(kx as f64) * h, -(ky as f64) * h];
        Self::assemble(shape, nx, ny, h, origin)
    }

    pub(crate) fn assemble(shape: Shape, nx: usize, ny: usize, h: f64, origin: [f64; 2]) -> Result<Arc<Grid>> {
        let coord = |i: usize, j: usize| (origin[0] + i as f64 * h, origin[1] + j as f64 * h);
        let mut mask = vec![false; nx * ny];
        let mut full_to_interior = vec![NONE; nx * ny];
        let mut interior_to_full = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                let (x, y) = coord(i, j);
                if shape.contains(x, y) {
                    let f = j * nx + i;
                    mask[f] = true;
                    full_to_interior[f] = interior_to_full.len() as u32;
                    interior_to_full.push(f as u32);
                }
            }
        }
        let n = interior_to_full.len();
        if n == 0 {
            return Err(GpError::InvalidShape(format!(
                "{shape:?} has no interior nodes at h = {h}"
            )));
        }

        let mut x = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        let mut r2 = Vec::with_capacity(n);
        let mut nbr = Vec::with_capacity(n);
        let mut cut_weight = Vec::with_capacity(n);
        let mut lap_diag = Vec::with_capacity(n);
        for &f in &interior_to_full {
            let (i, j) = ((f as usize) % nx, (f as usize) / nx);
            let (px, py) = coord(i, j);
            let mut links = [NONE; 4];
            let mut cut = 0.0;
            let mut degree = 0.0;
            for (d, &(di, dj)) in DIRS.iter().enumerate() {
                let (ii, jj) = (i as i64 + di, j as i64 + dj);
                let inside_lattice = ii >= 0 && jj >= 0 && (ii as usize) < nx && (jj as usize) < ny;
                let neighbour = if inside_lattice {
                    full_to_interior[jj as usize * nx + ii as usize]
                } else {
                    NONE
                };
                if neighbour != NONE {
                    links[d] = neighbour;
                    degree += 1.0;
                } else {
                    let theta = shape.crossing(px, py, di as f64 * h, dj as f64 * h);
                    cut += 1.0 / theta;
                }
            }
            x.push(px);
            y.push(py);
            r2.push(px * px + py * py);
            nbr.push(links);
            cut_weight.push(cut);
            lap_diag.push(degree + cut);
        }

        let grid = Grid {
            nx,
            ny,
            h,
            origin,
            shape,
            mask,
            full_to_interior,
            interior_to_full,
            x,
            y,
            r2,
            nbr,
            cut_weight,
            lap_diag,
        };
        if !grid.interior_connected() {
            return Err(GpError::InvalidShape(format!(
                "{shape:?} has a disconnected interior at h = {h}"
            )));
        }
        Ok(Arc::new(grid))
    }

    fn interior_connected(&self) -> bool {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(k) = queue.pop_front() {
            for &j in &self.nbr[k] {
                if j != NONE && !seen[j as usize] {
                    seen[j as usize] = true;
                    count += 1;
                    queue.push_back(j as usize);
                }
            }
        }
        count == n
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Quadrature weight of every interior node.
    pub fn cell_area(&self) -> f64 {
        self.h * self.h
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    /// Number of interior nodes (the length of every field on this grid).
    pub fn len(&self) -> usize {
        self.interior_to_full.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interior_to_full.is_empty()
    }

    /// Interior flag per lattice node, row-major with `x` fastest.
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Interior index of lattice node `(i, j)`.
    pub fn interior_index(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.nx || j >= self.ny {
            return None;
        }
        match self.full_to_interior[j * self.nx + i] {
            NONE => None,
            k => Some(k as usize),
        }
    }

    /// Lattice position `(i, j)` of interior node `k`.
    pub fn lattice_position(&self, k: usize) -> (usize, usize) {
        let f = self.interior_to_full[k] as usize;
        (f % self.nx, f / self.nx)
    }

    pub fn coords(&self, k: usize) -> (f64, f64) {
        (self.x[k], self.y[k])
    }

    pub fn lattice_coords(&self, i: usize, j: usize) -> (f64, f64) {
        (self.origin[0] + i as f64 * self.h, self.origin[1] + j as f64 * self.h)
    }

    pub fn xs(&self) -> &[f64] {
        &self.x
    }

    pub fn ys(&self) -> &[f64] {
        &self.y
    }

    pub fn r2(&self) -> &[f64] {
        &self.r2
    }

    pub fn neighbours(&self, k: usize) -> [Option<usize>; 4] {
        self.nbr[k].map(|j| (j != NONE).then_some(j as usize))
    }

    /// Total cut-edge weight of node `k` (0 away from the boundary).
    pub fn cut_weight(&self, k: usize) -> f64 {
        self.cut_weight[k]
    }

    pub fn same(a: &Arc<Grid>, b: &Arc<Grid>) -> bool {
        Arc::ptr_eq(a, b) || **a == **b
    }
}
