//! Complex grid functions with value semantics.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GpError, Result};
use crate::grid::Grid;
use crate::par;

/// Complex values on the interior nodes of a grid; exterior values are 0.
#[derive(Clone, Debug)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<Complex64>,
}

/// Two-channel (x, y) field, e.g. a discrete gradient.
#[derive(Clone, Debug)]
pub struct VecField {
    pub x: Field,
    pub y: Field,
}

impl Field {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Field {
            grid: grid.clone(),
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Samples `f(x, y)` at every interior node.
    pub fn from_fn<F>(grid: &Arc<Grid>, f: F) -> Self
    where
        F: Fn(f64, f64) -> Complex64 + Sync,
    {
        let mut out = Self::zeros(grid);
        let (xs, ys) = (grid.xs(), grid.ys());
        par::fill(&mut out.values, |k| f(xs[k], ys[k]));
        out
    }

    /// Independent uniform samples of real and imaginary parts in `[-1, 1)`,
    /// reproducible from `seed`.
    pub fn random(grid: &Arc<Grid>, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..grid.len())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        Field {
            grid: grid.clone(),
            values,
        }
    }

    pub fn from_values(grid: &Arc<Grid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(GpError::InvalidParameter(format!(
                "field has {} values but the grid has {} interior nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Field {
            grid: grid.clone(),
            values,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn compatible(&self, other: &Field) -> bool {
        Grid::same(&self.grid, &other.grid)
    }

    pub(crate) fn assert_compatible(&self, other: &Field) {
        assert!(self.compatible(other), "fields live on different grids");
    }

    /// Applies `f(k, value)` to every node in place.
    pub fn map_inplace<F>(&mut self, f: F)
    where
        F: Fn(usize, Complex64) -> Complex64 + Sync,
    {
        par::update(&mut self.values, f);
    }

    pub fn map<F>(&self, f: F) -> Field
    where
        F: Fn(usize, Complex64) -> Complex64 + Sync,
    {
        let mut out = self.clone();
        out.map_inplace(f);
        out
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: Complex64, x: &Field) {
        self.assert_compatible(x);
        let xv = &x.values;
        par::update(&mut self.values, |k, v| v + a * xv[k]);
    }

    /// `a * x + b * y`
    pub fn lin_comb(a: Complex64, x: &Field, b: Complex64, y: &Field) -> Field {
        x.assert_compatible(y);
        let mut out = Field::zeros(&x.grid);
        let (xv, yv) = (&x.values, &y.values);
        par::fill(&mut out.values, |k| a * xv[k] + b * yv[k]);
        out
    }

    pub fn scale(&mut self, s: f64) {
        par::update(&mut self.values, |_, v| v * s);
    }

    pub fn scaled(&self, s: Complex64) -> Field {
        self.map(|_, v| v * s)
    }

    /// Multiplies by `exp(i phase)`.
    pub fn phase_rotated(&self, phase: f64) -> Field {
        self.scaled(Complex64::from_polar(1.0, phase))
    }

    pub fn conj(&self) -> Field {
        self.map(|_, v| v.conj())
    }

    /// Node-wise `|u|^2`.
    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Value at lattice node `(i, j)`, 0 outside the interior.
    pub fn at_lattice(&self, i: usize, j: usize) -> Complex64 {
        self.grid
            .interior_index(i, j)
            .map_or(Complex64::new(0.0, 0.0), |k| self.values[k])
    }

    /// Bilinear interpolation at `(x, y)`, with 0 outside the interior.
    pub fn interpolate(&self, x: f64, y: f64) -> Complex64 {
        let g = &self.grid;
        let [ox, oy] = g.origin();
        let (fx, fy) = ((x - ox) / g.h(), (y - oy) / g.h());
        if fx < 0.0 || fy < 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let (i, j) = (fx.floor() as usize, fy.floor() as usize);
        let (tx, ty) = (fx - i as f64, fy - j as f64);
        let v00 = self.at_lattice(i, j);
        let v10 = self.at_lattice(i + 1, j);
        let v01 = self.at_lattice(i, j + 1);
        let v11 = self.at_lattice(i + 1, j + 1);
        v00 * ((1.0 - tx) * (1.0 - ty)) + v10 * (tx * (1.0 - ty)) + v01 * ((1.0 - tx) * ty) + v11 * (tx * ty)
    }
}

impl<'a> Add<&'a Field> for &'a Field {
    type Output = Field;
    fn add(self, rhs: &'a Field) -> Field {
        Field::lin_comb(1.0.into(), self, 1.0.into(), rhs)
    }
}

impl<'a> Sub<&'a Field> for &'a Field {
    type Output = Field;
    fn sub(self, rhs: &'a Field) -> Field {
        Field::lin_comb(1.0.into(), self, (-1.0).into(), rhs)
    }
}

impl Neg for &Field {
    type Output = Field;
    fn neg(self) -> Field {
        self.map(|_, v| -v)
    }
}

impl Mul<f64> for &Field {
    type Output = Field;
    fn mul(self, s: f64) -> Field {
        self.map(|_, v| v * s)
    }
}

impl Mul<Complex64> for &Field {
    type Output = Field;
    fn mul(self, s: Complex64) -> Field {
        self.scaled(s)
    }
}

impl AddAssign<&Field> for Field {
    fn add_assign(&mut self, rhs: &Field) {
        self.axpy(1.0.into(), rhs);
    }
}

impl SubAssign<&Field> for Field {
    fn sub_assign(&mut self, rhs: &Field) {
        self.axpy((-1.0).into(), rhs);
    }
}

impl VecField {
    pub fn new(x: Field, y: Field) -> Self {
        x.assert_compatible(&y);
        VecField { x, y }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Shape;

    #[test]
    fn algebra_on_disk() {
        let g = Grid::build(Shape::disk(1.0), 0.2).unwrap();
        let a = Field::from_fn(&g, Complex64::new);
        let b = Field::from_fn(&g, |x, _| Complex64::new(1.0, x));
        let c = &(&a + &b) - &b;
        assert!(c.values().iter().zip(a.values()).all(|(p, q)| (p - q).norm() < 1e-15));
        let mut d = a.clone();
        d.axpy(Complex64::new(0.0, 2.0), &b);
        for k in 0..g.len() {
            let expect = a.values()[k] + Complex64::new(0.0, 2.0) * b.values()[k];
            assert!((d.values()[k] - expect).norm() < 1e-15);
        }
    }

    #[test]
    #[should_panic(expected = "different grids")]
    fn mismatched_grids_panic() {
        let g1 = Grid::build(Shape::disk(1.0), 0.2).unwrap();
        let g2 = Grid::build(Shape::disk(1.0), 0.1).unwrap();
        let _ = &Field::zeros(&g1) + &Field::zeros(&g2);
    }

    #[test]
    fn identical_grids_built_twice_are_compatible() {
        let g1 = Grid::build(Shape::disk(1.0), 0.2).unwrap();
        let g2 = Grid::build(Shape::disk(1.0), 0.2).unwrap();
        assert!(Field::zeros(&g1).compatible(&Field::zeros(&g2)));
    }

    #[test]
    fn interpolation_reproduces_bilinear_functions() {
        let g = Grid::build(
            Shape::Rectangle {
                half_x: 1.0,
                half_y: 1.0,
            },
            0.1,
        )
        .unwrap();
        let u = Field::from_fn(&g, |x, y| Complex64::new(1.0 + x + 2.0 * y + x * y, 0.0));
        let v = u.interpolate(0.123, -0.456);
        let expect = 1.0 + 0.123 - 2.0 * 0.456 - 0.123 * 0.456;
        assert!((v.re - expect).abs() < 1e-12);
    }
}
