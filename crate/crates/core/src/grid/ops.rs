//! Discrete differential operators, quadrature and inner products.
//!
//! Conventions: `<u, v> = sum_k u_k conj(v_k) h^2` (linear in the first
//! argument); `A = (y, -x)` so that `A . grad u = y u_x - x u_y`.
//!
//! The Dirichlet form `<grad u, grad v>` is an edge sum (including cut edges
//! weighted by `1/theta`), so that `<-lap u, v> = <grad u, grad v>` holds
//! exactly. First-derivative channels use centred differences, which makes
//! `advect` an exactly skew-symmetric operator.

use num_complex::Complex64;

use super::{Grid, NONE};
use crate::field::{Field, VecField};
use crate::par;

type C = Complex64;
const ZERO: C = C::new(0.0, 0.0);

#[inline(always)]
pub(crate) fn at(u: &[C], j: u32) -> C {
    if j == NONE {
        ZERO
    } else {
        u[j as usize]
    }
}

/// `-h^2 lap(u)` at node `k`.
#[inline(always)]
pub(crate) fn neg_lap_unscaled(g: &Grid, u: &[C], k: usize) -> C {
    let [e, w, n, s] = g.nbr[k];
    u[k] * g.lap_diag[k] - (at(u, e) + at(u, w) + at(u, n) + at(u, s))
}

/// `y u_x - x u_y` at node `k` (centred differences).
#[inline(always)]
pub(crate) fn advect_at(g: &Grid, u: &[C], k: usize) -> C {
    let [e, w, n, s] = g.nbr[k];
    (g.y[k] * (at(u, e) - at(u, w)) - g.x[k] * (at(u, n) - at(u, s))) * (0.5 / g.h())
}

/// Five-point Laplacian with homogeneous Dirichlet data.
pub fn laplacian(u: &Field) -> Field {
    let g = u.grid().clone();
    let inv_h2 = 1.0 / (g.h() * g.h());
    let src = u.values();
    let mut out = Field::zeros(&g);
    par::fill(out.values_mut(), |k| -neg_lap_unscaled(&g, src, k) * inv_h2);
    out
}

/// Centred-difference gradient.
pub fn grad(u: &Field) -> VecField {
    let g = u.grid().clone();
    let src = u.values();
    let inv = 0.5 / g.h();
    let mut gx = Field::zeros(&g);
    let mut gy = Field::zeros(&g);
    par::fill(gx.values_mut(), |k| {
        let [e, w, _, _] = g.nbr[k];
        (at(src, e) - at(src, w)) * inv
    });
    par::fill(gy.values_mut(), |k| {
        let [_, _, n, s] = g.nbr[k];
        (at(src, n) - at(src, s)) * inv
    });
    VecField::new(gx, gy)
}

/// `A^t . grad u = y u_x - x u_y`.
pub fn advect(u: &Field) -> Field {
    let g = u.grid().clone();
    let src = u.values();
    let mut out = Field::zeros(&g);
    par::fill(out.values_mut(), |k| advect_at(&g, src, k));
    out
}

/// `grad u + i c_omega A u` with centred first differences.
pub fn magnetic_gradient(u: &Field, c_omega: f64) -> VecField {
    let mut gr = grad(u);
    let g = u.grid().clone();
    let src = u.values();
    gr.x.map_inplace(|k, v| v + C::new(0.0, c_omega * g.y[k]) * src[k]);
    gr.y.map_inplace(|k, v| v - C::new(0.0, c_omega * g.x[k]) * src[k]);
    gr
}

pub fn inner_l2(u: &Field, v: &Field) -> C {
    u.assert_compatible(v);
    let (a, b) = (u.values(), v.values());
    par::sum(a.len(), ZERO, |k| a[k] * b[k].conj()) * u.grid().cell_area()
}

pub fn norm_l2_sqr(u: &Field) -> f64 {
    let a = u.values();
    par::sum(a.len(), 0.0, |k| a[k].norm_sqr()) * u.grid().cell_area()
}

pub fn norm_l2(u: &Field) -> f64 {
    norm_l2_sqr(u).sqrt()
}

/// L² product of two vector fields, channel by channel.
pub fn inner_l2_vec(a: &VecField, b: &VecField) -> C {
    inner_l2(&a.x, &b.x) + inner_l2(&a.y, &b.y)
}

/// Edge-sum Dirichlet form `<grad u, grad v>`.
pub fn dirichlet_form(u: &Field, v: &Field) -> C {
    u.assert_compatible(v);
    let g = u.grid().clone();
    let (a, b) = (u.values(), v.values());
    par::sum(a.len(), ZERO, |k| {
        let [e, _, n, _] = g.nbr[k];
        let mut acc = a[k] * b[k].conj() * g.cut_weight[k];
        if e != NONE {
            acc += (a[e as usize] - a[k]) * (b[e as usize] - b[k]).conj();
        }
        if n != NONE {
            acc += (a[n as usize] - a[k]) * (b[n as usize] - b[k]).conj();
        }
        acc
    })
}

pub fn inner_h1(u: &Field, v: &Field) -> C {
    inner_l2(u, v) + dirichlet_form(u, v)
}

pub fn norm_h1(u: &Field) -> f64 {
    inner_h1(u, u).re.max(0.0).sqrt()
}

/// `<u, v>_{H_A} = <u, v> + <grad_A u, grad_A v>`, where the magnetic part is
/// expanded as Dirichlet form + `c^2 <r u, r v>` + the two cross terms.
pub fn inner_ha(u: &Field, v: &Field, c_omega: f64) -> C {
    u.assert_compatible(v);
    let g = u.grid().clone();
    let (a, b) = (u.values(), v.values());
    let c2 = c_omega * c_omega;
    let ic = C::new(0.0, c_omega);
    let local = par::sum(a.len(), ZERO, |k| {
        let da = advect_at(&g, a, k);
        let db = advect_at(&g, b, k);
        a[k] * b[k].conj() * (1.0 + c2 * g.r2[k]) - ic * da * b[k].conj() + ic * a[k] * db.conj()
    });
    local * g.cell_area() + dirichlet_form(u, v)
}

pub fn norm_ha(u: &Field, c_omega: f64) -> f64 {
    inner_ha(u, u, c_omega).re.max(0.0).sqrt()
}

/// Matrix of the H_A product: `(1 + c^2 r^2) u - lap u - 2 i c A^t.grad u`.
/// `inner_ha(u, v) == inner_l2(apply_ha(u), v)`.
pub fn apply_ha_into(u: &[C], out: &mut [C], g: &Grid, c_omega: f64) {
    let inv_h2 = 1.0 / (g.h() * g.h());
    let c2 = c_omega * c_omega;
    let two_ic = C::new(0.0, 2.0 * c_omega);
    par::fill(out, |k| {
        u[k] * (1.0 + c2 * g.r2[k]) + neg_lap_unscaled(g, u, k) * inv_h2 - two_ic * advect_at(g, u, k)
    });
}

pub fn apply_ha(u: &Field, c_omega: f64) -> Field {
    let mut out = Field::zeros(u.grid());
    apply_ha_into(u.values(), out.values_mut(), u.grid(), c_omega);
    out
}
