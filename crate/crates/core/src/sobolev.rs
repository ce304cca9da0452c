//! Riesz representatives in the L², H¹ and H_A inner products, and the
//! tangent projection `P_{u,X}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GpError, Result};
use crate::field::Field;
use crate::grid::{advect_at, inner_h1, inner_ha, inner_l2, neg_lap_unscaled, Grid};
use crate::krylov::{pcg, CgSettings, SolveStats};
use crate::model::{l2_gradient, ModelParams};
use crate::par;

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    L2,
    H1,
    #[default]
    #[serde(alias = "h_a")]
    Ha,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preconditioner {
    None,
    #[default]
    Diagonal,
}

/// Krylov solver for `M_X w = rhs`, where `M_X` is the matrix of the metric
/// `X` (identity for L²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RieszSolver {
    pub metric: Metric,
    /// Rotation entering the H_A product; ignored for L² and H¹.
    pub c_omega: f64,
    pub rel_tol: f64,
    /// Iteration cap; `None` means `10 sqrt(#nodes)`.
    pub max_iter: Option<usize>,
    pub preconditioner: Preconditioner,
}

impl RieszSolver {
    pub fn new(metric: Metric, c_omega: f64) -> Self {
        RieszSolver {
            metric,
            c_omega,
            rel_tol: 1e-10,
            max_iter: None,
            preconditioner: Preconditioner::Diagonal,
        }
    }

    pub fn for_model(metric: Metric, p: &ModelParams) -> Self {
        Self::new(metric, p.c_omega)
    }

    pub fn with_tolerance(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(GpError::InvalidParameter(format!(
                "rel_tol = {} not in (0, 1)",
                self.rel_tol
            )));
        }
        if self.max_iter == Some(0) {
            return Err(GpError::InvalidParameter("max_iter = 0".into()));
        }
        Ok(())
    }

    fn c(&self) -> f64 {
        match self.metric {
            Metric::Ha => self.c_omega,
            _ => 0.0,
        }
    }

    /// `<u, v>_X`
    pub fn inner(&self, u: &Field, v: &Field) -> C {
        match self.metric {
            Metric::L2 => inner_l2(u, v),
            Metric::H1 => inner_h1(u, v),
            Metric::Ha => inner_ha(u, v, self.c_omega),
        }
    }

    pub fn norm(&self, u: &Field) -> f64 {
        self.inner(u, u).re.max(0.0).sqrt()
    }

    /// `M_X u` in strong form.
    pub fn apply(&self, u: &Field) -> Field {
        let mut out = Field::zeros(u.grid());
        apply_metric(u.grid(), self.c(), self.metric, u.values(), out.values_mut());
        out
    }

    /// Solves `M_X w = rhs`, starting from `warm` when given.
    pub fn solve(&self, rhs: &Field, warm: Option<&Field>) -> Result<(Field, SolveStats)> {
        if self.metric == Metric::L2 {
            return Ok((rhs.clone(), SolveStats::default()));
        }
        let g = rhs.grid().clone();
        let c = self.c();
        debug_assert!(
            rhs.max_abs() == 0.0 || self.inner(rhs, rhs).re > 0.0,
            "metric matrix is not positive definite"
        );
        let inv_diag: Vec<f64> = match self.preconditioner {
            Preconditioner::Diagonal => {
                let inv_h2 = 1.0 / (g.h() * g.h());
                (0..g.len())
                    .map(|k| 1.0 / (1.0 + c * c * g.r2[k] + g.lap_diag[k] * inv_h2))
                    .collect()
            }
            Preconditioner::None => Vec::new(),
        };
        let mut x = match warm {
            Some(w) => {
                rhs.assert_compatible(w);
                w.clone()
            }
            None => Field::zeros(&g),
        };
        let settings = CgSettings {
            rel_tol: self.rel_tol,
            max_iter: self.max_iter.unwrap_or_else(|| default_max_iter(g.len())),
        };
        let metric = self.metric;
        let stats = pcg(
            |v, out| apply_metric(&g, c, metric, v, out),
            (!inv_diag.is_empty()).then_some(inv_diag.as_slice()),
            rhs.values(),
            x.values_mut(),
            settings,
        )?;
        Ok((x, stats))
    }
}

pub(crate) fn default_max_iter(n: usize) -> usize {
    ((10.0 * (n as f64).sqrt()).ceil() as usize).max(10)
}

fn apply_metric(g: &Grid, c: f64, metric: Metric, u: &[C], out: &mut [C]) {
    let inv_h2 = 1.0 / (g.h() * g.h());
    match metric {
        Metric::L2 => out.copy_from_slice(u),
        Metric::H1 => par::fill(out, |k| u[k] + neg_lap_unscaled(g, u, k) * inv_h2),
        Metric::Ha => {
            let c2 = c * c;
            let two_ic = C::new(0.0, 2.0 * c);
            par::fill(out, |k| {
                u[k] * (1.0 + c2 * g.r2[k]) + neg_lap_unscaled(g, u, k) * inv_h2 - two_ic * advect_at(g, u, k)
            });
        }
    }
}

/// Sobolev gradient `G` with `<G, v>_X = E'(u) v`.
pub fn sobolev_gradient(u: &Field, p: &ModelParams, s: &RieszSolver) -> Result<Field> {
    Ok(s.solve(&l2_gradient(u, p), None)?.0)
}

/// `v_X` with `<v_X, v>_X = <u, v>` for all `v`.
pub fn riesz_of_state(u: &Field, s: &RieszSolver) -> Result<Field> {
    Ok(s.solve(u, None)?.0)
}

/// `G - lambda v_X` with `lambda = Re<u, G> / Re<u, v_X>`.
pub fn project_tangent(g: &Field, u: &Field, v_x: &Field) -> Result<Field> {
    g.assert_compatible(u);
    g.assert_compatible(v_x);
    let den = inner_l2(u, v_x).re;
    let scale = crate::grid::norm_l2(u) * crate::grid::norm_l2(v_x);
    if !(den.abs() > 1e-14 * scale) {
        return Err(GpError::DegenerateProjection(den));
    }
    let lambda = inner_l2(u, g).re / den;
    Ok(Field::lin_comb(C::new(1.0, 0.0), g, C::new(-lambda, 0.0), v_x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{norm_l2, Shape};
    use crate::model::{energy, Trap};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn random_field(g: &Arc<Grid>, seed: u64) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = (0..g.len())
            .map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        Field::from_values(g, v).unwrap()
    }

    fn grid() -> Arc<Grid> {
        Grid::with_nodes(Shape::disk(2.0), 33).unwrap()
    }

    #[test]
    fn apply_matches_inner_products() {
        let g = grid();
        let (u, v) = (random_field(&g, 1), random_field(&g, 2));
        for m in [Metric::L2, Metric::H1, Metric::Ha] {
            let s = RieszSolver::new(m, 1.7);
            let a = inner_l2(&s.apply(&u), &v);
            let b = s.inner(&u, &v);
            assert!((a - b).norm() < 1e-11 * b.norm(), "{m:?}");
        }
    }

    #[test]
    fn ha_equals_h1_without_rotation() {
        let g = grid();
        let u = random_field(&g, 3);
        let a = riesz_of_state(&u, &RieszSolver::new(Metric::Ha, 0.0)).unwrap();
        let b = riesz_of_state(&u, &RieszSolver::new(Metric::H1, 0.0)).unwrap();
        assert!(norm_l2(&(&a - &b)) < 1e-9 * norm_l2(&a));
    }

    #[test]
    fn l2_riesz_is_identity() {
        let g = grid();
        let u = random_field(&g, 4);
        let v = riesz_of_state(&u, &RieszSolver::new(Metric::L2, 3.0)).unwrap();
        assert_eq!(u.values(), v.values());
    }

    #[test]
    fn riesz_residual_defining_identity() {
        let g = grid();
        let u = random_field(&g, 5);
        let s = RieszSolver::new(Metric::Ha, 2.0).with_tolerance(1e-12);
        let v = riesz_of_state(&u, &s).unwrap();
        for seed in 10..13 {
            let w = random_field(&g, seed);
            let lhs = s.inner(&v, &w);
            let rhs = inner_l2(&u, &w);
            assert!((lhs - rhs).norm() < 1e-9 * rhs.norm().max(norm_l2(&u) * norm_l2(&w) * 1e-3));
        }
    }

    #[test]
    fn weak_form_residual_reproduces_tolerance() {
        let g = grid();
        let u = random_field(&g, 6);
        let s = RieszSolver::new(Metric::Ha, 1.0).with_tolerance(1e-12);
        let (v, st) = s.solve(&u, None).unwrap();
        let r = &s.apply(&v) - &u;
        let rel = norm_l2(&r) / norm_l2(&u);
        assert!(rel <= 1e-11, "{rel} vs reported {}", st.residual);
    }

    #[test]
    fn sobolev_gradient_riesz_identity() {
        let g = grid();
        let p = ModelParams::new(50.0, 0.8, Trap::isotropic());
        let u = &random_field(&g, 7) * 0.3;
        let v = &random_field(&g, 8) * 0.3;
        let s = RieszSolver::for_model(Metric::Ha, &p).with_tolerance(1e-12);
        let gr = sobolev_gradient(&u, &p, &s).unwrap();
        let exact = s.inner(&gr, &v).re;
        let e = 1e-4;
        let fd = (energy(&(&u + &(&v * e)), &p) - energy(&(&u - &(&v * e)), &p)) / (2.0 * e);
        assert!(((fd - exact) / exact).abs() < 1e-6);
    }

    #[test]
    fn projection_properties() {
        let g = grid();
        let mut u = random_field(&g, 9);
        u.scale(1.0 / norm_l2(&u));
        let s = RieszSolver::new(Metric::Ha, 1.2);
        let vx = riesz_of_state(&u, &s).unwrap();
        let gr = random_field(&g, 11);
        let pg = project_tangent(&gr, &u, &vx).unwrap();
        assert!(inner_l2(&u, &pg).re.abs() < 1e-12 * norm_l2(&gr));
        let ppg = project_tangent(&pg, &u, &vx).unwrap();
        assert!(norm_l2(&(&ppg - &pg)) < 1e-13 * norm_l2(&pg));
        let pv = project_tangent(&vx, &u, &vx).unwrap();
        assert!(inner_l2(&u, &pv).re.abs() < 1e-13 * norm_l2(&vx));
        // descent: Re<G, PG>_X = |PG|_X^2 > 0
        assert!(s.inner(&gr, &pg).re > 0.0);
    }

    #[test]
    fn projection_of_zero_state_rejected() {
        let g = grid();
        let z = Field::zeros(&g);
        assert!(matches!(
            project_tangent(&z, &z, &z),
            Err(GpError::DegenerateProjection(_))
        ));
    }
}
