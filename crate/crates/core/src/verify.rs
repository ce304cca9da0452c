//! Built-in invariant suite: fast checks of gradients, manifold algebra,
//! gauge invariance and the manufactured source, on small grids.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::Result;
use crate::field::Field;
use crate::grid::{inner_l2, norm_l2, Grid, Shape};
use crate::io::{read_field, write_field};
use crate::manufactured::{exact_solution, ManufacturedCase};
use crate::model::{angular_momentum, energy, energy_a_form, tf_density, ModelParams, Trap};
use crate::optim::{brent_arc_min, run, LineSearch, Method, MethodConfig};
use crate::riemannian::{retract, transport, TransportKind};
use crate::sobolev::{project_tangent, riesz_of_state, sobolev_gradient, Metric, RieszSolver};

type C = Complex64;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {:<34} {}", self.name, self.detail)
    }
}

fn check(name: &'static str, r: Result<(bool, String)>) -> Check {
    match r {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn unit_random(g: &Arc<Grid>, seed: u64) -> Field {
    let mut u = Field::random(g, seed);
    u.scale(1.0 / norm_l2(&u));
    u
}

fn tangent_random(u: &Field, seed: u64) -> Field {
    let x = Field::random(u.grid(), seed);
    let lambda = inner_l2(&x, u).re / inner_l2(u, u).re;
    Field::lin_comb(C::new(1.0, 0.0), &x, C::new(-lambda, 0.0), u)
}

/// Best relative mismatch between `exact` and central differences of
/// `E(u + eps v)` over an `eps` sweep.
pub fn riesz_defect(u: &Field, v: &Field, p: &ModelParams, exact: f64) -> f64 {
    [1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5]
        .iter()
        .map(|&e| {
            let up = Field::lin_comb(C::new(1.0, 0.0), u, C::new(e, 0.0), v);
            let um = Field::lin_comb(C::new(1.0, 0.0), u, C::new(-e, 0.0), v);
            let fd = (energy(&up, p) - energy(&um, p)) / (2.0 * e);
            ((fd - exact) / exact).abs()
        })
        .fold(f64::INFINITY, f64::min)
}

fn gradient_oracle() -> Result<(bool, String)> {
    let g = Grid::with_nodes(Shape::disk(2.0), 33)?;
    let p = ModelParams::new(80.0, 0.9, Trap::isotropic());
    let u = &Field::random(&g, 1) * 0.3;
    let v = &Field::random(&g, 2) * 0.3;
    let mut worst: f64 = 0.0;
    for metric in [Metric::L2, Metric::H1, Metric::Ha] {
        let s = RieszSolver::for_model(metric, &p).with_tolerance(1e-12);
        let gr = sobolev_gradient(&u, &p, &s)?;
        worst = worst.max(riesz_defect(&u, &v, &p, s.inner(&gr, &v).re));
    }
    Ok((worst < 1e-6, format!("max rel. defect {worst:.2e} (L2, H1, HA)")))
}

fn manifold_algebra() -> Result<(bool, String)> {
    let g = Grid::with_nodes(Shape::disk(1.5), 33)?;
    let u = unit_random(&g, 3);
    let s = RieszSolver::new(Metric::Ha, 1.3);
    let vx = riesz_of_state(&u, &s)?;
    let gr = Field::random(&g, 4);
    let pg = project_tangent(&gr, &u, &vx)?;
    let tang = inner_l2(&u, &pg).re.abs() / norm_l2(&gr);
    let idem = norm_l2(&(&project_tangent(&pg, &u, &vx)? - &pg)) / norm_l2(&pg);
    let eta = &tangent_random(&u, 5) * 0.4;
    let xi = tangent_random(&u, 6);
    let dest = retract(&u, &eta)?;
    let t2 = transport(TransportKind::RiemannianSubmanifold, &u, &eta, &xi)?;
    let t1 = transport(TransportKind::DifferentiatedRetraction, &u, &eta, &xi)?;
    let dest_tang = inner_l2(&dest, &t2).re.abs().max(inner_l2(&dest, &t1).re.abs()) / norm_l2(&xi);
    let factor = norm_l2(&(&(&t1 * norm_l2(&(&u + &eta))) - &t2)) / norm_l2(&t2);
    let unit = (norm_l2(&dest) - 1.0).abs();
    let ok = tang < 1e-12 && idem < 1e-12 && dest_tang < 1e-12 && factor < 1e-13 && unit < 1e-13;
    Ok((
        ok,
        format!("tangency {tang:.1e}, idempotence {idem:.1e}, transport {dest_tang:.1e}, T1/T2 {factor:.1e}"),
    ))
}

fn gauge_invariance() -> Result<(bool, String)> {
    let g = Grid::with_nodes(Shape::disk(2.0), 33)?;
    let p = ModelParams::new(100.0, 0.7, Trap::isotropic());
    let u = unit_random(&g, 7);
    let w = u.phase_rotated(0.917);
    let de = ((energy(&u, &p) - energy(&w, &p)) / energy(&u, &p)).abs();
    let dl = (angular_momentum(&u) - angular_momentum(&w)).abs() / angular_momentum(&u).abs().max(1.0);
    Ok((de < 1e-13 && dl < 1e-12, format!("energy {de:.1e}, L_z {dl:.1e}")))
}

fn energy_forms() -> Result<(bool, String)> {
    let g = Grid::with_nodes(Shape::disk(3.0), 61)?;
    let u = Field::from_fn(&g, |x, y| C::new(x + 0.3, y) * (-(x * x + y * y)).exp());
    let p = ModelParams::new(200.0, 0.8, Trap::isotropic());
    let (a, b) = (energy(&u, &p), energy_a_form(&u, &p));
    let d = ((a - b) / a).abs();
    Ok((d < 1e-12, format!("relative gap {d:.1e}")))
}

fn manufactured_residual() -> Result<(bool, String)> {
    let case = ManufacturedCase {
        m: 3,
        radius: 1.0,
        c_g: 500.0,
        c_omega: 10.0,
    };
    let mut res = Vec::new();
    for n in [65, 129] {
        let g = Grid::with_nodes(case.shape(), n)?;
        let p = case.model(&g)?;
        let u = exact_solution(&case, &g)?;
        let s = RieszSolver::for_model(Metric::Ha, &p).with_tolerance(1e-12);
        res.push(s.norm(&sobolev_gradient(&u, &p, &s)?));
    }
    let order = (res[0] / res[1]).log2();
    Ok((
        order > 1.5,
        format!("|G(u_ex)|_HA {:.2e} -> {:.2e}, order {order:.2}", res[0], res[1]),
    ))
}

fn thomas_fermi_mass() -> Result<(bool, String)> {
    let p = ModelParams::new(500.0, 0.4, Trap::isotropic());
    let g = Grid::build(Shape::disk(6.56), 0.05)?;
    let rho = tf_density(&p, &g)?;
    let mass: f64 = rho.values().iter().map(|v| v.re).sum::<f64>() * g.cell_area();
    Ok(((mass - 1.0).abs() < 1e-3, format!("int rho_TF = {mass:.6}")))
}

fn line_search() -> Result<(bool, String)> {
    let r = brent_arc_min(|t| (t - 2.0) * (t - 2.0), 4.0, 0.1, &LineSearch::default())?;
    Ok((
        (r.tau - 2.0).abs() < 2e-4,
        format!("tau* = {:.6} in {} evaluations", r.tau, r.evals),
    ))
}

fn reset_reduction() -> Result<(bool, String)> {
    let g = Grid::with_nodes(Shape::disk(3.5), 33)?;
    let p = ModelParams::new(50.0, 0.5, Trap::isotropic());
    let u0 = crate::model::initial_guess(&crate::model::InitialGuess::TfVortex { x_v: 0.3, y_v: 0.0 }, &p, &g)?;
    let base = MethodConfig {
        max_iter: 6,
        ..Default::default()
    };
    let rg = run(
        u0.clone(),
        &p,
        &MethodConfig {
            method: Method::Rg,
            ..base
        },
    );
    let rcg = run(
        u0,
        &p,
        &MethodConfig {
            method: Method::Rcg,
            reset_period: 1,
            ..base
        },
    );
    let d = norm_l2(&(&rg.u - &rcg.u));
    Ok((
        d < 1e-12 && rg.iterations() == rcg.iterations(),
        format!("iterate gap {d:.1e}"),
    ))
}

fn binary_round_trip() -> Result<(bool, String)> {
    let g = Grid::with_nodes(
        Shape::Ellipse {
            semi_x: 1.0,
            semi_y: 0.7,
        },
        41,
    )?;
    let u = Field::random(&g, 9);
    let mut buf = Vec::new();
    write_field(&mut buf, &u)?;
    let back = read_field(buf.as_slice())?;
    Ok((back.values() == u.values(), format!("{} bytes", buf.len())))
}

/// Runs every check.
pub fn run_all() -> Vec<Check> {
    vec![
        check("gradient Riesz identity", gradient_oracle()),
        check("projection and transport algebra", manifold_algebra()),
        check("global phase invariance", gauge_invariance()),
        check("energy forms agree", energy_forms()),
        check("manufactured source residual", manufactured_residual()),
        check("Thomas-Fermi normalization", thomas_fermi_mass()),
        check("Brent line search", line_search()),
        check("RCG with reset 1 equals RG", reset_reduction()),
        check("binary field round trip", binary_round_trip()),
    ]
}

#[cfg(test)]
mod tests {
    #[test]
    fn suite_passes() {
        for c in super::run_all() {
            assert!(c.passed, "{c}");
        }
    }
}
