//! Minimization drivers on the unit sphere: projected gradient (PG),
//! Riemannian gradient (RG), conjugate gradients with and without vector
//! transport (CG, RCG), and normalized semi-implicit backward Euler (BE).
//!
//! Directions are descent directions: `u_{n+1} = R(u_n + tau_n d_n)` with
//! `d_0 = -P G_0`.

use std::fmt;
use std::io::Write;
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GpError, Result};
use crate::field::Field;
use crate::grid::{advect_at, neg_lap_unscaled, norm_l2, norm_l2_sqr};
use crate::krylov::{pcg, CgSettings};
use crate::model::{angular_momentum, energy, l2_gradient, ModelParams};
use crate::par;
use crate::riemannian::{retract_step, transport, TransportKind};
use crate::sobolev::{default_max_iter, project_tangent, Metric, RieszSolver};

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[serde(alias = "PG")]
    Pg,
    #[serde(alias = "RG")]
    Rg,
    #[serde(alias = "CG")]
    Cg,
    #[serde(alias = "RCG")]
    Rcg,
    #[serde(alias = "BE")]
    Be,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Pg => "PG",
            Method::Rg => "RG",
            Method::Cg => "CG",
            Method::Rcg => "RCG",
            Method::Be => "BE",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Momentum {
    /// Fletcher-Reeves
    #[serde(alias = "FR")]
    Fr,
    /// Polak-Ribiere with the transported previous gradient
    #[default]
    #[serde(alias = "PR")]
    Pr,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LineSearch {
    /// First trial step; later searches start from the previous accepted step.
    pub tau_init: f64,
    pub bracket_growth: f64,
    /// Relative tolerance of the Brent refinement.
    pub brent_tol: f64,
    pub max_evals: usize,
}

impl Default for LineSearch {
    fn default() -> Self {
        LineSearch {
            tau_init: 0.1,
            bracket_growth: 2.0,
            brent_tol: 1e-4,
            max_evals: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MethodConfig {
    pub method: Method,
    pub momentum: Momentum,
    /// Used by RCG only; CG always uses the identity.
    pub transport: TransportKind,
    pub metric: Metric,
    /// Force `beta = 0` whenever the iteration count is a multiple of this (0 = never).
    pub reset_period: usize,
    pub eps_stop: f64,
    pub max_iter: usize,
    pub linesearch: LineSearch,
    pub pg_normalize_every: usize,
    pub be_dt: f64,
    pub pr_clamp_nonnegative: bool,
    /// Relative tolerance of the Riesz solves.
    pub solver_rel_tol: f64,
    /// Relative tolerance of the BE linear solve.
    pub be_solver_rel_tol: f64,
}

impl Default for MethodConfig {
    fn default() -> Self {
        MethodConfig {
            method: Method::Rcg,
            momentum: Momentum::Pr,
            transport: TransportKind::RiemannianSubmanifold,
            metric: Metric::Ha,
            reset_period: 0,
            eps_stop: 1e-12,
            max_iter: 5000,
            linesearch: LineSearch::default(),
            pg_normalize_every: 10,
            be_dt: 10.0,
            pr_clamp_nonnegative: false,
            solver_rel_tol: 1e-10,
            be_solver_rel_tol: 1e-8,
        }
    }
}

impl MethodConfig {
    pub fn new(method: Method) -> Self {
        MethodConfig {
            method,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(GpError::InvalidParameter(m));
        if !(self.eps_stop > 0.0) {
            return bad(format!("eps_stop = {}", self.eps_stop));
        }
        if self.method == Method::Be && !(self.be_dt > 0.0 && self.be_dt.is_finite()) {
            return bad(format!("be_dt = {}", self.be_dt));
        }
        let ls = &self.linesearch;
        if !(ls.tau_init > 0.0 && ls.tau_init.is_finite()) || !(ls.bracket_growth > 1.0) {
            return bad(format!("line search {ls:?}"));
        }
        if !(ls.brent_tol > 0.0 && ls.brent_tol < 1.0) || ls.max_evals < 3 {
            return bad(format!("line search {ls:?}"));
        }
        for t in [self.solver_rel_tol, self.be_solver_rel_tol] {
            if !(t > 0.0 && t < 1.0) {
                return bad(format!("solver tolerance {t}"));
            }
        }
        Ok(())
    }

    fn transport_kind(&self) -> TransportKind {
        match self.method {
            Method::Rcg => self.transport,
            _ => TransportKind::None,
        }
    }
}

/// Diagnostics of one outer iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationRecord {
    pub n: usize,
    /// Energy after the step.
    pub energy: f64,
    /// `|E_{n+1} - E_n| / |E_n|`
    pub rel_de: f64,
    /// `|u_{n+1} - u_n|`
    pub du: f64,
    /// `|1 - |u_hat|^2|` of the iterate before normalization.
    pub drift: f64,
    pub tau: f64,
    pub beta: f64,
    pub lz: f64,
    /// Largest relative residual of the linear solves in this iteration.
    pub resid: f64,
    /// Seconds since the start of the run.
    pub t_wall: f64,
    /// `|P G|_X` at the start of the iteration.
    pub grad_norm: f64,
    pub energy_evals: usize,
    pub krylov_iters: usize,
    pub restarted: bool,
}

pub const CSV_HEADER: &str = "n,E,rel_dE,du,drift,tau,beta,Lz,resid,t_wall";

impl IterationRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.energy,
            self.rel_de,
            self.du,
            self.drift,
            self.tau,
            self.beta,
            self.lz,
            self.resid,
            self.t_wall
        )
    }
}

pub fn write_csv<W: Write>(mut w: W, records: &[IterationRecord]) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIter,
    Error(String),
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Termination::Converged => f.write_str("converged"),
            Termination::MaxIter => f.write_str("max_iter"),
            Termination::Error(e) => write!(f, "error: {e}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub u: Field,
    pub records: Vec<IterationRecord>,
    pub termination: Termination,
    pub energy_evals: usize,
}

impl RunResult {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }
}

/// True iff the last recorded relative energy change is below `eps_stop`.
pub fn check_stop(records: &[IterationRecord], eps_stop: f64) -> bool {
    records.last().is_some_and(|r| r.rel_de < eps_stop)
}

/// `|e_new - e_old| / |e_old|`, with `e_old = 0` treated as no information.
pub fn relative_change(e_old: f64, e_new: f64) -> f64 {
    if e_old == 0.0 {
        if e_new == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        ((e_new - e_old) / e_old).abs()
    }
}

/// Result of a one-dimensional minimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcMin {
    pub tau: f64,
    pub value: f64,
    pub evals: usize,
    /// No step with `phi(tau) < phi(0)` was found; `tau = 0`.
    pub stagnated: bool,
}

const CGOLD: f64 = 0.381_966_011_250_105_1;

/// Minimizes `phi` over `tau > 0` given `phi0 = phi(0)`: geometric bracketing
/// from `tau_init` followed by Brent refinement. Non-finite values count as
/// `+inf`.
pub fn brent_arc_min<F>(mut phi: F, phi0: f64, tau_init: f64, ls: &LineSearch) -> Result<ArcMin>
where
    F: FnMut(f64) -> f64,
{
    if !phi0.is_finite() {
        return Err(GpError::NonFinite("line search origin"));
    }
    let mut evals = 0usize;
    let mut f = |t: f64| {
        evals += 1;
        let v = phi(t);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let growth = ls.bracket_growth;
    let t0 = if tau_init > 0.0 && tau_init.is_finite() {
        tau_init
    } else {
        ls.tau_init
    };
    let mut used = 1;
    let ft = f(t0);
    let (a, b, c, fb);
    if ft < phi0 {
        let (mut lo, mut mid, mut fmid) = (0.0, t0, ft);
        loop {
            if used >= ls.max_evals {
                return Ok(ArcMin {
                    tau: mid,
                    value: fmid,
                    evals: used,
                    stagnated: false,
                });
            }
            let hi = mid * growth;
            let fhi = f(hi);
            used += 1;
            if fhi >= fmid {
                (a, b, c, fb) = (lo, mid, hi, fmid);
                break;
            }
            lo = mid;
            mid = hi;
            fmid = fhi;
        }
    } else {
        let mut hi = t0;
        loop {
            if used >= ls.max_evals {
                return Ok(ArcMin {
                    tau: 0.0,
                    value: phi0,
                    evals: used,
                    stagnated: true,
                });
            }
            let mid = hi / growth;
            let fmid = f(mid);
            used += 1;
            if fmid < phi0 {
                (a, b, c, fb) = (0.0, mid, hi, fmid);
                break;
            }
            hi = mid;
        }
    }
    let (tau, value, extra) = brent(&mut f, a, b, c, fb, ls.brent_tol, ls.max_evals.saturating_sub(used));
    Ok(ArcMin {
        tau,
        value,
        evals: used + extra,
        stagnated: false,
    })
}

/// Brent's parabolic/golden-section minimization on a bracket `a < b < c`
/// with `f(b) < min(f(a), f(c))`.
fn brent<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    c: f64,
    fb: f64,
    tol: f64,
    budget: usize,
) -> (f64, f64, usize) {
    let (mut a, mut bb) = (a.min(c), a.max(c));
    let (mut x, mut w, mut v) = (b, b, b);
    let (mut fx, mut fw, mut fv) = (fb, fb, fb);
    let (mut d, mut e) = (0.0f64, 0.0f64);
    let mut used = 0;
    while used < budget {
        let xm = 0.5 * (a + bb);
        let tol1 = tol * x.abs() + 1e-300;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (bb - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            if !(p.abs() >= (0.5 * q * etemp).abs() || p <= q * (a - x) || p >= q * (bb - x)) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || bb - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { bb - x };
            d = CGOLD * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = f(u);
        used += 1;
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                bb = x;
            }
            (v, fv) = (w, fw);
            (w, fw) = (x, fx);
            (x, fx) = (u, fu);
        } else {
            if u < x {
                a = u;
            } else {
                bb = u;
            }
            if fu <= fw || w == x {
                (v, fv) = (w, fw);
                (w, fw) = (u, fu);
            } else if fu <= fv || v == x || v == w {
                (v, fv) = (u, fu);
            }
        }
    }
    (x, fx, used)
}

/// Quantities of the previous iteration needed for momentum and transport.
#[derive(Debug, Clone)]
pub struct PreviousStep {
    pub u: Field,
    pub d: Field,
    pub tau: f64,
    pub pg: Field,
    pub pg_sq: f64,
}

impl PreviousStep {
    /// The tangent step `eta = tau d` taken from `u`.
    pub fn eta(&self) -> Field {
        &self.d * self.tau
    }
}

/// One optimization run, advanced an iteration at a time.
pub struct Minimizer<'p> {
    p: &'p ModelParams,
    cfg: MethodConfig,
    solver: RieszSolver,
    u: Field,
    energy: f64,
    n: usize,
    prev: Option<PreviousStep>,
    last_direction: Option<Field>,
    tau_warm: f64,
    warm_g: Option<Field>,
    warm_v: Option<Field>,
    energy_evals: usize,
    start: Instant,
}

impl<'p> Minimizer<'p> {
    /// Sets up a run from `u0`. A zero `u0` enters the sphere through a raw
    /// Sobolev-gradient step, `u = -G(0) / |G(0)|`.
    pub fn new(u0: Field, p: &'p ModelParams, cfg: MethodConfig) -> Result<Self> {
        cfg.validate()?;
        p.validate()?;
        let mut solver = RieszSolver::for_model(cfg.metric, p).with_tolerance(cfg.solver_rel_tol);
        solver.validate()?;
        solver.max_iter = None;
        let mut m = Minimizer {
            p,
            cfg,
            solver,
            energy: 0.0,
            u: u0,
            n: 0,
            prev: None,
            last_direction: None,
            tau_warm: cfg.linesearch.tau_init,
            warm_g: None,
            warm_v: None,
            energy_evals: 0,
            start: Instant::now(),
        };
        if !m.u.is_finite() {
            return Err(GpError::NonFinite("initial guess"));
        }
        if norm_l2(&m.u) == 0.0 {
            let (g, _) = m.solver.solve(&l2_gradient(&m.u, p), None)?;
            let (u, _) = retract_step(&m.u, -1.0, &g)?;
            m.u = u;
        }
        m.energy = m.eval(&m.u.clone());
        Ok(m)
    }

    fn eval(&mut self, u: &Field) -> f64 {
        self.energy_evals += 1;
        energy(u, self.p)
    }

    pub fn state(&self) -> &Field {
        &self.u
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn iterations(&self) -> usize {
        self.n
    }

    pub fn energy_evals(&self) -> usize {
        self.energy_evals
    }

    pub fn config(&self) -> &MethodConfig {
        &self.cfg
    }

    /// State of the previous iteration (CG/RCG only, after at least one step).
    pub fn previous(&self) -> Option<&PreviousStep> {
        self.prev.as_ref()
    }

    /// Search direction used by the last step.
    pub fn last_direction(&self) -> Option<&Field> {
        self.last_direction.as_ref()
    }

    pub fn into_state(self) -> Field {
        self.u
    }

    /// Performs one outer iteration.
    pub fn step(&mut self) -> Result<IterationRecord> {
        let rec = match self.cfg.method {
            Method::Be => self.be_step(),
            _ => self.gradient_step(),
        }?;
        self.n += 1;
        Ok(rec)
    }

    fn wants_momentum(&self) -> bool {
        matches!(self.cfg.method, Method::Cg | Method::Rcg)
    }

    /// `(d, beta)` for CG/RCG; `None` when the momentum is reset.
    fn momentum_direction(&self, pg: &Field, pg_sq: f64) -> Result<Option<(Field, f64)>> {
        let Some(prev) = self.prev.as_ref() else {
            return Ok(None);
        };
        let period = self.cfg.reset_period;
        if period > 0 && self.n.is_multiple_of(period) {
            return Ok(None);
        }
        let kind = self.cfg.transport_kind();
        let eta = prev.eta();
        let td = transport(kind, &prev.u, &eta, &prev.d)?;
        let mut beta = match self.cfg.momentum {
            Momentum::Fr => pg_sq / prev.pg_sq,
            Momentum::Pr => {
                let tpg = transport(kind, &prev.u, &eta, &prev.pg)?;
                self.solver.inner(pg, &(pg - &tpg)).re / prev.pg_sq
            }
        };
        if self.cfg.pr_clamp_nonnegative {
            beta = beta.max(0.0);
        }
        if !beta.is_finite() {
            return Ok(None);
        }
        let d = Field::lin_comb(C::new(-1.0, 0.0), pg, C::new(beta, 0.0), &td);
        // descent test: Re<d, PG>_X < 0
        if self.solver.inner(&d, pg).re >= 0.0 {
            return Ok(None);
        }
        Ok(Some((d, beta)))
    }

    fn line_search(&mut self, d: &Field) -> Result<ArcMin> {
        let u = self.u.clone();
        let p = self.p;
        let on_line = self.cfg.method == Method::Pg;
        let phi = |tau: f64| {
            if on_line {
                let mut w = u.clone();
                w.axpy(C::new(tau, 0.0), d);
                energy(&w, p)
            } else {
                match retract_step(&u, tau, d) {
                    Ok((w, _)) => energy(&w, p),
                    Err(_) => f64::INFINITY,
                }
            }
        };
        let res = brent_arc_min(phi, self.energy, self.tau_warm, &self.cfg.linesearch)?;
        self.energy_evals += res.evals;
        Ok(res)
    }

    fn gradient_step(&mut self) -> Result<IterationRecord> {
        let g2 = l2_gradient(&self.u, self.p);
        let (g, st_g) = self.solver.solve(&g2, self.warm_g.as_ref())?;
        let (vx, st_v) = self.solver.solve(&self.u, self.warm_v.as_ref())?;
        let pg = project_tangent(&g, &self.u, &vx)?;
        let pg_sq = self.solver.inner(&pg, &pg).re;
        if !pg_sq.is_finite() {
            return Err(GpError::NonFinite("projected gradient"));
        }
        let resid = st_g.residual.max(st_v.residual);
        let krylov_iters = st_g.iterations + st_v.iterations;
        self.warm_g = Some(g);
        self.warm_v = Some(vx);

        let steepest = -&pg;
        let (mut d, mut beta, mut restarted) = (steepest.clone(), 0.0, false);
        if self.wants_momentum() {
            match self.momentum_direction(&pg, pg_sq)? {
                Some((dm, b)) => {
                    d = dm;
                    beta = b;
                }
                None => restarted = self.prev.is_some(),
            }
        }
        let evals_before = self.energy_evals;
        let mut arc = self.line_search(&d)?;
        if arc.stagnated && beta != 0.0 {
            d = steepest;
            beta = 0.0;
            restarted = true;
            arc = self.line_search(&d)?;
        }
        if arc.stagnated {
            return Err(GpError::NoDecrease {
                evals: self.energy_evals - evals_before,
            });
        }
        let tau = arc.tau;
        self.tau_warm = tau;

        let (u_new, drift, e_new) = if self.cfg.method == Method::Pg {
            let mut w = self.u.clone();
            w.axpy(C::new(tau, 0.0), &d);
            let drift = (1.0 - norm_l2_sqr(&w)).abs();
            let k = self.cfg.pg_normalize_every;
            if k > 0 && (self.n + 1).is_multiple_of(k) {
                let nw = norm_l2(&w);
                w.scale(1.0 / nw);
                let e = self.eval(&w);
                (w, drift, e)
            } else {
                (w, drift, arc.value)
            }
        } else {
            let (w, drift) = retract_step(&self.u, tau, &d)?;
            (w, drift, arc.value)
        };
        let du = norm_l2(&(&u_new - &self.u));
        let rec = IterationRecord {
            n: self.n + 1,
            energy: e_new,
            rel_de: relative_change(self.energy, e_new),
            du,
            drift,
            tau,
            beta,
            lz: angular_momentum(&u_new),
            resid,
            t_wall: self.start.elapsed().as_secs_f64(),
            grad_norm: pg_sq.sqrt(),
            energy_evals: self.energy_evals - evals_before,
            krylov_iters,
            restarted,
        };
        if self.wants_momentum() {
            self.prev = Some(PreviousStep {
                u: std::mem::replace(&mut self.u, u_new),
                d: d.clone(),
                tau,
                pg,
                pg_sq,
            });
        } else {
            self.u = u_new;
        }
        self.last_direction = Some(d);
        self.energy = e_new;
        Ok(rec)
    }

    /// `((1/dt) + C_trap + c_g |u_n|^2) w - lap w / 2 - i c A^t.grad w = u_n / dt`,
    /// then `u_{n+1} = w / |w|`.
    fn be_step(&mut self) -> Result<IterationRecord> {
        let g = self.u.grid().clone();
        let p = self.p;
        let inv_dt = 1.0 / self.cfg.be_dt;
        let inv_h2 = 1.0 / (g.h() * g.h());
        let un = self.u.values();
        let mut diag = vec![0.0; g.len()];
        par::fill(&mut diag, |k| {
            inv_dt + p.trap.eval(g.x[k], g.y[k]) + p.c_g * un[k].norm_sqr()
        });
        let inv_diag: Vec<f64> = (0..g.len())
            .map(|k| 1.0 / (diag[k] + 0.5 * g.lap_diag[k] * inv_h2))
            .collect();
        let ic = C::new(0.0, p.c_omega);
        let apply = |v: &[C], out: &mut [C]| {
            par::fill(out, |k| {
                v[k] * diag[k] + neg_lap_unscaled(&g, v, k) * (0.5 * inv_h2) - ic * advect_at(&g, v, k)
            })
        };
        let rhs: Vec<C> = un.iter().map(|v| v * inv_dt).collect();
        let mut w = self.u.clone();
        let stats = pcg(
            apply,
            Some(&inv_diag),
            &rhs,
            w.values_mut(),
            CgSettings {
                rel_tol: self.cfg.be_solver_rel_tol,
                max_iter: default_max_iter(g.len()),
            },
        )?;
        let evals_before = self.energy_evals;
        let (u_new, drift) = retract_step(&Field::zeros(&g), 1.0, &w)?;
        let e_new = self.eval(&u_new);
        let rec = IterationRecord {
            n: self.n + 1,
            energy: e_new,
            rel_de: relative_change(self.energy, e_new),
            du: norm_l2(&(&u_new - &self.u)),
            drift,
            tau: self.cfg.be_dt,
            beta: 0.0,
            lz: angular_momentum(&u_new),
            resid: stats.residual,
            t_wall: self.start.elapsed().as_secs_f64(),
            grad_norm: f64::NAN,
            energy_evals: self.energy_evals - evals_before,
            krylov_iters: stats.iterations,
            restarted: false,
        };
        self.u = u_new;
        self.energy = e_new;
        Ok(rec)
    }
}

/// Runs `cfg.method` from `u0`, calling `observe` after every iteration.
pub fn run_observed<F>(u0: Field, p: &ModelParams, cfg: &MethodConfig, mut observe: F) -> RunResult
where
    F: FnMut(&IterationRecord, &Minimizer<'_>),
{
    let fallback = u0.clone();
    let mut m = match Minimizer::new(u0, p, *cfg) {
        Ok(m) => m,
        Err(e) => {
            return RunResult {
                u: fallback,
                records: Vec::new(),
                termination: Termination::Error(e.to_string()),
                energy_evals: 0,
            }
        }
    };
    let mut records = Vec::new();
    let mut termination = Termination::MaxIter;
    while m.iterations() < cfg.max_iter {
        match m.step() {
            Ok(rec) => {
                observe(&rec, &m);
                records.push(rec);
                if check_stop(&records, cfg.eps_stop) {
                    termination = Termination::Converged;
                    break;
                }
            }
            Err(e) => {
                termination = Termination::Error(e.to_string());
                break;
            }
        }
    }
    let energy_evals = m.energy_evals();
    RunResult {
        u: m.into_state(),
        records,
        termination,
        energy_evals,
    }
}

pub fn run(u0: Field, p: &ModelParams, cfg: &MethodConfig) -> RunResult {
    run_observed(u0, p, cfg, |_, _| {})
}

fn with_method(cfg: &MethodConfig, method: Method) -> MethodConfig {
    MethodConfig { method, ..*cfg }
}

pub fn run_pg(u0: Field, p: &ModelParams, cfg: &MethodConfig) -> RunResult {
    run(u0, p, &with_method(cfg, Method::Pg))
}

pub fn run_rg(u0: Field, p: &ModelParams, cfg: &MethodConfig) -> RunResult {
    run(u0, p, &with_method(cfg, Method::Rg))
}

pub fn run_cg(u0: Field, p: &ModelParams, cfg: &MethodConfig) -> RunResult {
    run(u0, p, &with_method(cfg, Method::Cg))
}

pub fn run_rcg(u0: Field, p: &ModelParams, cfg: &MethodConfig) -> RunResult {
    run(u0, p, &with_method(cfg, Method::Rcg))
}

pub fn run_be(u0: Field, p: &ModelParams, cfg: &MethodConfig) -> RunResult {
    run(u0, p, &with_method(cfg, Method::Be))
}
