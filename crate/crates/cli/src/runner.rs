//! Executes resolved runs and writes their artifacts.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;

use gpmin::grid::{norm_h1, norm_l2};
use gpmin::io::save_field;
use gpmin::manufactured::{exact_solution, fit_rates, kappa_estimate, reference_energy, RateFit, RateKind};
use gpmin::model::{angular_momentum, chemical_potential, energy};
use gpmin::optim::{run, write_csv, RunResult};
use gpmin::postprocess::{detect_vortices, export_density, export_phase, Vortex, DEFAULT_THRESHOLD};

use crate::config::{Problem, RunSpec};

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub name: String,
    pub label: Option<String>,
    pub method: String,
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub unknowns: usize,
    pub energy: f64,
    pub lz: f64,
    pub mu: f64,
    pub iterations: usize,
    pub energy_evals: usize,
    pub termination: String,
    pub converged: bool,
    pub wall_time: f64,
    pub max_drift: f64,
}

#[derive(Debug, Serialize)]
struct VortexReport {
    threshold: f64,
    count: usize,
    vortices: Vec<Vortex>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Debug, Serialize)]
struct FitReport {
    /// Fitted on the increments `|u_{n+1} - u_n|` and `|E_{n+1} - E_n|`,
    /// which contract at the same rate as the errors.
    fit: Option<RateFit>,
    sqrt_a_e: Option<f64>,
    /// Condition numbers implied by `a_u` under the gradient and CG rate laws.
    kappa_gradient: Option<f64>,
    kappa_cg: Option<f64>,
    fit_error: Option<String>,
    l2_error: f64,
    h1_error: f64,
    energy: f64,
    energy_exact: f64,
    energy_error: f64,
}

/// Solves one configuration and writes all artifacts into `spec.out`.
pub fn execute(spec: &RunSpec) -> Result<(Summary, RunResult)> {
    let Problem { grid, params, u0 } = spec.build()?;
    fs::create_dir_all(&spec.out).with_context(|| format!("creating {}", spec.out.display()))?;

    let start = Instant::now();
    let result = run(u0, &params, &spec.method);
    let wall_time = start.elapsed().as_secs_f64();

    let out = &spec.out;
    write_csv(
        BufWriter::new(File::create(out.join("diagnostics.csv"))?),
        &result.records,
    )?;
    save_field(&out.join("field.bin"), &result.u)?;
    export_density(&result.u, &out.join("density.pgm"))?;
    export_phase(&result.u, &out.join("phase.pgm"))?;

    let report = match detect_vortices(&result.u, &params, DEFAULT_THRESHOLD) {
        Ok(v) => VortexReport {
            threshold: DEFAULT_THRESHOLD,
            count: v.len(),
            vortices: v,
            error: None,
        },
        Err(e) => VortexReport {
            threshold: DEFAULT_THRESHOLD,
            count: 0,
            vortices: Vec::new(),
            error: Some(e.to_string()),
        },
    };
    write_json(&out.join("vortices.json"), &report)?;

    if let Some(case) = &spec.manufactured {
        let exact = exact_solution(case, &grid)?;
        let err = &result.u - &exact;
        let du: Vec<f64> = result.records.iter().map(|r| r.du).collect();
        let de: Vec<f64> = result
            .records
            .windows(2)
            .map(|w| (w[1].energy - w[0].energy).abs())
            .collect();
        let fit = fit_rates(du.get(1..).unwrap_or(&[]), &de);
        let e = energy(&result.u, &params);
        let e_exact = reference_energy(case)?;
        let report = FitReport {
            sqrt_a_e: fit.as_ref().ok().map(|f| f.a_e.sqrt()),
            kappa_gradient: fit.as_ref().ok().map(|f| kappa_estimate(f.a_u, RateKind::Gradient)),
            kappa_cg: fit
                .as_ref()
                .ok()
                .map(|f| kappa_estimate(f.a_u, RateKind::ConjugateGradient)),
            fit_error: fit.as_ref().err().map(|e| e.to_string()),
            fit: fit.ok(),
            l2_error: norm_l2(&err),
            h1_error: norm_h1(&err),
            energy: e,
            energy_exact: e_exact,
            energy_error: e - e_exact,
        };
        write_json(&out.join("fit.json"), &report)?;
    }

    let summary = Summary {
        name: spec.name.clone(),
        label: spec.label.clone(),
        method: spec.method.method.to_string(),
        nx: grid.nx(),
        ny: grid.ny(),
        h: grid.h(),
        unknowns: grid.len(),
        energy: energy(&result.u, &params),
        lz: angular_momentum(&result.u),
        mu: chemical_potential(&result.u, &params),
        iterations: result.iterations(),
        energy_evals: result.energy_evals,
        termination: result.termination.to_string(),
        converged: result.converged(),
        wall_time,
        max_drift: result.records.iter().map(|r| r.drift).fold(0.0, f64::max),
    };
    write_json(&out.join("summary.json"), &summary)?;
    Ok((summary, result))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}
