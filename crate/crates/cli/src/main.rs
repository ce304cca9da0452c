//! `gpmin` experiment runner.

mod config;
mod runner;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use config::{ExperimentConfig, Overrides, RunSpec};
use runner::{execute, Summary};

/// Thread count for the parallel kernels; unset means all cores.
const THREADS_ENV: &str = "GPMIN_THREADS";

#[derive(Parser)]
#[command(
    name = "gpmin",
    version,
    about = "Rotating Gross-Pitaevskii ground states by Riemannian Sobolev gradients"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment file (all of its variants).
    Run {
        config: PathBuf,
        /// Output directory (overrides the file).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Target grid spacing (overrides nodes).
        #[arg(long)]
        grid_h: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// Run several method configurations on one problem and tabulate them.
    Compare {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        #[arg(long, default_value = "out/compare")]
        out: PathBuf,
        #[arg(long)]
        grid_h: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// Run the built-in invariant checks.
    Verify,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    let outcome = match cli.command {
        Command::Run {
            config,
            out,
            grid_h,
            max_iter,
        } => cmd_run(&config, Overrides { out, grid_h, max_iter }),
        Command::Compare {
            configs,
            out,
            grid_h,
            max_iter,
        } => cmd_compare(&configs, &out, grid_h, max_iter),
        Command::Verify => cmd_verify(),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .with_context(|| format!("{THREADS_ENV}={v:?} is not a count"))?;
    if n == 0 {
        bail!("{THREADS_ENV} must be at least 1");
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn print_summary(s: &Summary, spec: &RunSpec) {
    println!(
        "{}: {} on {}x{} (h = {:.4e}), {} iterations, {}; E = {:.10}, Lz = {:.6}, mu = {:.6}, {:.1}s -> {}",
        spec.display_name(),
        s.method,
        s.nx,
        s.ny,
        s.h,
        s.iterations,
        s.termination,
        s.energy,
        s.lz,
        s.mu,
        s.wall_time,
        spec.out.display()
    );
}

/// Returns whether every run converged.
fn cmd_run(path: &Path, ov: Overrides) -> Result<bool> {
    let runs = ExperimentConfig::load(path)?.resolve(&ov)?;
    let mut ok = true;
    for spec in &runs {
        let (s, _) = execute(spec).with_context(|| format!("run {}", spec.display_name()))?;
        print_summary(&s, spec);
        ok &= s.converged;
    }
    Ok(ok)
}

fn same_problem(a: &RunSpec, b: &RunSpec) -> bool {
    a.shape().ok() == b.shape().ok()
        && a.grid.nodes == b.grid.nodes
        && a.grid.h == b.grid.h
        && a.model.c_g == b.model.c_g
        && a.model.c_omega == b.model.c_omega
        && a.model.trap == b.model.trap
        && a.manufactured == b.manufactured
}

fn cmd_compare(paths: &[PathBuf], out: &Path, grid_h: Option<f64>, max_iter: Option<usize>) -> Result<bool> {
    let mut runs = Vec::new();
    for (i, path) in paths.iter().enumerate() {
        let cfg = ExperimentConfig::load(path)?;
        let ov = Overrides {
            out: Some(out.join(format!("{i:02}_{}", cfg.name))),
            grid_h,
            max_iter,
        };
        runs.extend(cfg.resolve(&ov)?);
    }
    if let Some(first) = runs.first() {
        if let Some(other) = runs.iter().find(|r| !same_problem(first, r)) {
            bail!(
                "compare needs one problem; {} and {} differ in grid or model",
                first.display_name(),
                other.display_name()
            );
        }
    }
    // runs share the thread pool one after another so wall times are comparable
    let mut rows = Vec::new();
    for spec in &runs {
        let (s, _) = execute(spec).with_context(|| format!("run {}", spec.display_name()))?;
        print_summary(&s, spec);
        rows.push((spec.display_name(), s));
    }
    fs::create_dir_all(out)?;
    let mut w = BufWriter::new(File::create(out.join("comparison.csv"))?);
    writeln!(w, "config,method,iterations,energy_evals,wall_time,energy,termination")?;
    for (name, s) in &rows {
        writeln!(
            w,
            "{name},{},{},{},{},{},{}",
            s.method, s.iterations, s.energy_evals, s.wall_time, s.energy, s.termination
        )?;
    }
    w.flush()?;
    let table = format_table(&rows);
    print!("{table}");
    fs::write(out.join("comparison.txt"), &table)?;
    Ok(rows.iter().all(|(_, s)| s.converged))
}

fn format_table(rows: &[(String, Summary)]) -> String {
    let header = ["config", "method", "iters", "E evals", "wall [s]", "E", "termination"];
    let cells: Vec<[String; 7]> = rows
        .iter()
        .map(|(name, s)| {
            [
                name.clone(),
                s.method.clone(),
                s.iterations.to_string(),
                s.energy_evals.to_string(),
                format!("{:.2}", s.wall_time),
                format!("{:.10}", s.energy),
                s.termination.clone(),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let line = |row: &[&str]| {
        let parts: Vec<String> = row.iter().zip(&widths).map(|(c, &w)| format!("{c:<w$}")).collect();
        format!("{}\n", parts.join("  ").trim_end())
    };
    let mut s = line(&header);
    for row in &cells {
        let r: Vec<&str> = row.iter().map(String::as_str).collect();
        s.push_str(&line(&r));
    }
    s
}

fn cmd_verify() -> Result<bool> {
    let checks = gpmin::verify::run_all();
    for c in &checks {
        println!("{c}");
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    println!("{passed}/{} checks passed", checks.len());
    Ok(passed == checks.len())
}
