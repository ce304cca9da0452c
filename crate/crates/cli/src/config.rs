//! Experiment configuration files.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use gpmin::manufactured::ManufacturedCase;
use gpmin::model::{initial_guess, perturb, tf_radius, InitialGuess};
use gpmin::optim::MethodConfig;
use gpmin::{Field, Grid, ModelParams, Shape, Trap};

/// Top-level experiment file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    /// Output directory; defaults to `out/<name>`.
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    pub grid: GridConfig,
    pub model: ModelConfig,
    pub manufactured: Option<ManufacturedConfig>,
    #[serde(default)]
    pub method: MethodConfig,
    #[serde(default = "default_guess")]
    pub initial_guess: InitialGuess,
    /// Relative amplitude of seeded noise added to the initial guess.
    #[serde(default)]
    pub perturbation: f64,
    /// Runs of the same experiment with a few parameters changed.
    #[serde(default, rename = "variant")]
    pub variants: Vec<Variant>,
}

fn default_guess() -> InitialGuess {
    InitialGuess::Zero
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Explicit domain; mutually exclusive with `tf_factor`.
    pub shape: Option<Shape>,
    /// Disk of radius `tf_factor * R_TF`.
    pub tf_factor: Option<f64>,
    /// Nodes across the bounding box; mutually exclusive with `h`.
    pub nodes: Option<usize>,
    pub h: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default)]
    pub c_g: f64,
    #[serde(default)]
    pub c_omega: f64,
    #[serde(default)]
    pub trap: Trap,
}

/// Manufactured runs take the domain radius from here and add the source.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManufacturedConfig {
    pub m: u32,
    pub radius: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variant {
    pub label: String,
    pub c_omega: Option<f64>,
    pub c_g: Option<f64>,
    /// Anisotropy of an anisotropic trap.
    pub epsilon: Option<f64>,
    pub nodes: Option<usize>,
}

/// Command-line overrides applied after parsing.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub grid_h: Option<f64>,
    pub max_iter: Option<usize>,
}

/// One fully resolved solve.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub name: String,
    pub label: Option<String>,
    pub out: PathBuf,
    pub seed: u64,
    pub grid: GridConfig,
    pub model: ModelConfig,
    pub manufactured: Option<ManufacturedCase>,
    pub method: MethodConfig,
    pub initial_guess: InitialGuess,
    pub perturbation: f64,
}

/// Problem assembled on a concrete grid.
pub struct Problem {
    pub grid: Arc<Grid>,
    pub params: ModelParams,
    pub u0: Field,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Applies overrides, expands variants and validates every run.
    pub fn resolve(&self, ov: &Overrides) -> Result<Vec<RunSpec>> {
        let out = ov
            .out
            .clone()
            .or_else(|| self.output.clone())
            .unwrap_or_else(|| PathBuf::from("out").join(&self.name));
        let mut method = self.method;
        if let Some(n) = ov.max_iter {
            method.max_iter = n;
        }
        let mut grid = self.grid.clone();
        if let Some(h) = ov.grid_h {
            grid.h = Some(h);
            grid.nodes = None;
        }
        let base = RunSpec {
            name: self.name.clone(),
            label: None,
            out: out.clone(),
            seed: self.seed,
            grid,
            model: self.model.clone(),
            manufactured: self.manufactured.map(|m| ManufacturedCase {
                m: m.m,
                radius: m.radius,
                c_g: self.model.c_g,
                c_omega: self.model.c_omega,
            }),
            method,
            initial_guess: self.initial_guess.clone(),
            perturbation: self.perturbation,
        };
        let runs = if self.variants.is_empty() {
            vec![base]
        } else {
            let mut seen = std::collections::HashSet::new();
            let mut runs = Vec::new();
            for v in &self.variants {
                if !seen.insert(v.label.as_str()) {
                    bail!("duplicate variant label {:?}", v.label);
                }
                runs.push(base.with_variant(v, ov.grid_h.is_some())?);
            }
            runs
        };
        for r in &runs {
            r.validate()?;
        }
        Ok(runs)
    }
}

impl RunSpec {
    fn with_variant(&self, v: &Variant, h_overridden: bool) -> Result<RunSpec> {
        if v.label.is_empty() || v.label.contains(['/', '\\']) || v.label.starts_with('.') {
            bail!("variant label {:?} is not a plain directory name", v.label);
        }
        let mut r = self.clone();
        r.label = Some(v.label.clone());
        r.out = self.out.join(&v.label);
        if let Some(w) = v.c_omega {
            r.model.c_omega = w;
            if let Trap::Anisotropic { c_omega, .. } = &mut r.model.trap {
                *c_omega = w;
            }
        }
        if let Some(g) = v.c_g {
            r.model.c_g = g;
        }
        if let Some(e) = v.epsilon {
            match &mut r.model.trap {
                Trap::Anisotropic { epsilon, .. } => *epsilon = e,
                _ => bail!("variant {:?} sets epsilon but the trap is not anisotropic", v.label),
            }
        }
        if let (Some(n), false) = (v.nodes, h_overridden) {
            r.grid.nodes = Some(n);
            r.grid.h = None;
        }
        if let Some(case) = &mut r.manufactured {
            case.c_g = r.model.c_g;
            case.c_omega = r.model.c_omega;
        }
        Ok(r)
    }

    pub fn display_name(&self) -> String {
        match &self.label {
            Some(l) => format!("{}/{l}", self.name),
            None => self.name.clone(),
        }
    }

    /// Checks everything that does not need a grid.
    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        match (g.nodes, g.h) {
            (Some(_), Some(_)) => bail!("grid: give either nodes or h, not both"),
            (None, None) => bail!("grid: nodes or h is required"),
            (Some(n), None) if n < 5 => bail!("grid: nodes = {n} is too small"),
            (None, Some(h)) if !(h.is_finite() && h > 0.0) => bail!("grid: h = {h} must be positive"),
            _ => {}
        }
        let explicit = g.shape.is_some();
        match (&self.manufactured, explicit, g.tf_factor) {
            (Some(_), false, None) => {}
            (Some(_), _, _) => bail!("manufactured runs take their domain from [manufactured].radius"),
            (None, true, None) => g.shape.unwrap().validate()?,
            (None, false, Some(f)) if f.is_finite() && f > 0.0 => {}
            (None, false, Some(f)) => bail!("grid: tf_factor = {f} must be positive"),
            (None, true, Some(_)) => bail!("grid: give either shape or tf_factor, not both"),
            (None, false, None) => bail!("grid: shape or tf_factor is required"),
        }
        self.params_without_source().validate()?;
        if let Some(case) = &self.manufactured {
            case.validate()?;
            if self.model.trap != Trap::isotropic() {
                bail!("manufactured runs use the isotropic trap r^2/2");
            }
        }
        self.method.validate()?;
        if !(self.perturbation.is_finite() && self.perturbation >= 0.0) {
            bail!("perturbation = {} must be non-negative", self.perturbation);
        }
        Ok(())
    }

    fn params_without_source(&self) -> ModelParams {
        ModelParams::new(self.model.c_g, self.model.c_omega, self.model.trap)
    }

    pub fn shape(&self) -> Result<Shape> {
        if let Some(case) = &self.manufactured {
            return Ok(case.shape());
        }
        if let Some(s) = self.grid.shape {
            return Ok(s);
        }
        let f = self.grid.tf_factor.expect("validated");
        Ok(Shape::disk(f * tf_radius(&self.params_without_source())?))
    }

    pub fn build_grid(&self) -> Result<Arc<Grid>> {
        let shape = self.shape()?;
        Ok(match (self.grid.nodes, self.grid.h) {
            (Some(n), _) => Grid::with_nodes(shape, n)?,
            (None, Some(h)) => Grid::build(shape, h)?,
            (None, None) => unreachable!("validated"),
        })
    }

    pub fn build(&self) -> Result<Problem> {
        let grid = self.build_grid()?;
        let params = match &self.manufactured {
            Some(case) => case.model(&grid)?,
            None => self.params_without_source(),
        };
        let mut u0 = initial_guess(&self.initial_guess, &params, &grid)?;
        if self.perturbation > 0.0 {
            if self.initial_guess == InitialGuess::Zero {
                bail!("perturbation needs a nonzero initial guess");
            }
            u0 = perturb(&u0, self.perturbation, self.seed)?;
        }
        Ok(Problem { grid, params, u0 })
    }
}
