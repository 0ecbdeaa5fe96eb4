//! Flat key=value run configuration for `evolve`. Keys mirror the solver
//! configuration fields in lower_snake_case, plus an initial-state block
//! (analytic Gaussian or a state file). `#` starts a comment.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use nsk_core::{
    states, Boundary, Eos, FluidField64, GaussianState, Harmonic, ModelParameters64,
    SolverConfig64,
};

use crate::{csvio, Failure};

fn bad(msg: String) -> Failure {
    Failure::Validation(msg)
}

fn put<T: FromStr>(slot: &mut Option<T>, key: &str, raw: &str, line: usize) -> Result<(), Failure> {
    if slot.is_some() {
        return Err(bad(format!("line {line}: duplicate config key: {key}")));
    }
    match raw.parse() {
        Ok(v) => {
            *slot = Some(v);
            Ok(())
        }
        Err(_) => Err(bad(format!("line {line}: config key {key}: cannot parse '{raw}'"))),
    }
}

/// Parsed but not yet validated run description; `build` turns it into a
/// solver configuration and an initial field.
#[derive(Debug, Default)]
pub struct RunSpec {
    mass: Option<f64>,
    nu: Option<f64>,
    alpha_a: Option<f64>,
    alpha_b: Option<f64>,
    mu: Option<f64>,
    hbar: Option<f64>,
    x_min: Option<f64>,
    x_max: Option<f64>,
    n_cells: Option<usize>,
    dt: Option<f64>,
    t_end: Option<f64>,
    boundary: Option<String>,
    eos_k: Option<f64>,
    eos_gamma: Option<f64>,
    omega: Option<f64>,
    center: Option<f64>,
    rho_floor: Option<f64>,
    diag_stride: Option<usize>,
    snapshot_stride: Option<usize>,
    c_safety: Option<f64>,
    init: Option<String>,
    init_a: Option<f64>,
    init_b: Option<f64>,
    init_x0: Option<f64>,
    init_v0: Option<f64>,
    init_file: Option<PathBuf>,
}

impl RunSpec {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        let mut spec = RunSpec::default();
        for (i, raw_line) in text.lines().enumerate() {
            let n = i + 1;
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("line {n}: expected key=value, got '{line}'")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "mass" => put(&mut spec.mass, key, value, n)?,
                "nu" => put(&mut spec.nu, key, value, n)?,
                "alpha_a" => put(&mut spec.alpha_a, key, value, n)?,
                "alpha_b" => put(&mut spec.alpha_b, key, value, n)?,
                "mu" => put(&mut spec.mu, key, value, n)?,
                "hbar" => put(&mut spec.hbar, key, value, n)?,
                "x_min" => put(&mut spec.x_min, key, value, n)?,
                "x_max" => put(&mut spec.x_max, key, value, n)?,
                "n_cells" => put(&mut spec.n_cells, key, value, n)?,
                "dt" => put(&mut spec.dt, key, value, n)?,
                "t_end" => put(&mut spec.t_end, key, value, n)?,
                "boundary" => put(&mut spec.boundary, key, value, n)?,
                "eos_k" => put(&mut spec.eos_k, key, value, n)?,
                "eos_gamma" => put(&mut spec.eos_gamma, key, value, n)?,
                "omega" => put(&mut spec.omega, key, value, n)?,
                "center" => put(&mut spec.center, key, value, n)?,
                "rho_floor" => put(&mut spec.rho_floor, key, value, n)?,
                "diag_stride" => put(&mut spec.diag_stride, key, value, n)?,
                "snapshot_stride" => put(&mut spec.snapshot_stride, key, value, n)?,
                "c_safety" => put(&mut spec.c_safety, key, value, n)?,
                "init" => put(&mut spec.init, key, value, n)?,
                "init_a" => put(&mut spec.init_a, key, value, n)?,
                "init_b" => put(&mut spec.init_b, key, value, n)?,
                "init_x0" => put(&mut spec.init_x0, key, value, n)?,
                "init_v0" => put(&mut spec.init_v0, key, value, n)?,
                "init_file" => put(&mut spec.init_file, key, value, n)?,
                other => return Err(bad(format!("line {n}: unknown config key: {other}"))),
            }
        }
        Ok(spec)
    }

    fn require<T: Copy>(slot: Option<T>, key: &'static str) -> Result<T, Failure> {
        slot.ok_or_else(|| bad(format!("missing required config key: {key}")))
    }

    /// Resolve defaults, construct the solver configuration, and realize
    /// the initial state on its grid.
    pub fn build(&self) -> Result<(SolverConfig64, FluidField64), Failure> {
        let params = ModelParameters64::new(
            self.mass.unwrap_or(1.0),
            Self::require(self.nu, "nu")?,
            Self::require(self.alpha_a, "alpha_a")?,
            Self::require(self.alpha_b, "alpha_b")?,
            self.mu.unwrap_or(0.0),
            self.hbar.unwrap_or(1.0),
        )?;

        let domain = (Self::require(self.x_min, "x_min")?, Self::require(self.x_max, "x_max")?);
        let mut cfg = SolverConfig64::new(params, domain, Self::require(self.n_cells, "n_cells")?);
        cfg.t_end = Self::require(self.t_end, "t_end")?;
        cfg.dt = self.dt.unwrap_or(0.0);
        cfg.boundary = match self.boundary.as_deref() {
            None | Some("periodic") => Boundary::Periodic,
            Some("reflecting") => Boundary::Reflecting,
            Some(other) => {
                return Err(bad(format!(
                    "config key boundary: expected periodic or reflecting, got '{other}'"
                )))
            }
        };
        cfg.eos = Eos { k: self.eos_k.unwrap_or(0.0), gamma: self.eos_gamma.unwrap_or(1.0) };
        cfg.potential =
            Harmonic { omega: self.omega.unwrap_or(0.0), center: self.center.unwrap_or(0.0) };
        if let Some(f) = self.rho_floor {
            cfg.rho_floor = f;
        }
        if let Some(s) = self.diag_stride {
            cfg.diag_stride = s;
        }
        if let Some(s) = self.snapshot_stride {
            cfg.snapshot_stride = s;
        }
        if let Some(c) = self.c_safety {
            cfg.c_safety = c;
        }
        cfg.validate()?;

        let field = match self.init.as_deref() {
            None | Some("gaussian") => {
                if self.init_file.is_some() {
                    return Err(bad("config key init_file is only valid with init=file".into()));
                }
                let state = GaussianState::new(
                    self.init_a.unwrap_or(1.0),
                    self.init_b.unwrap_or(0.0),
                    self.init_x0.unwrap_or(0.0),
                    self.init_v0.unwrap_or(0.0),
                )?;
                states::sample_on_grid(&state, &cfg.grid())?.field
            }
            Some("file") => {
                let path: &Path = self
                    .init_file
                    .as_deref()
                    .ok_or_else(|| bad("init=file requires init_file".into()))?;
                csvio::read_state(path)?
            }
            Some(other) => {
                return Err(bad(format!("config key init: expected gaussian or file, got '{other}'")))
            }
        };

        Ok((cfg, field))
    }
}
