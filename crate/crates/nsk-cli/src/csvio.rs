//! Readers and writers for the fixed CSV schemas: state snapshots
//! (x, rho, v), evolution diagnostics, phase-diagram and curve scans, and
//! ensemble summaries. Floats carry 16 significant digits so files
//! round-trip losslessly through f64.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nsk_core::{FluidField64, PhaseDiagramCell64, Trajectory64};

use crate::Failure;

pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Validation(format!("{}: {e}", path.display()))
}

fn writer(path: &Path) -> Result<BufWriter<File>, Failure> {
    Ok(BufWriter::new(File::create(path).map_err(|e| io_err(path, e))?))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<(), Failure> {
    w.flush().map_err(|e| io_err(path, e))
}

pub fn write_snapshot(path: &Path, field: &FluidField64) -> Result<(), Failure> {
    let mut w = writer(path)?;
    let body = || -> std::io::Result<()> {
        writeln!(w, "x,rho,v")?;
        for ((x, rho), v) in field.x().iter().zip(field.rho()).zip(field.v()) {
            writeln!(w, "{},{},{}", fmt(*x), fmt(*rho), fmt(*v))?;
        }
        Ok(())
    }();
    body.map_err(|e| io_err(path, e))?;
    finish(w, path)
}

pub fn write_diagnostics(path: &Path, traj: &Trajectory64) -> Result<(), Failure> {
    let mut w = writer(path)?;
    let body = || -> std::io::Result<()> {
        writeln!(w, "t,mass,sigma2_x,sigma2_p,cov_xv,lhs,rhs,std_product,margin,holds")?;
        for row in &traj.rows {
            let r = &row.report;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{}",
                fmt(row.t),
                fmt(row.mass),
                fmt(r.sigma2_x),
                fmt(r.sigma2_p),
                fmt(r.cov_xv),
                fmt(r.lhs),
                fmt(r.rhs),
                fmt(r.std_product),
                fmt(r.margin),
                r.holds
            )?;
        }
        Ok(())
    }();
    body.map_err(|e| io_err(path, e))?;
    finish(w, path)
}

pub fn write_phase_diagram(path: &Path, cells: &[PhaseDiagramCell64]) -> Result<(), Failure> {
    let mut w = writer(path)?;
    let body = || -> std::io::Result<()> {
        writeln!(w, "k,s,min_over_mnu,improves_paper,improves_direct")?;
        for c in cells {
            writeln!(
                w,
                "{},{},{},{},{}",
                fmt(c.k),
                fmt(c.s),
                fmt(c.min_over_mnu),
                c.improves_paper,
                c.improves_direct
            )?;
        }
        Ok(())
    }();
    body.map_err(|e| io_err(path, e))?;
    finish(w, path)
}

pub fn write_min_curve(path: &Path, pts: &[(f64, f64)]) -> Result<(), Failure> {
    let mut w = writer(path)?;
    let body = || -> std::io::Result<()> {
        writeln!(w, "xi_over_nu,std_product")?;
        for (u, p) in pts {
            writeln!(w, "{},{}", fmt(*u), fmt(*p))?;
        }
        Ok(())
    }();
    body.map_err(|e| io_err(path, e))?;
    finish(w, path)
}

pub struct EnsembleRow {
    pub t: f64,
    pub n_particles: usize,
    pub mean: f64,
    pub variance: f64,
    pub hist_l1_error: f64,
    pub var_error: f64,
    pub seed: u64,
}

pub fn write_ensemble(path: &Path, rows: &[EnsembleRow]) -> Result<(), Failure> {
    let mut w = writer(path)?;
    let body = || -> std::io::Result<()> {
        writeln!(w, "t,n_particles,mean,variance,hist_l1_error,var_error,seed")?;
        for r in rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                fmt(r.t),
                r.n_particles,
                fmt(r.mean),
                fmt(r.variance),
                fmt(r.hist_l1_error),
                fmt(r.var_error),
                r.seed
            )?;
        }
        Ok(())
    }();
    body.map_err(|e| io_err(path, e))?;
    finish(w, path)
}

/// State file with header `x,rho,v` and one comma-separated f64 triple per
/// line. Field validation (uniform grid, normalized mass) happens in the
/// core constructor.
pub fn read_state(path: &Path) -> Result<FluidField64, Failure> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut lines = BufReader::new(file).lines();

    let header = match lines.next() {
        Some(h) => h.map_err(|e| io_err(path, e))?,
        None => return Err(Failure::Validation(format!("{}: empty file", path.display()))),
    };
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols != ["x", "rho", "v"] {
        return Err(Failure::Validation(format!(
            "{}: expected header 'x,rho,v', got '{}'",
            path.display(),
            header.trim()
        )));
    }

    let mut x = Vec::new();
    let mut rho = Vec::new();
    let mut v = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Failure::Validation(format!(
                "{}: line {}: expected 3 columns, got {}",
                path.display(),
                i + 2,
                parts.len()
            )));
        }
        let mut vals = [0.0f64; 3];
        for (slot, raw) in vals.iter_mut().zip(&parts) {
            *slot = raw.parse().map_err(|_| {
                Failure::Validation(format!(
                    "{}: line {}: cannot parse '{raw}' as a number",
                    path.display(),
                    i + 2
                ))
            })?;
        }
        x.push(vals[0]);
        rho.push(vals[1]);
        v.push(vals[2]);
    }

    FluidField64::new(x, rho, v).map_err(Failure::from)
}
