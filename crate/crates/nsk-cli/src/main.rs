//! `nsk`: command-line front end over the library. One subcommand per
//! computation; scalar results print to standard output as flat JSON,
//! bulk results go to CSV files under `--out`.

mod config;
mod csvio;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use nsk_core::{
    bounds, sde, solver, states, uncertainty, verify, Ensemble64, FluidField64, GaussianState,
    ModelParameters64, NskError, PhaseDiagramCell64,
};

/// Process failure split by exit code: 1 for validation and input errors,
/// 2 for numerical aborts (instability, particle divergence).
pub enum Failure {
    Validation(String),
    Numerical(String),
}

impl From<NskError> for Failure {
    fn from(e: NskError) -> Self {
        match e.exit_code() {
            2 => Failure::Numerical(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "nsk",
    version,
    about = "Uncertainty relations, minimum states, and stochastic dynamics of a viscous capillary fluid"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

/// Model parameters shared by the scalar subcommands.
#[derive(Args)]
struct ParamArgs {
    /// Symmetric mixing weight alpha_A
    #[arg(long)]
    alpha_a: f64,
    /// Forward-backward weight alpha_B
    #[arg(long)]
    alpha_b: f64,
    /// Noise intensity nu
    #[arg(long)]
    nu: f64,
    /// Particle mass M
    #[arg(long)]
    mass: f64,
    /// Planck constant (natural units by default)
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
    /// Constant bulk viscosity mu
    #[arg(long, default_value_t = 0.0)]
    mu: f64,
}

impl ParamArgs {
    fn build(&self) -> Result<ModelParameters64, Failure> {
        Ok(ModelParameters64::new(self.mass, self.nu, self.alpha_a, self.alpha_b, self.mu, self.hbar)?)
    }
}

#[derive(Args)]
struct MinStateArgs {
    /// Built-in parameter set; `quantum` sets nu = hbar/(2M), alpha_A = 0,
    /// alpha_B = 1/2
    #[arg(long, value_parser = ["quantum"], conflicts_with_all = ["alpha_a", "alpha_b", "nu"])]
    preset: Option<String>,
    #[arg(long)]
    alpha_a: Option<f64>,
    #[arg(long)]
    alpha_b: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    mass: f64,
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
    #[arg(long, default_value_t = 0.0)]
    mu: f64,
    /// Gaussian width parameter A (variance 1/(2A))
    #[arg(long = "A", default_value_t = 1.0)]
    a: f64,
    /// Density center
    #[arg(long, default_value_t = 0.0)]
    x0: f64,
    /// Velocity at the center
    #[arg(long, default_value_t = 0.0)]
    v0: f64,
}

#[derive(Args)]
struct SdeArgs {
    /// Drift source: `ground-state` (analytic stationary Gaussian) or
    /// `from-snapshot` (interpolated from a state file)
    #[arg(long, value_parser = ["ground-state", "from-snapshot"])]
    drift: String,
    #[arg(long, default_value_t = 10_000)]
    particles: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    /// State CSV (x,rho,v) for --drift from-snapshot
    #[arg(long, required_if_eq("drift", "from-snapshot"))]
    snapshot: Option<PathBuf>,
    /// Gaussian width parameter A for --drift ground-state
    #[arg(long = "A", default_value_t = 1.0)]
    a: f64,
    /// Gaussian center for --drift ground-state
    #[arg(long, default_value_t = 0.0)]
    x0: f64,
    /// Noise intensity nu
    #[arg(long, default_value_t = 0.5)]
    nu: f64,
    /// Summary rows written after equal step blocks
    #[arg(long, default_value_t = 5)]
    checkpoints: usize,
    /// Histogram bins for the empirical density comparison
    #[arg(long, default_value_t = 64)]
    bins: usize,
    /// Output directory for ensemble.csv
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Derived transport coefficients and momentum spectrum as JSON
    Params(ParamArgs),
    /// Construct the minimum-uncertainty Gaussian state
    MinState(MinStateArgs),
    /// Evaluate the uncertainty inequality for a state file
    Uncertainty {
        /// State CSV with header x,rho,v
        #[arg(long)]
        state_file: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Scan the viscous-improvement phase diagram to CSV
    PhaseDiagram {
        /// Upper end of the capillarity axis k = kappa/nu^2
        #[arg(long, default_value_t = 2.0)]
        k_max: f64,
        /// Upper end of the shear axis s = (xi/nu)^2
        #[arg(long, default_value_t = 4.0)]
        s_max: f64,
        #[arg(long, default_value_t = 201)]
        nk: usize,
        #[arg(long, default_value_t = 201)]
        ns: usize,
        /// Output directory for phase_diagram.csv
        #[arg(long)]
        out: PathBuf,
    },
    /// Minimum product against xi/nu at fixed kappa = nu^2, to CSV
    MinCurve {
        #[arg(long, default_value_t = 3.0)]
        xi_max: f64,
        #[arg(long, default_value_t = 301)]
        n: usize,
        /// Output directory for min_curve.csv
        #[arg(long)]
        out: PathBuf,
    },
    /// Kinematic lower bounds, or media estimates with --water/--vapor
    Bounds {
        /// Particle mass M (kg for --water/--vapor)
        #[arg(long)]
        mass: f64,
        /// Reference noise intensity for the bound chain
        #[arg(long, required_unless_present_any = ["water", "vapor"])]
        nu: Option<f64>,
        #[arg(long, default_value_t = 0.5)]
        alpha_b: f64,
        #[arg(long, default_value_t = 1.0)]
        hbar: f64,
        /// Liquid-water estimate at the tabulated transport values
        #[arg(long, conflicts_with = "vapor")]
        water: bool,
        /// Water-vapor estimate at both tabulated xi readings
        #[arg(long)]
        vapor: bool,
    },
    /// Integrate the fluid equations per a key=value config file
    Evolve {
        #[arg(long)]
        config: PathBuf,
        /// Output directory for diagnostics.csv and snapshot_NNNN.csv
        #[arg(long)]
        out: PathBuf,
    },
    /// Propagate a particle ensemble and compare against its density
    Sde(SdeArgs),
    /// Run the built-in acceptance criteria
    Verify {
        /// Run a single criterion (1..=10) instead of all ten
        #[arg(long)]
        only: Option<usize>,
    },
}

fn main() {
    // Die quietly when stdout closes early (e.g. piping into head); the
    // Rust runtime ignores SIGPIPE and println panics otherwise.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            // One-line diagnostic naming the offending flag or value: join
            // the message block, drop the usage text.
            let msg = e.to_string();
            let mut parts: Vec<&str> = Vec::new();
            for line in msg.lines() {
                let t = line.trim();
                if t.starts_with("Usage:") || (t.is_empty() && !parts.is_empty()) {
                    break;
                }
                if !t.is_empty() {
                    parts.push(t);
                }
            }
            eprintln!("{}", if parts.is_empty() { "error: invalid arguments".into() } else { parts.join(" ") });
            return 1;
        }
    };
    match init_threads().and_then(|()| run(cli.cmd)) {
        Ok(()) => 0,
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            1
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("error: {m}");
            2
        }
    }
}

/// NSK_THREADS caps the worker count for the parallel scans; absent means
/// the library default.
fn init_threads() -> Result<(), Failure> {
    let raw = match std::env::var("NSK_THREADS") {
        Err(std::env::VarError::NotPresent) => return Ok(()),
        Err(std::env::VarError::NotUnicode(_)) => {
            return Err(Failure::Validation("NSK_THREADS: value is not valid unicode".into()))
        }
        Ok(raw) => raw,
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| {
            Failure::Validation(format!("NSK_THREADS: expected a positive thread count, got '{raw}'"))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Validation(format!("NSK_THREADS: {e}")))
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable value"));
}

fn run(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Params(p) => run_params(&p),
        Cmd::MinState(m) => run_min_state(&m),
        Cmd::Uncertainty { state_file, params } => run_uncertainty(&state_file, &params),
        Cmd::PhaseDiagram { k_max, s_max, nk, ns, out } => run_phase_diagram(k_max, s_max, nk, ns, &out),
        Cmd::MinCurve { xi_max, n, out } => run_min_curve(xi_max, n, &out),
        Cmd::Bounds { mass, nu, alpha_b, hbar, water, vapor } => {
            run_bounds(mass, nu, alpha_b, hbar, water, vapor)
        }
        Cmd::Evolve { config, out } => run_evolve(&config, &out),
        Cmd::Sde(args) => run_sde(&args),
        Cmd::Verify { only } => run_verify(only),
    }
}

fn run_params(p: &ParamArgs) -> Result<(), Failure> {
    let params = p.build()?;
    let t = params.derive_transport();
    let (_, det) = params.lagrangian_matrix();
    let spec = params.spectrum();
    print_json(&json!({
        "mass": params.mass(),
        "nu": params.nu(),
        "alpha_a": params.alpha_a(),
        "alpha_b": params.alpha_b(),
        "mu": params.mu(),
        "hbar": params.hbar(),
        "kappa": t.kappa,
        "xi": t.xi,
        "eta_per_density": t.eta_per_density,
        "det_mcal": det,
        "lambda_plus": spec.lambda_plus,
        "lambda_minus": spec.lambda_minus,
    }));
    Ok(())
}

fn run_min_state(m: &MinStateArgs) -> Result<(), Failure> {
    let params = match m.preset.as_deref() {
        Some(_) => ModelParameters64::quantum_preset(m.mass, m.hbar)?,
        None => match (m.alpha_a, m.alpha_b, m.nu) {
            (Some(aa), Some(ab), Some(nu)) => {
                ModelParameters64::new(m.mass, nu, aa, ab, m.mu, m.hbar)?
            }
            _ => {
                return Err(Failure::Validation(
                    "min-state needs --preset quantum or all of --alpha-a, --alpha-b, --nu".into(),
                ))
            }
        },
    };
    let state = states::make_min_uncertainty_state(&params, m.a, m.x0, m.v0)?;
    let (var, std) = states::gaussian_uncertainty_product(&state, &params);
    print_json(&json!({
        "a": state.a,
        "b": state.b,
        "x0": state.x0,
        "v0": state.v0,
        "sigma2_x": state.sigma2_x(),
        "cov_xv": state.cov_xv(),
        "var_product": var,
        "std_product": std,
        "min_std_product": uncertainty::min_std_product(&params),
    }));
    Ok(())
}

fn run_uncertainty(state_file: &std::path::Path, p: &ParamArgs) -> Result<(), Failure> {
    let field = csvio::read_state(state_file)?;
    let params = p.build()?;
    let r = uncertainty::uncertainty_report(&field, &params, None)?;
    println!("t,sigma2_x,sigma2_p,cov_xv,lhs,rhs,std_product,rhs_sqrt,margin,holds");
    println!(
        "{},{},{},{},{},{},{},{},{},{}",
        csvio::fmt(0.0),
        csvio::fmt(r.sigma2_x),
        csvio::fmt(r.sigma2_p),
        csvio::fmt(r.cov_xv),
        csvio::fmt(r.lhs),
        csvio::fmt(r.rhs),
        csvio::fmt(r.std_product),
        csvio::fmt(r.rhs_sqrt),
        csvio::fmt(r.margin),
        r.holds
    );
    Ok(())
}

fn run_phase_diagram(k_max: f64, s_max: f64, nk: usize, ns: usize, out: &std::path::Path) -> Result<(), Failure> {
    // k_max = 0 collapses the k axis to the zero-capillarity line, which
    // the rectangle scan rejects as a degenerate range.
    let cells: Vec<PhaseDiagramCell64> = if k_max == 0.0 {
        if ns < 2 {
            return Err(Failure::Validation("phase-diagram grid needs at least 2 points per axis".into()));
        }
        let den = (ns - 1) as f64;
        (0..ns)
            .map(|i| {
                let s = s_max * (i as f64 / den);
                let (improves_paper, improves_direct) = bounds::improvement_region(0.0, s)?;
                Ok(PhaseDiagramCell64 {
                    k: 0.0,
                    s,
                    min_over_mnu: bounds::min_over_mnu(0.0, s)?,
                    improves_paper,
                    improves_direct,
                })
            })
            .collect::<Result<_, NskError>>()?
    } else {
        bounds::scan_phase_diagram((0.0, k_max), (0.0, s_max), nk, ns)?
    };

    std::fs::create_dir_all(out)
        .map_err(|e| Failure::Validation(format!("{}: {e}", out.display())))?;
    let path = out.join("phase_diagram.csv");
    csvio::write_phase_diagram(&path, &cells)?;
    print_json(&json!({
        "out": path.display().to_string(),
        "n_k": if k_max == 0.0 { 1 } else { nk },
        "n_s": ns,
        "cells": cells.len(),
        "improving_paper": cells.iter().filter(|c| c.improves_paper).count(),
        "improving_direct": cells.iter().filter(|c| c.improves_direct).count(),
    }));
    Ok(())
}

fn run_min_curve(xi_max: f64, n: usize, out: &std::path::Path) -> Result<(), Failure> {
    if n < 2 {
        return Err(Failure::Validation(format!("min-curve needs at least 2 samples, got {n}")));
    }
    let den = (n - 1) as f64;
    let samples: Vec<f64> = (0..n).map(|i| xi_max * (i as f64 / den)).collect();
    let pts = bounds::min_curve(&samples, 1.0, 1.0)?;

    std::fs::create_dir_all(out)
        .map_err(|e| Failure::Validation(format!("{}: {e}", out.display())))?;
    let path = out.join("min_curve.csv");
    csvio::write_min_curve(&path, &pts)?;
    print_json(&json!({
        "out": path.display().to_string(),
        "n": n,
        "xi_max": xi_max,
        "mass": 1.0,
        "nu": 1.0,
    }));
    Ok(())
}

fn run_bounds(mass: f64, nu: Option<f64>, alpha_b: f64, hbar: f64, water: bool, vapor: bool) -> Result<(), Failure> {
    if water {
        let m = bounds::media_estimate(mass, bounds::WATER_XI, bounds::WATER_NU, bounds::HBAR_SI)?;
        print_json(&json!({
            "mass": m.mass,
            "xi": m.xi,
            "nu": m.nu,
            "hbar": bounds::HBAR_SI,
            "std_product": m.std_product,
            "in_units_of_half_hbar": m.in_units_of_half_hbar,
        }));
        return Ok(());
    }
    if vapor {
        let lo = bounds::media_estimate(mass, bounds::VAPOR_XI_LOW, bounds::VAPOR_NU, bounds::HBAR_SI)?;
        let hi = bounds::media_estimate(mass, bounds::VAPOR_XI_HIGH, bounds::VAPOR_NU, bounds::HBAR_SI)?;
        print_json(&json!({
            "mass": mass,
            "nu": bounds::VAPOR_NU,
            "hbar": bounds::HBAR_SI,
            "xi_low": lo.xi,
            "xi_high": hi.xi,
            "std_product_low": lo.std_product,
            "std_product_high": hi.std_product,
            "in_units_of_half_hbar_low": lo.in_units_of_half_hbar,
            "in_units_of_half_hbar_high": hi.in_units_of_half_hbar,
        }));
        return Ok(());
    }
    let nu = nu.expect("clap requires --nu without --water/--vapor");
    let b = bounds::kss_and_kappa_bounds(mass, nu, hbar, alpha_b)?;
    print_json(&json!({
        "mass": mass,
        "nu": nu,
        "hbar": hbar,
        "alpha_b": alpha_b,
        "xi_kss": b.xi_kss,
        "kappa_lb": b.kappa_lb,
        "nu_lb": b.nu_lb,
        "xi_star_max_quantum": b.xi_star_max_quantum,
        "ratio": b.ratio,
    }));
    Ok(())
}

fn run_evolve(config: &std::path::Path, out: &std::path::Path) -> Result<(), Failure> {
    let text = std::fs::read_to_string(config)
        .map_err(|e| Failure::Validation(format!("{}: {e}", config.display())))?;
    let spec = config::RunSpec::parse(&text)?;
    let (cfg, initial) = spec.build()?;

    let traj = solver::evolve(&initial, &cfg)?;

    std::fs::create_dir_all(out)
        .map_err(|e| Failure::Validation(format!("{}: {e}", out.display())))?;
    let diag_path = out.join("diagnostics.csv");
    csvio::write_diagnostics(&diag_path, &traj)?;
    for (i, snap) in traj.snapshots.iter().enumerate() {
        csvio::write_snapshot(&out.join(format!("snapshot_{i:04}.csv")), &snap.field)?;
    }

    let last = traj.rows.last().expect("trajectory always has the initial row");
    print_json(&json!({
        "out": diag_path.display().to_string(),
        "dt": traj.dt,
        "steps": traj.steps,
        "t_end": cfg.t_end,
        "rows": traj.rows.len(),
        "snapshots": traj.snapshots.len(),
        "clipped_mass": last.clipped_mass,
        "final_mass": last.mass,
        "final_std_product": last.report.std_product,
        "holds_all": traj.rows.iter().all(|r| r.report.holds),
    }));
    Ok(())
}

fn sde_rows(
    e0: Ensemble64,
    drift: &(dyn Fn(f64) -> f64 + Sync),
    reference: &FluidField64,
    args: &SdeArgs,
) -> Result<(Vec<csvio::EnsembleRow>, Ensemble64), Failure> {
    let row = |e: &Ensemble64| -> Result<csvio::EnsembleRow, Failure> {
        let cmp = sde::empirical_compare(e, reference, args.bins)?;
        Ok(csvio::EnsembleRow {
            t: e.t,
            n_particles: e.len(),
            mean: e.mean(),
            variance: e.variance(),
            hist_l1_error: cmp.hist_l1_error,
            var_error: cmp.var_error,
            seed: args.seed,
        })
    };

    let mut rows = vec![row(&e0)?];
    let base = args.steps / args.checkpoints;
    let rem = args.steps % args.checkpoints;
    let mut e = e0;
    for c in 0..args.checkpoints {
        let n = base + usize::from(c < rem);
        if n == 0 {
            continue;
        }
        e = sde::propagate_ensemble(&e, drift, args.nu, args.dt, n)?;
        rows.push(row(&e)?);
    }
    Ok((rows, e))
}

fn run_sde(args: &SdeArgs) -> Result<(), Failure> {
    if args.checkpoints == 0 {
        return Err(Failure::Validation("checkpoints must be >= 1".into()));
    }
    if args.steps == 0 {
        return Err(Failure::Validation("steps must be >= 1".into()));
    }

    let (rows, _) = match args.drift.as_str() {
        "ground-state" => {
            // Stationary Gaussian of width A: u_plus = -2 nu A (x - x0),
            // sampled start, so every checkpoint tests the fixed point.
            let state = GaussianState::new(args.a, 0.0, args.x0, 0.0)?;
            let sigma = state.sigma2_x().sqrt();
            let n_grid = 1025usize;
            let dx = 16.0 * sigma / (n_grid - 1) as f64;
            let grid: Vec<f64> =
                (0..n_grid).map(|i| args.x0 - 8.0 * sigma + dx * i as f64).collect();
            let reference = states::sample_on_grid(&state, &grid)?.field;
            let e0 = Ensemble64::gaussian(args.particles, args.a, args.x0, args.seed)?;
            let nu = args.nu;
            let a = args.a;
            let x0 = args.x0;
            let drift = move |x: f64| -2.0 * nu * a * (x - x0);
            sde_rows(e0, &drift, &reference, args)?
        }
        _ => {
            let path = args.snapshot.as_deref().expect("clap requires --snapshot");
            let reference = csvio::read_state(path)?;
            // Only nu enters the drift; the weights just need to be
            // non-degenerate.
            let params = ModelParameters64::new(1.0, args.nu, 0.0, 0.5, 0.0, 1.0)?;
            let df = sde::drift_field(&reference, &params)?;
            let start = uncertainty::expectation(&reference, reference.x())?;
            let e0 = Ensemble64::at_point(args.particles, start, args.seed)?;
            let drift = |x: f64| df.eval(x);
            sde_rows(e0, &drift, &reference, args)?
        }
    };

    std::fs::create_dir_all(&args.out)
        .map_err(|e| Failure::Validation(format!("{}: {e}", args.out.display())))?;
    let path = args.out.join("ensemble.csv");
    csvio::write_ensemble(&path, &rows)?;

    let last = rows.last().expect("at least the initial row");
    print_json(&json!({
        "out": path.display().to_string(),
        "drift": args.drift,
        "particles": args.particles,
        "steps": args.steps,
        "checkpoints": args.checkpoints,
        "dt": args.dt,
        "nu": args.nu,
        "seed": args.seed,
        "bins": args.bins,
        "rows": rows.len(),
        "final_mean": last.mean,
        "final_variance": last.variance,
        "final_hist_l1_error": last.hist_l1_error,
        "final_var_error": last.var_error,
    }));
    Ok(())
}

fn run_verify(only: Option<usize>) -> Result<(), Failure> {
    let ids: Vec<usize> = match only {
        Some(k) if (1..=10).contains(&k) => vec![k],
        Some(k) => {
            return Err(Failure::Validation(format!("--only takes a criterion number 1..=10, got {k}")))
        }
        None => (1..=10).collect(),
    };

    println!("{:>2} {:<34} {:<6} detail", "#", "criterion", "result");
    let mut passed = 0usize;
    let total = ids.len();
    for id in ids {
        let r = verify::criterion(id);
        let verdict = if r.passed { "PASS" } else { "FAIL" };
        println!("{:>2} {:<34} {:<6} {}", r.id, r.name, verdict, r.detail);
        passed += usize::from(r.passed);
    }
    print_json(&json!({
        "total": total,
        "passed": passed,
        "failed": total - passed,
        "all_passed": passed == total,
    }));
    if passed < total {
        return Err(Failure::Validation(format!("{} of {total} criteria failed", total - passed)));
    }
    Ok(())
}
