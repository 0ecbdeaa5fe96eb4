//! Runnable acceptance checks: ten numbered criteria, each with a hard
//! wall-clock budget, returning pass/fail plus a one-line numeric detail.
//!
//! Everything here runs in f64 and re-derives its expectations from closed
//! forms or frozen reference values; nothing is read from disk. A criterion
//! passes only if the science check succeeds within its budget.

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bounds;
use crate::params::ModelParameters;
use crate::sde::{self, Ensemble};
use crate::solver::{self, Eos, Harmonic, SolverConfig};
use crate::states::{self, CoherentSpec, GaussianState};
use crate::uncertainty;

/// Wall-clock budget per criterion, seconds.
pub const BUDGET_SECONDS: [f64; 10] = [1.0, 10.0, 1.0, 5.0, 1.0, 60.0, 120.0, 60.0, 5.0, 1.0];

const NAMES: [&str; 10] = [
    "quantum coherent saturation",
    "viscous minimum-state saturation",
    "minimum curve landmarks",
    "improvement phase diagram",
    "media magnitude estimates",
    "stationary profile fidelity",
    "viscous trajectory diagnostics",
    "ensemble relaxation statistics",
    "transport structural identities",
    "kinematic lower bounds",
];

/// Outcome of one criterion run.
#[derive(Debug, Clone)]
pub struct CriterionReport {
    /// 1-based criterion number.
    pub id: usize,
    pub name: &'static str,
    /// Science check passed and the run stayed inside its budget.
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

/// Runs one criterion. Panics if `id` is outside 1..=10.
pub fn criterion(id: usize) -> CriterionReport {
    assert!((1..=10).contains(&id), "criterion id must be in 1..=10");
    let start = Instant::now();
    let (ok, detail) = match id {
        1 => quantum_saturation(),
        2 => min_state_saturation(),
        3 => min_curve_landmarks(),
        4 => phase_diagram(),
        5 => media_estimates(),
        6 => stationary_fidelity(),
        7 => viscous_trajectory(),
        8 => ensemble_relaxation(),
        9 => structural_identities(),
        _ => kinematic_bounds(),
    };
    let seconds = start.elapsed().as_secs_f64();
    let budget = BUDGET_SECONDS[id - 1];
    CriterionReport {
        id,
        name: NAMES[id - 1],
        passed: ok && seconds < budget,
        detail: format!("{detail} [{seconds:.2}s / {budget:.0}s]"),
        seconds,
    }
}

/// Runs all ten criteria in order.
pub fn run_all() -> Vec<CriterionReport> {
    (1..=10).map(criterion).collect()
}

/// Uniform nodes from lo to hi inclusive; same arithmetic as the solver grid.
pub(crate) fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let dx = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + dx * i as f64).collect()
}

/// 1: the coherent-state map in the zero-viscosity limit saturates the
/// inequality, bitwise in closed form and to 1e-8 through grid quadrature.
fn quantum_saturation() -> (bool, String) {
    let p = ModelParameters::<f64>::quantum_preset(1.0, 1.0).expect("quantum preset");
    let spec = CoherentSpec { c: 1.0, alpha_r: 0.4, alpha_i: -0.3 };
    let state = states::from_coherent_state(&spec, 1.0, 1.0).expect("coherent map");
    let (_, closed) = states::gaussian_uncertainty_product(&state, &p);
    let half_hbar = 0.5 * p.hbar();
    let exact = closed == half_hbar;
    let sigma = state.sigma2_x().sqrt();
    let grid = linspace(state.x0 - 8.0 * sigma, state.x0 + 8.0 * sigma, 2049);
    let field = states::sample_on_grid(&state, &grid).expect("sampling").field;
    let report = uncertainty::uncertainty_report(&field, &p, None).expect("report");
    let quad_err = (report.std_product - half_hbar).abs();
    let ok = exact && quad_err <= 1e-8 && report.holds;
    (
        ok,
        format!(
            "closed product {closed} (bitwise hbar/2: {exact}), grid error {quad_err:.2e} <= 1e-8, holds {}",
            report.holds
        ),
    )
}

/// 2: gradient-locked Gaussian states hit the viscous minimum for 1000
/// random parameter draws, closed form to 1e-12 and quadrature to 1e-6.
fn min_state_saturation() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC2);
    let mut worst_closed = 0.0f64;
    let mut worst_quad = 0.0f64;
    for _ in 0..1000 {
        let nu: f64 = rng.gen_range(0.5..2.0);
        let mass: f64 = rng.gen_range(0.5..2.0);
        let (kappa, xi) = loop {
            let k: f64 = rng.gen_range(0.0..4.0);
            let u: f64 = rng.gen_range(0.0..3.0);
            let (kap, x) = (k * nu * nu, u * nu);
            // keep the minimum away from 0 so relative errors stay meaningful
            if (kap - x * x).abs() > 0.01 * nu * nu {
                break (kap, x);
            }
        };
        let p = ModelParameters::from_transport(mass, nu, kappa, xi, 0.0, 1.0).expect("transport");
        let a: f64 = rng.gen_range(0.5..2.0);
        let x0 = rng.gen_range(-1.0..1.0);
        let v0 = rng.gen_range(-1.0..1.0);
        let state = states::make_min_uncertainty_state(&p, a, x0, v0).expect("min state");
        let (var, std) = states::gaussian_uncertainty_product(&state, &p);
        let target = uncertainty::min_std_product(&p);
        worst_closed = worst_closed.max((std - target).abs() / target);
        let sigma = state.sigma2_x().sqrt();
        let grid = linspace(x0 - 8.0 * sigma, x0 + 8.0 * sigma, 1025);
        let field = states::sample_on_grid(&state, &grid).expect("sampling").field;
        let report = uncertainty::uncertainty_report(&field, &p, None).expect("report");
        worst_quad = worst_quad.max((report.lhs - var).abs() / var);
    }
    let ok = worst_closed <= 1e-12 && worst_quad <= 1e-6;
    (
        ok,
        format!(
            "1000 draws: worst closed rel {worst_closed:.2e} <= 1e-12, worst grid rel {worst_quad:.2e} <= 1e-6"
        ),
    )
}

/// 3: the minimum curve returns M nu at ratio 0, zero at ratio 1, M nu
/// again at sqrt 3 (to ulp; squaring the nearest double to sqrt 3 lands one
/// ulp shy of 3), and is V-shaped across [0, 2].
fn min_curve_landmarks() -> (bool, String) {
    let (mass, nu) = (2.0, 0.25);
    let mnu = mass * nu;
    let pts = bounds::min_curve(&[0.0, 1.0, 3.0f64.sqrt()], mass, nu).expect("curve");
    let end0 = pts[0].1 == mnu;
    let mid = pts[1].1 == 0.0;
    let rel3 = (pts[2].1 - mnu).abs() / mnu;
    let root3_ok = rel3 <= 4.0 * f64::EPSILON;
    let us: Vec<f64> = (0..=200).map(|i| 2.0 * (i as f64) / 200.0).collect();
    let curve = bounds::min_curve(&us, mass, nu).expect("curve");
    let shape = curve.windows(2).all(|w| {
        let ((_, f0), (u1, f1)) = (w[0], w[1]);
        if u1 <= 1.0 {
            f1 < f0
        } else {
            f1 > f0
        }
    });
    let ok = end0 && mid && root3_ok && shape;
    (
        ok,
        format!(
            "f(0)=Mnu bitwise {end0}, f(1)=0 bitwise {mid}, f(sqrt3) rel {rel3:.2e} <= 4eps, V-shape {shape}"
        ),
    )
}

/// 4: a 201x201 scan reproduces the improvement window per row, the window
/// at k=1 is (0, sqrt 3) bitwise, and at k=1 the window predicate agrees
/// with the direct minimum comparison at every sampled s.
fn phase_diagram() -> (bool, String) {
    let (n_k, n_s) = (201usize, 201usize);
    let cells = bounds::scan_phase_diagram((0.0f64, 2.0), (0.0, 4.0), n_k, n_s).expect("scan");
    let mut ok = cells.len() == n_k * n_s;
    let (lo1, hi1) = bounds::xi_star_paper(1.0f64).expect("window");
    let window_exact = lo1 == 0.0 && hi1 == 3.0f64.sqrt();
    ok &= window_exact;
    let mut contiguous = true;
    let mut edges_ok = true;
    for row in 0..n_k {
        let cells_row = &cells[row * n_s..(row + 1) * n_s];
        let k = cells_row[0].k;
        let (lo, hi) = bounds::xi_star_paper(k).expect("window");
        let (lo2, hi2) = (lo * lo, hi * hi);
        let first = cells_row.iter().position(|c| c.improves_paper);
        let last = cells_row.iter().rposition(|c| c.improves_paper);
        match (first, last) {
            (Some(f), Some(l)) => {
                contiguous &= cells_row[f..=l].iter().all(|c| c.improves_paper);
                edges_ok &= cells_row[f].s > lo2 && (f == 0 || cells_row[f - 1].s <= lo2);
                edges_ok &= cells_row[l].s < hi2 && (l == n_s - 1 || cells_row[l + 1].s >= hi2);
            }
            // only the k=0 row has an empty window inside the sampled range
            _ => edges_ok &= k == 0.0,
        }
    }
    let row1 = &cells[(n_k / 2) * n_s..(n_k / 2 + 1) * n_s];
    let k1_exact = row1[0].k == 1.0;
    let agreement = row1.iter().all(|c| c.improves_paper == c.improves_direct);
    ok &= contiguous && edges_ok && k1_exact && agreement;
    let marked = cells.iter().filter(|c| c.improves_paper).count();
    (
        ok,
        format!(
            "{marked} improving cells; window(1)=(0,sqrt3) bitwise {window_exact}; rows contiguous {contiguous}, edges bracket {edges_ok}; k=1 sampled exactly {k1_exact}, predicates agree there {agreement}"
        ),
    )
}

/// 5: molecular-scale estimates; the second vapor reading reproduces the
/// quoted 60x within a factor 1.3.
fn media_estimates() -> (bool, String) {
    let w = bounds::media_estimate(bounds::WATER_MASS_KG, bounds::WATER_XI, bounds::WATER_NU, bounds::HBAR_SI)
        .expect("water");
    let lo = bounds::media_estimate(bounds::WATER_MASS_KG, bounds::VAPOR_XI_LOW, bounds::VAPOR_NU, bounds::HBAR_SI)
        .expect("vapor low");
    let hi = bounds::media_estimate(bounds::WATER_MASS_KG, bounds::VAPOR_XI_HIGH, bounds::VAPOR_NU, bounds::HBAR_SI)
        .expect("vapor high");
    let water_ok = (w.in_units_of_half_hbar - 569.0).abs() <= 1.0;
    let lo_ok = (lo.in_units_of_half_hbar - 0.512).abs() <= 0.01;
    let hi_ok = (hi.in_units_of_half_hbar - 51.18).abs() <= 0.1;
    let factor = 60.0 / hi.in_units_of_half_hbar;
    let factor_ok = (1.0 / 1.3..=1.3).contains(&factor);
    let ok = water_ok && lo_ok && hi_ok && factor_ok;
    (
        ok,
        format!(
            "water {:.1} (~569), vapor {:.3} and {:.2} per reading, quoted 60x matched within {:.3}x",
            w.in_units_of_half_hbar,
            lo.in_units_of_half_hbar,
            hi.in_units_of_half_hbar,
            factor.max(1.0 / factor)
        ),
    )
}

/// 6: capillary stationary profiles: the stationarity residual decays at
/// second order in dx, and evolving the profile to t=5 moves its variance
/// by less than 1e-6 relative.
fn stationary_fidelity() -> (bool, String) {
    let p = ModelParameters::<f64>::quantum_preset(1.0, 1.0).expect("preset");
    let kappa = p.derive_transport().kappa;
    let mut ok = true;
    let mut orders = [0.0f64; 4];
    for (slot, (c_pre, half_span)) in [(0.0, 8.0), (1.0, 12.0)].into_iter().enumerate() {
        let state = states::euler_korteweg_stationary(1.0, c_pre, kappa, 1.0).expect("stationary");
        let mut res = [0.0f64; 3];
        for (i, n) in [1025usize, 2049, 4097].into_iter().enumerate() {
            let mut cfg = SolverConfig::new(p, (-half_span, half_span), n);
            cfg.eos = Eos { k: c_pre, gamma: 1.0 };
            cfg.potential = Harmonic { omega: 1.0, center: 0.0 };
            let field = states::sample_on_grid(&state, &cfg.grid()).expect("sample").field;
            res[i] = solver::stationarity_residual(&field, &cfg).expect("residual");
        }
        orders[2 * slot] = (res[0] / res[1]).log2();
        orders[2 * slot + 1] = (res[1] / res[2]).log2();
        ok &= orders[2 * slot] >= 1.9 && orders[2 * slot + 1] >= 1.9;
    }
    let mut drifts = [0.0f64; 2];
    for (slot, (c_pre, half_span, n)) in [(0.0, 8.0, 513usize), (1.0, 12.0, 1025)].into_iter().enumerate() {
        let state = states::euler_korteweg_stationary(1.0, c_pre, kappa, 1.0).expect("stationary");
        let mut cfg = SolverConfig::new(p, (-half_span, half_span), n);
        cfg.eos = Eos { k: c_pre, gamma: 1.0 };
        cfg.potential = Harmonic { omega: 1.0, center: 0.0 };
        cfg.t_end = 5.0;
        cfg.diag_stride = 200;
        let field = states::sample_on_grid(&state, &cfg.grid()).expect("sample").field;
        let traj = solver::evolve(&field, &cfg).expect("evolve");
        let v0 = traj.rows[0].report.sigma2_x;
        drifts[slot] = traj
            .rows
            .iter()
            .map(|r| (r.report.sigma2_x / v0 - 1.0).abs())
            .fold(0.0, f64::max);
        ok &= drifts[slot] <= 1e-6;
    }
    (
        ok,
        format!(
            "residual orders ({:.2},{:.2}) pressureless, ({:.2},{:.2}) isothermal; variance drift {:.1e} / {:.1e} <= 1e-6",
            orders[0], orders[1], orders[2], orders[3], drifts[0], drifts[1]
        ),
    )
}

/// 7: a capillarity-free viscous run conserves mass to 1e-10, satisfies the
/// inequality in every diagnostic row, and its uncertainty product falls
/// below the initial value within the first tenth of the run.
fn viscous_trajectory() -> (bool, String) {
    let p = ModelParameters::<f64>::natural(0.1, 0.0, 1.0).expect("params");
    let mut cfg = SolverConfig::new(p, (-14.0, 14.0), 1025);
    cfg.eos = Eos { k: 1.0, gamma: 5.0 / 3.0 };
    cfg.t_end = 2.0;
    cfg.diag_stride = 64;
    let state = GaussianState::new(1.0, 0.0, 0.0, 0.0).expect("state");
    let field = states::sample_on_grid(&state, &cfg.grid()).expect("sample").field;
    let traj = solver::evolve(&field, &cfg).expect("evolve");
    let m0 = traj.rows[0].mass;
    let mass_drift = traj.rows.iter().map(|r| (r.mass - m0).abs()).fold(0.0, f64::max);
    let all_hold = traj.rows.iter().all(|r| r.report.holds);
    let sp0 = traj.rows[0].report.std_product;
    let early: Vec<f64> = traj
        .rows
        .iter()
        .filter(|r| r.t > 0.0 && r.t <= 0.1 * cfg.t_end)
        .map(|r| r.report.std_product)
        .collect();
    let early_drop = !early.is_empty() && early.iter().all(|&sp| sp < sp0);
    let ok = mass_drift <= 1e-10 && all_hold && early_drop;
    (
        ok,
        format!(
            "mass drift {mass_drift:.1e} <= 1e-10; holds in all {} rows; product below start in the first tenth ({} rows checked)",
            traj.rows.len(),
            early.len()
        ),
    )
}

/// 8: overdamped harmonic ensembles track the Ornstein-Uhlenbeck variance
/// law within 3 standard errors at five checkpoints, from a point start and
/// from a stationary start.
fn ensemble_relaxation() -> (bool, String) {
    let n = 100_000usize;
    let nu = 0.5;
    let dt = 1e-3;
    let se = 0.5 * (2.0 / (n as f64 - 1.0)).sqrt();
    let drift = |x: f64| -x;
    let mut ok = true;

    let mut e = Ensemble::at_point(n, 0.0, 0x0815).expect("ensemble");
    let mut worst_relax = 0.0f64;
    for step in 1..=5 {
        e = sde::propagate_ensemble(&e, drift, nu, dt, 200).expect("propagate");
        let t = 0.2 * step as f64;
        let want = 0.5 * (1.0 - (-2.0 * t).exp());
        let se_t = se * (want / 0.5);
        let dev = (e.variance() - want).abs() / se_t;
        ok &= dev <= 3.0;
        worst_relax = worst_relax.max(dev);
    }

    let mut s = Ensemble::gaussian(n, 1.0, 0.0, 0x0816).expect("ensemble");
    let mut worst_stat = 0.0f64;
    for _ in 0..5 {
        s = sde::propagate_ensemble(&s, drift, nu, dt, 200).expect("propagate");
        let dev = (s.variance() - 0.5).abs() / se;
        ok &= dev <= 3.0;
        worst_stat = worst_stat.max(dev);
    }
    (
        ok,
        format!("worst deviation {worst_relax:.2} se relaxing, {worst_stat:.2} se stationary (both <= 3)"),
    )
}

/// 9: transport identities hold to 1e-12 (normalized) over 1e4 random
/// draws, and the two degenerate weight pairs are rejected.
fn structural_identities() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC9);
    let mut worst = 0.0f64;
    let mut accepted = 0usize;
    while accepted < 10_000 {
        let alpha_a: f64 = rng.gen_range(0.0..0.5);
        let alpha_b: f64 = rng.gen_range(0.0..3.0);
        let nu: f64 = rng.gen_range(0.1..10.0);
        let p = match ModelParameters::<f64>::new(1.0, nu, alpha_a, alpha_b, 0.0, 1.0) {
            Ok(p) => p,
            Err(_) => continue,
        };
        accepted += 1;
        let t = p.derive_transport();
        let (_, det) = p.lagrangian_matrix();
        let s = p.spectrum();
        let nu2 = nu * nu;
        let xi2 = t.xi * t.xi;
        let scale = 1.0 + t.kappa + xi2 + nu2;
        let det_id = (t.kappa - xi2 - 4.0 * nu2 * det).abs() / scale;
        let k = t.kappa / nu2;
        let r2 = xi2 / nu2;
        let trace_id = (s.lambda_plus + s.lambda_minus - (1.0 + k)).abs() / (1.0 + k);
        let prod_id = (s.lambda_plus * s.lambda_minus - (k - r2)).abs() / (1.0 + k + r2);
        worst = worst.max(det_id).max(trace_id).max(prod_id);
    }
    let reject_zero = ModelParameters::<f64>::new(1.0, 1.0, 0.0, 0.0, 0.0, 1.0).is_err();
    let reject_diag = ModelParameters::<f64>::new(1.0, 1.0, 0.5, 0.5, 0.0, 1.0).is_err();
    let ok = worst <= 1e-12 && reject_zero && reject_diag;
    (
        ok,
        format!(
            "worst normalized identity error {worst:.2e} <= 1e-12 over 10000 draws; degenerate (0,0)/(1/2,1/2) rejected {reject_zero}/{reject_diag}"
        ),
    )
}

/// 10: the momentum-relaxation viscosity floor sits a factor 4 pi sqrt 3
/// below the largest improving viscosity, and the capillarity floor
/// saturates at the zero-viscosity point.
fn kinematic_bounds() -> (bool, String) {
    let b = bounds::kss_and_kappa_bounds(1.0f64, 0.5, 1.0, 0.5).expect("bounds");
    let pi = std::f64::consts::PI;
    let xi_ok = (b.xi_kss - 1.0 / (8.0 * pi)).abs() <= 1e-15;
    let quantum_kappa = ModelParameters::<f64>::quantum_preset(1.0, 1.0)
        .expect("preset")
        .derive_transport()
        .kappa;
    let kappa_ok = b.kappa_lb == quantum_kappa;
    let nu_ok = b.nu_lb == 0.5;
    let star_ok = (b.xi_star_max_quantum - 0.5 * 3.0f64.sqrt()).abs() <= 1e-15;
    let ratio_ok = (b.ratio - 4.0 * pi * 3.0f64.sqrt()).abs() <= 1e-12 && b.xi_kss < b.xi_star_max_quantum;
    let reject = bounds::kss_and_kappa_bounds(1.0f64, 0.5, 1.0, 0.0).is_err();
    let ok = xi_ok && kappa_ok && nu_ok && star_ok && ratio_ok && reject;
    (
        ok,
        format!(
            "xi floor {:.4e} sits {:.2}x below window max {:.4e}; capillarity floor {} meets the zero-viscosity value; zero weight rejected {reject}",
            b.xi_kss, b.ratio, b.xi_star_max_quantum, b.kappa_lb
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    // Cheap criteria only; the expensive ones run in the acceptance suite.
    #[test]
    fn fast_criteria_pass() {
        for id in [1, 3, 5, 10] {
            let r = criterion(id);
            assert!(r.passed, "criterion {} failed: {}", r.id, r.detail);
        }
    }

    #[test]
    #[should_panic]
    fn id_zero_is_rejected() {
        criterion(0);
    }

    #[test]
    fn linspace_hits_interior_nodes_exactly() {
        let xs = linspace(-8.0, 8.0, 1025);
        assert_eq!(xs.len(), 1025);
        assert_eq!(xs[0], -8.0);
        assert_eq!(xs[576], 1.0);
        assert_eq!(xs[1024], 8.0);
    }
}
