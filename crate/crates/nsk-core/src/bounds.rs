//! Dimensionless minimum landscape over (k, s) = (kappa/nu^2, xi^2/nu^2),
//! improvement-window edges in xi/nu, viscosity lower bounds tied to the
//! kinematic shear bound xi >= hbar/(8 pi M), and order-of-magnitude
//! estimates for real media.

use rayon::prelude::*;

use crate::error::{NskError, Result};
use crate::real::Real;

/// One cell of the (k, s) phase diagram.
///
/// The two improvement flags answer the same question through different
/// formulas and disagree away from k = 1; both are kept as data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseDiagramCell<T> {
    pub k: T,
    pub s: T,
    pub min_over_mnu: T,
    pub improves_paper: bool,
    pub improves_direct: bool,
}

/// Minimum standard-deviation product in units of M nu: |k - s| / sqrt(1 + s).
pub fn min_over_mnu<T: Real>(k: T, s: T) -> Result<T> {
    for (name, v) in [("k", k), ("s", s)] {
        if !v.is_finite() {
            return Err(NskError::NonFinite { name, value: v.as_f64() });
        }
    }
    if k < T::zero() {
        return Err(NskError::Negative { name: "k", value: k.as_f64() });
    }
    if s < T::zero() {
        return Err(NskError::Negative { name: "s", value: s.as_f64() });
    }
    Ok((k - s).abs() / (T::one() + s).sqrt())
}

/// Improvement window edges in xi/nu as published:
/// lower edge 0 for k < 1, else sqrt(3k/2 - sqrt(k (1 + 5k/4)));
/// upper edge sqrt(3k/2 + sqrt(k (1 + 5k/4))).
pub fn xi_star_paper<T: Real>(k: T) -> Result<(T, T)> {
    if !k.is_finite() {
        return Err(NskError::NonFinite { name: "k", value: k.as_f64() });
    }
    if k < T::zero() {
        return Err(NskError::Negative { name: "k", value: k.as_f64() });
    }
    let root = (k * (T::one() + T::of(1.25) * k)).sqrt();
    let hi = (T::of(1.5) * k + root).sqrt();
    let lo_sq = T::of(1.5) * k - root;
    let lo = if k < T::one() || lo_sq <= T::zero() { T::zero() } else { lo_sq.sqrt() };
    Ok((lo, hi))
}

/// Both improvement predicates at (k, s): the published window
/// lo^2 < s < hi^2, and the direct comparison of the viscous minimum
/// against the inviscid one, |k - s|/sqrt(1 + s) < k (equivalently
/// 0 < s < k (k + 2)).
pub fn improvement_region<T: Real>(k: T, s: T) -> Result<(bool, bool)> {
    let (lo, hi) = xi_star_paper(k)?;
    let paper = lo * lo < s && s < hi * hi;
    let direct = min_over_mnu(k, s)? < k;
    Ok((paper, direct))
}

/// Row-major scan of the (k, s) rectangle, k outermost; rows are computed
/// in parallel.
pub fn scan_phase_diagram<T: Real>(
    k_range: (T, T),
    s_range: (T, T),
    n_k: usize,
    n_s: usize,
) -> Result<Vec<PhaseDiagramCell<T>>> {
    if n_k < 2 || n_s < 2 {
        return Err(NskError::InvalidConfig("phase-diagram grid needs at least 2 points per axis".into()));
    }
    for (name, v) in [("k_min", k_range.0), ("k_max", k_range.1), ("s_min", s_range.0), ("s_max", s_range.1)] {
        if !v.is_finite() {
            return Err(NskError::NonFinite { name, value: v.as_f64() });
        }
        if v < T::zero() {
            return Err(NskError::Negative { name, value: v.as_f64() });
        }
    }
    if k_range.1 <= k_range.0 || s_range.1 <= s_range.0 {
        return Err(NskError::InvalidConfig("phase-diagram ranges must be increasing".into()));
    }
    // Ratio form lands exactly on representable midpoints, e.g. k = 1 at the
    // center of a 201-point [0, 2] axis.
    let axis = |lo: T, hi: T, n: usize| -> Vec<T> {
        let den = T::of((n - 1) as f64);
        (0..n)
            .map(|i| lo + (hi - lo) * (T::of(i as f64) / den))
            .collect()
    };
    let ks = axis(k_range.0, k_range.1, n_k);
    let ss = axis(s_range.0, s_range.1, n_s);
    let rows: Vec<Result<Vec<PhaseDiagramCell<T>>>> = ks
        .par_iter()
        .map(|&k| {
            ss.iter()
                .map(|&s| {
                    let (improves_paper, improves_direct) = improvement_region(k, s)?;
                    Ok(PhaseDiagramCell { k, s, min_over_mnu: min_over_mnu(k, s)?, improves_paper, improves_direct })
                })
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(n_k * n_s);
    for row in rows {
        out.extend(row?);
    }
    Ok(out)
}

/// Minimum product along the k = 1 line (kappa = nu^2) as a function of
/// u = xi/nu: M nu |1 - u^2| / sqrt(1 + u^2) at each requested sample.
pub fn min_curve<T: Real>(xi_over_nu_samples: &[T], mass: T, nu: T) -> Result<Vec<(T, T)>> {
    for (name, v) in [("mass", mass), ("nu", nu)] {
        if v <= T::zero() || !v.is_finite() {
            return Err(NskError::NonPositive { name, value: v.as_f64() });
        }
    }
    xi_over_nu_samples
        .iter()
        .map(|&u| {
            if !u.is_finite() {
                return Err(NskError::NonFinite { name: "xi_over_nu", value: u.as_f64() });
            }
            if u < T::zero() {
                return Err(NskError::Negative { name: "xi_over_nu", value: u.as_f64() });
            }
            Ok((u, mass * nu * min_over_mnu(T::one(), u * u)?))
        })
        .collect()
}

/// Viscosity bound chain at mass M: the kinematic floor
/// xi_kss = hbar/(8 pi M), the capillary floor kappa_lb = hbar nu/(2 M)
/// at a reference nu, the stochastic-intensity floor
/// nu_lb = hbar/(4 M alpha_B) at a reference alpha_B, and the largest
/// tolerable xi at the quantum point, xi_star_max = (sqrt(3)/2) hbar/M,
/// whose ratio to xi_kss is 4 pi sqrt(3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KssBounds<T> {
    pub xi_kss: T,
    pub kappa_lb: T,
    pub nu_lb: T,
    pub xi_star_max_quantum: T,
    pub ratio: T,
}

pub fn kss_and_kappa_bounds<T: Real>(mass: T, nu: T, hbar: T, alpha_b: T) -> Result<KssBounds<T>> {
    for (name, v) in [("mass", mass), ("nu", nu), ("hbar", hbar)] {
        if v <= T::zero() || !v.is_finite() {
            return Err(NskError::NonPositive { name, value: v.as_f64() });
        }
    }
    if alpha_b == T::zero() || !alpha_b.is_finite() {
        return Err(NskError::InvalidConfig("alpha_b must be nonzero for the nu lower bound".into()));
    }
    let xi_kss = hbar / (T::of(8.0) * T::PI() * mass);
    let xi_star_max_quantum = T::of(3.0).sqrt() / T::of(2.0) * hbar / mass;
    Ok(KssBounds {
        xi_kss,
        kappa_lb: hbar * nu / (T::of(2.0) * mass),
        nu_lb: hbar / (T::of(4.0) * mass * alpha_b),
        xi_star_max_quantum,
        ratio: xi_star_max_quantum / xi_kss,
    })
}

/// Shear-only minimum for a medium characterized by (M, xi, nu) with no
/// capillary term: std_product = M xi^2 / sqrt(nu^2 + xi^2), also reported
/// in units of hbar/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediaEstimate<T> {
    pub mass: T,
    pub xi: T,
    pub nu: T,
    pub std_product: T,
    pub in_units_of_half_hbar: T,
}

pub fn media_estimate<T: Real>(mass: T, xi: T, nu: T, hbar: T) -> Result<MediaEstimate<T>> {
    for (name, v) in [("mass", mass), ("nu", nu), ("hbar", hbar)] {
        if v <= T::zero() || !v.is_finite() {
            return Err(NskError::NonPositive { name, value: v.as_f64() });
        }
    }
    if xi < T::zero() || !xi.is_finite() {
        return Err(NskError::Negative { name: "xi", value: xi.as_f64() });
    }
    let std_product = mass * xi * xi / (nu * nu + xi * xi).sqrt();
    Ok(MediaEstimate { mass, xi, nu, std_product, in_units_of_half_hbar: std_product / (hbar / T::of(2.0)) })
}

/// Reference magnitudes (SI): molecular mass of water, kinematic shear
/// viscosities of the liquid and two readings for the vapor, a
/// stochastic-intensity scale hbar/(2M) for each phase, and hbar itself.
pub const WATER_MASS_KG: f64 = 3.0e-26;
pub const WATER_XI: f64 = 1.0e-6;
pub const WATER_NU: f64 = 1.0e-9;
pub const VAPOR_XI_LOW: f64 = 3.0e-7;
pub const VAPOR_XI_HIGH: f64 = 3.0e-6;
pub const VAPOR_NU: f64 = 1.0e-4;
pub const HBAR_SI: f64 = 1.054571817e-34;
