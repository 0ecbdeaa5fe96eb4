//! Field-level moment engine: expectation functional, forward/backward
//! momentum fields, and both sides of the position-momentum uncertainty
//! inequality.
//!
//! All moments are trapezoid quadratures over the retained support
//! { x : rho(x) >= floor_frac * max(rho) } and are self-normalized by the
//! same-support mass, which suppresses truncation bias. Accumulations run
//! in fixed index order so results are reproducible bit for bit.

use crate::error::{NskError, Result};
use crate::params::ModelParameters;
use crate::real::Real;

/// Fraction of the density maximum below which samples are ignored by
/// moments and derivative stencils.
pub const SUPPORT_FLOOR_FRAC: f64 = 1e-12;

/// Relative tolerance scale on the uncertainty inequality when none is given:
/// tol = 1e-8 (1 + |lhs|).
pub const DEFAULT_HOLDS_TOL: f64 = 1e-8;

/// A sampled (grid, density, velocity) triple on a uniform grid.
///
/// Invariants enforced at construction: equal lengths >= 4, finite entries,
/// rho >= 0, strictly increasing uniform spacing, and trapezoid mass within
/// `mass_tol` of 1 (default 1e-6).
#[derive(Debug, Clone, PartialEq)]
pub struct FluidField1D<T> {
    x: Vec<T>,
    rho: Vec<T>,
    v: Vec<T>,
    dx: T,
}

impl<T: Real> FluidField1D<T> {
    pub fn new(x: Vec<T>, rho: Vec<T>, v: Vec<T>) -> Result<Self> {
        Self::with_mass_tol(x, rho, v, T::of(1e-6))
    }

    pub fn with_mass_tol(x: Vec<T>, rho: Vec<T>, v: Vec<T>, mass_tol: T) -> Result<Self> {
        let n = x.len();
        if n < 4 || rho.len() != n || v.len() != n {
            return Err(NskError::BadFieldShape { x: n, rho: rho.len(), v: v.len() });
        }
        for (name, arr) in [("x", &x), ("rho", &rho), ("v", &v)] {
            if let Some(bad) = arr.iter().find(|t| !t.is_finite()) {
                return Err(NskError::NonFinite { name, value: bad.as_f64() });
            }
        }
        if let Some(bad) = rho.iter().find(|r| **r < T::zero()) {
            return Err(NskError::Negative { name: "rho", value: bad.as_f64() });
        }
        let nm1 = T::from_usize(n - 1).expect("grid length fits the scalar");
        let dx = (x[n - 1] - x[0]) / nm1;
        if !(dx > T::zero()) {
            return Err(NskError::NonPositive { name: "grid spacing", value: dx.as_f64() });
        }
        // Uniformity allows linspace roundoff: each x_i carries O(eps max|x|).
        let xmax = x.iter().fold(T::zero(), |m, t| m.max(t.abs()));
        let tol = T::of(1e-12) * dx + T::of(4.0) * T::epsilon() * xmax;
        for i in 0..n - 1 {
            if ((x[i + 1] - x[i]) - dx).abs() > tol {
                return Err(NskError::NonUniformGrid { index: i });
            }
        }
        let mass = trapezoid_mass(&rho, dx);
        if (mass - T::one()).abs() > mass_tol {
            return Err(NskError::MassNotNormalized { mass: mass.as_f64(), tol: mass_tol.as_f64() });
        }
        Ok(FluidField1D { x, rho, v, dx })
    }

    pub fn x(&self) -> &[T] {
        &self.x
    }

    pub fn rho(&self) -> &[T] {
        &self.rho
    }

    pub fn v(&self) -> &[T] {
        &self.v
    }

    pub fn dx(&self) -> T {
        self.dx
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Trapezoid integral of rho over the whole grid.
    pub fn mass(&self) -> T {
        trapezoid_mass(&self.rho, self.dx)
    }

    /// Inclusive index range of the retained support: the span from the first
    /// to the last sample with rho >= floor_frac * max(rho). Interior dips
    /// below the floor stay inside the span; `momentum_fields` rejects them.
    pub fn retained_support(&self, floor_frac: T) -> (usize, usize) {
        let floor = floor_frac * self.max_rho();
        let i0 = self.rho.iter().position(|r| *r >= floor).unwrap_or(0);
        let i1 = self.rho.iter().rposition(|r| *r >= floor).unwrap_or(self.len() - 1);
        (i0, i1)
    }

    pub fn max_rho(&self) -> T {
        self.rho.iter().fold(T::zero(), |m, r| m.max(*r))
    }
}

fn trapezoid_mass<T: Real>(rho: &[T], dx: T) -> T {
    let n = rho.len();
    let mut acc = T::of(0.5) * (rho[0] + rho[n - 1]);
    for r in &rho[1..n - 1] {
        acc += *r;
    }
    acc * dx
}

/// Trapezoid weight for index `i` within an inclusive slice [i0, i1].
#[inline]
fn weight<T: Real>(i: usize, i0: usize, i1: usize) -> T {
    if i == i0 || i == i1 {
        T::of(0.5)
    } else {
        T::one()
    }
}

/// Expectation <f> = integral(rho f) / integral(rho) over the retained
/// support, by trapezoid quadrature (the grid spacing cancels).
pub fn expectation<T: Real>(field: &FluidField1D<T>, f: &[T]) -> Result<T> {
    if f.len() != field.len() {
        return Err(NskError::GridMismatch("sample array length differs from the grid"));
    }
    let (i0, i1) = field.retained_support(T::of(SUPPORT_FLOOR_FRAC));
    let rho = field.rho();
    let mut num = T::zero();
    let mut den = T::zero();
    for i in i0..=i1 {
        let w = weight::<T>(i, i0, i1) * rho[i];
        num += w * f[i];
        den += w;
    }
    Ok(num / den)
}

/// d/dx ln(rho) on the inclusive range [i0, i1]: second-order central
/// differences inside, one-sided second-order at the range ends.
/// Errors if any retained sample sits below the floor.
pub(crate) fn dlog_rho<T: Real>(
    field: &FluidField1D<T>,
    i0: usize,
    i1: usize,
    floor: T,
) -> Result<Vec<T>> {
    let rho = field.rho();
    for (i, r) in rho.iter().enumerate().take(i1 + 1).skip(i0) {
        if *r < floor {
            return Err(NskError::FloorBreach { index: i });
        }
    }
    let ln: Vec<T> = rho[i0..=i1].iter().map(|r| r.ln()).collect();
    let m = ln.len();
    let dx = field.dx();
    let half = T::of(0.5);
    let mut d = vec![T::zero(); m];
    if m < 3 {
        // Degenerate two-point support: fall back to the single slope.
        let slope = (ln[m - 1] - ln[0]) / (T::from_usize(m - 1).unwrap() * dx);
        d.fill(slope);
        return Ok(d);
    }
    d[0] = (-T::of(3.0) * ln[0] + T::of(4.0) * ln[1] - ln[2]) * half / dx;
    for i in 1..m - 1 {
        d[i] = (ln[i + 1] - ln[i - 1]) * half / dx;
    }
    d[m - 1] = (T::of(3.0) * ln[m - 1] - T::of(4.0) * ln[m - 2] + ln[m - 3]) * half / dx;
    Ok(d)
}

/// Half-sum and half-difference momentum fields on [i0, i1]:
///   (p_- + p_+)/2 = M (xi dlnrho + v)
///   (p_- - p_+)/2 = M (-(kappa/nu) dlnrho - (xi/nu) v)
fn half_fields<T: Real>(
    field: &FluidField1D<T>,
    params: &ModelParameters<T>,
    i0: usize,
    i1: usize,
) -> Result<(Vec<T>, Vec<T>)> {
    let floor = T::of(SUPPORT_FLOOR_FRAC) * field.max_rho();
    let dln = dlog_rho(field, i0, i1, floor)?;
    let t = params.derive_transport();
    let m = params.mass();
    let nu = params.nu();
    let v = &field.v()[i0..=i1];
    let mut half_sum = Vec::with_capacity(dln.len());
    let mut half_diff = Vec::with_capacity(dln.len());
    for (d, vi) in dln.iter().zip(v) {
        half_sum.push(m * (t.xi * *d + *vi));
        half_diff.push(m * (-(t.kappa / nu) * *d - (t.xi / nu) * *vi));
    }
    Ok((half_sum, half_diff))
}

/// Forward and backward momentum fields (p_plus, p_minus) on the full grid;
/// samples outside the retained support are zero.
pub fn momentum_fields<T: Real>(
    field: &FluidField1D<T>,
    params: &ModelParameters<T>,
) -> Result<(Vec<T>, Vec<T>)> {
    let (i0, i1) = field.retained_support(T::of(SUPPORT_FLOOR_FRAC));
    let (half_sum, half_diff) = half_fields(field, params, i0, i1)?;
    let n = field.len();
    let mut p_plus = vec![T::zero(); n];
    let mut p_minus = vec![T::zero(); n];
    for (j, (hs, hd)) in half_sum.iter().zip(&half_diff).enumerate() {
        p_plus[i0 + j] = *hs - *hd;
        p_minus[i0 + j] = *hs + *hd;
    }
    Ok((p_plus, p_minus))
}

/// Both sides of the uncertainty inequality for one field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyReport<T> {
    pub sigma2_x: T,
    pub sigma2_p: T,
    /// <dx dv>, the position-velocity covariance.
    pub cov_xv: T,
    /// sigma2_x * sigma2_p.
    pub lhs: T,
    /// Closed-form lower bound at the field's own cov_xv.
    pub rhs: T,
    pub std_product: T,
    pub rhs_sqrt: T,
    /// lhs - rhs.
    pub margin: T,
    /// margin >= -tol.
    pub holds: bool,
    /// Absolute tolerance the `holds` flag was evaluated with.
    pub tol: T,
}

/// Right-hand side of the inequality as a function of <dx dv>:
///   M^2 (xi^2-kappa)^2/(nu^2+xi^2) + M^2 (1+xi^2/nu^2) (cov - xi(nu^2+kappa)/(nu^2+xi^2))^2.
pub fn inequality_rhs<T: Real>(mass: T, nu: T, kappa: T, xi: T, cov_xv: T) -> T {
    let m2 = mass * mass;
    let nn = nu * nu;
    let denom = nn + xi * xi;
    let flat = m2 * (xi * xi - kappa) * (xi * xi - kappa) / denom;
    let slope = m2 * (T::one() + xi * xi / nn);
    let vertex = xi * (nn + kappa) / denom;
    flat + slope * (cov_xv - vertex) * (cov_xv - vertex)
}

/// Minimum of the standard-deviation product over all states:
/// M |kappa - xi^2| / sqrt(nu^2 + xi^2); equals M nu |k - s|/sqrt(1+s) in
/// the dimensionless variables k = kappa/nu^2, s = xi^2/nu^2.
pub fn min_std_product<T: Real>(params: &ModelParameters<T>) -> T {
    let t = params.derive_transport();
    min_std_product_from(params.mass(), params.nu(), t.kappa, t.xi)
}

pub fn min_std_product_from<T: Real>(mass: T, nu: T, kappa: T, xi: T) -> T {
    mass * (kappa - xi * xi).abs() / (nu * nu + xi * xi).sqrt()
}

/// Moments, both inequality sides, and the validity flag for one field.
/// `rel_tol` sets the `holds` threshold as rel_tol (1 + |lhs|); the
/// default relative tolerance is 1e-8.
pub fn uncertainty_report<T: Real>(
    field: &FluidField1D<T>,
    params: &ModelParameters<T>,
    rel_tol: Option<T>,
) -> Result<UncertaintyReport<T>> {
    let (i0, i1) = field.retained_support(T::of(SUPPORT_FLOOR_FRAC));
    let x = field.x();
    let rho = field.rho();
    let v = field.v();

    // First pass: support mass and means.
    let mut mass_acc = T::zero();
    let mut mean_x = T::zero();
    let mut mean_v = T::zero();
    for i in i0..=i1 {
        let w = weight::<T>(i, i0, i1) * rho[i];
        mass_acc += w;
        mean_x += w * x[i];
        mean_v += w * v[i];
    }
    mean_x = mean_x / mass_acc;
    mean_v = mean_v / mass_acc;

    // Second pass: central moments of x and v.
    let mut sigma2_x = T::zero();
    let mut cov_xv = T::zero();
    for i in i0..=i1 {
        let w = weight::<T>(i, i0, i1) * rho[i];
        let ddx = x[i] - mean_x;
        sigma2_x += w * ddx * ddx;
        cov_xv += w * ddx * (v[i] - mean_v);
    }
    sigma2_x = sigma2_x / mass_acc;
    cov_xv = cov_xv / mass_acc;

    // Momentum spread from the half-sum/half-difference decomposition:
    // sigma2_p = <(d half_sum)^2> + <(d half_diff)^2>.
    let (half_sum, half_diff) = half_fields(field, params, i0, i1)?;
    let mut mean_hs = T::zero();
    let mut mean_hd = T::zero();
    for (j, (hs, hd)) in half_sum.iter().zip(&half_diff).enumerate() {
        let w = weight::<T>(i0 + j, i0, i1) * rho[i0 + j];
        mean_hs += w * *hs;
        mean_hd += w * *hd;
    }
    mean_hs = mean_hs / mass_acc;
    mean_hd = mean_hd / mass_acc;
    let mut sigma2_p = T::zero();
    for (j, (hs, hd)) in half_sum.iter().zip(&half_diff).enumerate() {
        let w = weight::<T>(i0 + j, i0, i1) * rho[i0 + j];
        let ds = *hs - mean_hs;
        let dd = *hd - mean_hd;
        sigma2_p += w * (ds * ds + dd * dd);
    }
    sigma2_p = sigma2_p / mass_acc;

    let t = params.derive_transport();
    let lhs = sigma2_x * sigma2_p;
    let rhs = inequality_rhs(params.mass(), params.nu(), t.kappa, t.xi, cov_xv);
    let tol = rel_tol.unwrap_or_else(|| T::of(DEFAULT_HOLDS_TOL)) * (T::one() + lhs.abs());
    let margin = lhs - rhs;
    Ok(UncertaintyReport {
        sigma2_x,
        sigma2_p,
        cov_xv,
        lhs,
        rhs,
        std_product: lhs.sqrt(),
        rhs_sqrt: rhs.sqrt(),
        margin,
        holds: margin >= -tol,
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{sample_on_grid, GaussianState};
    use crate::testutil::linspace;

    fn gaussian_field(a: f64, x0: f64, b: f64, v0: f64, span: f64, n: usize) -> FluidField1D<f64> {
        let state = GaussianState::new(a, b, x0, v0).unwrap();
        sample_on_grid(&state, &linspace(x0 - span, x0 + span, n)).unwrap().field
    }

    #[test]
    fn field_construction_validates_shape_and_mass() {
        let x = linspace(-8.0, 8.0, 257);
        let rho: Vec<f64> = x.iter().map(|t| (-t * t).exp() / std::f64::consts::PI.sqrt()).collect();
        let v = vec![0.0; 257];
        assert!(FluidField1D::new(x.clone(), rho.clone(), v.clone()).is_ok());
        let double: Vec<f64> = rho.iter().map(|r| 2.0 * r).collect();
        assert!(matches!(
            FluidField1D::new(x.clone(), double, v.clone()),
            Err(NskError::MassNotNormalized { .. })
        ));
        let mut crooked = x;
        crooked[5] += 1e-3;
        assert!(matches!(
            FluidField1D::new(crooked, rho, v),
            Err(NskError::NonUniformGrid { .. })
        ));
    }

    #[test]
    fn expectation_examples() {
        let f = gaussian_field(1.0, 0.0, 0.0, 0.0, 8.0, 1025);
        // Symmetry: <x> = 0.
        let x = f.x().to_vec();
        assert!(expectation(&f, &x).unwrap().abs() < 1e-12);
        // Analytic Gaussian moment: <(x-x0)^2> = 1/(2A).
        let x2: Vec<f64> = f.x().iter().map(|t| t * t).collect();
        assert!((expectation(&f, &x2).unwrap() - 0.5).abs() < 1e-8);
        // Normalization: <1> = 1.
        let ones = vec![1.0; f.len()];
        assert!((expectation(&f, &ones).unwrap() - 1.0).abs() < 1e-12);
        // Grid mismatch is rejected.
        assert!(expectation(&f, &[0.0]).is_err());
    }

    #[test]
    fn momentum_fields_ground_state_like() {
        // Quantum preset (M=1, hbar=1): nu=1/2, kappa=1/4, xi=0. For the
        // Gaussian A=1/2, v=0: dln rho = -x, so p_+/- = -/+ x/2.
        let p = ModelParameters::quantum_preset(1.0, 1.0).unwrap();
        let f = gaussian_field(0.5, 0.0, 0.0, 0.0, 10.0, 2049);
        let (pp, pm) = momentum_fields(&f, &p).unwrap();
        let i = 1200; // interior point away from the support edges
        let xi = f.x()[i];
        assert!((pp[i] + 0.5 * xi).abs() < 1e-6, "p_plus {} at x {}", pp[i], xi);
        assert!((pm[i] - 0.5 * xi).abs() < 1e-6);
    }

    #[test]
    fn momentum_fields_flat_density() {
        // Flat rho, constant v: p_+/- carry no osmotic part.
        let n = 101;
        let x = linspace(-0.5, 0.5, n);
        let rho = vec![1.0; n];
        let v = vec![0.3; n];
        let f = FluidField1D::new(x, rho, v).unwrap();
        let p = ModelParameters::<f64>::natural(0.25, 0.5, 1.0).unwrap(); // kappa=1, xi=1/2
        let (pp, pm) = momentum_fields(&f, &p).unwrap();
        // half_sum = M v, half_diff = -M (xi/nu) v.
        for i in 0..n {
            assert!((0.5 * (pm[i] + pp[i]) - 0.3).abs() < 1e-12);
            assert!((pm[i] - pp[i] + 2.0 * 0.5 * 0.3).abs() < 1e-12);
        }
    }

    #[test]
    fn momentum_fields_pure_osmotic() {
        // xi = 0 and v = 0 make p_- = -p_+.
        let p = ModelParameters::quantum_preset(1.0, 1.0).unwrap();
        let f = gaussian_field(1.0, 0.0, 0.0, 0.0, 8.0, 513);
        let (pp, pm) = momentum_fields(&f, &p).unwrap();
        for (a, b) in pp.iter().zip(&pm) {
            assert!((a + b).abs() < 1e-12);
        }
    }

    #[test]
    fn report_saturates_for_minimum_state() {
        // nu=1, kappa=1, xi=0.5, M=1, A=1 -> B=1.6 and lhs = rhs = 0.45.
        let p = ModelParameters::<f64>::natural(0.25, 0.5, 1.0).unwrap();
        let state = crate::states::make_min_uncertainty_state(&p, 1.0, 0.0, 0.0).unwrap();
        assert!((state.b - 1.6).abs() < 1e-15);
        let f = sample_on_grid(&state, &linspace(-10.0, 10.0, 4097)).unwrap().field;
        let r = uncertainty_report(&f, &p, None).unwrap();
        assert!((r.lhs - 0.45).abs() < 1e-6, "lhs {}", r.lhs);
        assert!((r.rhs - 0.45).abs() < 1e-6, "rhs {}", r.rhs);
        assert!(r.holds);
    }

    #[test]
    fn report_strict_inequality_off_minimum() {
        // Same params, B=0: cov_xv = 0, rhs = 0.45 + 1.25 * 0.8^2 = 1.25.
        let p = ModelParameters::<f64>::natural(0.25, 0.5, 1.0).unwrap();
        let f = gaussian_field(1.0, 0.0, 0.0, 0.0, 10.0, 4097);
        let r = uncertainty_report(&f, &p, None).unwrap();
        assert!(r.cov_xv.abs() < 1e-10);
        assert!((r.rhs - 1.25).abs() < 1e-6);
        assert!(r.lhs >= r.rhs - r.tol);
        assert!(r.holds);
    }

    #[test]
    fn report_quantum_coherent_state() {
        let p = ModelParameters::quantum_preset(1.0, 1.0).unwrap();
        let f = gaussian_field(1.0, 0.0, 0.0, 0.0, 8.0, 2049);
        let r = uncertainty_report(&f, &p, None).unwrap();
        assert!((r.std_product - 0.5).abs() < 1e-8);
        assert!(r.margin.abs() < 1e-8);
        assert!(r.holds);
    }

    #[test]
    fn min_std_product_examples() {
        let p = ModelParameters::quantum_preset(1.0, 1.0).unwrap();
        assert_eq!(min_std_product(&p), 0.5);
        assert_eq!(min_std_product_from(1.0, 1.0, 1.0, 1.0), 0.0);
        let root3 = 3.0f64.sqrt();
        let v = min_std_product_from(1.0, 1.0, 1.0, root3);
        assert!((v - 1.0).abs() < 4.0 * f64::EPSILON);
    }

    #[test]
    fn sigma2_p_split_matches_average_identity() {
        // <(dp_+)^2 + (dp_-)^2>/2 equals the half-sum/half-diff split.
        let p = ModelParameters::<f64>::natural(0.25, 0.5, 1.0).unwrap();
        let f = gaussian_field(1.2, 0.3, 0.7, -0.2, 9.0, 2049);
        let r = uncertainty_report(&f, &p, None).unwrap();
        let (pp, pm) = momentum_fields(&f, &p).unwrap();
        let mp = expectation(&f, &pp).unwrap();
        let mm = expectation(&f, &pm).unwrap();
        let dp2: Vec<f64> = pp
            .iter()
            .zip(&pm)
            .map(|(a, b)| 0.5 * ((a - mp) * (a - mp) + (b - mm) * (b - mm)))
            .collect();
        let avg = expectation(&f, &dp2).unwrap();
        assert!(
            (avg - r.sigma2_p).abs() <= 1e-12 * avg.abs(),
            "split {} vs averaged {}",
            r.sigma2_p,
            avg
        );
    }
}
