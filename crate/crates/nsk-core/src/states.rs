//! Closed-form Gaussian states: the viscous minimum-uncertainty family, its
//! coherent-state limit, the stationary capillary profile in a harmonic
//! trap, and the inviscid minimum value.

use crate::error::{NskError, Result};
use crate::params::ModelParameters;
use crate::real::Real;
use crate::uncertainty::{inequality_rhs, FluidField1D};

/// Gaussian density rho(x) = sqrt(A/pi) exp(-A (x-x0)^2) with affine
/// velocity v(x) = v0 + B x; the center shift is absorbed into v0.
///
/// sigma2_x = 1/(2A) and <dx dv> = B/(2A).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianState<T> {
    pub a: T,
    pub b: T,
    pub x0: T,
    pub v0: T,
}

impl<T: Real> GaussianState<T> {
    pub fn new(a: T, b: T, x0: T, v0: T) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("x0", x0), ("v0", v0)] {
            if !v.is_finite() {
                return Err(NskError::NonFinite { name, value: v.as_f64() });
            }
        }
        if a <= T::zero() {
            return Err(NskError::NonPositive { name: "a", value: a.as_f64() });
        }
        Ok(GaussianState { a, b, x0, v0 })
    }

    pub fn sigma2_x(&self) -> T {
        (T::of(2.0) * self.a).recip()
    }

    pub fn cov_xv(&self) -> T {
        self.b / (T::of(2.0) * self.a)
    }

    pub fn rho_at(&self, x: T) -> T {
        let d = x - self.x0;
        (self.a / T::PI()).sqrt() * (-self.a * d * d).exp()
    }

    pub fn v_at(&self, x: T) -> T {
        self.v0 + self.b * x
    }
}

/// Coherent-state labels: width C and the complex label alpha_R + i alpha_I.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentSpec<T> {
    pub c: T,
    pub alpha_r: T,
    pub alpha_i: T,
}

/// The Gaussian state whose velocity gradient saturates the uncertainty
/// inequality: B = 2A xi (nu^2 + kappa)/(nu^2 + xi^2).
pub fn make_min_uncertainty_state<T: Real>(
    params: &ModelParameters<T>,
    a: T,
    x0: T,
    v0: T,
) -> Result<GaussianState<T>> {
    let t = params.derive_transport();
    if t.kappa < T::zero() {
        return Err(NskError::Negative { name: "kappa", value: t.kappa.as_f64() });
    }
    let nn = params.nu() * params.nu();
    let b = T::of(2.0) * a * t.xi * (nn + t.kappa) / (nn + t.xi * t.xi);
    GaussianState::new(a, b, x0, v0)
}

/// Variance product sigma2_x * sigma2_p and its square root for a Gaussian
/// state with affine velocity, in closed form (no quadrature): the
/// inequality right-hand side evaluated at <dx dv> = B/(2A), which the
/// Gaussian family attains identically.
pub fn gaussian_uncertainty_product<T: Real>(
    state: &GaussianState<T>,
    params: &ModelParameters<T>,
) -> (T, T) {
    let t = params.derive_transport();
    let var = inequality_rhs(params.mass(), params.nu(), t.kappa, t.xi, state.cov_xv());
    (var, var.sqrt())
}

/// Coherent-state mapping: A = C, x0 = alpha_R/sqrt(C), B = 0,
/// v0 = (hbar/M) sqrt(C) alpha_I.
pub fn from_coherent_state<T: Real>(spec: &CoherentSpec<T>, mass: T, hbar: T) -> Result<GaussianState<T>> {
    if spec.c <= T::zero() || !spec.c.is_finite() {
        return Err(NskError::NonPositive { name: "c", value: spec.c.as_f64() });
    }
    let root_c = spec.c.sqrt();
    GaussianState::new(spec.c, T::zero(), spec.alpha_r / root_c, (hbar / mass) * root_c * spec.alpha_i)
}

/// Stationary state of the inviscid capillary equation under the harmonic
/// potential (omega) with linear pressure P = C_pre rho: v = 0 and A the
/// positive root of 4 kappa A^2 + (2 C_pre / M) A - omega^2 = 0, i.e.
///
///   A = omega^2 / (sqrt(C_pre^2/M^2 + 4 kappa omega^2) + C_pre/M),
///
/// written in the conjugate form that stays accurate when C_pre dominates.
pub fn euler_korteweg_stationary<T: Real>(omega: T, c_pre: T, kappa: T, mass: T) -> Result<GaussianState<T>> {
    if omega <= T::zero() || !omega.is_finite() {
        return Err(NskError::NonPositive { name: "omega", value: omega.as_f64() });
    }
    if kappa <= T::zero() || !kappa.is_finite() {
        return Err(NskError::NonPositive { name: "kappa", value: kappa.as_f64() });
    }
    if c_pre < T::zero() || !c_pre.is_finite() {
        return Err(NskError::Negative { name: "c_pre", value: c_pre.as_f64() });
    }
    let cm = c_pre / mass;
    let four = T::of(4.0);
    let a = omega * omega / ((cm * cm + four * kappa * omega * omega).sqrt() + cm);
    GaussianState::new(a, T::zero(), T::zero(), T::zero())
}

/// Inviscid minimum of the standard-deviation product: M kappa / nu.
pub fn inviscid_minimum<T: Real>(kappa: T, nu: T, mass: T) -> Result<T> {
    if kappa < T::zero() {
        return Err(NskError::Negative { name: "kappa", value: kappa.as_f64() });
    }
    if nu <= T::zero() {
        return Err(NskError::NonPositive { name: "nu", value: nu.as_f64() });
    }
    Ok(mass * kappa / nu)
}

/// A state sampled on a grid plus the trapezoid mass the grid captured;
/// a defect 1 - grid_mass above 1e-8 marks a truncating grid (data, not an
/// error). Density samples are floored at a tiny positive value so that
/// logarithms stay finite downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledState<T> {
    pub field: FluidField1D<T>,
    pub grid_mass: T,
}

impl<T: Real> SampledState<T> {
    pub fn truncates(&self) -> bool {
        (T::one() - self.grid_mass).abs() > T::of(1e-8)
    }
}

/// Pointwise evaluation of a Gaussian state on a uniform grid.
///
/// Grids capturing less than half the mass are rejected; milder truncation
/// is surfaced through `grid_mass`.
pub fn sample_on_grid<T: Real>(state: &GaussianState<T>, grid: &[T]) -> Result<SampledState<T>> {
    let floor = positive_floor::<T>();
    let rho: Vec<T> = grid.iter().map(|x| state.rho_at(*x).max(floor)).collect();
    let v: Vec<T> = grid.iter().map(|x| state.v_at(*x)).collect();
    let field = FluidField1D::with_mass_tol(grid.to_vec(), rho, v, T::of(0.5))?;
    let grid_mass = field.mass();
    Ok(SampledState { field, grid_mass })
}

/// Smallest floor that keeps ln(rho) finite: 1e-300 where representable,
/// otherwise the type's smallest positive normal value.
pub(crate) fn positive_floor<T: Real>() -> T {
    let f = T::of(1e-300);
    if f > T::zero() {
        f
    } else {
        T::min_positive_value()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::linspace;

    #[test]
    fn min_state_gradient_examples() {
        // Quantum preset: xi = 0 forces B = 0 for any A.
        let p = ModelParameters::quantum_preset(1.0, 1.0).unwrap();
        let s = make_min_uncertainty_state(&p, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(s.b, 0.0);
        // nu=1, kappa=1, xi=2/3 via weights directly.
        let p = ModelParameters::<f64>::natural(1.0 / 3.0, 0.5, 1.0).unwrap();
        let t = p.derive_transport();
        assert!((t.kappa - 1.0).abs() < 1e-15 && (t.xi - 2.0 / 3.0).abs() < 1e-15);
        // nu=1, kappa=2, xi=1 (kappa = xi^2 would be degenerate): B = 2 * 1 * (3/2) = 3.
        let p = ModelParameters::<f64>::from_transport(1.0, 1.0, 2.0, 1.0, 0.0, 1.0).unwrap();
        let t = p.derive_transport();
        assert!((t.xi - 1.0).abs() < 1e-12, "xi {}", t.xi);
        let s = make_min_uncertainty_state(&p, 1.0, 0.0, 0.0).unwrap();
        assert!((s.b - 3.0).abs() < 1e-12);
        // nu=1, kappa=1, xi=0.5: B = 2 * (0.5 * 2 / 1.25) = 1.6.
        let p = ModelParameters::<f64>::natural(0.25, 0.5, 1.0).unwrap();
        let s = make_min_uncertainty_state(&p, 1.0, 0.0, 0.0).unwrap();
        assert!((s.b - 1.6).abs() < 1e-15);
    }

    #[test]
    fn gaussian_product_examples() {
        // Quantum preset with B = 0 saturates at (hbar/2)^2, std = hbar/2.
        let p = ModelParameters::quantum_preset(1.0, 1.0).unwrap();
        let s = GaussianState::new(1.0, 0.0, 0.0, 0.0).unwrap();
        let (var, std) = gaussian_uncertainty_product(&s, &p);
        assert_eq!(var, 0.25);
        assert_eq!(std, 0.5);
        // nu=1, kappa=1, xi=0.5 at the minimizing B: (0.75)^2/1.25 = 0.45.
        let p = ModelParameters::<f64>::natural(0.25, 0.5, 1.0).unwrap();
        let s = make_min_uncertainty_state(&p, 1.0, 0.0, 0.0).unwrap();
        let (var, std) = gaussian_uncertainty_product(&s, &p);
        assert!((var - 0.45).abs() < 1e-15);
        assert!((std - 0.45f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn coherent_mapping_examples() {
        let s = from_coherent_state(&CoherentSpec { c: 1.0, alpha_r: 0.0, alpha_i: 0.0 }, 1.0, 1.0).unwrap();
        assert_eq!((s.a, s.b, s.x0, s.v0), (1.0, 0.0, 0.0, 0.0));
        let s = from_coherent_state(&CoherentSpec { c: 4.0, alpha_r: 2.0, alpha_i: 0.0 }, 1.0, 1.0).unwrap();
        assert_eq!((s.x0, s.v0), (1.0, 0.0));
        let s = from_coherent_state(&CoherentSpec { c: 1.0, alpha_r: 0.0, alpha_i: 3.0 }, 2.0, 1.0).unwrap();
        assert_eq!(s.v0, 1.5);
        assert!(from_coherent_state(&CoherentSpec { c: 0.0, alpha_r: 0.0, alpha_i: 0.0 }, 1.0, 1.0).is_err());
    }

    #[test]
    fn stationary_state_examples() {
        // omega=1, C_pre=0, kappa=1/4: A = 1 (harmonic ground state at hbar=M=1).
        let s = euler_korteweg_stationary(1.0, 0.0, 0.25, 1.0).unwrap();
        assert_eq!(s.a, 1.0);
        assert_eq!((s.b, s.x0, s.v0), (0.0, 0.0, 0.0));
        // omega=1, C_pre=M=1, kappa=1/4: positive root of A^2 + 2A - 1.
        let s = euler_korteweg_stationary::<f64>(1.0, 1.0, 0.25, 1.0).unwrap();
        assert!((s.a - (2.0f64.sqrt() - 1.0)).abs() < 1e-15);
        // Large kappa limit: A -> omega/(2 sqrt(kappa)).
        let s = euler_korteweg_stationary::<f64>(1.0, 0.0, 1e12, 1.0).unwrap();
        assert!((s.a - 0.5e-6).abs() < 1e-18);
        assert!(euler_korteweg_stationary(0.0, 0.0, 0.25, 1.0).is_err());
        assert!(euler_korteweg_stationary(1.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn inviscid_minimum_examples() {
        assert_eq!(inviscid_minimum(0.25, 0.5, 1.0).unwrap(), 0.5);
        assert_eq!(inviscid_minimum(0.0, 1.0, 1.0).unwrap(), 0.0);
        assert_eq!(inviscid_minimum(2.0, 1.0, 3.0).unwrap(), 6.0);
        assert!(inviscid_minimum(-1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn sampling_examples() {
        let s = GaussianState::new(1.0, 2.0, 0.0, 0.0).unwrap();
        let sampled = sample_on_grid(&s, &linspace(-8.0, 8.0, 1025)).unwrap();
        assert!((sampled.grid_mass - 1.0).abs() < 1e-10);
        assert!(!sampled.truncates());
        // Peak value sqrt(A/pi) and affine velocity.
        let mid = 512;
        assert!((sampled.field.rho()[mid] - (1.0 / std::f64::consts::PI).sqrt()).abs() < 1e-15);
        let i = 576; // x = 1.0
        assert_eq!(sampled.field.x()[i], 1.0);
        assert!((sampled.field.v()[i] - 2.0).abs() < 1e-15);
        // A narrow grid truncates measurably.
        let narrow = sample_on_grid(&s, &linspace(-2.0, 2.0, 257)).unwrap();
        assert!(narrow.truncates());
    }
}
