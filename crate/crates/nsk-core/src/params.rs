//! Model inputs, the transport-coefficient identification, and the two
//! structural matrices with their spectra.
//!
//! The stochastic-variational construction assigns to the weight pair
//! (alpha_A, alpha_B) and noise intensity nu the transport coefficients
//!
//!   kappa = 2 alpha_B nu^2,          xi = alpha_A (1 + 2 alpha_B) nu,
//!
//! and these satisfy kappa - xi^2 = 4 nu^2 det(M) exactly, where M is the
//! symmetric Lagrangian weight matrix. det(M) = 0 makes the two momentum
//! fields collapse into one, so such parameter sets are rejected outright.

use crate::error::{NskError, Result};
use crate::real::Real;

/// Symmetric 2x2 matrix, row-major.
pub type Mat2<T> = [[T; 2]; 2];

/// Lagrangian weight matrix M(alpha_A, alpha_B) together with its
/// determinant det = alpha_B/2 - alpha_A^2 (1/2 + alpha_B)^2.
///
/// The determinant uses the symbolically expanded form rather than the
/// 2x2 cofactor formula; the expansion has one subtraction instead of two
/// cancelling products.
pub fn lagrangian_matrix_det<T: Real>(alpha_a: T, alpha_b: T) -> (Mat2<T>, T) {
    let half = T::of(0.5);
    let off = T::of(0.25) - half * alpha_b;
    let m = [
        [(half + alpha_a) * (half + alpha_b), off],
        [off, (half - alpha_a) * (half + alpha_b)],
    ];
    let hb = half + alpha_b;
    let det = half * alpha_b - alpha_a * alpha_a * hb * hb;
    (m, det)
}

/// Determinants smaller than this count as degenerate; scales with the
/// weight magnitudes so the forbidden set stays measure zero.
pub fn degeneracy_tolerance<T: Real>(alpha_a: T, alpha_b: T) -> T {
    let s = T::one() + alpha_a.abs() + alpha_b.abs();
    T::of(1e-14) * s * s
}

/// True when (alpha_A, alpha_B) lies on the kappa = xi^2 line within the
/// degeneracy tolerance.
pub fn is_degenerate<T: Real>(alpha_a: T, alpha_b: T) -> bool {
    let (_, det) = lagrangian_matrix_det(alpha_a, alpha_b);
    det.abs() < degeneracy_tolerance(alpha_a, alpha_b)
}

/// kappa = 2 alpha_B nu^2.
pub fn kappa_coefficient<T: Real>(alpha_b: T, nu: T) -> T {
    T::of(2.0) * alpha_b * nu * nu
}

/// xi = alpha_A (1 + 2 alpha_B) nu.
pub fn xi_coefficient<T: Real>(alpha_a: T, alpha_b: T, nu: T) -> T {
    alpha_a * (T::one() + T::of(2.0) * alpha_b) * nu
}

/// Derived transport coefficients; closed-form arithmetic only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportSet<T> {
    /// Capillarity coefficient kappa (m^4/s^2); hbar^2/(4 M^2) in the quantum limit.
    pub kappa: T,
    /// Kinematic viscosity xi = eta/(2 M rho) (m^2/s), constant by construction.
    pub xi: T,
    /// eta / rho, so the shear viscosity at local density is rho * (eta/rho).
    pub eta_per_density: T,
}

impl<T: Real> TransportSet<T> {
    /// Applies the identification to raw weights; no validation.
    pub fn from_weights(alpha_a: T, alpha_b: T, nu: T, mass: T) -> Self {
        let xi = xi_coefficient(alpha_a, alpha_b, nu);
        TransportSet {
            kappa: kappa_coefficient(alpha_b, nu),
            xi,
            eta_per_density: T::of(2.0) * mass * xi,
        }
    }
}

/// Momentum matrix G = [[kappa/nu^2, -xi/nu], [-xi/nu, 1]] with its
/// eigenvalues, plus the weight matrix the coefficients came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructuralMatrices<T> {
    pub m_cal: Mat2<T>,
    pub g_mat: Mat2<T>,
    pub lambda_plus: T,
    pub lambda_minus: T,
}

/// (g_mat, lambda_plus, lambda_minus) for given transport coefficients.
///
/// lambda_+ = (1 + k + sqrt((1-k)^2 + 4 r^2))/2 with k = kappa/nu^2 and
/// r = xi/nu dominates both diagonal entries, so lambda_+ >= 1 > 0 always;
/// lambda_- is recovered stably as det(G)/lambda_+.
fn spectrum_parts<T: Real>(kappa: T, xi: T, nu: T) -> (Mat2<T>, T, T) {
    let one = T::one();
    let k = kappa / (nu * nu);
    let r = xi / nu;
    let g = [[k, -r], [-r, one]];
    let disc = ((one - k) * (one - k) + T::of(4.0) * r * r).sqrt();
    let lambda_plus = T::of(0.5) * (one + k + disc);
    let lambda_minus = (k - r * r) / lambda_plus;
    (g, lambda_plus, lambda_minus)
}

/// Builds the structural matrices from a transport set.
///
/// The weight matrix is reconstructed through alpha_B = kappa/(2 nu^2) and
/// alpha_A = xi nu/(nu^2 + kappa); when kappa = -nu^2 the reconstruction is
/// alpha_A-independent and 0 is used.
pub fn momentum_matrix_spectrum<T: Real>(t: &TransportSet<T>, nu: T) -> Result<StructuralMatrices<T>> {
    if !(nu > T::zero()) || !nu.is_finite() {
        return Err(NskError::NonPositive { name: "nu", value: nu.as_f64() });
    }
    let alpha_b = t.kappa / (T::of(2.0) * nu * nu);
    let denom = nu * nu + t.kappa;
    let alpha_a = if denom == T::zero() { T::zero() } else { t.xi * nu / denom };
    let (m_cal, _) = lagrangian_matrix_det(alpha_a, alpha_b);
    let (g_mat, lambda_plus, lambda_minus) = spectrum_parts(t.kappa, t.xi, nu);
    Ok(StructuralMatrices { m_cal, g_mat, lambda_plus, lambda_minus })
}

/// Validated model inputs. Immutable once constructed; construction rejects
/// non-finite values, non-positive (M, nu, hbar), degenerate weights, and
/// negative kinematic viscosity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParameters<T> {
    mass: T,
    nu: T,
    alpha_a: T,
    alpha_b: T,
    mu: T,
    hbar: T,
}

impl<T: Real> ModelParameters<T> {
    pub fn new(mass: T, nu: T, alpha_a: T, alpha_b: T, mu: T, hbar: T) -> Result<Self> {
        let named = [
            ("mass", mass),
            ("nu", nu),
            ("alpha_a", alpha_a),
            ("alpha_b", alpha_b),
            ("mu", mu),
            ("hbar", hbar),
        ];
        for (name, v) in named {
            if !v.is_finite() {
                return Err(NskError::NonFinite { name, value: v.as_f64() });
            }
        }
        for (name, v) in [("mass", mass), ("nu", nu), ("hbar", hbar)] {
            if v <= T::zero() {
                return Err(NskError::NonPositive { name, value: v.as_f64() });
            }
        }
        let (_, det) = lagrangian_matrix_det(alpha_a, alpha_b);
        if det.abs() < degeneracy_tolerance(alpha_a, alpha_b) {
            return Err(NskError::DegenerateParameters { det: det.as_f64() });
        }
        let xi = xi_coefficient(alpha_a, alpha_b, nu);
        if xi < T::zero() {
            return Err(NskError::Negative { name: "xi", value: xi.as_f64() });
        }
        Ok(ModelParameters { mass, nu, alpha_a, alpha_b, mu, hbar })
    }

    /// Natural-units fixture: mass = hbar = 1, mu = 0.
    pub fn natural(alpha_a: T, alpha_b: T, nu: T) -> Result<Self> {
        Self::new(T::one(), nu, alpha_a, alpha_b, T::zero(), T::one())
    }

    /// The Madelung limit (alpha_A, alpha_B, nu) = (0, 1/2, hbar/(2M)),
    /// giving kappa = hbar^2/(4 M^2) and xi = 0.
    pub fn quantum_preset(mass: T, hbar: T) -> Result<Self> {
        let nu = hbar / (T::of(2.0) * mass);
        Self::new(mass, nu, T::zero(), T::of(0.5), T::zero(), hbar)
    }

    /// Inverts the identification: alpha_B = kappa/(2 nu^2) and
    /// alpha_A = xi nu/(nu^2 + kappa). Construction re-validates, so the
    /// round-tripped coefficients match the requested ones to a few ulp.
    pub fn from_transport(mass: T, nu: T, kappa: T, xi: T, mu: T, hbar: T) -> Result<Self> {
        if !(nu > T::zero()) || !nu.is_finite() {
            return Err(NskError::NonPositive { name: "nu", value: nu.as_f64() });
        }
        let alpha_b = kappa / (T::of(2.0) * nu * nu);
        let denom = nu * nu + kappa;
        let alpha_a = if denom == T::zero() { T::zero() } else { xi * nu / denom };
        Self::new(mass, nu, alpha_a, alpha_b, mu, hbar)
    }

    pub fn mass(&self) -> T {
        self.mass
    }

    pub fn nu(&self) -> T {
        self.nu
    }

    pub fn alpha_a(&self) -> T {
        self.alpha_a
    }

    pub fn alpha_b(&self) -> T {
        self.alpha_b
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn hbar(&self) -> T {
        self.hbar
    }

    pub fn derive_transport(&self) -> TransportSet<T> {
        TransportSet::from_weights(self.alpha_a, self.alpha_b, self.nu, self.mass)
    }

    pub fn lagrangian_matrix(&self) -> (Mat2<T>, T) {
        lagrangian_matrix_det(self.alpha_a, self.alpha_b)
    }

    /// Structural matrices with the exact weight matrix (no reconstruction).
    pub fn spectrum(&self) -> StructuralMatrices<T> {
        let t = self.derive_transport();
        let (m_cal, _) = self.lagrangian_matrix();
        let (g_mat, lambda_plus, lambda_minus) = spectrum_parts(t.kappa, t.xi, self.nu);
        StructuralMatrices { m_cal, g_mat, lambda_plus, lambda_minus }
    }
}
