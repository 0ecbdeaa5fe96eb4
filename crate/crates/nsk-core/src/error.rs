use thiserror::Error;

pub type Result<T, E = NskError> = std::result::Result<T, E>;

/// Failure modes of the library.
///
/// Validation problems (bad inputs, schema mismatches) are distinguished from
/// numerical aborts (instability, particle divergence); the CLI maps the
/// former to exit code 1 and the latter to exit code 2.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NskError {
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("{name} must be > 0, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("{name} must be >= 0, got {value}")]
    Negative { name: &'static str, value: f64 },

    #[error("degenerate Lagrangian weights (det = {det:.3e}, i.e. kappa = xi^2): momenta are undefined")]
    DegenerateParameters { det: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(&'static str),

    #[error("grid spacing not uniform near index {index}")]
    NonUniformGrid { index: usize },

    #[error("field arrays disagree in length: x={x}, rho={rho}, v={v} (need equal, >= 4)")]
    BadFieldShape { x: usize, rho: usize, v: usize },

    #[error("density mass {mass} deviates from 1 beyond tolerance {tol}")]
    MassNotNormalized { mass: f64, tol: f64 },

    #[error("density below floor inside retained support at index {index}")]
    FloorBreach { index: usize },

    #[error("time step {dt} exceeds the stability bound {limit}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("numerical instability at t = {t:.6}: min density {min_rho:.3e}")]
    Instability { t: f64, min_rho: f64 },

    #[error("particle diverged at t = {t:.6}: |x| = {x:.3e} exceeds guard {guard:.3e}")]
    Divergence { t: f64, x: f64, guard: f64 },

    #[error("{0}")]
    InvalidConfig(String),
}

impl NskError {
    /// CLI exit code convention: 1 = validation error, 2 = numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            NskError::Instability { .. } | NskError::Divergence { .. } => 2,
            _ => 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_split_validation_from_numerical() {
        assert_eq!(NskError::NonPositive { name: "nu", value: -1.0 }.exit_code(), 1);
        assert_eq!(NskError::Instability { t: 0.5, min_rho: -1e-3 }.exit_code(), 2);
        assert_eq!(NskError::Divergence { t: 0.5, x: 1e9, guard: 1e4 }.exit_code(), 2);
    }
}
