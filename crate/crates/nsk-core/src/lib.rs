//! One-dimensional compressible flow with capillary and viscous stresses,
//! its stochastic-particle representation, and the position-momentum
//! uncertainty relation the two share.
//!
//! The crate covers five connected pieces:
//!
//! * [`params`]: variational weights, noise intensity, and the derived
//!   transport coefficients (capillarity kappa, kinematic viscosity xi)
//!   with their structural matrices and spectra.
//! * [`states`] and [`uncertainty`]: Gaussian fluid states, grid-sampled
//!   fields, and the inequality `sigma_x^2 sigma_p^2 >= rhs(cov)` together
//!   with its viscosity-controlled minimum.
//! * [`bounds`]: where viscosity improves on the zero-viscosity minimum
//!   (phase diagram, minimum curve) and kinematic lower bounds with
//!   order-of-magnitude estimates for real media.
//! * [`solver`]: finite-difference time integration of the continuity and
//!   momentum equations with per-stride uncertainty diagnostics.
//! * [`sde`]: forward Euler-Maruyama ensembles whose drift is read off a
//!   fluid field, with empirical-vs-reference comparison.
//!
//! Numerics are generic over [`Real`] (`f32` or `f64`); the quoted
//! tolerances assume `f64`, and `*64` aliases fix that choice. [`verify`]
//! runs the ten built-in acceptance checks.

pub mod bounds;
pub mod error;
pub mod params;
pub mod real;
pub mod sde;
pub mod solver;
pub mod states;
pub mod uncertainty;
pub mod verify;

pub use error::{NskError, Result};
pub use real::Real;

pub use bounds::{KssBounds, MediaEstimate, PhaseDiagramCell};
pub use params::{ModelParameters, StructuralMatrices, TransportSet};
pub use sde::{CompareReport, DriftField, Ensemble};
pub use solver::{Boundary, DiagRow, Eos, Harmonic, Snapshot, SolverConfig, Trajectory};
pub use states::{CoherentSpec, GaussianState, SampledState};
pub use uncertainty::{FluidField1D, UncertaintyReport};
pub use verify::CriterionReport;

/// Double-precision aliases for the generic core types.
pub type ModelParameters64 = params::ModelParameters<f64>;
pub type TransportSet64 = params::TransportSet<f64>;
pub type StructuralMatrices64 = params::StructuralMatrices<f64>;
pub type GaussianState64 = states::GaussianState<f64>;
pub type CoherentSpec64 = states::CoherentSpec<f64>;
pub type SampledState64 = states::SampledState<f64>;
pub type FluidField64 = uncertainty::FluidField1D<f64>;
pub type UncertaintyReport64 = uncertainty::UncertaintyReport<f64>;
pub type PhaseDiagramCell64 = bounds::PhaseDiagramCell<f64>;
pub type KssBounds64 = bounds::KssBounds<f64>;
pub type MediaEstimate64 = bounds::MediaEstimate<f64>;
pub type SolverConfig64 = solver::SolverConfig<f64>;
pub type Trajectory64 = solver::Trajectory<f64>;
pub type Ensemble64 = sde::Ensemble<f64>;
pub type DriftField64 = sde::DriftField<f64>;
pub type CompareReport64 = sde::CompareReport<f64>;

#[cfg(test)]
pub(crate) mod testutil {
    pub(crate) use crate::verify::linspace;
}
