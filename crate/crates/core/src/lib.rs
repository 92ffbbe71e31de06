//! Split-step spectral simulation of the defocusing nonlinear Schrödinger
//! equation with time-dependent quadratic potentials,
//!
//! ```text
//! i u_t + ½ Δu = V(t,x) u + c(t) |u|^{2σ} u,
//! ```
//!
//! together with the tooling used to study norm growth: Σᵏ diagnostics,
//! Hill-equation pairs and the lens transform, growth ledgers and fits, and
//! scattering checks.

pub mod bounds;
pub mod diagnostics;
pub mod error;
pub mod fit;
pub mod fourier;
pub mod grid;
pub mod interp;
pub mod lens;
pub mod potentials;
pub mod runner;
pub mod scattering;
pub mod scenario;
pub mod solver;

pub use error::{Error, GuardKind, Result};
pub use fourier::Fourier;
pub use grid::{ComplexField, LpExponent, RealField, SpatialGrid};
pub use potentials::{PotentialSpec, TimeFunction};
pub use solver::{Coupling, InitialCondition, SolverConfig, Stepper, Trajectory};

pub(crate) fn japanese(t: f64) -> f64 {
    (1.0 + t * t).sqrt()
}
