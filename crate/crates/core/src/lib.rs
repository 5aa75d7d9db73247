//! Numerical toolkit for the planar circular restricted three-body problem
//! with a radiating larger primary, an oblate smaller primary, and
//! Poynting-Robertson drag.
//!
//! The crate locates the triangular equilibrium points, classifies their
//! linear stability through the characteristic quartic of the quadratic
//! Hamiltonian, builds the first-order normal form around stable points,
//! integrates the equations of motion directly, and audits hand-derived
//! series coefficient tables against an independent truncated-Taylor oracle.
//!
//! Layering, bottom up:
//!
//! * [`params`]: validated parameter bundles and derived constants.
//! * [`dynamics`]: force function, equations of motion, Lagrangian,
//!   Hamiltonian, velocity/momentum charts.
//! * [`equilibria`]: first-order closed form and Newton refinement of the
//!   triangular points.
//! * [`jets`]: degree-4 truncated Taylor arithmetic, expansions of L and H
//!   about an equilibrium, and the printed-table audit.
//! * [`normalization`]: quadratic Hamiltonian, characteristic quartic,
//!   spectrum, resonances, symplectic normal form, stability verdicts.
//! * [`integrator`]: adaptive Runge-Kutta integration with dense output.
//! * [`sweep`]: parallel parameter-grid scans and critical-mass bisection.

pub mod dynamics;
pub mod equilibria;
pub mod integrator;
pub mod jets;
pub mod normalization;
pub mod params;
pub mod sweep;

pub use dynamics::{CanonicalState, DynamicsError, PhaseState};
pub use equilibria::{Branch, EquilibriaError, EquilibriumPoint};
pub use integrator::{GrowthReport, IntegrateError, Trajectory};
pub use jets::{Jet4, SeriesAudit, N_COEFFS};
pub use normalization::{
    NormalizationError, QuadraticHamiltonian, Resonance, ResonanceKind, StabilityReport, Verdict,
};
pub use params::{mean_motion, radiation_factor, DragSpec, ParamError, SystemParams};
pub use sweep::{GridSpec, SweepError, SweepResult};
