//! Exact quantum theory of two-mode optical vector solitons.
//!
//! The crate is organised around the objects of the theory:
//!
//! * [`model`]: parameters, derived scales and adiabatic schedules.
//! * [`bethe`]: Bethe-ansatz amplitudes, energies and normalization.
//! * [`eigencheck`]: grid Hamiltonian that checks whether the ansatz is an
//!   eigenstate for a given cross-phase ratio.
//! * [`sampler`]: Metropolis estimation of photon-position and momentum
//!   moments of the soliton state.
//! * [`protocol`]: adiabatic expansion followed by dispersion management,
//!   and the resulting timing enhancement.
//! * [`epr`]: pulse-center EPR metrics for the two polarization modes.
//! * [`classical`]: split-step solver for the classical coupled NLSE.
//!
//! All quantities use ħ = 1.

pub mod bethe;
pub mod classical;
pub mod eigencheck;
pub mod epr;
mod error;
pub mod model;
pub mod protocol;
pub mod reduce;
pub mod sampler;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use bethe::{Amplitude, Configuration, PulseCenterState};
pub use classical::{Field2, StepPlan};
pub use eigencheck::{GridSpec, ResidualReport};
pub use sampler::{Estimate, McmcConfig, MomentEstimates};
pub use epr::EprMetrics;
pub use protocol::{ProtocolReport, Regime};
pub use model::{AdiabaticSchedule, DerivedScales, Segment, SolitonParams};
