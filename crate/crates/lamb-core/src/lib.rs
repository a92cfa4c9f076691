//! Simulation of an infinite elastic string coupled at one point to a
//! nonlinear oscillator or spring.
//!
//! Away from the junction the string obeys the free wave equation, so the
//! whole evolution reduces to an ordinary differential equation for the
//! junction displacement `y(t)`, forced by the periodic wave profile that
//! the initial data sends toward the junction. This crate implements that
//! pipeline end to end:
//!
//! - [`model`] — physical parameters and validated initial data;
//! - [`profile`] — finite Fourier profiles with exact derivatives and
//!   antiderivatives;
//! - [`force`] — a small expression language for the restoring force, with
//!   symbolic differentiation and qualitative classification;
//! - [`reduction`] — the travelling-wave split of the data and the periodic
//!   drive acting on the junction;
//! - [`oscillator`] — the reduced dynamics, a fixed-step integrator with
//!   dense output, and energy bookkeeping;
//! - [`poincare`] — the period return map: trapping bracket, fixed points,
//!   orbit iteration, attractor sampling;
//! - [`field`] — reconstruction of the space-time displacement field and
//!   the limit field, with residual diagnostics;
//! - [`checks`] — a named invariant suite over a configured scenario.

pub mod checks;
pub mod error;
pub mod field;
pub mod force;
pub mod model;
pub mod oscillator;
pub mod poincare;
pub mod profile;
pub mod reduction;

pub use error::{Error, Result};
pub use field::FieldFrame;
pub use force::ForceField;
pub use model::{InitialData, OscillatorState, StringParams};
pub use oscillator::{OdeProblem, Trajectory};
pub use poincare::PoincareMap;
pub use profile::PeriodicProfile;
pub use reduction::{DalembertSplit, Drive, IncomingScenario};
