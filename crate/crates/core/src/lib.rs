//! Spin-boson simulator for conical-intersection dynamics in a trapped-ion
//! register: Jahn-Teller Hamiltonians on a truncated two-mode Fock space,
//! Trotterized adiabatic ramps with exact and open-system references,
//! geometric-phase line integrals, and Fourier-push tomography with
//! shot-noise forward modelling.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod geometry;
pub mod linalg;
pub mod models;
pub mod tomography;

pub use error::{Error, Result};
pub use fock::{
    DensityMatrix, LadderKind, Mode, ModeSpace, MotionalDensity, Operator, Pauli, SpinBosonState,
};
pub use models::{Branch, ModelParams, RampSchedule};
