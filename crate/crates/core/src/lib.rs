//! Stationary light pulses in EIT media of non-moving atoms.
//!
//! The crate is organised bottom-up:
//!
//! * [`domain`] holds grids, coupling schedules, medium parameters and the
//!   two-component field containers shared by everything else.
//! * [`fourier`] computes the Fourier coefficients of the standing-wave
//!   denominators, the non-adiabatic dispersion parameters, and a quadrature
//!   oracle for both.
//! * [`analytic`] contains the closed-form polariton solutions, the Raman
//!   coherence harmonics and the Fourier-space dispersive propagator.
//! * [`solver`] integrates the cold-atom polariton equations, the thermal-gas
//!   normal-mode equation and a truncated-harmonic Maxwell–Bloch model.
//! * [`observables`] reduces fields to scalar pulse metrics.
//!
//! Lengths are measured in units of the pulse length `L_p` and times in
//! units of the switching time `T_s`; with the default schedule the
//! saturated group velocity is `v_g0 = L_p / T_s = 1`.

pub mod analytic;
pub mod domain;
pub mod error;
pub mod fourier;
pub mod observables;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};

/// Complex sample type used for every field.
pub type C64 = num_complex::Complex64;
