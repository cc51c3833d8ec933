//! Numerical core for comparing pilot-wave (Bohmian) and Heisenberg-picture
//! two-time position correlations of a 1D quantum particle.
//!
//! Everything here is `no_std` + `alloc`: uniform periodic grids with a
//! radix-2 spectral transform, harmonic-oscillator states, a Strang
//! split-operator stepper, Bohmian velocity fields and trajectory ensembles,
//! two-time correlators, and a truncated Fock-basis oracle. File formats,
//! configuration and thread pools live in the `pwc` crate.
//!
//! Units are explicit everywhere ([`Units`], [`OscillatorParams`]); the
//! natural choice `hbar = m = omega = 1` is what the defaults use.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bohm;
pub mod correlators;
pub mod error;
pub mod evolution;
pub mod exec;
pub mod fft;
pub mod fock;
pub mod grid;
pub mod interp;
pub mod oscillator;

pub use error::{Error, Result};
pub use exec::{Executor, Sequential};
pub use grid::{Grid, RealField, Units, Wavefunction};
pub use oscillator::{OscillatorParams, StateSpec};

/// Complex amplitude type used throughout.
pub type C64 = num_complex::Complex64;
