//! Micromaser pumping under intensity-dependent Jaynes–Cummings couplings.
//!
//! The crate evolves a truncated cavity-field density matrix atom by atom for
//! one- and two-photon f-deformed couplings, builds the analytic families of
//! nonlinear coherent states the field settles into at weak coupling, and
//! provides the first-order approximation machinery connecting the two.
//!
//! Everything here is pure computation on `alloc` collections; file formats,
//! configuration and the command-line driver live in the `micromaser` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod algebra;
pub mod analysis;
pub mod approx;
pub mod engine;
mod error;
mod special;
pub mod states;
pub mod verify;

pub use algebra::{DeformedLadder, LadderKind, NonlinearityFn, Sector};
pub use analysis::{fidelity, observables, ObservableSet};
pub use engine::{AtomPreparation, FieldState, InitialField, Method, PumpConfig, RunRecord};
pub use error::{Error, Result};
pub use states::{PureState, StateFamily, StateTag};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix (density matrices, joint unitaries).
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex column vector (state amplitudes).
pub type CVector = nalgebra::DVector<C64>;
