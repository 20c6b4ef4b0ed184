//! Four LIBOR modelling frameworks on a common tenor structure:
//!
//! * the LIBOR market model under the terminal measure, simulated with its
//!   full state-dependent drift ([`lmm`]), plus the frozen-drift, Picard
//!   log-normal and strong Taylor approximations ([`schemes`]);
//! * the forward price model with Esscher measure changes ([`fpm`]);
//! * the Markov-functional LIBOR model calibrated to digital caplets ([`mfm`]);
//! * the affine LIBOR model driven by a CIR process ([`affine`], [`cir`]).
//!
//! The crate is `no_std` and only needs `alloc`. Everything that touches files,
//! threads or the command line lives in the `libor-lab` companion crate.
//!
//! Monte Carlo routines draw every path from its own ChaCha stream (see
//! [`rng`]), so a path set can be produced in arbitrary chunks and in any
//! order and still be bit-identical to a single sequential run.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod affine;
pub mod cir;
mod error;
pub mod fourier;
pub mod fpm;
pub mod grid;
pub mod levy;
pub mod lmm;
pub mod math;
pub mod mfm;
pub mod paths;
pub mod pricing;
pub mod rng;
pub mod schemes;
pub mod tenor;
pub mod vols;

pub use error::{Error, Result};
pub use grid::TimeGrid;
pub use levy::{DriverPathSet, JumpLaw, LevyCharacteristics};
pub use paths::{LiborPathSet, PathRange, Scheme};
pub use tenor::{InitialCurve, TenorStructure};
pub use vols::VolatilitySurface;
