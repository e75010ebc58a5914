//! Photon-assisted tunneling of phonons in trapped-ion microtrap arrays.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] describes the trap array and the periodic drive,
//! * [`couplings`] builds bare dipolar and dressed (photon-assisted) hopping
//!   matrices, including the Bessel machinery behind the dressing factor,
//! * [`fock`] provides a truncated multi-site bosonic Fock space,
//! * [`dynamics`] assembles effective and exact driven Hamiltonians and
//!   integrates the Schrödinger equation,
//! * [`spectra`] analyses single-particle spectra of the rhombic ladder and
//!   the square (Hofstadter) lattice.
//!
//! Units: `ħ = 1`, frequencies in units of the base trap frequency of the
//! simulated direction, lengths in units of the spacing along `x`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod couplings;
pub mod dynamics;
mod error;
pub mod fock;
pub mod model;
pub mod spectra;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use couplings::{
    bare_coupling_matrix, bessel_j, dressed_factor, effective_coupling_matrix, plaquette_flux,
    CouplingMatrix, CouplingOptions, FrequencyWeighting,
};
pub use dynamics::{EvolutionResult, ModelKind};
pub use fock::{FockSpace, LadderKind};
pub use model::{
    build_array, ArrayParams, Direction, DriveMode, DriveSpec, LaserParams, Layout, TrapArray,
};
pub use spectra::{Boundary, SpectrumResult};
