//! Exact diagonalization of compact U(1) lattice gauge theory in 2+1
//! dimensions, together with the cold-atom rotor model whose low-energy
//! sector reproduces it.
//!
//! The crate is layered bottom-up: [`lattice`] geometry, [`basis`]
//! enumeration of Gauss-law sectors, [`hamiltonian`] assembly into
//! [`sparse`] operators, the [`solver`], [`observables`] measured on
//! eigenstates, and [`experiments`] that tie them into reproducible runs
//! driven by the `fluxlat` binary.

pub mod basis;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod hamiltonian;
pub mod lattice;
pub mod observables;
pub mod solver;
pub mod sparse;

pub use error::{Error, ErrorClass, Result};
