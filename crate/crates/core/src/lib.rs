//! Simulator and control-schedule compiler for superconducting charge qubits
//! that are all coupled to one another through capacitors.
//!
//! The pipeline runs from capacitances to circuit energies ([`physics`]),
//! through two-level Hamiltonians and exact propagators ([`hamiltonian`]),
//! gate protocols as timed flux settings ([`protocols`]), frequency
//! allocation under detuning margins ([`allocator`]), and finally a small
//! circuit language compiled into timelines and verified by simulation
//! ([`compiler`]).

pub mod allocator;
pub mod cli;
pub mod compiler;
pub mod error;
pub mod hamiltonian;
pub mod io;
pub mod physics;
pub mod protocols;

pub use error::{Error, Result};
