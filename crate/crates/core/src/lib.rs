//! Simulation and feasibility toolkit for atom-nanoparticle Schrödinger-cat
//! interferometry.
//!
//! A trapped atom is rigidly coupled to a levitated nanoparticle; Raman
//! pulses on the atom's hyperfine qubit split, displace and recombine the
//! nanoparticle's centre-of-mass wavepacket while it briefly falls under
//! gravity. The relative phase `m g Δx Δt / ħ` between the two branches is
//! mapped onto the qubit and read out.
//!
//! Modules:
//!
//! * [`params`] physical constants, scenario records, derived quantities and
//!   JSON scenario ingestion.
//! * [`classical`] closed-form trajectories under trap plus gravity, an RK4
//!   oracle and semiclassical action phases.
//! * [`gaussian`] coherent-state algebra and the exact and expanded quantum
//!   evolutions (displaced oscillator, sudden trap quench).
//! * [`fock`] truncated number-basis simulator used as a brute-force oracle.
//! * [`protocol`] the interferometric sequence as a state machine over
//!   hybrid qubit⊗coherent states.
//! * [`feasibility`] experimental design formulas and graded constraints.
//! * [`verify`] the oracle-equivalence suite consumed by the CLI.
//! * [`output`] CSV and JSON-lines writers with round-trip precision.

pub mod classical;
pub mod error;
pub mod feasibility;
pub mod fock;
pub mod gaussian;
pub mod output;
pub mod params;
pub mod protocol;
pub mod verify;

pub use error::{Error, Result};

/// Complex double used throughout.
pub type C64 = num_complex::Complex64;
