//! Classical simulation of digitized adiabatic evolution on nearest-neighbour
//! spin chains.
//!
//! The crate covers the whole pipeline from a problem description to figures
//! of merit:
//!
//! * [`problem`]: spin problems, annealing schedules, random instance
//!   generation and the built-in reference instances.
//! * [`hamiltonian`]: Pauli-term Hamiltonians, matrix-free application,
//!   spectra, target states and minimum-gap sweeps.
//! * [`evolution`]: the finite-time continuous evolution and its first-order
//!   product-formula (digital) counterpart.
//! * [`compiler`]: compilation of product-formula steps into single-qubit
//!   rotations and tunable conditional-phase gates, plus a gate simulator.
//! * [`metrics`] and [`resources`]: fidelities, success measures, kink
//!   statistics, residual energy, power-law fits and resource estimates.
//! * [`experiments`]: parameter presets and batch drivers used by the CLI.
//!
//! Basis convention used throughout: bit `i` of a basis index is the state of
//! qubit `i` (qubit 0 is the least significant bit), and `σ_z|0⟩ = +|0⟩`.

pub mod compiler;
pub mod error;
pub mod evolution;
pub mod experiments;
pub mod hamiltonian;
pub mod metrics;
pub mod problem;
pub mod resources;
pub mod state;

pub use error::{Error, Result};
pub use problem::{ProblemKind, Sampling, Schedule, SpinProblem};
pub use state::StateVector;
