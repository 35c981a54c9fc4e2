//! Flight-gate assignment as a diagonal qubit Hamiltonian, solved with a
//! classically simulated CVaR variational eigensolver.
//!
//! Modules, bottom up:
//!
//! - [`instance`]: problem data, feasibility, travel time, brute-force optima
//!   and a seeded instance generator.
//! - [`encoding`]: one-hot and binary encodings into Pauli-Z polynomials and
//!   dense energy tables.
//! - [`simulator`]: statevector simulation of the layered `R_Y` ansätze.
//! - [`vqe`]: CVaR cost estimators, a derivative-free optimizer and the run
//!   loop that records fidelity per evaluation.
//! - [`harness`]: deterministic parameter sweeps, success-fraction curves and
//!   CSV reports.
//!
//! Algorithm variants (encodings, ansatz families, cost modes) are trait
//! objects registered by name and picked at runtime.

pub mod encoding;
pub mod error;
pub mod harness;
pub mod instance;
pub mod registry;
pub mod seed;
pub mod simulator;
pub mod vqe;

pub use error::{Error, Result};
