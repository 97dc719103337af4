//! Two-electron paired-geminal workbench.
//!
//! The crate simulates a hybrid quantum-classical eigensolver for
//! two-electron molecules (H₂, H₃⁺) in a minimal STO-3G basis:
//!
//! * [`chem`] builds Gaussian integrals, restricted Hartree-Fock orbitals and
//!   the exact two-electron FCI reference.
//! * [`qsim`] is a dense statevector simulator with Pauli algebra, shot
//!   sampling and a calibration-driven stochastic noise model.
//! * [`ansatz`] compiles the paired double-excitation ansatz (12- and 8-CNOT
//!   entanglers) and the Jordan-Wigner Hamiltonian.
//! * [`tomography`] estimates orbital occupations and consecutive-pair signs
//!   from a constant number of measurement circuits.
//! * [`mitigation`] implements symmetry postselection, the occupation
//!   polytope projection with affine calibration, and the V spread metric.
//! * [`hybrid`] alternates the quantum Nelder-Mead step with the classical
//!   BFGS orbital rotation step to produce dissociation curves.
//! * [`experiments`] holds the drivers behind the command-line tool.
//!
//! Bitstrings are little-endian everywhere: qubit 0 is the least significant
//! bit of an outcome word. Spin-orbital `(p, σ)` lives on qubit `2p + σ`
//! with `σ = 0` for α and `σ = 1` for β.

pub mod ansatz;
pub mod chem;
pub mod error;
pub mod experiments;
pub mod hybrid;
pub mod mitigation;
pub mod qsim;
pub mod seed;
pub mod tomography;

pub use error::{Error, Result};

/// Crate version echoed into every emitted table.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
