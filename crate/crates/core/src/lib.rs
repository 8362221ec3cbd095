//! Phase-estimation simulation of ground and core-level electronic states.
//!
//! The pipeline runs FCIDUMP integrals through a Jordan-Wigner qubit
//! Hamiltonian into one of two evolution backends (a gate-level Trotter
//! statevector or an exact fixed-particle sector), samples energies with QPE
//! or RPE, and checks every cluster against a determinant FCI solver.

pub mod determinant;
pub mod error;
pub mod fcidump;
pub mod fermion;
pub mod harness;
pub mod jw;
pub mod pauli;
pub mod phase;
pub mod sector;
pub mod statevector;
pub mod trotter;

pub use determinant::{Determinant, WeightedDeterminantState};
pub use error::{Error, Result};
pub use fcidump::{compute_orbital_energies, parse_fcidump, IntegralSet, OrbitalEnergies};
pub use fermion::{expand_to_spin_orbitals, FermionTermSum};
pub use harness::{run_experiment, ExperimentConfig, RunOutput, StateCluster};
pub use jw::{group_hermitian_terms, jordan_wigner, HermitianGroup};
pub use pauli::{pauli_commutator, PauliString, PauliSum};
pub use phase::{Backend, EnergySample, Estimator};
pub use sector::{FciSolution, SectorSolver};
pub use statevector::{prepare_state, QuantumState};
pub use trotter::{trotter_error_bound, TrotterBound, TrotterSchedule};

/// 1 Hartree in electronvolts (CODATA 2018).
pub const HARTREE_TO_EV: f64 = 27.211386245988;
