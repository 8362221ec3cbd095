//! Fixed `(n_alpha, n_beta)` determinant sector: Slater-Condon Hamiltonian,
//! FCI eigenpairs, spin, and exact time evolution.

mod basis;
mod hamiltonian;
mod propagate;
mod solver;

pub use basis::{enumerate_basis, enumerate_basis_with_cap, SectorBasis, DEFAULT_DIMENSION_CAP};
pub use hamiltonian::{
    build_sector_hamiltonian, determinant_energy, CsrMatrix, SectorHamiltonian, SymmetryBlock,
    SYMMETRY_LEAK_TOLERANCE,
};
pub use propagate::{evolution_angle, evolve_exact};
pub use solver::{
    classify_against_fci, davidson, fci_solve, spin_squared, BlockEigen, FciMatch, FciOptions,
    FciSolution, FciState, SectorSolver, DENSE_CROSSOVER, LEADING_COUNT, RESIDUAL_TOLERANCE,
};
