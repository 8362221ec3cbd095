mod common;

use common::{fock_hamiltonian, load, sector_strings, SMALL};
use corelevel_qpe::jw::{number_operator, sz_operator};
use corelevel_qpe::sector::{enumerate_basis, FciOptions, SectorSolver};
use corelevel_qpe::{expand_to_spin_orbitals, group_hermitian_terms, jordan_wigner, Determinant};

#[test]
fn jordan_wigner_matches_fock_space_matrix() {
    for name in SMALL {
        let ints = load(name);
        let h = jordan_wigner(&expand_to_spin_orbitals(&ints)).unwrap();
        let dense = fock_hamiltonian(&ints);
        let mut worst = 0.0f64;
        for (i, row) in dense.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                worst = worst.max((h.matrix_element(i as u64, j as u64) - v).abs());
            }
        }
        assert!(worst < 1e-10, "{name}: max deviation {worst:e}");
    }
}

#[test]
fn reference_energy_is_expectation_of_compiled_hamiltonian() {
    for name in SMALL.iter().chain(&["h2o_ccpvdz_10e9o.fcidump"]) {
        let ints = load(name);
        let h = jordan_wigner(&expand_to_spin_orbitals(&ints)).unwrap();
        let reference = Determinant::aufbau(ints.n_alpha(), ints.n_beta()).to_bitstring();
        let e_hf = ints.reference_energy(ints.n_alpha()).unwrap();
        let expect = h.matrix_element(reference, reference);
        assert!((e_hf - expect).abs() < 1e-9, "{name}: {e_hf} vs {expect}");
    }
}

#[test]
fn sector_spectrum_matches_fock_space_block() {
    for name in SMALL {
        let ints = load(name);
        let (na, nb) = (ints.n_alpha(), ints.n_beta());
        let dense = fock_hamiltonian(&ints);
        let strings = sector_strings(ints.n_orbitals(), na, nb);
        let expected = symmetric_eigenvalues(&sector_matrix(&dense, &strings));
        let solver = SectorSolver::from_integrals(&ints).unwrap();
        let got = solver
            .solve(&FciOptions::lowest(strings.len()))
            .unwrap()
            .energies();
        assert_eq!(got.len(), expected.len());
        for (a, b) in got.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-10, "{name}: {a} vs {b}");
        }
        assert_eq!(
            enumerate_basis(ints.n_orbitals(), na, nb).unwrap().dim(),
            strings.len()
        );
    }
}

#[test]
fn compiled_hamiltonian_conserves_number_and_spin() {
    for name in SMALL {
        let ints = load(name);
        let terms = expand_to_spin_orbitals(&ints);
        let h = jordan_wigner(&terms).unwrap();
        let n = h.n_qubits();
        for op in [number_operator(n), sz_operator(n)] {
            let c = h.commutator(&op).unwrap();
            assert!(c.values().all(|v| v.norm() < 1e-12), "{name}");
        }
        for g in group_hermitian_terms(&terms).unwrap() {
            assert!(g.strings_commute());
        }
    }
}

#[test]
fn compiled_text_round_trips() {
    let ints = load("h4_chain_sto3g.fcidump");
    let h = jordan_wigner(&expand_to_spin_orbitals(&ints)).unwrap();
    let text = h.to_text();
    assert!(text.lines().next().unwrap().ends_with(&"I".repeat(8)));
    let back = corelevel_qpe::PauliSum::from_text(&text).unwrap();
    assert_eq!(back.to_text(), text);
    assert_eq!(back, h);
}

/// Ascending eigenvalues of a dense symmetric matrix.
pub fn symmetric_eigenvalues(m: &[Vec<f64>]) -> Vec<f64> {
    let n = m.len();
    let a = faer::Mat::<f64>::from_fn(n, n, |i, j| m[i][j]);
    let evd = a
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("dense eigensolver");
    let mut e: Vec<f64> = evd.S().column_vector().iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

pub fn sector_matrix(h: &[Vec<f64>], strings: &[u64]) -> Vec<Vec<f64>> {
    strings
        .iter()
        .map(|&i| strings.iter().map(|&j| h[i as usize][j as usize]).collect())
        .collect()
}
