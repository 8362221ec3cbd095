#![allow(dead_code)]

use std::path::PathBuf;

use corelevel_qpe::IntegralSet;

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

pub fn load(name: &str) -> IntegralSet {
    IntegralSet::read(data(name)).expect("bundled FCIDUMP parses")
}

/// Small systems with at most four spatial orbitals.
pub const SMALL: [&str; 3] = [
    "h2_sto3g.fcidump",
    "h3plus_sto3g.fcidump",
    "h4_chain_sto3g.fcidump",
];

fn annihilate(b: u64, p: usize) -> Option<(f64, u64)> {
    if b >> p & 1 == 0 {
        return None;
    }
    let sign = if (b & ((1u64 << p) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    };
    Some((sign, b & !(1 << p)))
}

fn create(b: u64, p: usize) -> Option<(f64, u64)> {
    if b >> p & 1 == 1 {
        return None;
    }
    let sign = if (b & ((1u64 << p) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    };
    Some((sign, b | (1 << p)))
}

/// Apply `ops` right to left: `(true, p)` creates, `(false, p)` annihilates.
fn apply_ops(b: u64, ops: &[(bool, usize)]) -> Option<(f64, u64)> {
    let mut sign = 1.0;
    let mut b = b;
    for &(dagger, p) in ops.iter().rev() {
        let (s, b2) = if dagger {
            create(b, p)?
        } else {
            annihilate(b, p)?
        };
        sign *= s;
        b = b2;
    }
    Some((sign, b))
}

/// Dense Fock-space Hamiltonian on `2^(2N)` occupation strings, spin orbital
/// `2p + sigma`:
/// `E_core + sum h_pq a+_p a_q + 1/2 sum (pq|rs) a+_p a+_r a_s a_q` with spin sums.
pub fn fock_hamiltonian(ints: &IntegralSet) -> Vec<Vec<f64>> {
    let n = ints.n_orbitals();
    let dim = 1usize << (2 * n);
    let mut h = vec![vec![0.0; dim]; dim];
    for col in 0..dim {
        let ket = col as u64;
        h[col][col] += ints.core_energy();
        for p in 0..n {
            for q in 0..n {
                let v = ints.h1(p, q);
                if v == 0.0 {
                    continue;
                }
                for s in 0..2 {
                    if let Some((sign, bra)) =
                        apply_ops(ket, &[(true, 2 * p + s), (false, 2 * q + s)])
                    {
                        h[bra as usize][col] += sign * v;
                    }
                }
            }
        }
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = ints.eri(p, q, r, s);
                        if v == 0.0 {
                            continue;
                        }
                        for sig in 0..2 {
                            for tau in 0..2 {
                                let ops = [
                                    (true, 2 * p + sig),
                                    (true, 2 * r + tau),
                                    (false, 2 * s + tau),
                                    (false, 2 * q + sig),
                                ];
                                if let Some((sign, bra)) = apply_ops(ket, &ops) {
                                    h[bra as usize][col] += 0.5 * sign * v;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    h
}

/// Occupation strings with the given alpha and beta electron counts.
pub fn sector_strings(n_orbitals: usize, n_alpha: usize, n_beta: usize) -> Vec<u64> {
    (0..1u64 << (2 * n_orbitals))
        .filter(|b| {
            let a = (0..n_orbitals).filter(|p| b >> (2 * p) & 1 == 1).count();
            let bb = (0..n_orbitals)
                .filter(|p| b >> (2 * p + 1) & 1 == 1)
                .count();
            a == n_alpha && bb == n_beta
        })
        .collect()
}
