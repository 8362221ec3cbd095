use std::collections::HashMap;

use crate::determinant::Determinant;
use crate::error::{Error, Result};

/// Default cap on the number of determinants in a sector.
pub const DEFAULT_DIMENSION_CAP: usize = 5_000_000;

/// All determinants with fixed `(n_alpha, n_beta)`, ordered by alpha string
/// then beta string, each string ordered lexicographically by its occupied
/// orbital list.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    n_orbitals: usize,
    n_alpha: usize,
    n_beta: usize,
    alpha_strings: Vec<u64>,
    beta_strings: Vec<u64>,
    alpha_index: HashMap<u64, usize>,
    beta_index: HashMap<u64, usize>,
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn combinations(n: usize, k: usize) -> Vec<u64> {
    fn rec(start: usize, n: usize, k: usize, prefix: u64, out: &mut Vec<u64>) {
        if k == 0 {
            out.push(prefix);
            return;
        }
        for p in start..=n - k {
            rec(p + 1, n, k - 1, prefix | (1 << p), out);
        }
    }
    let mut out = Vec::with_capacity(binomial(n, k) as usize);
    rec(0, n, k, 0, &mut out);
    out
}

pub fn enumerate_basis(n_orbitals: usize, n_alpha: usize, n_beta: usize) -> Result<SectorBasis> {
    enumerate_basis_with_cap(n_orbitals, n_alpha, n_beta, DEFAULT_DIMENSION_CAP)
}

pub fn enumerate_basis_with_cap(
    n_orbitals: usize,
    n_alpha: usize,
    n_beta: usize,
    cap: usize,
) -> Result<SectorBasis> {
    if n_orbitals > 32 {
        return Err(Error::Capacity(format!("{n_orbitals} orbitals exceed 32")));
    }
    if n_alpha > n_orbitals || n_beta > n_orbitals {
        return Err(Error::Domain(format!(
            "({n_alpha}, {n_beta}) electrons do not fit in {n_orbitals} orbitals"
        )));
    }
    let dim = binomial(n_orbitals, n_alpha) * binomial(n_orbitals, n_beta);
    if dim > cap as u128 {
        return Err(Error::Capacity(format!(
            "sector dimension {dim} exceeds the cap of {cap}"
        )));
    }
    let alpha_strings = combinations(n_orbitals, n_alpha);
    let beta_strings = combinations(n_orbitals, n_beta);
    let index = |v: &[u64]| v.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    Ok(SectorBasis {
        n_orbitals,
        n_alpha,
        n_beta,
        alpha_index: index(&alpha_strings),
        beta_index: index(&beta_strings),
        alpha_strings,
        beta_strings,
    })
}

impl SectorBasis {
    pub fn n_orbitals(&self) -> usize {
        self.n_orbitals
    }

    pub fn n_alpha(&self) -> usize {
        self.n_alpha
    }

    pub fn n_beta(&self) -> usize {
        self.n_beta
    }

    pub fn dim(&self) -> usize {
        self.alpha_strings.len() * self.beta_strings.len()
    }

    pub fn determinant(&self, i: usize) -> Determinant {
        let nb = self.beta_strings.len();
        Determinant::new(self.alpha_strings[i / nb], self.beta_strings[i % nb])
    }

    pub fn index_of(&self, d: &Determinant) -> Option<usize> {
        let ia = self.alpha_index.get(&d.alpha)?;
        let ib = self.beta_index.get(&d.beta)?;
        Some(ia * self.beta_strings.len() + ib)
    }

    pub fn iter(&self) -> impl Iterator<Item = Determinant> + '_ {
        self.alpha_strings.iter().flat_map(move |&a| {
            self.beta_strings
                .iter()
                .map(move |&b| Determinant::new(a, b))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn water_sector_dimension() {
        assert_eq!(enumerate_basis(9, 5, 5).unwrap().dim(), 15876);
        assert_eq!(enumerate_basis(1, 1, 1).unwrap().dim(), 1);
    }

    #[test]
    fn lexicographic_order() {
        let b = enumerate_basis(2, 1, 0).unwrap();
        let dets: Vec<_> = b.iter().collect();
        assert_eq!(
            dets,
            vec![Determinant::new(0b01, 0), Determinant::new(0b10, 0)]
        );
        let b = enumerate_basis(4, 2, 0).unwrap();
        let a: Vec<u64> = b.iter().map(|d| d.alpha).collect();
        assert_eq!(a, vec![0b0011, 0b0101, 0b1001, 0b0110, 0b1010, 0b1100]);
    }

    #[test]
    fn index_round_trip() {
        let b = enumerate_basis(5, 2, 3).unwrap();
        for (i, d) in b.iter().enumerate() {
            assert_eq!(b.determinant(i), d);
            assert_eq!(b.index_of(&d), Some(i));
        }
        assert_eq!(b.index_of(&Determinant::new(0b1, 0b111)), None);
    }

    #[test]
    fn capacity_and_domain_errors() {
        assert!(matches!(
            enumerate_basis_with_cap(9, 5, 5, 1000),
            Err(Error::Capacity(_))
        ));
        assert!(matches!(enumerate_basis(3, 4, 0), Err(Error::Domain(_))));
    }
}
