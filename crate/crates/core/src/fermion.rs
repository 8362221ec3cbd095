//! Second-quantized Hamiltonian over spin orbitals.
//!
//! Spin orbitals are interleaved: spatial orbital `p` gives `2p` (alpha) and
//! `2p + 1` (beta). Two-body terms are kept in the normal-ordered form
//! `c a+_p a+_q a_r a_s` with `p < q` and `r > s`, so that the Hermitian
//! partner of `[p, q, r, s]` is `[s, r, q, p]`.

use std::collections::BTreeMap;

use crate::fcidump::IntegralSet;

#[inline]
pub fn spin_orbital(spatial: usize, beta: bool) -> usize {
    2 * spatial + beta as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct FermionTermSum {
    n_spin_orbitals: usize,
    core_energy: f64,
    one_body: BTreeMap<(usize, usize), f64>,
    two_body: BTreeMap<[usize; 4], f64>,
}

impl FermionTermSum {
    pub fn new(n_spin_orbitals: usize, core_energy: f64) -> Self {
        Self {
            n_spin_orbitals,
            core_energy,
            one_body: BTreeMap::new(),
            two_body: BTreeMap::new(),
        }
    }

    pub fn n_spin_orbitals(&self) -> usize {
        self.n_spin_orbitals
    }

    pub fn core_energy(&self) -> f64 {
        self.core_energy
    }

    /// `(p, q) -> c` for `c a+_p a_q`.
    pub fn one_body(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.one_body
    }

    /// `[p, q, r, s] -> c` for `c a+_p a+_q a_r a_s`, `p < q`, `r > s`.
    pub fn two_body(&self) -> &BTreeMap<[usize; 4], f64> {
        &self.two_body
    }

    pub fn add_one_body(&mut self, p: usize, q: usize, coeff: f64) {
        *self.one_body.entry((p, q)).or_default() += coeff;
    }

    /// Add `coeff a+_p a+_q a_r a_s` for arbitrary index order; the term is
    /// reordered to canonical form with the matching sign, or dropped when
    /// it vanishes identically.
    pub fn add_two_body(&mut self, p: usize, q: usize, r: usize, s: usize, coeff: f64) {
        if p == q || r == s {
            return;
        }
        let mut sign = 1.0;
        let (p, q) = if p < q {
            (p, q)
        } else {
            sign = -sign;
            (q, p)
        };
        let (r, s) = if r > s {
            (r, s)
        } else {
            sign = -sign;
            (s, r)
        };
        *self.two_body.entry([p, q, r, s]).or_default() += sign * coeff;
    }

    /// Drop entries that cancelled to exactly zero.
    fn compact(&mut self) {
        self.one_body.retain(|_, v| *v != 0.0);
        self.two_body.retain(|_, v| *v != 0.0);
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.one_body.iter().all(|(&(p, q), &c)| {
            (self.one_body.get(&(q, p)).copied().unwrap_or(0.0) - c).abs() <= tol
        }) && self.two_body.iter().all(|(&[p, q, r, s], &c)| {
            (self.two_body.get(&[s, r, q, p]).copied().unwrap_or(0.0) - c).abs() <= tol
        })
    }

    /// True when no term moves an electron between alpha and beta.
    pub fn conserves_spin(&self) -> bool {
        let spin = |x: usize| x & 1;
        self.one_body.keys().all(|&(p, q)| spin(p) == spin(q))
            && self.two_body.keys().all(|&[p, q, r, s]| {
                // a+_p a+_q a_r a_s conserves S_z iff the spin multisets match
                (spin(p) + spin(q)) == (spin(r) + spin(s))
            })
    }
}

/// Expand spatial integrals into spin-orbital operators:
/// `H = E_core + sum h_pq a+_{p s} a_{q s}
///      + 1/2 sum (pq|rs) a+_{p s} a+_{r t} a_{s t} a_{q s}`.
pub fn expand_to_spin_orbitals(ints: &IntegralSet) -> FermionTermSum {
    let n = ints.n_orbitals();
    let mut out = FermionTermSum::new(2 * n, ints.core_energy());
    for sigma in [false, true] {
        for p in 0..n {
            for q in 0..n {
                let h = ints.h1(p, q);
                if h != 0.0 {
                    out.add_one_body(spin_orbital(p, sigma), spin_orbital(q, sigma), h);
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
                    for sigma in [false, true] {
                        for tau in [false, true] {
                            out.add_two_body(
                                spin_orbital(p, sigma),
                                spin_orbital(r, tau),
                                spin_orbital(s, tau),
                                spin_orbital(q, sigma),
                                0.5 * v,
                            );
                        }
                    }
                }
            }
        }
    }
    out.compact();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_orbital_expansion() {
        let mut ints = IntegralSet::zeros(1, 2, 0).unwrap();
        ints.set_h1(0, 0, -1.25);
        ints.set_eri(0, 0, 0, 0, 0.675);
        let f = expand_to_spin_orbitals(&ints);
        assert_eq!(f.n_spin_orbitals(), 2);
        let ob: Vec<_> = f.one_body().iter().map(|(&k, &v)| (k, v)).collect();
        assert_eq!(ob, vec![((0, 0), -1.25), ((1, 1), -1.25)]);
        // 0.675 a+_a a+_b a_b a_a
        let tb: Vec<_> = f.two_body().iter().map(|(&k, &v)| (k, v)).collect();
        assert_eq!(tb.len(), 1);
        assert_eq!(tb[0].0, [0, 1, 1, 0]);
        assert!((tb[0].1 - 0.675).abs() < 1e-15);
    }

    #[test]
    fn zero_integrals_give_scalar() {
        let mut ints = IntegralSet::zeros(3, 2, 0).unwrap();
        ints.set_core_energy(2.5);
        let f = expand_to_spin_orbitals(&ints);
        assert_eq!(f.core_energy(), 2.5);
        assert!(f.one_body().is_empty());
        assert!(f.two_body().is_empty());
    }

    #[test]
    fn reordering_signs() {
        let mut f = FermionTermSum::new(4, 0.0);
        f.add_two_body(0, 1, 3, 2, 1.0);
        f.add_two_body(1, 0, 3, 2, 1.0); // = -(0,1,3,2)
        f.add_two_body(1, 0, 2, 3, 1.0); // = +(0,1,3,2)
        f.add_two_body(2, 2, 1, 0, 5.0); // vanishes
        assert_eq!(f.two_body().get(&[0, 1, 3, 2]), Some(&1.0));
        assert_eq!(f.two_body().len(), 1);
    }

    #[test]
    fn h2_terms_hermitian_and_spin_free() {
        let ints = crate::fcidump::parse_fcidump(include_bytes!("../../../data/h2_sto3g.fcidump"))
            .unwrap();
        let f = expand_to_spin_orbitals(&ints);
        assert!(f.is_hermitian(1e-12));
        assert!(f.conserves_spin());
        assert!(f.one_body().keys().all(|&(p, q)| p % 2 == q % 2));
    }
}
