//! First-order product formulas and their commutator error bound.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::jw::HermitianGroup;
use crate::pauli::{pauli_commutator, PauliString, PauliSum};

/// Ordered list of Pauli rotations making up one Trotter step of
/// `exp(-i H dt)`, plus the identity offset applied as a global phase.
#[derive(Debug, Clone, PartialEq)]
pub struct TrotterSchedule {
    n_qubits: usize,
    identity_offset: f64,
    rotations: Vec<(f64, PauliString)>,
}

impl TrotterSchedule {
    /// Rotations in the lexicographic order of the Pauli sum.
    pub fn lexicographic(h: &PauliSum) -> Self {
        Self {
            n_qubits: h.n_qubits(),
            identity_offset: h.identity_offset(),
            rotations: h.terms().to_vec(),
        }
    }

    /// One block of rotations per Hermitian group, in group order. Groups
    /// whose strings do not all commute are rejected, since their product
    /// would no longer be the exact group exponential.
    pub fn grouped(groups: &[HermitianGroup], identity_offset: f64) -> Result<Self> {
        let n_qubits = groups.first().map_or(0, |g| g.pauli.n_qubits());
        let mut offset = identity_offset;
        let mut rotations = Vec::new();
        for g in groups {
            if !g.strings_commute() {
                return Err(Error::Numerical(
                    "Hermitian group with non-commuting strings".into(),
                ));
            }
            offset += g.pauli.identity_offset();
            rotations.extend_from_slice(g.pauli.terms());
        }
        Ok(Self {
            n_qubits,
            identity_offset: offset,
            rotations,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn identity_offset(&self) -> f64 {
        self.identity_offset
    }

    pub fn rotations(&self) -> &[(f64, PauliString)] {
        &self.rotations
    }

    /// Same schedule with the identity offset lowered by `e_shift`.
    pub fn shifted(&self, e_shift: f64) -> Self {
        let mut s = self.clone();
        s.identity_offset -= e_shift;
        s
    }
}

/// Evaluated triple-commutator bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrotterBound {
    /// `dt^3 * sum |a_j a_k a_l| ||[P_j, [P_k, P_l]]||`, or its estimate.
    pub value: f64,
    /// Standard error of a sampled estimate; zero when evaluated exactly.
    pub std_error: f64,
    pub exact: bool,
}

/// Default number of triples evaluated before switching to sampling.
pub const DEFAULT_TRIPLE_BUDGET: u64 = 10_000_000;

#[inline]
fn nested_norm(pj: &PauliString, pk: &PauliString, pl: &PauliString) -> f64 {
    match pauli_commutator(pk, pl).expect("equal lengths") {
        None => 0.0,
        Some((scale, inner)) => {
            if pj.commutes_with(&inner) {
                0.0
            } else {
                2.0 * scale.norm()
            }
        }
    }
}

/// Evaluate the first-order Trotter error bound exactly when `M^3 <= budget`,
/// otherwise by `budget` uniform samples of triples (seeded, unbiased).
pub fn trotter_error_bound(h: &PauliSum, dt: f64, budget: u64, seed: u64) -> Result<TrotterBound> {
    if !(dt > 0.0) {
        return Err(Error::Domain(format!(
            "time step must be positive, got {dt}"
        )));
    }
    let terms = h.terms();
    let m = terms.len() as u128;
    let dt3 = dt * dt * dt;
    if m.pow(3) <= budget as u128 {
        let mut sum = 0.0;
        for (aj, pj) in terms {
            for (ak, pk) in terms {
                for (al, pl) in terms {
                    let norm = nested_norm(pj, pk, pl);
                    if norm != 0.0 {
                        sum += (aj * ak * al).abs() * norm;
                    }
                }
            }
        }
        return Ok(TrotterBound {
            value: dt3 * sum,
            std_error: 0.0,
            exact: true,
        });
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let n = terms.len();
    let samples = budget.max(2);
    let (mut mean, mut m2) = (0.0f64, 0.0f64);
    for i in 0..samples {
        let (aj, pj) = &terms[rng.random_range(0..n)];
        let (ak, pk) = &terms[rng.random_range(0..n)];
        let (al, pl) = &terms[rng.random_range(0..n)];
        let v = (aj * ak * al).abs() * nested_norm(pj, pk, pl);
        let delta = v - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (v - mean);
    }
    let total = (n as f64).powi(3);
    let var = m2 / (samples - 1) as f64;
    Ok(TrotterBound {
        value: dt3 * total * mean,
        std_error: dt3 * total * (var / samples as f64).sqrt(),
        exact: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn sum_of(n: usize, items: &[(f64, &str)]) -> PauliSum {
        PauliSum::from_complex_map(
            n,
            0.0,
            items
                .iter()
                .map(|&(c, s)| (s.parse().unwrap(), Complex64::new(c, 0.0))),
        )
        .unwrap()
    }

    #[test]
    fn commuting_sum_has_zero_bound() {
        let h = sum_of(3, &[(0.3, "ZII"), (-1.2, "ZZI"), (0.7, "IZZ")]);
        let b = trotter_error_bound(&h, 0.1, DEFAULT_TRIPLE_BUDGET, 0).unwrap();
        assert_eq!(b.value, 0.0);
        assert!(b.exact);
    }

    #[test]
    fn cubic_scaling_in_step() {
        let h = sum_of(2, &[(0.3, "XI"), (-1.2, "ZZ"), (0.7, "IY")]);
        let a = trotter_error_bound(&h, 0.1, DEFAULT_TRIPLE_BUDGET, 0).unwrap();
        let b = trotter_error_bound(&h, 0.2, DEFAULT_TRIPLE_BUDGET, 0).unwrap();
        assert_eq!(b.value, 8.0 * a.value);
    }

    #[test]
    fn rejects_non_positive_step() {
        let h = sum_of(1, &[(1.0, "X")]);
        assert!(matches!(
            trotter_error_bound(&h, 0.0, 10, 0),
            Err(Error::Domain(_))
        ));
        assert!(trotter_error_bound(&h, -1.0, 10, 0).is_err());
    }

    #[test]
    fn sampled_estimate_brackets_exact() {
        let h = sum_of(
            3,
            &[
                (0.3, "XII"),
                (-1.2, "ZZI"),
                (0.7, "IYI"),
                (0.2, "IIX"),
                (0.5, "ZIZ"),
            ],
        );
        let exact = trotter_error_bound(&h, 0.1, 1_000, 0).unwrap();
        assert!(exact.exact);
        let sampled = trotter_error_bound(&h, 0.1, 100, 7).unwrap();
        assert!(!sampled.exact);
        assert!(sampled.std_error > 0.0);
        assert!(
            (sampled.value - exact.value).abs() < 4.0 * sampled.std_error,
            "{sampled:?} vs {exact:?}"
        );
    }
}
