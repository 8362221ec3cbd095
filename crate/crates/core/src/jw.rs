//! Jordan-Wigner compilation of fermionic terms into Pauli sums.
//!
//! `a+_j = (X_j - i Y_j)/2 Z_{j-1}...Z_0`, `a_j = (X_j + i Y_j)/2 Z_{j-1}...Z_0`.
//! With this choice the determinant built by applying creators in ascending
//! spin-orbital order to the vacuum is the basis state with phase `+1`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::Result;
use crate::fermion::FermionTermSum;
use crate::pauli::{PauliString, PauliSum, I_POW};

type Expansion = Vec<(Complex64, PauliString)>;

fn ladder(n: usize, j: usize, create: bool) -> Expansion {
    let chain = if j == 0 { 0 } else { (1u64 << j) - 1 };
    let bit = 1u64 << j;
    let x = PauliString::from_masks(n, bit, chain);
    let y = PauliString::from_masks(n, bit, chain | bit);
    let half = Complex64::new(0.5, 0.0);
    let iy = Complex64::new(0.0, if create { -0.5 } else { 0.5 });
    vec![(half, x), (iy, y)]
}

fn multiply(a: &Expansion, b: &Expansion) -> Expansion {
    let mut out: BTreeMap<PauliString, Complex64> = BTreeMap::new();
    for (ca, pa) in a {
        for (cb, pb) in b {
            let (k, p) = pa.mul(pb);
            *out.entry(p).or_default() += ca * cb * I_POW[k as usize];
        }
    }
    out.into_iter()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(p, c)| (c, p))
        .collect()
}

/// Pauli expansion of a product of ladder operators, leftmost first.
fn ladder_product(n: usize, ops: &[(usize, bool)]) -> Expansion {
    let mut acc: Expansion = vec![(Complex64::new(1.0, 0.0), PauliString::identity(n))];
    for &(j, create) in ops {
        acc = multiply(&acc, &ladder(n, j, create));
    }
    acc
}

fn accumulate(
    map: &mut BTreeMap<PauliString, Complex64>,
    n: usize,
    ops: &[(usize, bool)],
    coeff: f64,
) {
    for (c, p) in ladder_product(n, ops) {
        *map.entry(p).or_default() += c * coeff;
    }
}

fn compile(
    n: usize,
    offset: f64,
    one_body: impl IntoIterator<Item = ((usize, usize), f64)>,
    two_body: impl IntoIterator<Item = ([usize; 4], f64)>,
) -> Result<PauliSum> {
    let mut map = BTreeMap::new();
    for ((p, q), c) in one_body {
        accumulate(&mut map, n, &[(p, true), (q, false)], c);
    }
    for ([p, q, r, s], c) in two_body {
        accumulate(
            &mut map,
            n,
            &[(p, true), (q, true), (r, false), (s, false)],
            c,
        );
    }
    PauliSum::from_complex_map(n, offset, map)
}

/// Compile a fermionic Hamiltonian to a Pauli sum on `2N` qubits.
pub fn jordan_wigner(terms: &FermionTermSum) -> Result<PauliSum> {
    compile(
        terms.n_spin_orbitals(),
        terms.core_energy(),
        terms.one_body().iter().map(|(&k, &v)| (k, v)),
        terms.two_body().iter().map(|(&k, &v)| (k, v)),
    )
}

/// Number operator `sum_P (I - Z_P)/2`.
pub fn number_operator(n_qubits: usize) -> PauliSum {
    let items = (0..n_qubits).map(|q| {
        (
            PauliString::single(n_qubits, q, 'Z'),
            Complex64::new(-0.5, 0.0),
        )
    });
    PauliSum::from_complex_map(n_qubits, 0.5 * n_qubits as f64, items)
        .expect("number operator is Hermitian")
}

/// `S_z = sum_p (n_{p,alpha} - n_{p,beta}) / 2` under interleaved ordering.
pub fn sz_operator(n_qubits: usize) -> PauliSum {
    let items = (0..n_qubits).map(|q| {
        let sign = if q % 2 == 0 { -0.25 } else { 0.25 };
        (
            PauliString::single(n_qubits, q, 'Z'),
            Complex64::new(sign, 0.0),
        )
    });
    PauliSum::from_complex_map(n_qubits, 0.0, items).expect("S_z is Hermitian")
}

/// One Hermitian generator: a fermionic term together with its Hermitian
/// partner (or a self-adjoint term alone), with its compiled Pauli form.
#[derive(Debug, Clone)]
pub struct HermitianGroup {
    pub one_body: Vec<((usize, usize), f64)>,
    pub two_body: Vec<([usize; 4], f64)>,
    pub pauli: PauliSum,
}

impl HermitianGroup {
    /// Whether every pair of strings in the group commutes, in which case the
    /// product of their exponentials is the exact group exponential.
    pub fn strings_commute(&self) -> bool {
        let t = self.pauli.terms();
        t.iter()
            .enumerate()
            .all(|(i, (_, a))| t[i + 1..].iter().all(|(_, b)| a.commutes_with(b)))
    }
}

/// Partition the terms into Hermitian groups: one-body groups first, by
/// ascending `(min, max)` index pair, then two-body groups by the smaller of
/// the term and its partner. The core energy is not part of any group.
pub fn group_hermitian_terms(terms: &FermionTermSum) -> Result<Vec<HermitianGroup>> {
    let n = terms.n_spin_orbitals();
    let mut one: BTreeMap<(usize, usize), Vec<((usize, usize), f64)>> = BTreeMap::new();
    for (&(p, q), &c) in terms.one_body() {
        one.entry((p.min(q), p.max(q)))
            .or_default()
            .push(((p, q), c));
    }
    let mut two: BTreeMap<[usize; 4], Vec<([usize; 4], f64)>> = BTreeMap::new();
    for (&[p, q, r, s], &c) in terms.two_body() {
        let key = [p, q, r, s].min([s, r, q, p]);
        two.entry(key).or_default().push(([p, q, r, s], c));
    }
    let mut groups = Vec::with_capacity(one.len() + two.len());
    for (_, members) in one {
        let pauli = compile(n, 0.0, members.iter().copied(), std::iter::empty())?;
        groups.push(HermitianGroup {
            one_body: members,
            two_body: Vec::new(),
            pauli,
        });
    }
    for (_, members) in two {
        let pauli = compile(n, 0.0, std::iter::empty(), members.iter().copied())?;
        groups.push(HermitianGroup {
            one_body: Vec::new(),
            two_body: members,
            pauli,
        });
    }
    Ok(groups)
}
