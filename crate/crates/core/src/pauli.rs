//! Pauli strings and weighted Pauli sums.
//!
//! A string on `n <= 64` qubits is stored as two bit masks `(x, z)`; qubit `q`
//! carries `I, X, Z, Y` for `(x_q, z_q) = (0,0), (1,0), (0,1), (1,1)`, with
//! `Y = i X Z`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Powers of `i`, indexed by exponent mod 4.
pub const I_POW: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, -1.0),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_qubits: u32,
    x: u64,
    z: u64,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        assert!(n_qubits <= 64, "at most 64 qubits");
        Self {
            n_qubits: n_qubits as u32,
            x: 0,
            z: 0,
        }
    }

    pub fn from_masks(n_qubits: usize, x: u64, z: u64) -> Self {
        assert!(n_qubits <= 64, "at most 64 qubits");
        let mask = low_mask(n_qubits);
        assert!(x & !mask == 0 && z & !mask == 0, "mask exceeds qubit count");
        Self {
            n_qubits: n_qubits as u32,
            x,
            z,
        }
    }

    /// Single-qubit `letter` on `qubit`.
    pub fn single(n_qubits: usize, qubit: usize, letter: char) -> Self {
        let bit = 1u64 << qubit;
        let (x, z) = match letter {
            'I' => (0, 0),
            'X' => (bit, 0),
            'Y' => (bit, bit),
            'Z' => (0, bit),
            other => panic!("not a Pauli letter: {other}"),
        };
        Self::from_masks(n_qubits, x, z)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits as usize
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub fn letter(&self, qubit: usize) -> char {
        match ((self.x >> qubit) & 1, (self.z >> qubit) & 1) {
            (0, 0) => 'I',
            (1, 0) => 'X',
            (0, 1) => 'Z',
            _ => 'Y',
        }
    }

    /// `i^k` such that this string equals `i^k X^x Z^z`.
    #[inline]
    fn y_phase(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z) ^ (self.z & other.x)).count_ones() % 2 == 0
    }

    /// Product `self * other = i^k * result`; returns `(k mod 4, result)`.
    pub fn mul(&self, other: &PauliString) -> (u32, PauliString) {
        debug_assert_eq!(self.n_qubits, other.n_qubits);
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        let result = PauliString {
            n_qubits: self.n_qubits,
            x,
            z,
        };
        let sign = 2 * (self.z & other.x).count_ones();
        let k = (self.y_phase() + other.y_phase() + sign + 4 * 64 - result.y_phase()) % 4;
        (k, result)
    }

    /// Action on a computational basis state: `P|b> = i^k |b'>`.
    #[inline]
    pub fn apply_to_basis(&self, b: u64) -> (u32, u64) {
        let k = (self.y_phase() + 2 * (b & self.z).count_ones()) % 4;
        (k, b ^ self.x)
    }
}

#[inline]
fn low_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n_qubits() {
            write!(f, "{}", self.letter(q))?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let n = s.chars().count();
        if n > 64 {
            return Err(Error::Domain(format!("{n} qubits; at most 64 supported")));
        }
        let (mut x, mut z) = (0u64, 0u64);
        for (q, c) in s.chars().enumerate() {
            let bit = 1u64 << q;
            match c {
                'I' => {}
                'X' => x |= bit,
                'Y' => {
                    x |= bit;
                    z |= bit
                }
                'Z' => z |= bit,
                other => return Err(Error::Domain(format!("not a Pauli letter: {other:?}"))),
            }
        }
        Ok(PauliString::from_masks(n, x, z))
    }
}

impl Ord for PauliString {
    /// Lexicographic over letters, qubit 0 first, with `I < X < Y < Z`.
    fn cmp(&self, other: &Self) -> Ordering {
        let rank = |p: &PauliString, q: usize| match p.letter(q) {
            'I' => 0,
            'X' => 1,
            'Y' => 2,
            _ => 3,
        };
        let n = self.n_qubits.min(other.n_qubits) as usize;
        for q in 0..n {
            match rank(self, q).cmp(&rank(other, q)) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.n_qubits.cmp(&other.n_qubits)
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `[a, b]` as `scale * P`, or `None` when the strings commute.
pub fn pauli_commutator(
    a: &PauliString,
    b: &PauliString,
) -> Result<Option<(Complex64, PauliString)>> {
    if a.n_qubits != b.n_qubits {
        return Err(Error::Domain(format!(
            "commutator of {}-qubit and {}-qubit strings",
            a.n_qubits, b.n_qubits
        )));
    }
    if a.commutes_with(b) {
        return Ok(None);
    }
    let (k, p) = a.mul(b);
    Ok(Some((I_POW[k as usize] * 2.0, p)))
}

/// Coefficients below this are dropped when compiling.
pub const PRUNE_THRESHOLD: f64 = 1e-12;

/// Real-weighted sum of Pauli strings plus an identity offset.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    identity_offset: f64,
    terms: Vec<(f64, PauliString)>,
}

impl PauliSum {
    pub fn new(n_qubits: usize, identity_offset: f64) -> Self {
        Self {
            n_qubits,
            identity_offset,
            terms: Vec::new(),
        }
    }

    /// Build from complex coefficients. Imaginary parts must cancel to within
    /// `1e-10`; identity contributions go to the offset; small terms are
    /// pruned; terms are sorted lexicographically.
    pub fn from_complex_map(
        n_qubits: usize,
        identity_offset: f64,
        map: impl IntoIterator<Item = (PauliString, Complex64)>,
    ) -> Result<Self> {
        let mut merged: BTreeMap<PauliString, Complex64> = BTreeMap::new();
        for (p, c) in map {
            *merged.entry(p).or_default() += c;
        }
        let mut out = Self::new(n_qubits, identity_offset);
        for (p, c) in merged {
            if c.im.abs() > 1e-10 {
                return Err(Error::Numerical(format!(
                    "non-Hermitian coefficient {c} on {p}"
                )));
            }
            if p.is_identity() {
                out.identity_offset += c.re;
            } else if c.re.abs() >= PRUNE_THRESHOLD {
                out.terms.push((c.re, p));
            }
        }
        Ok(out)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn identity_offset(&self) -> f64 {
        self.identity_offset
    }

    /// Non-identity terms in lexicographic order.
    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Subtract `e_shift` from the identity offset; every eigenvalue moves
    /// by `-e_shift`.
    pub fn shift_identity(&self, e_shift: f64) -> PauliSum {
        let mut out = self.clone();
        out.identity_offset -= e_shift;
        out
    }

    /// Sum of two Pauli sums on the same register.
    pub fn add(&self, other: &PauliSum) -> Result<PauliSum> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Domain("qubit counts differ".into()));
        }
        let items = self
            .terms
            .iter()
            .chain(&other.terms)
            .map(|&(c, p)| (p, Complex64::new(c, 0.0)));
        PauliSum::from_complex_map(
            self.n_qubits,
            self.identity_offset + other.identity_offset,
            items,
        )
    }

    /// `[self, other]` as a map of complex coefficients (anti-Hermitian).
    pub fn commutator(&self, other: &PauliSum) -> Result<BTreeMap<PauliString, Complex64>> {
        let mut out: BTreeMap<PauliString, Complex64> = BTreeMap::new();
        for (ca, pa) in &self.terms {
            for (cb, pb) in &other.terms {
                if let Some((scale, p)) = pauli_commutator(pa, pb)? {
                    *out.entry(p).or_default() += scale * (ca * cb);
                }
            }
        }
        Ok(out)
    }

    /// `H |psi>` for a dense amplitude vector on at least `n_qubits` qubits.
    pub fn apply(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = psi.iter().map(|a| a * self.identity_offset).collect();
        for (c, p) in &self.terms {
            for (b, amp) in psi.iter().enumerate() {
                if amp.norm_sqr() == 0.0 {
                    continue;
                }
                let (k, b2) = p.apply_to_basis(b as u64);
                out[b2 as usize] += I_POW[k as usize] * amp * *c;
            }
        }
        out
    }

    /// `<psi|H|psi>`.
    pub fn expectation(&self, psi: &[Complex64]) -> f64 {
        let hpsi = self.apply(psi);
        psi.iter().zip(&hpsi).map(|(a, b)| (a.conj() * b).re).sum()
    }

    /// Matrix element `<bra|H|ket>` between computational basis states.
    pub fn matrix_element(&self, bra: u64, ket: u64) -> f64 {
        let mut v = if bra == ket {
            self.identity_offset
        } else {
            0.0
        };
        for (c, p) in &self.terms {
            let (k, b2) = p.apply_to_basis(ket);
            if b2 == bra {
                v += c * I_POW[k as usize].re;
            }
        }
        v
    }

    /// Line-oriented text: `<coefficient> <string>` per line, identity first.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let id = PauliString::identity(self.n_qubits);
        s.push_str(&format!("{:.16e} {}\n", self.identity_offset, id));
        for (c, p) in &self.terms {
            s.push_str(&format!("{c:.16e} {p}\n"));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<PauliSum> {
        let mut n_qubits = None;
        let mut offset = 0.0;
        let mut items = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |m: &str| Error::Parse {
                line: i + 1,
                message: m.to_string(),
            };
            let (c, p) = line
                .split_once(char::is_whitespace)
                .ok_or_else(|| err("expected '<coefficient> <string>'"))?;
            let c: f64 = c.parse().map_err(|_| err("bad coefficient"))?;
            let p: PauliString = p.trim().parse().map_err(|_| err("bad Pauli string"))?;
            match n_qubits {
                None => n_qubits = Some(p.n_qubits()),
                Some(n) if n != p.n_qubits() => return Err(err("inconsistent string length")),
                _ => {}
            }
            if p.is_identity() {
                offset += c;
            } else {
                items.push((c, p));
            }
        }
        let n_qubits = n_qubits.ok_or_else(|| Error::Parse {
            line: 0,
            message: "no terms".into(),
        })?;
        items.sort_by(|a, b| a.1.cmp(&b.1));
        for w in items.windows(2) {
            if w[0].1 == w[1].1 {
                return Err(Error::Parse {
                    line: 0,
                    message: format!("duplicate string {}", w[0].1),
                });
            }
        }
        Ok(PauliSum {
            n_qubits,
            identity_offset: offset,
            terms: items,
        })
    }
}
