//! Slater determinants as occupation bit masks.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Occupied alpha and beta spatial orbitals, bit `p` for orbital `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Determinant {
    pub alpha: u64,
    pub beta: u64,
}

impl Determinant {
    pub fn new(alpha: u64, beta: u64) -> Self {
        Self { alpha, beta }
    }

    pub fn from_occupations(alpha: &[usize], beta: &[usize]) -> Result<Self> {
        let to_mask = |occ: &[usize]| -> Result<u64> {
            let mut m = 0u64;
            for &p in occ {
                if p >= 32 {
                    return Err(Error::Index(format!("orbital {p} exceeds 32")));
                }
                if m & (1 << p) != 0 {
                    return Err(Error::Domain(format!("orbital {p} listed twice")));
                }
                m |= 1 << p;
            }
            Ok(m)
        };
        Ok(Self::new(to_mask(alpha)?, to_mask(beta)?))
    }

    /// Closed-shell style reference: lowest `n_alpha` and `n_beta` orbitals.
    pub fn aufbau(n_alpha: usize, n_beta: usize) -> Self {
        let fill = |k: usize| if k == 0 { 0 } else { (1u64 << k) - 1 };
        Self::new(fill(n_alpha), fill(n_beta))
    }

    pub fn n_alpha(&self) -> usize {
        self.alpha.count_ones() as usize
    }

    pub fn n_beta(&self) -> usize {
        self.beta.count_ones() as usize
    }

    /// Highest occupied spatial orbital index + 1.
    pub fn span(&self) -> usize {
        64 - (self.alpha | self.beta).leading_zeros() as usize
    }

    pub fn alpha_orbitals(&self) -> impl Iterator<Item = usize> + '_ {
        bits(self.alpha)
    }

    pub fn beta_orbitals(&self) -> impl Iterator<Item = usize> + '_ {
        bits(self.beta)
    }

    /// Computational basis index under interleaved Jordan-Wigner ordering:
    /// qubit `2p` is alpha orbital `p`, qubit `2p + 1` is beta orbital `p`.
    pub fn to_bitstring(&self) -> u64 {
        spread(self.alpha) | (spread(self.beta) << 1)
    }

    pub fn from_bitstring(b: u64) -> Self {
        Self::new(compress(b), compress(b >> 1))
    }

    pub fn is_occupied(&self, p: usize, beta: bool) -> bool {
        let m = if beta { self.beta } else { self.alpha };
        (m >> p) & 1 == 1
    }
}

impl fmt::Display for Determinant {
    /// `a[0,1,2]b[0,1,3]`, 0-based.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |m: u64| bits(m).map(|p| p.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "a[{}]b[{}]", list(self.alpha), list(self.beta))
    }
}

/// Serialized as 1-based occupied orbital lists, matching the initial-state
/// notation: `{"alpha": [1, 2], "beta": [1, 3]}`.
impl serde::Serialize for Determinant {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let one_based = |m: u64| bits(m).map(|p| p + 1).collect::<Vec<_>>();
        let mut st = s.serialize_struct("Determinant", 2)?;
        st.serialize_field("alpha", &one_based(self.alpha))?;
        st.serialize_field("beta", &one_based(self.beta))?;
        st.end()
    }
}

impl<'de> serde::Deserialize<'de> for Determinant {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(serde::Deserialize)]
        struct Lists {
            alpha: Vec<usize>,
            beta: Vec<usize>,
        }
        let l = Lists::deserialize(d)?;
        let zero_based = |v: Vec<usize>| -> std::result::Result<Vec<usize>, D::Error> {
            v.into_iter()
                .map(|p| {
                    p.checked_sub(1)
                        .ok_or_else(|| serde::de::Error::custom("orbital 0"))
                })
                .collect()
        };
        Determinant::from_occupations(&zero_based(l.alpha)?, &zero_based(l.beta)?)
            .map_err(serde::de::Error::custom)
    }
}

pub fn bits(mut m: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let p = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(p)
        }
    })
}

#[inline]
fn spread(m: u64) -> u64 {
    let mut out = 0u64;
    for p in bits(m) {
        out |= 1 << (2 * p);
    }
    out
}

#[inline]
fn compress(b: u64) -> u64 {
    let mut out = 0u64;
    for p in 0..32 {
        out |= ((b >> (2 * p)) & 1) << p;
    }
    out
}

/// Sign from applying `a+_P a_Q` to an occupation bit string (spin-orbital
/// indices), or `None` when the result vanishes. Returns the new bit string.
#[inline]
pub fn apply_excitation(b: u64, create: usize, annihilate: usize) -> Option<(f64, u64)> {
    if (b >> annihilate) & 1 == 0 {
        return None;
    }
    let mut sign = parity_below(b, annihilate);
    let b1 = b & !(1 << annihilate);
    if (b1 >> create) & 1 == 1 {
        return None;
    }
    sign *= parity_below(b1, create);
    Some((sign, b1 | (1 << create)))
}

#[inline]
fn parity_below(b: u64, p: usize) -> f64 {
    let below = if p == 0 { 0 } else { b & ((1u64 << p) - 1) };
    if below.count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Normalized superposition of determinants sharing `(n_alpha, n_beta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDeterminantState {
    terms: Vec<(Complex64, Determinant)>,
}

/// Tolerance on `sum |c|^2 = 1`.
pub const NORM_TOLERANCE: f64 = 1e-12;

impl WeightedDeterminantState {
    pub fn new(terms: Vec<(Complex64, Determinant)>) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::Domain("empty determinant superposition".into()))?
            .1;
        for (_, d) in &terms {
            if (d.n_alpha(), d.n_beta()) != (first.n_alpha(), first.n_beta()) {
                return Err(Error::Domain(format!(
                    "determinant {d} has a different (n_alpha, n_beta) than {first}"
                )));
            }
        }
        let mut seen: Vec<Determinant> = terms.iter().map(|t| t.1).collect();
        seen.sort();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Domain("determinant listed twice".into()));
        }
        let norm: f64 = terms.iter().map(|(c, _)| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Domain(format!(
                "coefficients have squared norm {norm}, expected 1"
            )));
        }
        Ok(Self { terms })
    }

    /// Rescale to unit norm, merging repeated determinants.
    pub fn normalized(terms: Vec<(Complex64, Determinant)>) -> Result<Self> {
        let mut merged: Vec<(Complex64, Determinant)> = Vec::new();
        for (c, d) in terms {
            match merged.iter_mut().find(|(_, e)| *e == d) {
                Some(entry) => entry.0 += c,
                None => merged.push((c, d)),
            }
        }
        merged.retain(|(c, _)| c.norm() > 0.0);
        let norm: f64 = merged.iter().map(|(c, _)| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::Domain("initial state has zero norm".into()));
        }
        for t in &mut merged {
            t.0 /= norm;
        }
        Self::new(merged)
    }

    pub fn single(det: Determinant) -> Self {
        Self {
            terms: vec![(Complex64::new(1.0, 0.0), det)],
        }
    }

    pub fn terms(&self) -> &[(Complex64, Determinant)] {
        &self.terms
    }

    pub fn n_alpha(&self) -> usize {
        self.terms[0].1.n_alpha()
    }

    pub fn n_beta(&self) -> usize {
        self.terms[0].1.n_beta()
    }

    /// Spatial orbitals touched by any determinant.
    pub fn span(&self) -> usize {
        self.terms.iter().map(|(_, d)| d.span()).max().unwrap_or(0)
    }
}
