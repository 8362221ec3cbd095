//! FCIDUMP reading and writing.
//!
//! File indices are 1-based; everything in memory is 0-based. Two-electron
//! integrals are kept in chemists' notation `(pq|rs)` and stored once per
//! 8-fold permutation class.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Two entries for the same integral that differ by more than this are rejected.
pub const DUPLICATE_TOLERANCE: f64 = 1e-10;

#[inline]
fn pair_index(p: usize, q: usize) -> usize {
    let (a, b) = if p >= q { (p, q) } else { (q, p) };
    a * (a + 1) / 2 + b
}

#[inline]
fn eri_index(p: usize, q: usize, r: usize, s: usize) -> usize {
    pair_index(pair_index(p, q), pair_index(r, s))
}

/// One- and two-electron integrals of an active space.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralSet {
    n_orbitals: usize,
    n_electrons: usize,
    ms2: i32,
    orbital_irreps: Vec<u8>,
    isym: Option<u8>,
    core_energy: f64,
    one_body: Vec<f64>,
    two_body: Vec<f64>,
    orbital_energies: Option<Vec<f64>>,
}

impl IntegralSet {
    /// An integral set with every integral zero.
    pub fn zeros(n_orbitals: usize, n_electrons: usize, ms2: i32) -> Result<Self> {
        if n_electrons > 2 * n_orbitals {
            return Err(Error::Domain(format!(
                "{n_electrons} electrons do not fit in {n_orbitals} orbitals"
            )));
        }
        if ms2.unsigned_abs() as usize > n_electrons || (n_electrons as i32 - ms2) % 2 != 0 {
            return Err(Error::Domain(format!(
                "MS2={ms2} is incompatible with {n_electrons} electrons"
            )));
        }
        if n_orbitals > 32 {
            return Err(Error::Capacity(format!(
                "{n_orbitals} orbitals; at most 32 supported"
            )));
        }
        let npair = n_orbitals * (n_orbitals + 1) / 2;
        Ok(Self {
            n_orbitals,
            n_electrons,
            ms2,
            orbital_irreps: vec![1; n_orbitals],
            isym: None,
            core_energy: 0.0,
            one_body: vec![0.0; n_orbitals * n_orbitals],
            two_body: vec![0.0; npair * (npair + 1) / 2],
            orbital_energies: None,
        })
    }

    pub fn n_orbitals(&self) -> usize {
        self.n_orbitals
    }

    pub fn n_electrons(&self) -> usize {
        self.n_electrons
    }

    pub fn ms2(&self) -> i32 {
        self.ms2
    }

    pub fn n_alpha(&self) -> usize {
        ((self.n_electrons as i32 + self.ms2) / 2) as usize
    }

    pub fn n_beta(&self) -> usize {
        ((self.n_electrons as i32 - self.ms2) / 2) as usize
    }

    /// Point-group irrep labels, Molpro numbering (1..=8).
    pub fn orbital_irreps(&self) -> &[u8] {
        &self.orbital_irreps
    }

    pub fn isym(&self) -> Option<u8> {
        self.isym
    }

    pub fn core_energy(&self) -> f64 {
        self.core_energy
    }

    pub fn orbital_energies(&self) -> Option<&[f64]> {
        self.orbital_energies.as_deref()
    }

    #[inline]
    pub fn h1(&self, p: usize, q: usize) -> f64 {
        self.one_body[p * self.n_orbitals + q]
    }

    /// `(pq|rs)` in chemists' notation.
    #[inline]
    pub fn eri(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.two_body[eri_index(p, q, r, s)]
    }

    pub fn set_core_energy(&mut self, value: f64) {
        self.core_energy = value;
    }

    pub fn set_h1(&mut self, p: usize, q: usize, value: f64) {
        let n = self.n_orbitals;
        self.one_body[p * n + q] = value;
        self.one_body[q * n + p] = value;
    }

    pub fn set_eri(&mut self, p: usize, q: usize, r: usize, s: usize, value: f64) {
        self.two_body[eri_index(p, q, r, s)] = value;
    }

    pub fn set_orbital_irreps(&mut self, irreps: Vec<u8>) -> Result<()> {
        if irreps.len() != self.n_orbitals {
            return Err(Error::Domain(format!(
                "{} irrep labels for {} orbitals",
                irreps.len(),
                self.n_orbitals
            )));
        }
        if let Some(bad) = irreps.iter().find(|&&x| !(1..=8).contains(&x)) {
            return Err(Error::Domain(format!("irrep label {bad} outside 1..=8")));
        }
        self.orbital_irreps = irreps;
        Ok(())
    }

    /// Irrep of a set of occupied orbitals as a 0-based D2h-subgroup label.
    /// Labels combine by XOR of `label - 1`.
    pub fn irrep_of_orbitals(&self, occupied: impl IntoIterator<Item = usize>) -> u8 {
        occupied
            .into_iter()
            .fold(0u8, |acc, p| acc ^ (self.orbital_irreps[p] - 1))
    }

    /// True when the file carried more than one irrep label.
    pub fn has_symmetry(&self) -> bool {
        self.orbital_irreps
            .iter()
            .any(|&x| x != self.orbital_irreps[0])
    }

    /// SHA-256 of the canonical serialization; identifies the Hamiltonian in
    /// run provenance.
    pub fn checksum(&self) -> String {
        let digest = Sha256::digest(self.to_fcidump().as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    /// Energy of the closed-shell determinant with the `n_docc` lowest
    /// orbitals doubly occupied.
    pub fn reference_energy(&self, n_docc: usize) -> Result<f64> {
        if n_docc > self.n_orbitals {
            return Err(Error::Domain(format!(
                "{n_docc} doubly occupied orbitals exceed {}",
                self.n_orbitals
            )));
        }
        let mut e = self.core_energy;
        for i in 0..n_docc {
            e += 2.0 * self.h1(i, i);
            for j in 0..n_docc {
                e += 2.0 * self.eri(i, i, j, j) - self.eri(i, j, j, i);
            }
        }
        Ok(e)
    }

    /// Largest magnitude of any integral forbidden by the orbital irreps.
    pub fn max_symmetry_violation(&self) -> f64 {
        let n = self.n_orbitals;
        let ir = |p: usize| self.orbital_irreps[p] - 1;
        let mut worst = 0.0f64;
        for p in 0..n {
            for q in 0..=p {
                if ir(p) != ir(q) {
                    worst = worst.max(self.h1(p, q).abs());
                }
                for r in 0..n {
                    for s in 0..=r {
                        if pair_index(r, s) > pair_index(p, q) {
                            continue;
                        }
                        if ir(p) ^ ir(q) ^ ir(r) ^ ir(s) != 0 {
                            worst = worst.max(self.eri(p, q, r, s).abs());
                        }
                    }
                }
            }
        }
        worst
    }

    /// Number of symmetry-unique two-electron integrals above `threshold`.
    pub fn count_nonzero_eri(&self, threshold: f64) -> usize {
        self.two_body.iter().filter(|v| v.abs() > threshold).count()
    }

    /// Serialize to FCIDUMP text. Values carry 17 significant digits so that
    /// parsing the output reproduces every value bit for bit.
    pub fn to_fcidump(&self) -> String {
        let n = self.n_orbitals;
        let mut out = String::new();
        let _ = writeln!(
            out,
            " &FCI NORB={},NELEC={},MS2={},",
            n, self.n_electrons, self.ms2
        );
        let irreps: Vec<String> = self.orbital_irreps.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(out, "  ORBSYM={},", irreps.join(","));
        if let Some(isym) = self.isym {
            let _ = writeln!(out, "  ISYM={isym},");
        }
        out.push_str(" &END\n");
        for p in 0..n {
            for q in 0..=p {
                for r in 0..n {
                    for s in 0..=r {
                        if pair_index(r, s) > pair_index(p, q) {
                            continue;
                        }
                        let v = self.eri(p, q, r, s);
                        if v != 0.0 {
                            let _ =
                                writeln!(out, "{:.16e} {} {} {} {}", v, p + 1, q + 1, r + 1, s + 1);
                        }
                    }
                }
            }
        }
        for p in 0..n {
            for q in 0..=p {
                let v = self.h1(p, q);
                if v != 0.0 {
                    let _ = writeln!(out, "{:.16e} {} {} 0 0", v, p + 1, q + 1);
                }
            }
        }
        if let Some(eps) = &self.orbital_energies {
            for (p, v) in eps.iter().enumerate() {
                let _ = writeln!(out, "{:.16e} {} 0 0 0", v, p + 1);
            }
        }
        let _ = writeln!(out, "{:.16e} 0 0 0 0", self.core_energy);
        out
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let bytes = std::fs::read(path.as_ref())?;
        parse_fcidump(&bytes)
    }
}

struct Header {
    norb: usize,
    nelec: usize,
    ms2: i32,
    orbsym: Option<Vec<u8>>,
    isym: Option<u8>,
}

fn parse_header(text: &str, first_line: usize) -> Result<Header> {
    let err = |message: String| Error::Parse {
        line: first_line,
        message,
    };
    let upper = text.to_ascii_uppercase();
    let body = upper
        .trim()
        .strip_prefix("&FCI")
        .ok_or_else(|| err("header must start with &FCI".into()))?;
    let body = body
        .trim_end()
        .trim_end_matches("&END")
        .trim_end()
        .trim_end_matches('/');

    // Split "KEY=v1,v2, KEY2=..." into (key, values) pairs.
    let mut entries: Vec<(String, Vec<String>)> = Vec::new();
    for token in body
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
    {
        if let Some((key, value)) = token.split_once('=') {
            let mut values = Vec::new();
            if !value.is_empty() {
                values.push(value.to_string());
            }
            entries.push((key.trim().to_string(), values));
        } else if let Some(last) = entries.last_mut() {
            last.1.push(token.to_string());
        } else {
            return Err(err(format!("unexpected token {token:?} before any KEY=")));
        }
    }

    let find = |key: &str| entries.iter().find(|(k, _)| k == key).map(|(_, v)| v);
    let scalar = |key: &str| -> Result<Option<i64>> {
        match find(key) {
            None => Ok(None),
            Some(v) if v.len() == 1 => v[0]
                .parse::<i64>()
                .map(Some)
                .map_err(|_| err(format!("{key} is not an integer: {:?}", v[0]))),
            Some(v) => Err(err(format!("{key} expects one value, got {}", v.len()))),
        }
    };

    let norb = scalar("NORB")?.ok_or_else(|| err("missing NORB".into()))?;
    let nelec = scalar("NELEC")?.ok_or_else(|| err("missing NELEC".into()))?;
    let ms2 = scalar("MS2")?.unwrap_or(0);
    if norb < 0 || nelec < 0 {
        return Err(err("NORB and NELEC must be non-negative".into()));
    }
    let orbsym = match find("ORBSYM") {
        None => None,
        Some(values) => Some(
            values
                .iter()
                .map(|v| {
                    v.parse::<u8>()
                        .map_err(|_| err(format!("ORBSYM entry is not an integer: {v:?}")))
                })
                .collect::<Result<Vec<u8>>>()?,
        ),
    };
    let isym = scalar("ISYM")?.map(|v| v as u8);
    Ok(Header {
        norb: norb as usize,
        nelec: nelec as usize,
        ms2: ms2 as i32,
        orbsym,
        isym,
    })
}

fn parse_value(token: &str) -> Option<f64> {
    token.parse::<f64>().ok().or_else(|| {
        // Fortran double-precision exponents: 1.0D+00
        token.replace(['D', 'd'], "E").parse::<f64>().ok()
    })
}

/// Per-slot record of the first line that set it, for duplicate checks.
struct SeenSlots {
    lines: Vec<usize>,
}

impl SeenSlots {
    fn check(
        &mut self,
        slot: usize,
        line: usize,
        old: f64,
        new: f64,
        what: impl FnOnce() -> String,
    ) -> Result<()> {
        let prev = self.lines[slot];
        if prev != 0 && (old - new).abs() > DUPLICATE_TOLERANCE {
            return Err(Error::Consistency {
                line,
                message: format!("{} = {new} conflicts with {old} from line {prev}", what()),
            });
        }
        self.lines[slot] = line;
        Ok(())
    }
}

/// Parse FCIDUMP text.
pub fn parse_fcidump(input: &[u8]) -> Result<IntegralSet> {
    let text = std::str::from_utf8(input).map_err(|e| Error::Parse {
        line: 0,
        message: format!("not UTF-8: {e}"),
    })?;
    let lines: Vec<&str> = text.lines().collect();

    let start = lines
        .iter()
        .position(|l| !l.trim().is_empty())
        .ok_or_else(|| Error::Parse {
            line: 1,
            message: "empty input".into(),
        })?;
    let end = lines[start..]
        .iter()
        .position(|l| {
            let u = l.trim().to_ascii_uppercase();
            u.ends_with("&END") || u == "/" || u.ends_with('/')
        })
        .map(|i| start + i)
        .ok_or_else(|| Error::Parse {
            line: start + 1,
            message: "namelist header is not terminated by &END or /".into(),
        })?;
    let header = parse_header(&lines[start..=end].join(" "), start + 1)?;

    let mut ints =
        IntegralSet::zeros(header.norb, header.nelec, header.ms2).map_err(|e| Error::Parse {
            line: start + 1,
            message: e.to_string(),
        })?;
    if let Some(orbsym) = header.orbsym {
        if !orbsym.is_empty() {
            ints.set_orbital_irreps(orbsym).map_err(|e| Error::Parse {
                line: start + 1,
                message: e.to_string(),
            })?;
        }
    }
    ints.isym = header.isym;

    let n = header.norb;
    let mut seen_eri = SeenSlots {
        lines: vec![0; ints.two_body.len()],
    };
    let mut seen_h1 = SeenSlots {
        lines: vec![0; n * n],
    };
    let mut eps: Option<Vec<f64>> = None;
    let mut eps_seen = vec![0usize; n];
    let mut core_line = 0usize;

    for (offset, raw) in lines[end + 1..].iter().enumerate() {
        let line = end + 2 + offset;
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if tokens.len() != 5 {
            return Err(Error::Parse {
                line,
                message: format!("expected 'value i j k l', got {} fields", tokens.len()),
            });
        }
        let value = parse_value(tokens[0]).ok_or_else(|| Error::Parse {
            line,
            message: format!("bad value {:?}", tokens[0]),
        })?;
        let mut idx = [0usize; 4];
        for (k, t) in tokens[1..].iter().enumerate() {
            let v: i64 = t.parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad index {t:?}"),
            })?;
            if v < 0 || v as usize > n {
                return Err(Error::Index(format!(
                    "line {line}: index {v} outside 0..={n}"
                )));
            }
            idx[k] = v as usize;
        }
        match idx {
            [0, 0, 0, 0] => {
                if core_line != 0 && (ints.core_energy - value).abs() > DUPLICATE_TOLERANCE {
                    return Err(Error::Consistency {
                        line,
                        message: format!(
                            "core energy {value} conflicts with {} from line {core_line}",
                            ints.core_energy
                        ),
                    });
                }
                ints.core_energy = value;
                core_line = line;
            }
            [p, 0, 0, 0] => {
                let e = eps.get_or_insert_with(|| vec![0.0; n]);
                if eps_seen[p - 1] != 0 && (e[p - 1] - value).abs() > DUPLICATE_TOLERANCE {
                    return Err(Error::Consistency {
                        line,
                        message: format!("orbital energy {p} set twice"),
                    });
                }
                e[p - 1] = value;
                eps_seen[p - 1] = line;
            }
            [p, q, 0, 0] => {
                let (p, q) = (p - 1, q - 1);
                let (a, b) = if p >= q { (p, q) } else { (q, p) };
                let old = ints.h1(p, q);
                seen_h1.check(a * n + b, line, old, value, || {
                    format!("h({},{})", p + 1, q + 1)
                })?;
                ints.set_h1(p, q, value);
            }
            [p, q, r, s] if p > 0 && q > 0 && r > 0 && s > 0 => {
                let (p, q, r, s) = (p - 1, q - 1, r - 1, s - 1);
                let slot = eri_index(p, q, r, s);
                let old = ints.two_body[slot];
                seen_eri.check(slot, line, old, value, || {
                    format!("({}{}|{}{})", p + 1, q + 1, r + 1, s + 1)
                })?;
                ints.two_body[slot] = value;
            }
            _ => {
                return Err(Error::Parse {
                    line,
                    message: format!("index pattern {idx:?} is not a known integral class"),
                })
            }
        }
    }
    ints.orbital_energies = eps;
    Ok(ints)
}

/// Canonical HF orbital energies and, when the file supplied them, the
/// file values alongside.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitalEnergies {
    pub computed: Vec<f64>,
    pub from_file: Option<Vec<f64>>,
    pub max_deviation: Option<f64>,
}

/// `eps_p = h_pp + sum_{i < n_docc} [2 (pp|ii) - (pi|ip)]`.
pub fn compute_orbital_energies(ints: &IntegralSet, n_docc: usize) -> Result<OrbitalEnergies> {
    let n = ints.n_orbitals();
    if n_docc > n {
        return Err(Error::Domain(format!(
            "{n_docc} doubly occupied orbitals exceed {n}"
        )));
    }
    let computed: Vec<f64> = (0..n)
        .map(|p| {
            ints.h1(p, p)
                + (0..n_docc)
                    .map(|i| 2.0 * ints.eri(p, p, i, i) - ints.eri(p, i, i, p))
                    .sum::<f64>()
        })
        .collect();
    let from_file = ints.orbital_energies().map(<[f64]>::to_vec);
    let max_deviation = from_file.as_ref().map(|f| {
        f.iter()
            .zip(&computed)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    });
    Ok(OrbitalEnergies {
        computed,
        from_file,
        max_deviation,
    })
}
