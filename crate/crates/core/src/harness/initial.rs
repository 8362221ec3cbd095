//! Trial-state notation.
//!
//! A spec is a `;`-separated list of terms, each an optional real coefficient
//! followed by one of
//!
//! * `ref` - the aufbau reference determinant;
//! * `exc:1a->6a,5b->6b` - the operators `a+_6a a_1a`, then `a+_6b a_5b`,
//!   applied to the reference (1-based spatial orbitals, `a`/`b` spin);
//! * `occ:1a,2a,1b,3b` - explicit occupations with canonical phase `+1`.
//!
//! Fermionic signs from `exc:` terms fold into the coefficient, so
//! `0.7071 exc:1a->6a ; 0.7071 exc:1b->6b` is the spin-adapted singlet.
//! The result is rescaled to unit norm.

use num_complex::Complex64;

use crate::determinant::{apply_excitation, Determinant, WeightedDeterminantState};
use crate::error::{Error, Result};
use crate::fermion::spin_orbital;

fn parse_spin_orbital(tok: &str, n_orbitals: usize) -> Result<(usize, bool)> {
    let tok = tok.trim();
    let (num, spin) = tok.split_at(tok.len().saturating_sub(1));
    let beta = match spin {
        "a" => false,
        "b" => true,
        _ => {
            return Err(Error::Config(format!(
                "`{tok}` needs an `a` or `b` spin suffix"
            )))
        }
    };
    let p: usize = num
        .parse()
        .map_err(|_| Error::Config(format!("`{tok}` is not an orbital like `3a`")))?;
    if p == 0 || p > n_orbitals {
        return Err(Error::Index(format!(
            "orbital {p} outside 1..={n_orbitals}"
        )));
    }
    Ok((p - 1, beta))
}

fn label(p: usize, beta: bool) -> String {
    format!("{}{}", p + 1, if beta { 'b' } else { 'a' })
}

fn parse_term(body: &str, n_orbitals: usize, reference: Determinant) -> Result<(f64, Determinant)> {
    if body == "ref" {
        return Ok((1.0, reference));
    }
    if let Some(list) = body.strip_prefix("exc:") {
        let mut b = reference.to_bitstring();
        let mut sign = 1.0;
        for pair in list.split(',') {
            let (from, to) = pair.split_once("->").ok_or_else(|| {
                Error::Config(format!("`{pair}` is not an excitation like `1a->6a`"))
            })?;
            let (p, ps) = parse_spin_orbital(from, n_orbitals)?;
            let (q, qs) = parse_spin_orbital(to, n_orbitals)?;
            if ps != qs {
                return Err(Error::Domain(format!("`{}` changes spin", pair.trim())));
            }
            let (from_so, to_so) = (spin_orbital(p, ps), spin_orbital(q, qs));
            if (b >> from_so) & 1 == 0 {
                return Err(Error::Domain(format!(
                    "orbital {} is not occupied",
                    label(p, ps)
                )));
            }
            let (s, b2) = apply_excitation(b, to_so, from_so).ok_or_else(|| {
                Error::Domain(format!("orbital {} is already occupied", label(q, qs)))
            })?;
            sign *= s;
            b = b2;
        }
        return Ok((sign, Determinant::from_bitstring(b)));
    }
    if let Some(list) = body.strip_prefix("occ:") {
        let mut alpha = Vec::new();
        let mut beta = Vec::new();
        for tok in list.split(',') {
            let (p, s) = parse_spin_orbital(tok, n_orbitals)?;
            if s {
                beta.push(p);
            } else {
                alpha.push(p);
            }
        }
        return Ok((1.0, Determinant::from_occupations(&alpha, &beta)?));
    }
    Err(Error::Config(format!(
        "`{body}` is not `ref`, `exc:...` or `occ:...`"
    )))
}

/// Parse a trial-state spec against the aufbau reference of
/// `(n_alpha, n_beta)` electrons in `n_orbitals` orbitals.
pub fn parse_initial_state(
    spec: &str,
    n_orbitals: usize,
    n_alpha: usize,
    n_beta: usize,
) -> Result<WeightedDeterminantState> {
    let reference = Determinant::aufbau(n_alpha, n_beta);
    let mut terms = Vec::new();
    for raw in spec.split(';') {
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        let mut parts = raw.splitn(2, char::is_whitespace);
        let first = parts.next().unwrap_or_default();
        let (coeff, body) = match first.parse::<f64>() {
            Ok(c) => (c, parts.next().unwrap_or_default().trim()),
            Err(_) => (1.0, raw),
        };
        if !coeff.is_finite() {
            return Err(Error::Config(format!(
                "coefficient in `{raw}` is not finite"
            )));
        }
        let (sign, det) = parse_term(body, n_orbitals, reference)?;
        terms.push((Complex64::new(sign * coeff, 0.0), det));
    }
    if terms.is_empty() {
        return Err(Error::Config("initial state spec is empty".into()));
    }
    WeightedDeterminantState::normalized(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn reference_only() {
        let s = parse_initial_state("1.0 ref", 9, 5, 5).unwrap();
        assert_eq!(s.terms().len(), 1);
        assert_eq!(s.terms()[0].1, Determinant::aufbau(5, 5));
        assert_eq!(parse_initial_state("ref", 9, 5, 5).unwrap(), s);
    }

    #[test]
    fn single_excitation() {
        let s = parse_initial_state("1.0 exc:1a->6a", 9, 5, 5).unwrap();
        let d = s.terms()[0].1;
        assert_eq!(d.alpha, 0b111110);
        assert_eq!(d.beta, 0b11111);
        // nine occupied spin orbitals sit below 6a once 1a is emptied
        assert_eq!(s.terms()[0].0.re, -1.0);
        let b = parse_initial_state("1.0 exc:1b->6b", 9, 5, 5).unwrap();
        assert_eq!(b.terms()[0].0.re, 1.0);
    }

    #[test]
    fn shake_up_pair() {
        let s = parse_initial_state(
            "0.70710678 exc:1a->6a,5b->6b ; 0.70710678 exc:5a->6a,1b->6b",
            9,
            5,
            5,
        )
        .unwrap();
        assert_eq!(s.terms().len(), 2);
        for (c, d) in s.terms() {
            assert!((c.norm() - FRAC_1_SQRT_2).abs() < 1e-12);
            assert_eq!(d.n_alpha(), 5);
            assert_eq!(d.n_beta(), 5);
            assert!(d.is_occupied(5, false) && d.is_occupied(5, true));
        }
        let total: f64 = s.terms().iter().map(|t| t.0.norm_sqr()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_specs() {
        assert!(matches!(
            parse_initial_state("1.0 exc:6a->7a", 9, 5, 5),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            parse_initial_state("1.0 exc:1a->2a", 9, 5, 5),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            parse_initial_state("1.0 exc:1a->6b", 9, 5, 5),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            parse_initial_state("1.0 exc:1a->10a", 9, 5, 5),
            Err(Error::Index(_))
        ));
        assert!(matches!(
            parse_initial_state("1.0 ref ; 1.0 occ:1a,2a", 3, 1, 1),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            parse_initial_state("  ", 3, 1, 1),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            parse_initial_state("1.0 ground", 3, 1, 1),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn occupation_terms_have_unit_phase() {
        let s = parse_initial_state("occ:2a,1b", 3, 1, 1).unwrap();
        assert_eq!(s.terms()[0].0, Complex64::new(1.0, 0.0));
        assert_eq!(s.terms()[0].1, Determinant::new(0b10, 0b01));
    }
}
