use std::f64::consts::TAU;

use corelevel_qpe::harness::cluster_samples;
use corelevel_qpe::phase::decode_phase;
use corelevel_qpe::{parse_fcidump, IntegralSet, PauliString, PauliSum};
use num_complex::Complex64;
use proptest::prelude::*;

fn pauli(n: usize) -> impl Strategy<Value = PauliString> {
    let mask = (1u64 << n) - 1;
    (any::<u64>(), any::<u64>())
        .prop_map(move |(x, z)| PauliString::from_masks(n, x & mask, z & mask))
}

proptest! {
    #[test]
    fn pauli_product_is_associative_and_commutation_is_symmetric(
        a in pauli(6), b in pauli(6), c in pauli(6)
    ) {
        let (k1, ab) = a.mul(&b);
        let (k2, ab_c) = ab.mul(&c);
        let (k3, bc) = b.mul(&c);
        let (k4, a_bc) = a.mul(&bc);
        prop_assert_eq!(ab_c, a_bc);
        prop_assert_eq!((k1 + k2) % 4, (k3 + k4) % 4);
        prop_assert_eq!(a.commutes_with(&b), b.commutes_with(&a));
        let (kab, _) = a.mul(&b);
        let (kba, _) = b.mul(&a);
        prop_assert_eq!(a.commutes_with(&b), kab == kba);
        let (ksq, sq) = a.mul(&a);
        prop_assert!(sq.is_identity());
        prop_assert_eq!(ksq, 0);
    }

    #[test]
    fn pauli_text_round_trips_bit_exactly(
        terms in prop::collection::vec((pauli(5), -10.0f64..10.0), 1..12),
        offset in -100.0f64..100.0
    ) {
        let h = PauliSum::from_complex_map(
            5,
            offset,
            terms.into_iter().map(|(p, c)| (p, Complex64::new(c, 0.0))),
        ).unwrap();
        let back = PauliSum::from_text(&h.to_text()).unwrap();
        prop_assert_eq!(back, h);
    }

    #[test]
    fn decoded_energy_lies_in_window_and_matches_phase(
        phase in 0.0f64..TAU,
        delta in 0.01f64..1.0,
        e_shift in -100.0f64..100.0,
        lo in -100.0f64..100.0,
        frac in 0.05f64..1.0
    ) {
        let width = frac * TAU / delta;
        let window = (lo, lo + width);
        match decode_phase(phase, delta, e_shift, window) {
            Ok(e) => {
                prop_assert!(e >= window.0 && e <= window.1);
                let back = (-(e - e_shift) * delta).rem_euclid(TAU);
                let d = (back - phase).abs();
                prop_assert!(d.min(TAU - d) < 1e-8);
            }
            Err(err) => {
                let is_window = matches!(err, corelevel_qpe::Error::Window { .. });
                prop_assert!(is_window);
            }
        }
    }

    #[test]
    fn clusters_partition_and_separate(
        energies in prop::collection::vec(-5.0f64..5.0, 1..60),
        tol in 0.001f64..0.5
    ) {
        let clusters = cluster_samples(&energies, tol).unwrap();
        let mut seen: Vec<usize> = clusters.iter().flat_map(|c| c.members.clone()).collect();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..energies.len()).collect::<Vec<_>>());
        for w in clusters.windows(2) {
            prop_assert!(w[0].count > w[1].count || (w[0].count == w[1].count && w[0].mean <= w[1].mean));
        }
        let mut ranges: Vec<(f64, f64)> = clusters.iter().map(|c| (c.min, c.max)).collect();
        ranges.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in ranges.windows(2) {
            prop_assert!(w[1].0 - w[0].1 > tol);
        }
        for c in &clusters {
            let mut v: Vec<f64> = c.members.iter().map(|&i| energies[i]).collect();
            v.sort_by(f64::total_cmp);
            prop_assert!(v.windows(2).all(|p| p[1] - p[0] <= tol));
            prop_assert!(c.mean >= c.min && c.mean <= c.max);
        }
    }

    #[test]
    fn fcidump_text_round_trips(
        n in 1usize..5,
        values in prop::collection::vec(-2.0f64..2.0, 64),
        core in -10.0f64..10.0
    ) {
        let mut ints = IntegralSet::zeros(n, n + n % 2, 0).unwrap();
        ints.set_core_energy(core);
        let mut it = values.iter().cycle();
        for p in 0..n {
            for q in 0..=p {
                ints.set_h1(p, q, *it.next().unwrap());
                for r in 0..n {
                    for s in 0..=r {
                        ints.set_eri(p, q, r, s, *it.next().unwrap());
                    }
                }
            }
        }
        let back = parse_fcidump(ints.to_fcidump().as_bytes()).unwrap();
        prop_assert_eq!(back.checksum(), ints.checksum());
        for p in 0..n {
            for q in 0..n {
                prop_assert_eq!(back.h1(p, q), ints.h1(p, q));
                prop_assert_eq!(back.h1(p, q), back.h1(q, p));
            }
        }
    }
}
