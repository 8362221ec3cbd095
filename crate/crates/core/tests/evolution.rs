mod common;

use std::f64::consts::TAU;

use common::load;
use corelevel_qpe::phase::{
    fejer_probability, qpe_shot, rpe_shot, sample_fejer, Backend, EvolutionOracle, TrotterOracle,
};
use corelevel_qpe::{
    expand_to_spin_orbitals, group_hermitian_terms, jordan_wigner, prepare_state, Determinant,
    PauliString, PauliSum, QuantumState, Result, TrotterSchedule, WeightedDeterminantState,
};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// `exp(-i H t) psi` by many short Taylor steps.
fn taylor_evolve(h: &PauliSum, psi: &[Complex64], t: f64, steps: usize) -> Vec<Complex64> {
    let tau = t / steps as f64;
    let mut out = psi.to_vec();
    for _ in 0..steps {
        let mut term = out.clone();
        let mut acc = out.clone();
        for k in 1..=16 {
            let hv = h.apply(&term);
            let f = Complex64::new(0.0, -tau / k as f64);
            term = hv.iter().map(|a| a * f).collect();
            acc.iter_mut().zip(&term).for_each(|(a, b)| *a += b);
        }
        out = acc;
    }
    out
}

fn phase_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let ov: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    (2.0 - 2.0 * ov.norm()).max(0.0).sqrt()
}

fn reference_state(name: &str) -> (corelevel_qpe::IntegralSet, QuantumState) {
    let ints = load(name);
    let det = Determinant::aufbau(ints.n_alpha(), ints.n_beta());
    let psi = prepare_state(
        &WeightedDeterminantState::single(det),
        2 * ints.n_orbitals(),
    )
    .unwrap();
    (ints, psi)
}

#[test]
fn trotter_state_error_shrinks_linearly() {
    let (ints, psi) = reference_state("h4_chain_sto3g.fcidump");
    let h = jordan_wigner(&expand_to_spin_orbitals(&ints)).unwrap();
    let schedule = TrotterSchedule::lexicographic(&h);
    let exact = taylor_evolve(&h, psi.amplitudes(), 1.0, 400);
    let err = |dt: f64| {
        let mut s = psi.clone();
        s.apply_evolution(&schedule, dt, (1.0 / dt).round() as u64)
            .unwrap();
        phase_distance(s.amplitudes(), &exact)
    };
    let (e1, e2, e3) = (err(0.1), err(0.05), err(0.025));
    assert!(e1 > 1e-6);
    assert!(e2 < 0.6 * e1 && e3 < 0.6 * e2, "{e1} {e2} {e3}");
}

fn number_leak(s: &QuantumState, n_electrons: u32) -> f64 {
    s.amplitudes()
        .iter()
        .enumerate()
        .filter(|(b, _)| b.count_ones() != n_electrons)
        .map(|(_, a)| a.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

#[test]
fn grouped_steps_conserve_particle_number() {
    let (ints, psi) = reference_state("h4_chain_sto3g.fcidump");
    let terms = expand_to_spin_orbitals(&ints);
    let grouped =
        TrotterSchedule::grouped(&group_hermitian_terms(&terms).unwrap(), terms.core_energy())
            .unwrap();
    let mut s = psi.clone();
    s.apply_evolution(&grouped, 0.3, 7).unwrap();
    assert!(number_leak(&s, 4) < 1e-12);
    assert!((s.norm_sqr() - 1.0).abs() < 1e-12);

    // string-by-string steps leak at second order in the step
    let raw = TrotterSchedule::lexicographic(&jordan_wigner(&terms).unwrap());
    let leak = |dt: f64| {
        let mut s = psi.clone();
        s.apply_evolution(&raw, dt, 1).unwrap();
        number_leak(&s, 4)
    };
    let ratio = leak(0.02) / leak(0.01);
    assert!((3.0..5.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn inverse_qft_reads_an_exact_phase() {
    let n = 3;
    let amps: Vec<Complex64> = (0..8)
        .map(|k| Complex64::from_polar(1.0 / 8f64.sqrt(), TAU * 5.0 * k as f64 / 8.0))
        .collect();
    // big-endian register: qubit 0 is the most significant bit
    let mut reordered = vec![Complex64::new(0.0, 0.0); 8];
    for (k, a) in amps.iter().enumerate() {
        let mut b = 0usize;
        for i in 0..n {
            if k >> (n - 1 - i) & 1 == 1 {
                b |= 1 << i;
            }
        }
        reordered[b] = *a;
    }
    let mut s = QuantumState::from_amplitudes(reordered).unwrap();
    s.apply_inverse_qft(&[0, 1, 2]).unwrap();
    let p = s.register_probabilities(&[0, 1, 2]).unwrap();
    assert!((p[5] - 1.0).abs() < 1e-12, "{p:?}");
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    assert_eq!(s.measure(&[0, 1, 2], &mut rng).unwrap(), 5);
}

/// Two commuting Z terms: every step is exact, so gate-level QPE is
/// deterministic when the eigenphase is a register value.
fn commuting_oracle(delta: f64) -> TrotterOracle {
    let h = PauliSum::from_complex_map(
        2,
        -0.45,
        [
            (PauliString::single(2, 0, 'Z'), Complex64::new(0.3, 0.0)),
            (PauliString::single(2, 1, 'Z'), Complex64::new(0.1, 0.0)),
        ],
    )
    .unwrap();
    let det = WeightedDeterminantState::single(Determinant::new(0b1, 0));
    TrotterOracle::new(&TrotterSchedule::lexicographic(&h), delta, 0.0, &det).unwrap()
}

#[test]
fn gate_level_qpe_recovers_a_register_aligned_energy() {
    // occupied qubit 0: E = -0.3 + 0.1 - 0.45
    let e = -0.65;
    let delta = TAU * (5.0 / 16.0) / 0.65;
    let oracle = commuting_oracle(delta);
    for seed in 0..5 {
        let s = qpe_shot(&oracle, 4, (-1.0, 0.0), seed).unwrap();
        assert!((s.phase - TAU * 5.0 / 16.0).abs() < 1e-12);
        assert!((s.energy - e).abs() < 1e-12, "{}", s.energy);
        assert_eq!(s.applications, 15);
    }
}

#[test]
fn fejer_sampler_matches_kernel() {
    let (theta, m) = (0.3137, 4u32);
    let size = 1usize << m;
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let n = 40_000;
    let mut counts = vec![0usize; size];
    for _ in 0..n {
        counts[sample_fejer(theta, m, &mut rng) as usize] += 1;
    }
    let probs: Vec<f64> = (0..size as u64)
        .map(|q| fejer_probability(theta, m, q))
        .collect();
    assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    let mut chi2 = 0.0;
    let mut dof = 0;
    for (c, p) in counts.iter().zip(&probs) {
        let expect = p * n as f64;
        if expect >= 5.0 {
            chi2 += (*c as f64 - expect).powi(2) / expect;
            dof += 1;
        }
    }
    let p_value = 1.0 - ChiSquared::new((dof - 1) as f64).unwrap().cdf(chi2);
    assert!(p_value > 1e-3, "chi2 {chi2} with {dof} bins, p {p_value}");
}

/// A single eigenstate with a fixed eigenphase.
struct PhaseOracle {
    phase: f64,
}

impl EvolutionOracle for PhaseOracle {
    fn backend(&self) -> Backend {
        Backend::Exact
    }
    fn delta(&self) -> f64 {
        1.0
    }
    fn e_shift(&self) -> f64 {
        0.0
    }
    fn initial_state(&self) -> Vec<Complex64> {
        vec![Complex64::new(1.0, 0.0)]
    }
    fn apply_power(&self, psi: &mut [Complex64], power: u64) -> Result<()> {
        let angle = (self.phase * power as f64).rem_euclid(TAU);
        psi[0] *= Complex64::from_polar(1.0, angle);
        Ok(())
    }
    fn sample_qpe(&self, _: &[Complex64], _: u32, _: &mut dyn rand::RngCore) -> Result<u64> {
        unimplemented!("RPE only")
    }
}

#[test]
fn rpe_reaches_heisenberg_scaled_precision_on_an_eigenstate() {
    let oracle = PhaseOracle {
        phase: 2.0 * std::f64::consts::E,
    };
    let target = oracle.phase.rem_euclid(TAU);
    for bits in [8u32, 12, 16] {
        let resolution = TAU / (1u64 << bits) as f64;
        let mut errors: Vec<f64> = (0..60)
            .map(|seed| {
                let s = rpe_shot(&oracle, bits, 8, (-TAU, 0.0), seed).unwrap();
                let d = (s.phase - target).rem_euclid(TAU);
                d.min(TAU - d)
            })
            .collect();
        errors.sort_by(f64::total_cmp);
        let median = errors[errors.len() / 2];
        assert!(
            median < 2.0 * resolution,
            "bits {bits}: median error {median}"
        );
    }
}
