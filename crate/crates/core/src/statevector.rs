//! Dense statevector simulator.
//!
//! Qubit `q` is bit `q` of the amplitude index. Registers passed to the QFT
//! and to measurement are big-endian: the first listed qubit is the most
//! significant bit of the register value.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::determinant::{WeightedDeterminantState, NORM_TOLERANCE};
use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum, I_POW};
use crate::trotter::TrotterSchedule;

/// Norm drift tolerated after any gate.
pub const NORM_DRIFT: f64 = 1e-10;

/// Largest register accepted by the dense simulator.
pub const MAX_QUBITS: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl QuantumState {
    /// `|0...0>`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: u64) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::Capacity(format!(
                "{n_qubits} qubits exceed the dense limit of {MAX_QUBITS}"
            )));
        }
        if index >> n_qubits != 0 {
            return Err(Error::Index(format!(
                "basis index {index} needs more than {n_qubits} qubits"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[index as usize] = Complex64::new(1.0, 0.0);
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if !len.is_power_of_two() {
            return Err(Error::Domain(format!(
                "{len} amplitudes is not a power of two"
            )));
        }
        let state = Self {
            n_qubits: len.trailing_zeros() as usize,
            amplitudes,
        };
        if (state.norm_sqr() - 1.0).abs() > NORM_DRIFT {
            return Err(Error::Domain("amplitudes are not normalized".into()));
        }
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &QuantumState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn expectation(&self, h: &PauliSum) -> f64 {
        h.expectation(&self.amplitudes)
    }

    /// Tensor this state (low qubits) with `|0...0>` on `extra` new high qubits.
    pub fn with_ancillas(&self, extra: usize) -> Result<QuantumState> {
        let n = self.n_qubits + extra;
        if n > MAX_QUBITS {
            return Err(Error::Capacity(format!(
                "{n} qubits exceed the dense limit of {MAX_QUBITS}"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
        amplitudes[..self.amplitudes.len()].copy_from_slice(&self.amplitudes);
        Ok(QuantumState {
            n_qubits: n,
            amplitudes,
        })
    }

    /// Drop the high `n_qubits - keep` qubits, which must all be `|0>`
    /// (or be the projected-out part of a collapsed state with a definite
    /// value given by `high_value`).
    pub fn take_low(&self, keep: usize, high_value: u64) -> QuantumState {
        let dim = 1usize << keep;
        let offset = (high_value as usize) << keep;
        let amplitudes = self.amplitudes[offset..offset + dim].to_vec();
        QuantumState {
            n_qubits: keep,
            amplitudes,
        }
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::Index(format!(
                "qubit {q} outside a {}-qubit state",
                self.n_qubits
            )));
        }
        Ok(())
    }

    pub fn hadamard(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let bit = 1usize << q;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for b in 0..self.amplitudes.len() {
            if b & bit == 0 {
                let (a0, a1) = (self.amplitudes[b], self.amplitudes[b | bit]);
                self.amplitudes[b] = (a0 + a1) * s;
                self.amplitudes[b | bit] = (a0 - a1) * s;
            }
        }
        Ok(())
    }

    /// `diag(1, e^{i angle})` on qubit `q`.
    pub fn phase(&mut self, q: usize, angle: f64) -> Result<()> {
        self.check_qubit(q)?;
        let bit = 1usize << q;
        let f = Complex64::from_polar(1.0, angle);
        for (b, a) in self.amplitudes.iter_mut().enumerate() {
            if b & bit != 0 {
                *a *= f;
            }
        }
        Ok(())
    }

    /// `diag(1, 1, 1, e^{i angle})` on qubits `a`, `b`.
    pub fn controlled_phase(&mut self, a: usize, b: usize, angle: f64) -> Result<()> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        let mask = (1usize << a) | (1usize << b);
        let f = Complex64::from_polar(1.0, angle);
        for (i, amp) in self.amplitudes.iter_mut().enumerate() {
            if i & mask == mask {
                *amp *= f;
            }
        }
        Ok(())
    }

    pub fn swap(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Ok(());
        }
        let (ba, bb) = (1usize << a, 1usize << b);
        for i in 0..self.amplitudes.len() {
            if i & ba != 0 && i & bb == 0 {
                self.amplitudes.swap(i, i ^ ba ^ bb);
            }
        }
        Ok(())
    }

    /// `exp(-i theta P)` on the low `P.n_qubits()` qubits.
    pub fn apply_pauli_rotation(&mut self, p: &PauliString, theta: f64) {
        self.rotate(p, theta, 0);
    }

    /// `exp(-i theta P)` on the subspace where every qubit in `control_mask`
    /// is `|1>`. `P` must not act on the control qubits.
    fn rotate(&mut self, p: &PauliString, theta: f64, control_mask: u64) {
        debug_assert!(p.n_qubits() <= self.n_qubits);
        debug_assert_eq!((p.x_mask() | p.z_mask()) & control_mask, 0);
        let (c, s) = (theta.cos(), theta.sin());
        let minus_i_s = Complex64::new(0.0, -s);
        let cm = control_mask as usize;
        let x = p.x_mask();
        if x == 0 {
            // diagonal: eigenvalue +-1 per basis state
            let plus = Complex64::new(c, -s);
            let minus = Complex64::new(c, s);
            for (b, a) in self.amplitudes.iter_mut().enumerate() {
                if b & cm == cm {
                    let (k, _) = p.apply_to_basis(b as u64);
                    *a *= if k == 0 { plus } else { minus };
                }
            }
            return;
        }
        let pivot = 1usize << x.trailing_zeros();
        for b in 0..self.amplitudes.len() {
            if b & pivot != 0 || b & cm != cm {
                continue;
            }
            let b2 = b ^ x as usize;
            let (k1, _) = p.apply_to_basis(b as u64); // P|b> = i^k1 |b2>
            let (k2, _) = p.apply_to_basis(b2 as u64); // P|b2> = i^k2 |b>
            let (a1, a2) = (self.amplitudes[b], self.amplitudes[b2]);
            self.amplitudes[b] = a1 * c + minus_i_s * I_POW[k2 as usize] * a2;
            self.amplitudes[b2] = a2 * c + minus_i_s * I_POW[k1 as usize] * a1;
        }
    }

    /// Multiply the `control = |1>` subspace by `e^{i angle}`.
    fn controlled_global_phase(&mut self, control_mask: u64, angle: f64) {
        let f = Complex64::from_polar(1.0, angle);
        let cm = control_mask as usize;
        for (b, a) in self.amplitudes.iter_mut().enumerate() {
            if b & cm == cm {
                *a *= f;
            }
        }
    }

    /// `power` first-order Trotter steps of `exp(-i H dt)` on the system
    /// register (the low `schedule.n_qubits()` qubits). The identity offset
    /// contributes the global phase `exp(-i offset dt power)`.
    pub fn apply_evolution(
        &mut self,
        schedule: &TrotterSchedule,
        dt: f64,
        power: u64,
    ) -> Result<()> {
        if schedule.n_qubits() > self.n_qubits {
            return Err(Error::Domain("schedule is wider than the state".into()));
        }
        self.evolve_masked(schedule, dt, power, 0);
        Ok(())
    }

    /// Same as [`apply_evolution`](Self::apply_evolution), conditioned on
    /// `control` being `|1>`. The offset phase is then a relative phase on the
    /// control qubit, which is what makes the energy readable by kickback.
    pub fn apply_controlled_evolution(
        &mut self,
        schedule: &TrotterSchedule,
        dt: f64,
        power: u64,
        control: usize,
    ) -> Result<()> {
        self.check_qubit(control)?;
        if control < schedule.n_qubits() {
            return Err(Error::Domain(format!(
                "control qubit {control} lies inside the {}-qubit system register",
                schedule.n_qubits()
            )));
        }
        if schedule.n_qubits() > self.n_qubits {
            return Err(Error::Domain("schedule is wider than the state".into()));
        }
        self.evolve_masked(schedule, dt, power, 1u64 << control);
        Ok(())
    }

    fn evolve_masked(&mut self, schedule: &TrotterSchedule, dt: f64, power: u64, mask: u64) {
        for _ in 0..power {
            for (coeff, p) in schedule.rotations() {
                self.rotate(p, coeff * dt, mask);
            }
        }
        let phase = -(schedule.identity_offset() * dt * power as f64).rem_euclid(2.0 * PI);
        self.controlled_global_phase(mask, phase);
    }

    fn check_register(&self, register: &[usize]) -> Result<()> {
        for (i, &q) in register.iter().enumerate() {
            self.check_qubit(q)?;
            if register[..i].contains(&q) {
                return Err(Error::Domain(format!(
                    "qubit {q} appears twice in register"
                )));
            }
        }
        Ok(())
    }

    /// Quantum Fourier transform on a big-endian register:
    /// `|x> -> M^{-1/2} sum_y exp(2 pi i x y / M) |y>`.
    pub fn apply_qft(&mut self, register: &[usize]) -> Result<()> {
        self.check_register(register)?;
        let m = register.len();
        for i in 0..m {
            self.hadamard(register[i])?;
            for k in i + 1..m {
                let angle = 2.0 * PI / (1u64 << (k - i + 1)) as f64;
                self.controlled_phase(register[k], register[i], angle)?;
            }
        }
        for i in 0..m / 2 {
            self.swap(register[i], register[m - 1 - i])?;
        }
        Ok(())
    }

    /// Inverse of [`apply_qft`](Self::apply_qft), gate by gate in reverse.
    pub fn apply_inverse_qft(&mut self, register: &[usize]) -> Result<()> {
        self.check_register(register)?;
        let m = register.len();
        for i in 0..m / 2 {
            self.swap(register[i], register[m - 1 - i])?;
        }
        for i in (0..m).rev() {
            for k in (i + 1..m).rev() {
                let angle = -2.0 * PI / (1u64 << (k - i + 1)) as f64;
                self.controlled_phase(register[k], register[i], angle)?;
            }
            self.hadamard(register[i])?;
        }
        Ok(())
    }

    fn register_value(b: usize, register: &[usize]) -> u64 {
        register
            .iter()
            .fold(0u64, |acc, &q| (acc << 1) | ((b >> q) & 1) as u64)
    }

    /// Born probabilities of each big-endian register value.
    pub fn register_probabilities(&self, register: &[usize]) -> Result<Vec<f64>> {
        self.check_register(register)?;
        let mut probs = vec![0.0; 1 << register.len()];
        for (b, a) in self.amplitudes.iter().enumerate() {
            probs[Self::register_value(b, register) as usize] += a.norm_sqr();
        }
        Ok(probs)
    }

    /// Projective measurement of `register`; returns the big-endian value and
    /// collapses the state onto it.
    pub fn measure<R: Rng + ?Sized>(&mut self, register: &[usize], rng: &mut R) -> Result<u64> {
        let probs = self.register_probabilities(register)?;
        let outcome = sample_index(&probs, rng) as u64;
        let p = probs[outcome as usize];
        let scale = 1.0 / p.sqrt();
        for (b, a) in self.amplitudes.iter_mut().enumerate() {
            if Self::register_value(b, register) == outcome {
                *a *= scale;
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        Ok(outcome)
    }
}

/// Draw an index with probability proportional to `weights`.
pub fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last = i;
            if u < w {
                return i;
            }
            u -= w;
        }
    }
    last
}

/// Inject a determinant superposition into a `n_qubits` register using the
/// interleaved determinant-to-bitstring map with canonical phase `+1`.
pub fn prepare_state(spec: &WeightedDeterminantState, n_qubits: usize) -> Result<QuantumState> {
    let norm: f64 = spec.terms().iter().map(|(c, _)| c.norm_sqr()).sum();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::Domain(format!(
            "initial state has squared norm {norm}"
        )));
    }
    let mut state = QuantumState::zero(n_qubits)?;
    state.amplitudes[0] = Complex64::new(0.0, 0.0);
    for (c, d) in spec.terms() {
        if 2 * d.span() > n_qubits {
            return Err(Error::Index(format!(
                "determinant {d} does not fit in {n_qubits} qubits"
            )));
        }
        state.amplitudes[d.to_bitstring() as usize] = *c;
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::determinant::Determinant;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn rotation_zero_angle_is_identity() {
        let mut s = QuantumState::basis(2, 1).unwrap();
        s.hadamard(1).unwrap();
        let before = s.clone();
        s.apply_pauli_rotation(&"XY".parse().unwrap(), 0.0);
        assert_eq!(s, before);
    }

    #[test]
    fn half_pi_x_rotation() {
        let mut s = QuantumState::zero(1).unwrap();
        s.apply_pauli_rotation(&"X".parse().unwrap(), PI / 2.0);
        assert!(close(s.amplitudes()[0], Complex64::new(0.0, 0.0)));
        assert!(close(s.amplitudes()[1], Complex64::new(0.0, -1.0)));
    }

    #[test]
    fn qft_on_one_qubit_is_hadamard() {
        let mut a = QuantumState::basis(1, 1).unwrap();
        let mut b = a.clone();
        a.apply_inverse_qft(&[0]).unwrap();
        b.hadamard(0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn uniform_superposition_maps_to_zero() {
        let mut s = QuantumState::zero(4).unwrap();
        for q in 0..4 {
            s.hadamard(q).unwrap();
        }
        s.apply_inverse_qft(&[3, 1, 0, 2]).unwrap();
        assert!(close(s.amplitudes()[0], Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn duplicate_register_rejected() {
        let mut s = QuantumState::zero(3).unwrap();
        assert!(matches!(
            s.apply_inverse_qft(&[0, 1, 0]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn controlled_evolution_idle_when_control_is_zero() {
        let h =
            PauliSum::from_complex_map(1, 0.7, [("X".parse().unwrap(), Complex64::new(0.3, 0.0))])
                .unwrap();
        let sched = TrotterSchedule::lexicographic(&h);
        let mut s = QuantumState::basis(2, 0).unwrap();
        s.hadamard(0).unwrap();
        let before = s.clone();
        s.apply_controlled_evolution(&sched, 0.1, 3, 1).unwrap();
        assert_eq!(s, before);
        assert!(matches!(
            s.apply_controlled_evolution(&sched, 0.1, 3, 0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn scalar_hamiltonian_kicks_back_phase() {
        let c = -1.3;
        let h = PauliSum::new(1, c);
        let sched = TrotterSchedule::lexicographic(&h);
        let (dt, power) = (0.1, 5);
        let mut s = QuantumState::zero(2).unwrap();
        s.hadamard(1).unwrap();
        s.apply_controlled_evolution(&sched, dt, power, 1).unwrap();
        let rel = s.amplitudes()[2] / s.amplitudes()[0];
        assert!(close(
            rel,
            Complex64::from_polar(1.0, -c * dt * power as f64)
        ));
    }

    #[test]
    fn measuring_basis_state() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let mut s = QuantumState::basis(3, 0b101).unwrap();
        assert_eq!(s.measure(&[2, 1, 0], &mut rng).unwrap(), 0b101);
        assert_eq!(s.measure(&[0, 1, 2], &mut rng).unwrap(), 0b101);
        assert!((s.norm_sqr() - 1.0).abs() < NORM_DRIFT);
    }

    #[test]
    fn born_rule_frequency() {
        let mut rng = ChaCha20Rng::seed_from_u64(2024);
        let n = 100_000;
        let mut ones = 0;
        for _ in 0..n {
            let mut s = QuantumState::zero(1).unwrap();
            s.hadamard(0).unwrap();
            ones += s.measure(&[0], &mut rng).unwrap();
            assert!((s.norm_sqr() - 1.0).abs() < NORM_DRIFT);
        }
        let sigma = (n as f64 * 0.25).sqrt();
        assert!((ones as f64 - 0.5 * n as f64).abs() < 3.0 * sigma, "{ones}");
    }

    #[test]
    fn seeded_measurements_repeat() {
        let run = |seed| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            (0..64)
                .map(|_| {
                    let mut s = QuantumState::zero(3).unwrap();
                    for q in 0..3 {
                        s.hadamard(q).unwrap();
                    }
                    s.measure(&[0, 1, 2], &mut rng).unwrap()
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(run(9), run(9));
        assert_ne!(run(9), run(10));
    }

    #[test]
    fn prepare_reference_determinant() {
        let d = Determinant::aufbau(5, 5);
        let s = prepare_state(&WeightedDeterminantState::single(d), 18).unwrap();
        assert_eq!(s.amplitudes()[(1 << 10) - 1], Complex64::new(1.0, 0.0));
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn prepare_rejects_out_of_range_orbitals() {
        let d = Determinant::from_occupations(&[0, 3], &[0, 1]).unwrap();
        let r = prepare_state(&WeightedDeterminantState::single(d), 6);
        assert!(matches!(r, Err(Error::Index(_))));
    }
}
