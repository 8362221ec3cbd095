use std::f64::consts::{PI, TAU};
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::determinant::WeightedDeterminantState;
use crate::error::{Error, Result};
use crate::sector::{evolution_angle, BlockEigen, SectorSolver};
use crate::statevector::{prepare_state, sample_index, QuantumState, MAX_QUBITS};
use crate::trotter::TrotterSchedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// First-order Trotter circuit on the full `2N`-qubit statevector.
    Trotter,
    /// Exact `exp(-i H dt)` in the fixed-particle determinant sector.
    Exact,
}

impl std::str::FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trotter" => Ok(Self::Trotter),
            "exact" => Ok(Self::Exact),
            _ => Err(Error::Config(format!(
                "unknown backend `{s}` (trotter, exact)"
            ))),
        }
    }
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Trotter => "trotter",
            Self::Exact => "exact",
        })
    }
}

/// One application is `U = exp(-i (H - e_shift) dt)`, exactly or up to Trotter
/// error depending on the backend. System states are opaque amplitude
/// vectors in the backend's own basis.
pub trait EvolutionOracle: Send + Sync {
    fn backend(&self) -> Backend;
    fn delta(&self) -> f64;
    fn e_shift(&self) -> f64;
    /// Freshly prepared trial state.
    fn initial_state(&self) -> Vec<Complex64>;
    /// `psi <- U^power psi`.
    fn apply_power(&self, psi: &mut [Complex64], power: u64) -> Result<()>;
    /// Run textbook QPE with `m` ancillas on `psi` and return the measured
    /// big-endian register value.
    fn sample_qpe(&self, psi: &[Complex64], m: u32, rng: &mut dyn RngCore) -> Result<u64>;
}

/// Dense powers `U^(2^j)` are cached for systems up to this many qubits.
pub const CACHED_POWER_QUBITS: usize = 8;
const POWER_LEVELS: usize = 40;

/// Gate-level Trotter oracle on the interleaved Jordan-Wigner register.
pub struct TrotterOracle {
    schedule: TrotterSchedule,
    delta: f64,
    e_shift: f64,
    initial: Vec<Complex64>,
    /// `levels[j]` is the column-major matrix of `U^(2^j)`; filled on demand.
    levels: Vec<OnceLock<Vec<Complex64>>>,
}

impl TrotterOracle {
    /// `schedule` is the unshifted Trotter step; `e_shift` is subtracted here.
    pub fn new(
        schedule: &TrotterSchedule,
        delta: f64,
        e_shift: f64,
        initial: &WeightedDeterminantState,
    ) -> Result<Self> {
        check_delta(delta)?;
        let n = schedule.n_qubits();
        let initial = prepare_state(initial, n)?.amplitudes().to_vec();
        let levels = if n <= CACHED_POWER_QUBITS {
            (0..POWER_LEVELS).map(|_| OnceLock::new()).collect()
        } else {
            Vec::new()
        };
        Ok(Self {
            schedule: schedule.shifted(e_shift),
            delta,
            e_shift,
            initial,
            levels,
        })
    }

    pub fn schedule(&self) -> &TrotterSchedule {
        &self.schedule
    }

    fn level(&self, j: usize) -> &[Complex64] {
        self.levels[j].get_or_init(|| {
            let dim = 1usize << self.schedule.n_qubits();
            if j == 0 {
                let mut m = Vec::with_capacity(dim * dim);
                for col in 0..dim {
                    let mut s = QuantumState::basis(self.schedule.n_qubits(), col as u64)
                        .expect("small register");
                    s.apply_evolution(&self.schedule, self.delta, 1)
                        .expect("schedule fits");
                    m.extend_from_slice(s.amplitudes());
                }
                m
            } else {
                let a = self.level(j - 1);
                let mut out = vec![Complex64::new(0.0, 0.0); dim * dim];
                for col in 0..dim {
                    for k in 0..dim {
                        let b = a[col * dim + k];
                        if b == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        for row in 0..dim {
                            out[col * dim + row] += a[k * dim + row] * b;
                        }
                    }
                }
                out
            }
        })
    }
}

impl EvolutionOracle for TrotterOracle {
    fn backend(&self) -> Backend {
        Backend::Trotter
    }

    fn delta(&self) -> f64 {
        self.delta
    }

    fn e_shift(&self) -> f64 {
        self.e_shift
    }

    fn initial_state(&self) -> Vec<Complex64> {
        self.initial.clone()
    }

    fn apply_power(&self, psi: &mut [Complex64], power: u64) -> Result<()> {
        if self.levels.is_empty() {
            let mut s = QuantumState::from_amplitudes(psi.to_vec())?;
            s.apply_evolution(&self.schedule, self.delta, power)?;
            psi.copy_from_slice(s.amplitudes());
            return Ok(());
        }
        let dim = psi.len();
        let mut tmp = vec![Complex64::new(0.0, 0.0); dim];
        for j in 0..64 {
            if (power >> j) & 1 == 0 {
                continue;
            }
            if j >= POWER_LEVELS {
                return Err(Error::Budget {
                    requested: power as u128,
                    limit: 1u128 << POWER_LEVELS,
                });
            }
            let m = self.level(j);
            tmp.iter_mut().for_each(|t| *t = Complex64::new(0.0, 0.0));
            for (col, &x) in psi.iter().enumerate() {
                if x == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (row, t) in tmp.iter_mut().enumerate() {
                    *t += m[col * dim + row] * x;
                }
            }
            psi.copy_from_slice(&tmp);
        }
        Ok(())
    }

    fn sample_qpe(&self, psi: &[Complex64], m: u32, rng: &mut dyn RngCore) -> Result<u64> {
        let n = self.schedule.n_qubits();
        let m = m as usize;
        if n + m > MAX_QUBITS {
            return Err(Error::Capacity(format!(
                "{n} system qubits plus {m} ancillas exceed the dense limit of {MAX_QUBITS}"
            )));
        }
        let mut state = QuantumState::from_amplitudes(psi.to_vec())?.with_ancillas(m)?;
        let register: Vec<usize> = (n..n + m).collect();
        for &q in &register {
            state.hadamard(q)?;
        }
        for (i, &q) in register.iter().enumerate() {
            let power = 1u64 << (m - 1 - i);
            state.apply_controlled_evolution(&self.schedule, self.delta, power, q)?;
        }
        state.apply_inverse_qft(&register)?;
        state.measure(&register, rng)
    }
}

/// Exact sector oracle. The state is held in the eigenbasis of the blocks
/// the trial state touches, so any power costs one phase per component.
pub struct ExactOracle {
    solver: Arc<SectorSolver>,
    delta: f64,
    e_shift: f64,
    blocks: Vec<Arc<BlockEigen>>,
    /// Unshifted eigenvalue of each component.
    energies: Vec<f64>,
    initial: Vec<Complex64>,
}

impl ExactOracle {
    pub fn new(
        solver: Arc<SectorSolver>,
        delta: f64,
        e_shift: f64,
        initial: &WeightedDeterminantState,
    ) -> Result<Self> {
        check_delta(delta)?;
        let basis = solver.basis();
        if (initial.n_alpha(), initial.n_beta()) != (basis.n_alpha(), basis.n_beta()) {
            return Err(Error::Domain(format!(
                "trial state has ({}, {}) electrons, sector is ({}, {})",
                initial.n_alpha(),
                initial.n_beta(),
                basis.n_alpha(),
                basis.n_beta()
            )));
        }
        let mut sector_amps = Vec::with_capacity(initial.terms().len());
        for (c, d) in initial.terms() {
            let i = basis.index_of(d).ok_or_else(|| {
                Error::Index(format!(
                    "determinant {d} lies outside the {}-orbital sector",
                    basis.n_orbitals()
                ))
            })?;
            sector_amps.push((i, *c));
        }
        let h = solver.hamiltonian();
        let mut touched: Vec<usize> = sector_amps.iter().map(|&(i, _)| h.locate(i).0).collect();
        touched.sort_unstable();
        touched.dedup();

        let mut blocks = Vec::new();
        let mut energies = Vec::new();
        let mut amps = Vec::new();
        for &b in &touched {
            let eig = solver.block_eigen(b)?;
            for k in 0..eig.dim() {
                let mut c = Complex64::new(0.0, 0.0);
                for &(i, a) in &sector_amps {
                    let (bi, pos) = h.locate(i);
                    if bi == b {
                        c += a * eig.vectors[(pos, k)];
                    }
                }
                energies.push(eig.energies[k]);
                amps.push(c);
            }
            blocks.push(eig);
        }
        Ok(Self {
            solver,
            delta,
            e_shift,
            blocks,
            energies,
            initial: amps,
        })
    }

    pub fn solver(&self) -> &Arc<SectorSolver> {
        &self.solver
    }

    /// Eigenvalues of the touched blocks, in component order.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// `|<E_k|Psi_ini>|^2` in component order.
    pub fn overlaps(&self) -> Vec<f64> {
        self.initial.iter().map(|c| c.norm_sqr()).collect()
    }

    /// `(block, eigen index)` of component `k`, as used by [`SectorSolver::block_state`].
    pub fn component(&self, mut k: usize) -> (u8, usize) {
        for b in &self.blocks {
            if k < b.dim() {
                return (b.irrep, k);
            }
            k -= b.dim();
        }
        panic!("component index out of range");
    }

    fn shifted_angle(&self, k: usize, power: u64) -> f64 {
        evolution_angle(self.energies[k] - self.e_shift, self.delta, power)
    }
}

impl EvolutionOracle for ExactOracle {
    fn backend(&self) -> Backend {
        Backend::Exact
    }

    fn delta(&self) -> f64 {
        self.delta
    }

    fn e_shift(&self) -> f64 {
        self.e_shift
    }

    fn initial_state(&self) -> Vec<Complex64> {
        self.initial.clone()
    }

    fn apply_power(&self, psi: &mut [Complex64], power: u64) -> Result<()> {
        for (k, c) in psi.iter_mut().enumerate() {
            if *c != Complex64::new(0.0, 0.0) {
                *c *= Complex64::from_polar(1.0, -self.shifted_angle(k, power));
            }
        }
        Ok(())
    }

    /// Sampling the eigencomponent first and then the register value from the
    /// Fejer kernel of its phase reproduces the full-register distribution.
    fn sample_qpe(&self, psi: &[Complex64], m: u32, rng: &mut dyn RngCore) -> Result<u64> {
        if m == 0 || m > 62 {
            return Err(Error::Domain(format!("{m} ancillas is out of range")));
        }
        let weights: Vec<f64> = psi.iter().map(|c| c.norm_sqr()).collect();
        let k = sample_index(&weights, rng);
        // eigenvalue of U is exp(2 pi i theta)
        let theta = (-self.shifted_angle(k, 1) / TAU).rem_euclid(1.0);
        Ok(sample_fejer(theta, m, rng))
    }
}

/// Probability of reading `q` from an `m`-bit register for eigenphase
/// `exp(2 pi i theta)`.
pub fn fejer_probability(theta: f64, m: u32, q: u64) -> f64 {
    let big_m = (1u64 << m) as f64;
    let mut d = theta - q as f64 / big_m;
    d -= d.round();
    if d.abs() < 1e-300 {
        return 1.0;
    }
    let num = (PI * big_m * d).sin();
    let den = big_m * (PI * d).sin();
    (num / den).powi(2)
}

/// Inverse-CDF draw walking outward from the nearest register value.
pub fn sample_fejer(theta: f64, m: u32, rng: &mut dyn RngCore) -> u64 {
    let size = 1u64 << m;
    let center = ((theta * size as f64).floor() as u64) % size;
    let mut u: f64 = rng.random::<f64>();
    let mut last = center;
    for step in 0..size {
        // center, +1, -1, +2, -2, ...
        let k = (step + 1) / 2;
        let q = if step % 2 == 1 {
            (center + k) % size
        } else {
            (center + size - k) % size
        };
        let p = fejer_probability(theta, m, q);
        last = q;
        if u < p {
            return q;
        }
        u -= p;
    }
    last
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::Domain(format!(
            "time step must be positive, got {delta}"
        )));
    }
    Ok(())
}
