use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::oracle::EvolutionOracle;

/// Oracle applications allowed in one shot.
pub const MAX_APPLICATIONS: u128 = 1 << 24;

/// Default RPE repetitions per stage, split between X and Y.
pub const DEFAULT_RPE_REPETITIONS: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Qpe,
    Rpe,
}

impl std::str::FromStr for Estimator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qpe" => Ok(Self::Qpe),
            "rpe" => Ok(Self::Rpe),
            _ => Err(Error::Config(format!("unknown estimator `{s}` (qpe, rpe)"))),
        }
    }
}

impl std::fmt::Display for Estimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Qpe => "qpe",
            Self::Rpe => "rpe",
        })
    }
}

/// One decoded shot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergySample {
    pub shot: usize,
    pub seed: u64,
    pub estimator: Estimator,
    pub bits: u32,
    /// Eigenphase of `U` in `[0, 2 pi)`.
    pub phase: f64,
    /// Hartree.
    pub energy: f64,
    pub applications: u64,
}

/// Oracle budget for a target energy error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CostEstimate {
    pub applications: u64,
    pub bits: u32,
}

/// `ceil(pi / (eps dt))` applications and the register width that reaches them.
pub fn estimate_cost(epsilon: f64, delta: f64) -> Result<CostEstimate> {
    if !(epsilon > 0.0) || !(delta > 0.0) {
        return Err(Error::Domain(format!(
            "target error and time step must be positive, got {epsilon} and {delta}"
        )));
    }
    let applications = (PI / (epsilon * delta)).ceil().max(1.0) as u64;
    let bits = (64 - (applications - 1).leading_zeros()).max(1);
    Ok(CostEstimate { applications, bits })
}

/// Energy `e_shift - phi/dt + k 2pi/dt` for the unique `k` placing it in `window`.
pub fn decode_phase(phase: f64, delta: f64, e_shift: f64, window: (f64, f64)) -> Result<f64> {
    let (lo, hi) = window;
    let period = TAU / delta;
    if !(lo <= hi) {
        return Err(Error::Config(format!("window [{lo}, {hi}] is empty")));
    }
    if hi - lo > period {
        return Err(Error::Ambiguity {
            width: hi - lo,
            max: period,
        });
    }
    let base = e_shift - phase / delta;
    let k = ((lo - base) / period).ceil();
    let e = base + k * period;
    if e > hi {
        return Err(Error::Window { lo, hi });
    }
    Ok(e)
}

fn check_budget(applications: u128) -> Result<()> {
    if applications > MAX_APPLICATIONS {
        return Err(Error::Budget {
            requested: applications,
            limit: MAX_APPLICATIONS,
        });
    }
    Ok(())
}

/// Multi-ancilla QPE: `m` ancillas, ancilla `i` controls `U^(2^(m-1-i))`, then
/// the inverse QFT and a register measurement.
pub fn qpe_shot(
    oracle: &dyn EvolutionOracle,
    m: u32,
    window: (f64, f64),
    seed: u64,
) -> Result<EnergySample> {
    if m == 0 {
        return Err(Error::Config("QPE needs at least one ancilla".into()));
    }
    let applications = (1u128 << m.min(127)) - 1;
    check_budget(applications)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let psi = oracle.initial_state();
    let q = oracle.sample_qpe(&psi, m, &mut rng)?;
    let phase = TAU * q as f64 / (1u64 << m) as f64;
    let energy = decode_phase(phase, oracle.delta(), oracle.e_shift(), window)?;
    Ok(EnergySample {
        shot: 0,
        seed,
        estimator: Estimator::Qpe,
        bits: m,
        phase,
        energy,
        applications: applications as u64,
    })
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum()
}

/// Wrap to `(-pi, pi]`.
fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

/// Single-ancilla robust phase estimation. Stage `j` applies `U^(2^j)` with
/// the ancilla in `|+>` and measures it `reps` times, alternating X and Y.
/// The system register keeps its collapsed state between measurements.
pub fn rpe_shot(
    oracle: &dyn EvolutionOracle,
    bits: u32,
    reps: u32,
    window: (f64, f64),
    seed: u64,
) -> Result<EnergySample> {
    if bits == 0 {
        return Err(Error::Config(
            "RPE needs at least one bit of precision".into(),
        ));
    }
    if reps < 2 {
        return Err(Error::Config(
            "RPE needs at least two repetitions per stage".into(),
        ));
    }
    let applications = reps as u128 * ((1u128 << bits.min(126)) - 1);
    check_budget(applications)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut psi = oracle.initial_state();
    let mut u = psi.clone();
    let mut estimate = 0.0f64;
    for j in 0..bits {
        let power = 1u64 << j;
        let (mut x0, mut nx, mut y0, mut ny) = (0u32, 0u32, 0u32, 0u32);
        for r in 0..reps {
            u.copy_from_slice(&psi);
            oracle.apply_power(&mut u, power)?;
            // projections of (|0> psi + |1> U psi)/sqrt2 onto the ancilla outcome
            let rot = if r % 2 == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, -1.0)
            };
            let zero: Vec<Complex64> = psi
                .iter()
                .zip(&u)
                .map(|(a, b)| (a + rot * b) * 0.5)
                .collect();
            let p0 = norm_sqr(&zero) / norm_sqr(&psi);
            let outcome_zero = rng.random::<f64>() < p0;
            if outcome_zero {
                psi = zero;
            } else {
                psi.iter_mut()
                    .zip(&u)
                    .for_each(|(a, b)| *a = (*a - rot * b) * 0.5);
            }
            let scale = 1.0 / norm_sqr(&psi).sqrt();
            psi.iter_mut().for_each(|a| *a *= scale);
            if r % 2 == 0 {
                nx += 1;
                x0 += outcome_zero as u32;
            } else {
                ny += 1;
                y0 += outcome_zero as u32;
            }
        }
        let c = 2.0 * x0 as f64 / nx as f64 - 1.0;
        let s = 2.0 * y0 as f64 / ny as f64 - 1.0;
        let stage = s.atan2(c);
        let scale = power as f64;
        estimate = if j == 0 {
            stage
        } else {
            estimate + wrap(stage - scale * estimate) / scale
        };
    }
    let phase = estimate.rem_euclid(TAU);
    let energy = decode_phase(phase, oracle.delta(), oracle.e_shift(), window)?;
    Ok(EnergySample {
        shot: 0,
        seed,
        estimator: Estimator::Rpe,
        bits,
        phase,
        energy,
        applications: applications as u64,
    })
}
