use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sector::solver::SectorSolver;

/// `psi <- exp(-i H dt power) psi` over the sector basis, through the cached
/// block eigendecompositions. Blocks where `psi` vanishes are skipped.
pub fn evolve_exact(
    solver: &SectorSolver,
    psi: &mut [Complex64],
    dt: f64,
    power: u64,
) -> Result<()> {
    let h = solver.hamiltonian();
    if psi.len() != h.dim() {
        return Err(Error::Domain(format!(
            "state of length {} does not match sector dimension {}",
            psi.len(),
            h.dim()
        )));
    }
    if !(dt * power as f64).is_finite() {
        return Err(Error::Domain("evolution time is not finite".into()));
    }
    for (b, block) in h.blocks().iter().enumerate() {
        if block
            .indices
            .iter()
            .all(|&i| psi[i] == Complex64::new(0.0, 0.0))
        {
            continue;
        }
        let eig = solver.block_eigen(b)?;
        let n = eig.dim();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
        for (k, c) in coeffs.iter_mut().enumerate() {
            for (pos, &i) in eig.indices.iter().enumerate() {
                *c += psi[i] * eig.vectors[(pos, k)];
            }
            *c *= Complex64::from_polar(1.0, -evolution_angle(eig.energies[k], dt, power));
        }
        for (pos, &i) in eig.indices.iter().enumerate() {
            psi[i] = (0..n).map(|k| coeffs[k] * eig.vectors[(pos, k)]).sum();
        }
    }
    Ok(())
}

/// `E dt power` reduced mod 2 pi, reducing `E dt` first to keep the product small.
#[inline]
pub fn evolution_angle(energy: f64, dt: f64, power: u64) -> f64 {
    ((energy * dt).rem_euclid(TAU) * power as f64).rem_euclid(TAU)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fcidump::parse_fcidump;
    use crate::sector::solver::FciOptions;

    fn h4() -> SectorSolver {
        SectorSolver::from_integrals(
            &parse_fcidump(include_bytes!("../../../../data/h4_chain_sto3g.fcidump")).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn eigenvector_picks_up_phase() {
        let s = h4();
        let st = &s.solve(&FciOptions::lowest(1)).unwrap().states[0];
        let mut psi: Vec<Complex64> = st.vector.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let before = psi.clone();
        evolve_exact(&s, &mut psi, 0.1, 3).unwrap();
        let phase = Complex64::from_polar(1.0, -st.energy * 0.3);
        for (a, b) in psi.iter().zip(&before) {
            assert!((a - b * phase).norm() < 1e-10);
        }
    }

    #[test]
    fn zero_step_is_identity() {
        let s = h4();
        let n = s.hamiltonian().dim();
        let mut psi: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let norm = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        psi.iter_mut().for_each(|c| *c /= norm);
        let before = psi.clone();
        evolve_exact(&s, &mut psi, 0.0, 5).unwrap();
        for (a, b) in psi.iter().zip(&before) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn norm_survives_many_applications() {
        let s = h4();
        let n = s.hamiltonian().dim();
        let mut psi = vec![Complex64::new(0.0, 0.0); n];
        psi[0] = Complex64::new(0.6, 0.0);
        psi[n - 1] = Complex64::new(0.0, 0.8);
        evolve_exact(&s, &mut psi, 0.1, 1 << 14).unwrap();
        let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-9);
    }
}
