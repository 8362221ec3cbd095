use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use faer::{Mat, Side};
use serde::Serialize;

use crate::determinant::{apply_excitation, Determinant};
use crate::error::{Error, Result};
use crate::fcidump::IntegralSet;
use crate::sector::basis::{enumerate_basis, SectorBasis};
use crate::sector::hamiltonian::{build_sector_hamiltonian, CsrMatrix, SectorHamiltonian};

/// Largest dimension handled by dense diagonalization unless asked otherwise.
pub const DENSE_CROSSOVER: usize = 2000;

/// Residual `||Hv - Ev||` required of every reported eigenpair.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;

/// Leading determinants reported per state.
pub const LEADING_COUNT: usize = 4;

/// Full eigendecomposition of one symmetry block.
#[derive(Debug)]
pub struct BlockEigen {
    pub irrep: u8,
    /// Sector indices of the block's determinants.
    pub indices: Vec<usize>,
    /// Ascending.
    pub energies: Vec<f64>,
    /// Column `k` is the eigenvector of `energies[k]` over `indices`.
    pub vectors: Mat<f64>,
}

impl BlockEigen {
    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    /// Eigenvector `k` scattered onto the full sector.
    pub fn sector_vector(&self, k: usize, sector_dim: usize) -> Vec<f64> {
        let mut v = vec![0.0; sector_dim];
        for (pos, &i) in self.indices.iter().enumerate() {
            v[i] = self.vectors[(pos, k)];
        }
        v
    }
}

fn dense_eigen(m: &CsrMatrix) -> Result<(Vec<f64>, Mat<f64>)> {
    let dense = m.to_dense();
    let evd = dense
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("dense eigendecomposition failed: {e:?}")))?;
    let energies = evd.S().column_vector().iter().copied().collect();
    Ok((energies, evd.U().to_owned()))
}

/// Options for [`fci_solve_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct FciOptions {
    pub n_states: usize,
    /// Keep only states with energy in `[lo, hi]` (dense path).
    pub window: Option<(f64, f64)>,
    /// Restrict to one total irrep.
    pub irrep: Option<u8>,
    /// Force dense diagonalization.
    pub dense: bool,
    pub max_iterations: usize,
}

impl FciOptions {
    pub fn lowest(n_states: usize) -> Self {
        Self {
            n_states,
            window: None,
            irrep: None,
            dense: false,
            max_iterations: 500,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FciState {
    pub energy: f64,
    pub s2: f64,
    pub irrep: u8,
    pub residual: f64,
    /// Largest-magnitude coefficients, descending.
    pub leading: Vec<(f64, Determinant)>,
    #[serde(skip)]
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FciSolution {
    /// Ascending in energy.
    pub states: Vec<FciState>,
}

impl FciSolution {
    pub fn energies(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.energy).collect()
    }
}

/// `<S^2> = ||S+ psi||^2 + M_s^2 + M_s` for a real sector vector.
pub fn spin_squared(basis: &SectorBasis, psi: &[f64]) -> f64 {
    let ms = (basis.n_alpha() as f64 - basis.n_beta() as f64) / 2.0;
    let mut raised: BTreeMap<u64, f64> = BTreeMap::new();
    for (i, d) in basis.iter().enumerate() {
        let c = psi[i];
        if c == 0.0 {
            continue;
        }
        let b = d.to_bitstring();
        for p in crate::determinant::bits(d.beta & !d.alpha) {
            if let Some((sign, b2)) = apply_excitation(b, 2 * p, 2 * p + 1) {
                *raised.entry(b2).or_default() += sign * c;
            }
        }
    }
    raised.values().map(|v| v * v).sum::<f64>() + ms * ms + ms
}

fn leading_determinants(basis: &SectorBasis, psi: &[f64], count: usize) -> Vec<(f64, Determinant)> {
    let mut order: Vec<usize> = (0..psi.len()).collect();
    order.sort_by(|&a, &b| psi[b].abs().total_cmp(&psi[a].abs()).then(a.cmp(&b)));
    order
        .into_iter()
        .take(count)
        .filter(|&i| psi[i] != 0.0)
        .map(|i| (psi[i], basis.determinant(i)))
        .collect()
}

fn residual_norm(m: &CsrMatrix, v: &[f64], e: f64) -> f64 {
    let mut hv = vec![0.0; v.len()];
    m.matvec(v, &mut hv);
    hv.iter()
        .zip(v)
        .map(|(a, b)| (a - e * b).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Lowest `k` eigenpairs of a sparse symmetric matrix by Davidson iteration
/// with the diagonal preconditioner.
pub fn davidson(
    m: &CsrMatrix,
    k: usize,
    tol: f64,
    max_iterations: usize,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = m.dim();
    if k == 0 || k > n {
        return Err(Error::Domain(format!(
            "cannot take {k} roots of a {n}-dim matrix"
        )));
    }
    let diag = m.diagonal();
    let n_guess = (2 * k).max(k + 4).min(n);
    let max_subspace = (8 * k).max(48).min(n);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]).then(a.cmp(&b)));

    let mut v: Vec<Vec<f64>> = Vec::new();
    let mut av: Vec<Vec<f64>> = Vec::new();
    let push = |x: Vec<f64>, v: &mut Vec<Vec<f64>>, av: &mut Vec<Vec<f64>>| {
        let mut y = vec![0.0; n];
        m.matvec(&x, &mut y);
        v.push(x);
        av.push(y);
    };
    for &i in &order[..n_guess] {
        let mut x = vec![0.0; n];
        x[i] = 1.0;
        push(x, &mut v, &mut av);
    }

    let mut best = f64::INFINITY;
    for _ in 0..max_iterations {
        let s = v.len();
        let t = Mat::from_fn(s, s, |i, j| dot(&v[i], &av[j]));
        let evd = t
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Numerical(format!("subspace eigensolve failed: {e:?}")))?;
        let theta: Vec<f64> = evd.S().column_vector().iter().copied().collect();
        let y = evd.U();

        let ritz = |r: usize| -> (Vec<f64>, Vec<f64>) {
            let mut x = vec![0.0; n];
            let mut ax = vec![0.0; n];
            for j in 0..s {
                let c = y[(j, r)];
                for i in 0..n {
                    x[i] += c * v[j][i];
                    ax[i] += c * av[j][i];
                }
            }
            (x, ax)
        };

        let mut corrections = Vec::new();
        let mut worst = 0.0f64;
        let mut pairs = Vec::with_capacity(k);
        for r in 0..k {
            let (x, ax) = ritz(r);
            let res: Vec<f64> = ax.iter().zip(&x).map(|(a, b)| a - theta[r] * b).collect();
            let rn = dot(&res, &res).sqrt();
            worst = worst.max(rn);
            if rn > tol {
                let c: Vec<f64> = res
                    .iter()
                    .zip(&diag)
                    .map(|(ri, di)| {
                        let d = theta[r] - di;
                        ri / if d.abs() < 1e-8 {
                            1e-8f64.copysign(d)
                        } else {
                            d
                        }
                    })
                    .collect();
                corrections.push(c);
            }
            pairs.push(x);
        }
        best = best.min(worst);
        if corrections.is_empty() {
            return Ok((theta[..k].to_vec(), pairs));
        }

        if s + corrections.len() > max_subspace {
            let keep = (2 * k).min(s);
            let mut nv = Vec::with_capacity(keep);
            let mut nav = Vec::with_capacity(keep);
            for r in 0..keep {
                let (x, ax) = ritz(r);
                nv.push(x);
                nav.push(ax);
            }
            v = nv;
            av = nav;
        }
        let mut added = 0;
        for mut c in corrections {
            for _ in 0..2 {
                for b in &v {
                    let proj = dot(b, &c);
                    c.iter_mut().zip(b).for_each(|(ci, bi)| *ci -= proj * bi);
                }
            }
            let norm = dot(&c, &c).sqrt();
            if norm > 1e-10 {
                c.iter_mut().for_each(|ci| *ci /= norm);
                push(c, &mut v, &mut av);
                added += 1;
            }
        }
        if added == 0 {
            break;
        }
    }
    Err(Error::Convergence {
        best_residual: best,
    })
}

/// Sector Hamiltonian with lazily computed, cached block eigendecompositions.
#[derive(Debug)]
pub struct SectorSolver {
    hamiltonian: SectorHamiltonian,
    cache: Vec<Mutex<Option<Arc<BlockEigen>>>>,
}

impl SectorSolver {
    pub fn new(hamiltonian: SectorHamiltonian) -> Self {
        let cache = hamiltonian
            .blocks()
            .iter()
            .map(|_| Mutex::new(None))
            .collect();
        Self { hamiltonian, cache }
    }

    /// Build the `(n_alpha, n_beta)` sector of the integrals' own electron count.
    pub fn from_integrals(ints: &IntegralSet) -> Result<Self> {
        let basis = enumerate_basis(ints.n_orbitals(), ints.n_alpha(), ints.n_beta())?;
        Ok(Self::new(build_sector_hamiltonian(ints, basis)?))
    }

    pub fn hamiltonian(&self) -> &SectorHamiltonian {
        &self.hamiltonian
    }

    pub fn basis(&self) -> &SectorBasis {
        self.hamiltonian.basis()
    }

    /// Dense eigendecomposition of block `b`, computed once.
    pub fn block_eigen(&self, b: usize) -> Result<Arc<BlockEigen>> {
        let mut slot = self.cache[b].lock().expect("block cache poisoned");
        if let Some(e) = slot.as_ref() {
            return Ok(Arc::clone(e));
        }
        let block = &self.hamiltonian.blocks()[b];
        let (energies, vectors) = dense_eigen(&block.matrix)?;
        let eig = Arc::new(BlockEigen {
            irrep: block.irrep,
            indices: block.indices.clone(),
            energies,
            vectors,
        });
        *slot = Some(Arc::clone(&eig));
        Ok(eig)
    }

    fn state_from_vector(&self, energy: f64, irrep: u8, vector: Vec<f64>) -> FciState {
        let basis = self.basis();
        FciState {
            energy,
            s2: spin_squared(basis, &vector),
            irrep,
            residual: residual_norm(self.hamiltonian.matrix(), &vector, energy),
            leading: leading_determinants(basis, &vector, LEADING_COUNT),
            vector,
        }
    }

    /// Eigenpair `k` of block `b` as a full FCI state.
    pub fn block_state(&self, b: usize, k: usize) -> Result<FciState> {
        let eig = self.block_eigen(b)?;
        let v = eig.sector_vector(k, self.hamiltonian.dim());
        Ok(self.state_from_vector(eig.energies[k], eig.irrep, v))
    }

    fn selected_blocks(&self, irrep: Option<u8>) -> Result<Vec<usize>> {
        match irrep {
            None => Ok((0..self.hamiltonian.blocks().len()).collect()),
            Some(x) => self
                .hamiltonian
                .block_with_irrep(x)
                .map(|b| vec![b])
                .ok_or_else(|| {
                    Error::Domain(format!("no determinants of irrep {x} in the sector"))
                }),
        }
    }

    pub fn solve(&self, opts: &FciOptions) -> Result<FciSolution> {
        let blocks = self.selected_blocks(opts.irrep)?;
        let dim: usize = blocks
            .iter()
            .map(|&b| self.hamiltonian.blocks()[b].indices.len())
            .sum();
        if opts.n_states == 0 {
            return Ok(FciSolution { states: Vec::new() });
        }
        if opts.window.is_none() && opts.n_states > dim {
            return Err(Error::Domain(format!(
                "{} states requested from a {dim}-dim space",
                opts.n_states
            )));
        }
        let mut states = if opts.dense || opts.window.is_some() || dim <= DENSE_CROSSOVER {
            let (lo, hi) = opts.window.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
            let mut found: Vec<(f64, usize, usize)> = Vec::new();
            for &b in &blocks {
                let eig = self.block_eigen(b)?;
                for (k, &e) in eig.energies.iter().enumerate() {
                    if e >= lo && e <= hi {
                        found.push((e, b, k));
                    }
                }
            }
            found.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            found.truncate(opts.n_states);
            found
                .into_iter()
                .map(|(_, b, k)| self.block_state(b, k))
                .collect::<Result<Vec<_>>>()?
        } else {
            let mut all = Vec::new();
            for &b in &blocks {
                let block = &self.hamiltonian.blocks()[b];
                let k = opts.n_states.min(block.indices.len());
                let (energies, vectors) = davidson(
                    &block.matrix,
                    k,
                    RESIDUAL_TOLERANCE * 0.1,
                    opts.max_iterations,
                )?;
                for (e, v) in energies.into_iter().zip(vectors) {
                    let mut full = vec![0.0; self.hamiltonian.dim()];
                    for (pos, &i) in block.indices.iter().enumerate() {
                        full[i] = v[pos];
                    }
                    all.push(self.state_from_vector(e, block.irrep, full));
                }
            }
            all.sort_by(|a, b| a.energy.total_cmp(&b.energy));
            all.truncate(opts.n_states);
            all
        };
        if let Some(bad) = states.iter().find(|s| s.residual > RESIDUAL_TOLERANCE) {
            return Err(Error::Convergence {
                best_residual: bad.residual,
            });
        }
        states.sort_by(|a, b| a.energy.total_cmp(&b.energy));
        Ok(FciSolution { states })
    }
}

/// Lowest `n_states` eigenpairs of the sector Hamiltonian: Davidson above
/// [`DENSE_CROSSOVER`] determinants, dense below.
pub fn fci_solve(h: SectorHamiltonian, n_states: usize) -> Result<FciSolution> {
    SectorSolver::new(h).solve(&FciOptions::lowest(n_states))
}

/// Match of an energy sample against an FCI eigenvalue.
#[derive(Debug, Clone, Serialize)]
pub struct FciMatch {
    pub index: usize,
    pub energy: f64,
    pub distance: f64,
    pub s2: f64,
    pub leading: Vec<(f64, Determinant)>,
}

/// Nearest eigenvalue within `tol`, if any.
pub fn classify_against_fci(energy: f64, sol: &FciSolution, tol: f64) -> Option<FciMatch> {
    if !(tol > 0.0) {
        return None;
    }
    let (index, state) = sol.states.iter().enumerate().min_by(|a, b| {
        (a.1.energy - energy)
            .abs()
            .total_cmp(&(b.1.energy - energy).abs())
    })?;
    let distance = (state.energy - energy).abs();
    (distance <= tol).then(|| FciMatch {
        index,
        energy: state.energy,
        distance,
        s2: state.s2,
        leading: state.leading.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fcidump::parse_fcidump;

    fn solver(bytes: &[u8]) -> SectorSolver {
        SectorSolver::from_integrals(&parse_fcidump(bytes).unwrap()).unwrap()
    }

    #[test]
    fn davidson_matches_dense_on_h4() {
        let s = solver(include_bytes!("../../../../data/h4_chain_sto3g.fcidump"));
        let m = &s.hamiltonian().blocks()[0].matrix;
        let (dense, _) = dense_eigen(m).unwrap();
        let (dav, vecs) = davidson(m, 3, 1e-10, 500).unwrap();
        for k in 0..3 {
            assert!(
                (dav[k] - dense[k]).abs() < 1e-10,
                "{k}: {} vs {}",
                dav[k],
                dense[k]
            );
            assert!(residual_norm(m, &vecs[k], dav[k]) < 1e-8);
        }
    }

    #[test]
    fn spin_of_h2_states() {
        let s = solver(include_bytes!("../../../../data/h2_sto3g.fcidump"));
        let sol = s.solve(&FciOptions::lowest(4)).unwrap();
        let spins: Vec<f64> = sol.states.iter().map(|st| st.s2).collect();
        for s2 in &spins {
            assert!(
                (s2 - 0.0).abs() < 1e-9 || (s2 - 2.0).abs() < 1e-9,
                "{spins:?}"
            );
        }
        assert!(spins[0].abs() < 1e-9, "ground state is a singlet");
        assert_eq!(spins.iter().filter(|s| (**s - 2.0).abs() < 1e-9).count(), 1);
    }

    #[test]
    fn one_dimensional_sector() {
        let ints = parse_fcidump(include_bytes!("../../../../data/h2_sto3g.fcidump")).unwrap();
        let basis = enumerate_basis(2, 2, 2).unwrap();
        let h = build_sector_hamiltonian(&ints, basis).unwrap();
        let diag = h.matrix().get(0, 0);
        let sol = fci_solve(h, 1).unwrap();
        assert_eq!(sol.states.len(), 1);
        assert!((sol.states[0].energy - diag).abs() < 1e-12);
    }

    #[test]
    fn classification() {
        let mk = |e: f64| FciState {
            energy: e,
            s2: 0.0,
            irrep: 1,
            residual: 0.0,
            leading: Vec::new(),
            vector: Vec::new(),
        };
        let sol = FciSolution {
            states: vec![mk(-55.3088), mk(-55.2472)],
        };
        let m = classify_against_fci(-55.3090, &sol, 5e-3).unwrap();
        assert_eq!(m.index, 0);
        let m = classify_against_fci(-55.2472, &sol, 5e-3).unwrap();
        assert_eq!((m.index, m.distance), (1, 0.0));
        assert!(classify_against_fci(-55.278, &sol, 5e-3).is_none());
    }
}
