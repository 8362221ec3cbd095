use rayon::prelude::*;

use crate::determinant::{apply_excitation, bits, Determinant};
use crate::error::{Error, Result};
use crate::fcidump::IntegralSet;
use crate::sector::basis::SectorBasis;

/// Couplings between determinants of different spatial symmetry above this
/// size mean the orbital labels do not describe the integrals.
pub const SYMMETRY_LEAK_TOLERANCE: f64 = 1e-10;

/// Real symmetric matrix in compressed-row form.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    pub fn from_rows(rows: Vec<Vec<(u32, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let nnz = rows.iter().map(Vec::len).sum();
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        for row in rows {
            for (c, v) in row {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Self {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()]
            .iter()
            .zip(&self.vals[r])
            .map(|(&c, &v)| (c as usize, v))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&(j as u32)) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`, rows in parallel; each row sums in a fixed order.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        });
    }

    pub fn max_asymmetry(&self) -> f64 {
        (0..self.n)
            .flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v)))
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> faer::Mat<f64> {
        let mut m = faer::Mat::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }
}

/// Determinants of one total spatial irrep (Molpro label `1..=8`).
#[derive(Debug, Clone)]
pub struct SymmetryBlock {
    pub irrep: u8,
    pub indices: Vec<usize>,
    pub matrix: CsrMatrix,
}

/// Sector Hamiltonian over a [`SectorBasis`], including the core energy.
#[derive(Debug, Clone)]
pub struct SectorHamiltonian {
    basis: SectorBasis,
    matrix: CsrMatrix,
    irreps: Vec<u8>,
    blocks: Vec<SymmetryBlock>,
    /// `(block, position within block)` for every determinant.
    locator: Vec<(usize, usize)>,
}

impl SectorHamiltonian {
    pub fn basis(&self) -> &SectorBasis {
        &self.basis
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Total irrep label of determinant `i`.
    pub fn irrep(&self, i: usize) -> u8 {
        self.irreps[i]
    }

    pub fn blocks(&self) -> &[SymmetryBlock] {
        &self.blocks
    }

    pub fn locate(&self, i: usize) -> (usize, usize) {
        self.locator[i]
    }

    pub fn block_with_irrep(&self, irrep: u8) -> Option<usize> {
        self.blocks.iter().position(|b| b.irrep == irrep)
    }
}

/// Spin-orbital integrals over interleaved indices.
struct SpinIntegrals<'a> {
    ints: &'a IntegralSet,
}

impl SpinIntegrals<'_> {
    #[inline]
    fn h(&self, p: usize, q: usize) -> f64 {
        if p & 1 != q & 1 {
            0.0
        } else {
            self.ints.h1(p >> 1, q >> 1)
        }
    }

    /// `<PQ|RS> = (pr|qs)` with spin deltas.
    #[inline]
    fn coulomb(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        if p & 1 != r & 1 || q & 1 != s & 1 {
            0.0
        } else {
            self.ints.eri(p >> 1, r >> 1, q >> 1, s >> 1)
        }
    }

    /// `<PQ||RS>`.
    #[inline]
    fn anti(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.coulomb(p, q, r, s) - self.coulomb(p, q, s, r)
    }
}

/// Diagonal Slater-Condon energy of one determinant, core energy included.
pub fn determinant_energy(ints: &IntegralSet, det: &Determinant) -> f64 {
    let si = SpinIntegrals { ints };
    let occ: Vec<usize> = bits(det.to_bitstring()).collect();
    let mut e = ints.core_energy();
    for (k, &p) in occ.iter().enumerate() {
        e += si.h(p, p);
        for &q in &occ[..k] {
            e += si.anti(p, q, p, q);
        }
    }
    e
}

fn sign_of(ops: &[(usize, bool)], mut b: u64) -> Option<(f64, u64)> {
    // rightmost operator acts first
    let mut sign = 1.0;
    for &(p, create) in ops.iter().rev() {
        let below = (b & ((1u64 << p) - 1)).count_ones();
        let occupied = (b >> p) & 1 == 1;
        if occupied == create {
            return None;
        }
        if below % 2 == 1 {
            sign = -sign;
        }
        b ^= 1 << p;
    }
    Some((sign, b))
}

fn connected_row(
    si: &SpinIntegrals<'_>,
    basis: &SectorBasis,
    core: f64,
    n_spin: usize,
    det: Determinant,
) -> Vec<(u32, f64)> {
    let b = det.to_bitstring();
    let full = if n_spin == 64 {
        u64::MAX
    } else {
        (1u64 << n_spin) - 1
    };
    let occ: Vec<usize> = bits(b).collect();
    let virt: Vec<usize> = bits(!b & full).collect();
    let mut row = Vec::new();
    let mut push = |b2: u64, v: f64| {
        if v != 0.0 {
            let j = basis
                .index_of(&Determinant::from_bitstring(b2))
                .expect("excitation stays in the sector");
            row.push((j as u32, v));
        }
    };

    let mut diag = core;
    for (k, &p) in occ.iter().enumerate() {
        diag += si.h(p, p);
        for &q in &occ[..k] {
            diag += si.anti(p, q, p, q);
        }
    }
    push(b, diag);

    for &i in &occ {
        for &a in &virt {
            if a & 1 != i & 1 {
                continue;
            }
            let (sign, b2) = apply_excitation(b, a, i).expect("occupied to virtual");
            let mut v = si.h(a, i);
            for &k in &occ {
                v += si.anti(a, k, i, k);
            }
            push(b2, sign * v);
        }
    }

    for (x, &i) in occ.iter().enumerate() {
        for &j in &occ[x + 1..] {
            let spin_in = (i & 1) + (j & 1);
            for (y, &a) in virt.iter().enumerate() {
                for &bb in &virt[y + 1..] {
                    if (a & 1) + (bb & 1) != spin_in {
                        continue;
                    }
                    let v = si.anti(a, bb, i, j);
                    if v == 0.0 {
                        continue;
                    }
                    let (sign, b2) = sign_of(&[(a, true), (bb, true), (j, false), (i, false)], b)
                        .expect("occupied to virtual");
                    push(b2, sign * v);
                }
            }
        }
    }
    row.sort_unstable_by_key(|e| e.0);
    row
}

/// Sector Hamiltonian by Slater-Condon rules. Determinants are grouped by
/// total spatial irrep; couplings across irreps must vanish to within
/// [`SYMMETRY_LEAK_TOLERANCE`] and are dropped.
pub fn build_sector_hamiltonian(
    ints: &IntegralSet,
    basis: SectorBasis,
) -> Result<SectorHamiltonian> {
    if basis.n_orbitals() != ints.n_orbitals() {
        return Err(Error::Domain(format!(
            "basis has {} orbitals, integrals have {}",
            basis.n_orbitals(),
            ints.n_orbitals()
        )));
    }
    let si = SpinIntegrals { ints };
    let n_spin = 2 * ints.n_orbitals();
    let irreps: Vec<u8> = basis
        .iter()
        .map(|d| ints.irrep_of_orbitals(d.alpha_orbitals().chain(d.beta_orbitals())) + 1)
        .collect();
    let rows: Vec<Vec<(u32, f64)>> = (0..basis.dim())
        .into_par_iter()
        .map(|i| {
            connected_row(
                &si,
                &basis,
                ints.core_energy(),
                n_spin,
                basis.determinant(i),
            )
        })
        .collect();

    let mut leak = 0.0f64;
    let mut worst = (0, 0);
    let rows: Vec<Vec<(u32, f64)>> = rows
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            row.into_iter()
                .filter(|&(j, v)| {
                    if irreps[j as usize] == irreps[i] {
                        return true;
                    }
                    if v.abs() > leak {
                        leak = v.abs();
                        worst = (i, j as usize);
                    }
                    false
                })
                .collect()
        })
        .collect();
    if leak > SYMMETRY_LEAK_TOLERANCE {
        return Err(Error::Numerical(format!(
            "orbital symmetry labels are inconsistent with the integrals: \
             {} and {} couple by {leak:e}",
            basis.determinant(worst.0),
            basis.determinant(worst.1)
        )));
    }
    let matrix = CsrMatrix::from_rows(rows);

    let mut labels: Vec<u8> = irreps.clone();
    labels.sort_unstable();
    labels.dedup();
    let mut locator = vec![(0, 0); basis.dim()];
    let mut blocks = Vec::with_capacity(labels.len());
    for (bi, &label) in labels.iter().enumerate() {
        let indices: Vec<usize> = (0..basis.dim()).filter(|&i| irreps[i] == label).collect();
        for (pos, &i) in indices.iter().enumerate() {
            locator[i] = (bi, pos);
        }
        let rows = indices
            .iter()
            .map(|&i| {
                matrix
                    .row(i)
                    .map(|(j, v)| (locator[j].1 as u32, v))
                    .collect()
            })
            .collect();
        blocks.push(SymmetryBlock {
            irrep: label,
            indices,
            matrix: CsrMatrix::from_rows(rows),
        });
    }
    Ok(SectorHamiltonian {
        basis,
        matrix,
        irreps,
        blocks,
        locator,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fcidump::parse_fcidump;
    use crate::sector::basis::enumerate_basis;

    #[test]
    fn filled_sector_is_reference_energy() {
        let ints = parse_fcidump(include_bytes!("../../../../data/h2_sto3g.fcidump")).unwrap();
        let h = build_sector_hamiltonian(&ints, enumerate_basis(2, 2, 2).unwrap()).unwrap();
        assert_eq!(h.dim(), 1);
        let mut e = ints.core_energy();
        for p in 0..2 {
            e += 2.0 * ints.h1(p, p);
            for q in 0..2 {
                e += 2.0 * ints.eri(p, p, q, q) - ints.eri(p, q, q, p);
            }
        }
        assert!((h.matrix().get(0, 0) - e).abs() < 1e-12);
    }

    #[test]
    fn symmetric_on_bundled_systems() {
        for (bytes, na, nb) in [
            (
                &include_bytes!("../../../../data/h2_sto3g.fcidump")[..],
                1,
                1,
            ),
            (
                &include_bytes!("../../../../data/h3plus_sto3g.fcidump")[..],
                1,
                1,
            ),
            (
                &include_bytes!("../../../../data/h4_chain_sto3g.fcidump")[..],
                2,
                2,
            ),
        ] {
            let ints = parse_fcidump(bytes).unwrap();
            let basis = enumerate_basis(ints.n_orbitals(), na, nb).unwrap();
            let h = build_sector_hamiltonian(&ints, basis).unwrap();
            assert_eq!(h.matrix().max_asymmetry(), 0.0);
        }
    }

    #[test]
    fn operator_string_signs() {
        // a+_2 a_0 on qubits {0,1}: one occupied qubit (1) passed
        assert_eq!(
            sign_of(&[(2, true), (0, false)], 0b011),
            Some((-1.0, 0b110))
        );
        assert_eq!(sign_of(&[(1, true)], 0b010), None);
    }
}
