"""Generate the bundled FCIDUMP files with PySCF.

H2O/cc-pVDZ, RHF with C2v symmetry, active space = 9 lowest canonical MOs,
all 10 electrons correlated. The default file uses spherical d functions;
an alternate file with Cartesian d functions is written alongside it.
H2/STO-3G at R = 0.7414 A, an equilateral H3+/STO-3G (R = 0.9 A) and a
linear H4/STO-3G chain (R = 1.0 A) are small systems for tests.

ORBSYM is written in the Molpro convention (C2v: A1=1, B1=2, B2=3, A2=4).
"""
import sys
import numpy as np
from pyscf import gto, scf, ao2mo
from pyscf.tools import fcidump


# PySCF C2v irrep ids (A1=0, A2=1, B1=2, B2=3) -> Molpro numbering
MOLPRO_C2V = {0: 1, 1: 4, 2: 2, 3: 3}


def h2o(path, cart=False):
    r, theta = 0.9772, np.deg2rad(104.52)
    mol = gto.M(
        verbose=0,
        atom=[
            ["O", (0.0, 0.0, 0.0)],
            ["H", (0.0, r * np.sin(theta / 2), r * np.cos(theta / 2))],
            ["H", (0.0, -r * np.sin(theta / 2), r * np.cos(theta / 2))],
        ],
        basis="cc-pvdz",
        cart=cart,
        symmetry="c2v",
        unit="angstrom",
    )
    mf = scf.RHF(mol)
    mf.conv_tol = 1e-12
    mf.kernel()
    mo = mf.mo_coeff[:, :9]
    fcidump.from_mo(mol, path, mo, orbsym=[MOLPRO_C2V[int(x)] for x in mf.get_orbsym()[:9]], tol=1e-15, float_format=" %.16e")
    print("E_HF", mf.e_tot)
    print("labels", [mol.irrep_name[i] for i in np.searchsorted(mol.irrep_id, mf.get_orbsym()[:9])])
    return mol, mf


def h2(path):
    mol = gto.M(atom=[["H", (0, 0, 0)], ["H", (0, 0, 0.7414)]], basis="sto-3g", unit="angstrom", verbose=0)
    mf = scf.RHF(mol)
    mf.conv_tol = 1e-12
    mf.kernel()
    fcidump.from_scf(mf, path, tol=1e-15, float_format=" %.16e")
    print("E_HF", mf.e_tot)


def small(path, atoms, charge):
    mol = gto.M(atom=atoms, basis="sto-3g", unit="angstrom", charge=charge, verbose=0)
    mf = scf.RHF(mol)
    mf.conv_tol = 1e-12
    mf.kernel()
    fcidump.from_scf(mf, path, tol=1e-15, float_format=" %.16e")
    print(path, "E_HF", mf.e_tot)


if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "data"
    h2o(f"{out}/h2o_ccpvdz_10e9o.fcidump")
    h2o(f"{out}/h2o_ccpvdz_cart_10e9o.fcidump", cart=True)
    h2(f"{out}/h2_sto3g.fcidump")
    a = 0.9
    small(f"{out}/h3plus_sto3g.fcidump",
          [["H", (0, 0, 0)], ["H", (a, 0, 0)], ["H", (a / 2, a * np.sqrt(3) / 2, 0)]], 1)
    small(f"{out}/h4_chain_sto3g.fcidump", [["H", (0, 0, 1.0 * i)] for i in range(4)], 0)
