#!/usr/bin/env python3
"""One-shot generator for the bundled FCIDUMP fixtures.

Minimal closed-shell RHF + CASCI integral exporter over s/p Gaussian shells
(McMurchie-Davidson integrals, DIIS SCF, symmetry-classified active spaces).
Run from the repository root:

    python3 tools/make_fixtures.py

It overwrites fixtures/*.fcidump and fixtures/SHA256SUMS. The tool itself
never generates integrals; these files are inputs, produced once here and
checksummed.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import gammainc, gammaln

ANGSTROM_TO_BOHR = 1.8897259886

# published exponents/contractions; coefficients refer to normalized primitives
BASIS = {
    ("H", "sto-3g"): [
        ("s", [3.425250914, 0.6239137298, 0.1688554040],
              [0.1543289673, 0.5353281423, 0.4446345422]),
    ],
    ("H", "6-31g"): [
        ("s", [18.73113696, 2.825394365, 0.6401216923],
              [0.03349460434, 0.2347269535, 0.8137573261]),
        ("s", [0.1612777588], [1.0]),
    ],
    ("Li", "sto-3g"): [
        ("s", [16.11957475, 2.936200663, 0.7946504870],
              [0.1543289673, 0.5353281423, 0.4446345422]),
        ("s", [0.6362897469, 0.1478600533, 0.0480886784],
              [-0.09996722919, 0.3995128261, 0.7001154689]),
        ("p", [0.6362897469, 0.1478600533, 0.0480886784],
              [0.1559162750, 0.6076837186, 0.3919573931]),
    ],
    ("O", "6-31g"): [
        ("s", [5484.671660, 825.2349460, 188.0469580, 52.96450000, 16.89757040, 5.799635340],
              [0.001831074430, 0.01395017220, 0.06844507810, 0.2327143360, 0.4701928980, 0.3585208530]),
        ("s", [15.53961625, 3.599933586, 1.013761750],
              [-0.1107775495, -0.1480262627, 1.130767015]),
        ("p", [15.53961625, 3.599933586, 1.013761750],
              [0.07087426823, 0.3397528391, 0.7271585773]),
        ("s", [0.2700058226], [1.0]),
        ("p", [0.2700058226], [1.0]),
    ],
}

Z_VALUES = {"H": 1, "Li": 3, "O": 8}


@dataclass
class BasisFunction:
    center: np.ndarray
    angular: tuple[int, int, int]
    exponents: np.ndarray
    coefficients: np.ndarray  # includes primitive norms; contraction normalized


def primitive_norm(a: float, lmn) -> float:
    l, m, n = lmn
    num = (2 * a / math.pi) ** 0.75 * (4 * a) ** ((l + m + n) / 2.0)
    double_fact = 1.0
    for v in lmn:
        for k in range(2 * v - 1, 0, -2):
            double_fact *= k
    return num / math.sqrt(double_fact)


def build_basis(atoms, basis_name) -> list[BasisFunction]:
    funcs = []
    for symbol, coord in atoms:
        for shell, exps, coefs in BASIS[(symbol, basis_name)]:
            exps = np.asarray(exps, dtype=float)
            coefs = np.asarray(coefs, dtype=float)
            angulars = [(0, 0, 0)] if shell == "s" else [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
            for lmn in angulars:
                norms = np.array([primitive_norm(a, lmn) for a in exps])
                bf = BasisFunction(np.asarray(coord, float), lmn, exps, coefs * norms)
                # normalize the contracted function
                self_overlap = 0.0
                for ai, ci in zip(bf.exponents, bf.coefficients):
                    for aj, cj in zip(bf.exponents, bf.coefficients):
                        self_overlap += ci * cj * _prim_overlap(ai, bf.center, lmn, aj, bf.center, lmn)
                bf.coefficients = bf.coefficients / math.sqrt(self_overlap)
                funcs.append(bf)
    return funcs


def hermite_coefs(i: int, j: int, t: int, Qx: float, a: float, b: float) -> float:
    """McMurchie-Davidson E_t^{ij} for one Cartesian direction."""
    p = a + b
    q = a * b / p
    if t < 0 or t > i + j:
        return 0.0
    if i == j == t == 0:
        return math.exp(-q * Qx * Qx)
    if j == 0:
        return (
            (1.0 / (2.0 * p)) * hermite_coefs(i - 1, j, t - 1, Qx, a, b)
            - (q * Qx / a) * hermite_coefs(i - 1, j, t, Qx, a, b)
            + (t + 1) * hermite_coefs(i - 1, j, t + 1, Qx, a, b)
        )
    return (
        (1.0 / (2.0 * p)) * hermite_coefs(i, j - 1, t - 1, Qx, a, b)
        + (q * Qx / b) * hermite_coefs(i, j - 1, t, Qx, a, b)
        + (t + 1) * hermite_coefs(i, j - 1, t + 1, Qx, a, b)
    )


def _prim_overlap(a, A, lmn1, b, B, lmn2) -> float:
    p = a + b
    out = (math.pi / p) ** 1.5
    for d in range(3):
        out *= hermite_coefs(lmn1[d], lmn2[d], 0, A[d] - B[d], a, b)
    return out


def _prim_kinetic(a, A, lmn1, b, B, lmn2) -> float:
    l2, m2, n2 = lmn2

    def s_shift(d, shift):
        lmn = list(lmn2)
        lmn[d] += shift
        if lmn[d] < 0:
            return 0.0
        return _prim_overlap(a, A, lmn1, b, B, tuple(lmn))

    term = 0.0
    for d, ang in enumerate(lmn2):
        term += b * (2 * ang + 1) * s_shift(d, 0)
        term += -2.0 * b * b * s_shift(d, 2)
        term += -0.5 * ang * (ang - 1) * s_shift(d, -2)
    return term


def boys(m: int, T: float) -> float:
    if T < 1e-12:
        return 1.0 / (2 * m + 1) - T / (2 * m + 3)
    a = m + 0.5
    return math.exp(gammaln(a)) * gammainc(a, T) / (2.0 * T**a)


def hermite_coulomb(t, u, v, n, p, PC):
    """R^n_{tuv} recursion on Boys functions."""
    if t == u == v == 0:
        return (-2.0 * p) ** n * boys(n, p * float(PC @ PC))
    if t > 0:
        val = 0.0
        if t > 1:
            val += (t - 1) * hermite_coulomb(t - 2, u, v, n + 1, p, PC)
        val += PC[0] * hermite_coulomb(t - 1, u, v, n + 1, p, PC)
        return val
    if u > 0:
        val = 0.0
        if u > 1:
            val += (u - 1) * hermite_coulomb(t, u - 2, v, n + 1, p, PC)
        val += PC[1] * hermite_coulomb(t, u - 1, v, n + 1, p, PC)
        return val
    val = 0.0
    if v > 1:
        val += (v - 1) * hermite_coulomb(t, u, v - 2, n + 1, p, PC)
    val += PC[2] * hermite_coulomb(t, u, v - 1, n + 1, p, PC)
    return val


def _prim_nuclear(a, A, lmn1, b, B, lmn2, C) -> float:
    p = a + b
    P = (a * A + b * B) / p
    E = [
        [hermite_coefs(lmn1[d], lmn2[d], t, A[d] - B[d], a, b) for t in range(lmn1[d] + lmn2[d] + 1)]
        for d in range(3)
    ]
    total = 0.0
    for t in range(len(E[0])):
        for u in range(len(E[1])):
            for v in range(len(E[2])):
                total += (
                    E[0][t] * E[1][u] * E[2][v]
                    * hermite_coulomb(t, u, v, 0, p, P - C)
                )
    return 2.0 * math.pi / p * total


def _prim_eri(a, A, la, b, B, lb, c, C, lc, d, D, ld) -> float:
    p = a + b
    q = c + d
    alpha = p * q / (p + q)
    P = (a * A + b * B) / p
    Q = (c * C + d * D) / q
    E1 = [
        [hermite_coefs(la[dd], lb[dd], t, A[dd] - B[dd], a, b) for t in range(la[dd] + lb[dd] + 1)]
        for dd in range(3)
    ]
    E2 = [
        [hermite_coefs(lc[dd], ld[dd], t, C[dd] - D[dd], c, d) for t in range(lc[dd] + ld[dd] + 1)]
        for dd in range(3)
    ]
    total = 0.0
    for t in range(len(E1[0])):
        for u in range(len(E1[1])):
            for v in range(len(E1[2])):
                e1 = E1[0][t] * E1[1][u] * E1[2][v]
                if e1 == 0.0:
                    continue
                for tt in range(len(E2[0])):
                    for uu in range(len(E2[1])):
                        for vv in range(len(E2[2])):
                            e2 = E2[0][tt] * E2[1][uu] * E2[2][vv]
                            if e2 == 0.0:
                                continue
                            total += (
                                e1 * e2 * (-1.0) ** (tt + uu + vv)
                                * hermite_coulomb(t + tt, u + uu, v + vv, 0, alpha, P - Q)
                            )
    return total * 2.0 * math.pi**2.5 / (p * q * math.sqrt(p + q))


def contracted(op, bfs, *idx):
    funcs = [bfs[i] for i in idx]
    total = 0.0
    import itertools

    prim_lists = [list(zip(f.exponents, f.coefficients)) for f in funcs]
    for prims in itertools.product(*prim_lists):
        coeff = 1.0
        for (_, cc) in prims:
            coeff *= cc
        args = []
        for (aa, _), f in zip(prims, funcs):
            args += [aa, f.center, f.angular]
        total += coeff * op(*args)
    return total


def integrals(bfs, atoms):
    n = len(bfs)
    S = np.zeros((n, n))
    T = np.zeros((n, n))
    V = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            S[i, j] = S[j, i] = contracted(_prim_overlap, bfs, i, j)
            T[i, j] = T[j, i] = contracted(_prim_kinetic, bfs, i, j)
            vij = 0.0
            for symbol, coord in atoms:
                Zc = Z_VALUES[symbol]
                vij -= Zc * contracted(
                    lambda a, A, l1, b, B, l2: _prim_nuclear(a, A, l1, b, B, l2, np.asarray(coord)),
                    bfs, i, j,
                )
            V[i, j] = V[j, i] = vij

    eri = np.zeros((n, n, n, n))
    done = np.zeros((n, n, n, n), dtype=bool)
    for i in range(n):
        for j in range(i + 1):
            for k in range(i + 1):
                lmax = j + 1 if k == i else k + 1
                for l in range(lmax):
                    val = contracted(_prim_eri, bfs, i, j, k, l)
                    for (p, q, r, s) in {
                        (i, j, k, l), (j, i, k, l), (i, j, l, k), (j, i, l, k),
                        (k, l, i, j), (l, k, i, j), (k, l, j, i), (l, k, j, i),
                    }:
                        eri[p, q, r, s] = val
                        done[p, q, r, s] = True
    assert done.all()
    return S, T, V, eri


def nuclear_repulsion(atoms) -> float:
    e = 0.0
    for i in range(len(atoms)):
        for j in range(i):
            Zi, Zj = Z_VALUES[atoms[i][0]], Z_VALUES[atoms[j][0]]
            r = np.linalg.norm(np.asarray(atoms[i][1]) - np.asarray(atoms[j][1]))
            e += Zi * Zj / r
    return e


def rhf(S, Hcore, eri, n_electrons, e_nuc, max_cycles=200, tol=1e-11):
    n = S.shape[0]
    n_occ = n_electrons // 2
    evals, evecs = np.linalg.eigh(S)
    X = evecs @ np.diag(evals**-0.5) @ evecs.T

    def fock(D):
        J = np.einsum("pqrs,rs->pq", eri, D)
        K = np.einsum("prqs,rs->pq", eri, D)
        return Hcore + 2.0 * J - K

    # core guess
    Fp = X.T @ Hcore @ X
    _, Cp = np.linalg.eigh(Fp)
    C = X @ Cp
    D = C[:, :n_occ] @ C[:, :n_occ].T

    energy = 0.0
    diis_f, diis_e = [], []
    for cycle in range(max_cycles):
        F = fock(D)
        err = X.T @ (F @ D @ S - S @ D @ F) @ X
        diis_f.append(F.copy())
        diis_e.append(err.copy())
        if len(diis_f) > 8:
            diis_f.pop(0)
            diis_e.pop(0)
        if len(diis_f) > 1:
            m = len(diis_f)
            B = -np.ones((m + 1, m + 1))
            B[m, m] = 0.0
            for i in range(m):
                for j in range(m):
                    B[i, j] = np.sum(diis_e[i] * diis_e[j])
            rhs = np.zeros(m + 1)
            rhs[m] = -1.0
            try:
                w = np.linalg.solve(B, rhs)[:m]
                F = sum(wi * fi for wi, fi in zip(w, diis_f))
            except np.linalg.LinAlgError:
                pass
        Fp = X.T @ F @ X
        eps, Cp = np.linalg.eigh(Fp)
        C = X @ Cp
        D_new = C[:, :n_occ] @ C[:, :n_occ].T
        e_new = float(np.sum(D_new * (Hcore + fock(D_new))) + e_nuc)
        if abs(e_new - energy) < tol and np.abs(D_new - D).max() < 1e-9:
            return e_new, eps, C
        energy, D = e_new, D_new
    raise RuntimeError(f"SCF did not converge (last E = {energy})")


def mo_transform(Hcore, eri, C):
    h = C.T @ Hcore @ C
    g = np.einsum("pqrs,pi->iqrs", eri, C, optimize=True)
    g = np.einsum("iqrs,qj->ijrs", g, C, optimize=True)
    g = np.einsum("ijrs,rk->ijks", g, C, optimize=True)
    g = np.einsum("ijks,sl->ijkl", g, C, optimize=True)
    return h, g


def cas_integrals(h, g, core, active, e_nuc):
    e_core = e_nuc
    for c in core:
        e_core += 2.0 * h[c, c]
        for c2 in core:
            e_core += 2.0 * g[c, c, c2, c2] - g[c, c2, c2, c]
    n_act = len(active)
    h_eff = np.zeros((n_act, n_act))
    for pi, p in enumerate(active):
        for qi, q in enumerate(active):
            val = h[p, q]
            for c in core:
                val += 2.0 * g[p, q, c, c] - g[p, c, c, q]
            h_eff[pi, qi] = val
    g_act = g[np.ix_(active, active, active, active)]
    return e_core, h_eff, g_act


def mo_symmetry_character(C, S, ao_map, mo):
    """<phi|R|phi> for a reflection R given as a signed AO permutation."""
    c = C[:, mo]
    rc = np.zeros_like(c)
    for i, (j, sign) in enumerate(ao_map):
        rc[j] += sign * c[i]
    return float(c @ S @ rc)


def write_fcidump(path, e_core, h, g, n_elec, threshold=1e-12):
    n = h.shape[0]
    lines = [f"&FCI NORB={n},NELEC={n_elec},MS2=0,"]
    lines.append(" ORBSYM=" + "1," * n)
    lines.append(" ISYM=1,")
    lines.append(" /")
    for i in range(n):
        for j in range(i + 1):
            for k in range(i + 1):
                lmax = j + 1 if k == i else k + 1
                for l in range(lmax):
                    v = g[i, j, k, l]
                    if abs(v) > threshold:
                        lines.append(f"{v: .16e} {i+1} {j+1} {k+1} {l+1}")
    for i in range(n):
        for j in range(i + 1):
            if abs(h[i, j]) > threshold:
                lines.append(f"{h[i, j]: .16e} {i+1} {j+1} 0 0")
    lines.append(f"{e_core: .16e} 0 0 0 0")
    Path(path).write_text("\n".join(lines) + "\n")


def make_h2(d_angstrom, out_dir):
    d = d_angstrom * ANGSTROM_TO_BOHR
    atoms = [("H", (0.0, 0.0, -d / 2)), ("H", (0.0, 0.0, d / 2))]
    bfs = build_basis(atoms, "6-31g")
    S, T, V, eri = integrals(bfs, atoms)
    e_nuc = nuclear_repulsion(atoms)
    e_scf, eps, C = rhf(S, T + V, eri, 2, e_nuc)
    h, g = mo_transform(T + V, eri, C)
    e_core, h_eff, g_act = cas_integrals(h, g, core=[], active=[0, 1, 2, 3], e_nuc=e_nuc)
    path = out_dir / f"h2_{d_angstrom:.2f}.fcidump"
    write_fcidump(path, e_core, h_eff, g_act, 2)
    print(f"H2  d={d_angstrom:4.2f}  E_RHF={e_scf: .8f}  wrote {path.name}")
    return path


def make_lih(d_angstrom, out_dir):
    d = d_angstrom * ANGSTROM_TO_BOHR
    atoms = [("Li", (0.0, 0.0, 0.0)), ("H", (0.0, 0.0, d))]
    bfs = build_basis(atoms, "sto-3g")
    S, T, V, eri = integrals(bfs, atoms)
    e_nuc = nuclear_repulsion(atoms)
    e_scf, eps, C = rhf(S, T + V, eri, 4, e_nuc)
    # sigma orbitals have no px/py weight; AO order: Li 1s,2s,2px,2py,2pz,H 1s
    sigma = [
        mo for mo in range(C.shape[1])
        if abs(C[2, mo]) < 1e-6 and abs(C[3, mo]) < 1e-6
    ]
    core = [sigma[0]]
    active = sigma[1:4]
    assert len(active) == 3, f"expected 3 active sigma MOs, got {sigma}"
    h, g = mo_transform(T + V, eri, C)
    e_core, h_eff, g_act = cas_integrals(h, g, core=core, active=active, e_nuc=e_nuc)
    path = out_dir / f"lih_{d_angstrom:.2f}.fcidump"
    write_fcidump(path, e_core, h_eff, g_act, 2)
    print(f"LiH d={d_angstrom:4.2f}  E_RHF={e_scf: .8f}  active={active}  wrote {path.name}")
    return path


def make_h2o(d_angstrom, out_dir, angle_deg=107.6):
    d = d_angstrom * ANGSTROM_TO_BOHR
    half = math.radians(angle_deg) / 2.0
    atoms = [
        ("O", (0.0, 0.0, 0.0)),
        ("H", (0.0, d * math.sin(half), d * math.cos(half))),
        ("H", (0.0, -d * math.sin(half), d * math.cos(half))),
    ]
    bfs = build_basis(atoms, "6-31g")
    S, T, V, eri = integrals(bfs, atoms)
    e_nuc = nuclear_repulsion(atoms)
    e_scf, eps, C = rhf(S, T + V, eri, 10, e_nuc)

    # sigma_xz (y -> -y): py flips sign, H1 <-> H2; sigma_yz (x -> -x): px flips
    def reflect_map(flip_y):
        amap = []
        for i, bf in enumerate(bfs):
            sign = -1.0 if bf.angular == ((0, 1, 0) if flip_y else (1, 0, 0)) else 1.0
            mirror = bf.center * (np.array([1.0, -1.0, 1.0]) if flip_y else np.array([-1.0, 1.0, 1.0]))
            target = None
            for j, other in enumerate(bfs):
                if (
                    other.angular == bf.angular
                    and np.allclose(other.center, mirror, atol=1e-10)
                    and np.array_equal(other.exponents, bf.exponents)
                    and np.array_equal(other.coefficients, bf.coefficients)
                ):
                    target = j
                    break
            assert target is not None, f"no mirror partner for AO {i}"
            amap.append((target, sign))
        return amap

    map_xz = reflect_map(flip_y=True)
    map_yz = reflect_map(flip_y=False)
    irreps = []
    for mo in range(C.shape[1]):
        cx = mo_symmetry_character(C, S, map_xz, mo)
        cy = mo_symmetry_character(C, S, map_yz, mo)
        if cx > 0.9 and cy > 0.9:
            irreps.append("a1")
        elif cx < -0.9 and cy > 0.9:
            irreps.append("b2")  # odd in y: in-plane antisymmetric
        elif cx > 0.9 and cy < -0.9:
            irreps.append("b1")  # odd in x: out-of-plane
        else:
            irreps.append("a2" if cx < -0.9 and cy < -0.9 else "??")
    assert "??" not in irreps, f"symmetry classification failed: {irreps}"

    a1 = [mo for mo, ir in enumerate(irreps) if ir == "a1"]
    b2 = [mo for mo, ir in enumerate(irreps) if ir == "b2"]
    # active space: 3 A1 + 2 B2 around the O-H bonds; cores are
    # 1a1 (O 1s), 2a1 (O 2s) and 1b1 (out-of-plane lone pair)
    active = sorted(a1[2:5] + b2[:2])
    core = [mo for mo in range(5) if mo not in active]
    assert len(active) == 5 and len(core) == 3, (irreps, active, core)
    h, g = mo_transform(T + V, eri, C)
    e_core, h_eff, g_act = cas_integrals(h, g, core=core, active=active, e_nuc=e_nuc)
    path = out_dir / f"h2o_{d_angstrom:.2f}.fcidump"
    write_fcidump(path, e_core, h_eff, g_act, 4)
    print(
        f"H2O d={d_angstrom:4.2f}  E_RHF={e_scf: .8f}  irreps(occ)={irreps[:7]}  "
        f"core={core} active={active}  wrote {path.name}"
    )
    return path


def main():
    out_dir = Path(__file__).resolve().parent.parent / "fixtures"
    out_dir.mkdir(exist_ok=True)
    paths = []
    for d in (0.60, 0.75, 0.90, 1.10, 1.30, 1.50, 1.80):
        paths.append(make_h2(d, out_dir))
    for d in (1.20, 1.60, 2.00, 2.40):
        paths.append(make_lih(d, out_dir))
    for d in (1.20, 1.80):
        paths.append(make_h2o(d, out_dir))
    sums = []
    for p in sorted(paths):
        digest = hashlib.sha256(p.read_bytes()).hexdigest()
        sums.append(f"{digest}  {p.name}")
    (out_dir / "SHA256SUMS").write_text("\n".join(sums) + "\n")
    print(f"wrote {out_dir / 'SHA256SUMS'}")


if __name__ == "__main__":
    main()
