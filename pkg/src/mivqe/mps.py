"""Matrix-product-state backend: MPO construction, two-site DMRG, local RDMs.

Real Hamiltonians only: every term must have an even Y count, which lets each
Pauli word factor into real per-site matrices (Y pairs become i*Y = XZ with a
sign folded into the coefficient), so MPO, MPS and all contractions stay in
float64.

Site q of the chain is qubit q; a dense basis index puts site q on bit q.
MPS site tensors have shape (left_bond, 2, right_bond); MPO site tensors
(left_bond, right_bond, 2, 2) with (out, in) physical legs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, eigsh

from .pauli import PauliSum, PauliWord

_SITE_REAL = {
    "I": np.eye(2),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]]),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]]),
    # X @ Z; the word convention i^y X^x Z^z makes i*Y = -(XZ) bookkeeping exact
    "Y": np.array([[0.0, -1.0], [1.0, 0.0]]),
}

_DENSE_SOLVE_CUTOFF = 400


class MpsError(RuntimeError):
    pass


@dataclass
class MPO:
    tensors: list[np.ndarray]

    @property
    def n_sites(self) -> int:
        return len(self.tensors)

    def bond_dimensions(self) -> list[int]:
        return [t.shape[1] for t in self.tensors[:-1]]

    def to_dense(self) -> np.ndarray:
        """Dense matrix (for small-n tests); bit q of the index is site q."""
        acc = self.tensors[0][0]  # (Dr, 2, 2)
        for W in self.tensors[1:]:
            # the new site's physical index becomes the high bit
            acc = np.einsum("bkl,bcij->cikjl", acc, W)
            d = acc.shape[1] * acc.shape[2]
            acc = acc.reshape(acc.shape[0], d, d)
        return acc[0]


def _word_mpo_tensors(coeff: float, word: PauliWord) -> list[np.ndarray]:
    y = word.y_count
    if y % 2:
        raise MpsError("MPO construction requires even-Y (real) terms")
    sign = 1.0 if y % 4 == 0 else -1.0  # i^y for even y
    tensors = []
    for q in range(word.n_qubits):
        mat = _SITE_REAL[word.factor(q)]
        W = np.zeros((1, 1, 2, 2))
        W[0, 0] = mat
        tensors.append(W)
    tensors[0] = tensors[0] * (coeff * sign)
    return tensors


def _direct_sum(a: list[np.ndarray], b: list[np.ndarray]) -> list[np.ndarray]:
    n = len(a)
    out = []
    for i in range(n):
        Wa, Wb = a[i], b[i]
        dl = (1 if i == 0 else Wa.shape[0] + Wb.shape[0])
        dr = (1 if i == n - 1 else Wa.shape[1] + Wb.shape[1])
        W = np.zeros((dl, dr, 2, 2))
        if i == 0:
            W[0, : Wa.shape[1]] = Wa[0]
            W[0, Wa.shape[1]:] = Wb[0]
        elif i == n - 1:
            W[: Wa.shape[0], 0] = Wa[:, 0]
            W[Wa.shape[0]:, 0] = Wb[:, 0]
        else:
            W[: Wa.shape[0], : Wa.shape[1]] = Wa
            W[Wa.shape[0]:, Wa.shape[1]:] = Wb
        out.append(W)
    return out


def _compress_tensors(tensors: list[np.ndarray], tol: float) -> list[np.ndarray]:
    """Two-pass SVD compression of an MPO chain.

    First a right-to-left orthogonalization, then a left-to-right sweep
    truncating singular values below tol * s_max (only exact zeros when
    tol == 0, which keeps the action unchanged up to floating point).
    """
    n = len(tensors)
    ts = [t.copy() for t in tensors]
    # right-to-left: LQ-like orthogonalization via SVD without truncation
    for i in range(n - 1, 0, -1):
        dl, dr = ts[i].shape[0], ts[i].shape[1]
        mat = ts[i].transpose(0, 2, 3, 1).reshape(dl, 4 * dr)
        u, s, vt = np.linalg.svd(mat, full_matrices=False)
        keep = s > (s[0] * 1e-15 if len(s) and s[0] > 0 else 0.0)
        u, s, vt = u[:, keep], s[keep], vt[keep]
        ts[i] = vt.reshape(len(s), 2, 2, dr).transpose(0, 3, 1, 2)
        carry = u * s
        ts[i - 1] = np.einsum("abij,bc->acij", ts[i - 1], carry)
    # left-to-right: truncating sweep
    for i in range(n - 1):
        dl, dr = ts[i].shape[0], ts[i].shape[1]
        mat = ts[i].transpose(0, 2, 3, 1).reshape(4 * dl, dr)
        u, s, vt = np.linalg.svd(mat, full_matrices=False)
        if len(s) and s[0] > 0:
            cutoff = tol * s[0]
            keep = s > cutoff if tol > 0 else s > 0
        else:
            keep = s > 0
        if not np.any(keep):
            keep = np.zeros_like(s, dtype=bool)
            keep[0] = True
        u, s, vt = u[:, keep], s[keep], vt[keep]
        ts[i] = u.reshape(dl, 2, 2, len(s)).transpose(0, 3, 1, 2)
        carry = (s[:, None] * vt)
        ts[i + 1] = np.einsum("ab,bcij->acij", carry, ts[i + 1])
    return ts


def build_mpo(H: PauliSum, compression_tol: float = 1e-12, batch: int = 48) -> MPO:
    """Sum of rank-1 term MPOs, compressed batch by batch."""
    if len(H) == 0:
        raise MpsError("cannot build an MPO from an empty sum")
    if H.n_qubits < 2:
        raise MpsError("MPO backend needs at least 2 sites")
    acc: list[np.ndarray] | None = None
    terms = list(H.terms)
    for start in range(0, len(terms), batch):
        chunk: list[np.ndarray] | None = None
        for coeff, word in terms[start : start + batch]:
            t = _word_mpo_tensors(coeff, word)
            chunk = t if chunk is None else _direct_sum(chunk, t)
        acc = chunk if acc is None else _direct_sum(acc, chunk)
        acc = _compress_tensors(acc, compression_tol)
    return MPO(acc)


@dataclass
class MPSState:
    """Bond-limited matrix product state with an orthogonality-center flag."""

    tensors: list[np.ndarray]
    center: int | None = None  # sites < center are left-canonical, > center right

    @property
    def n_qubits(self) -> int:
        return len(self.tensors)

    def bond_dimensions(self) -> list[int]:
        return [t.shape[2] for t in self.tensors[:-1]]

    def max_bond(self) -> int:
        return max(self.bond_dimensions(), default=1)

    def norm(self) -> float:
        env = np.ones((1, 1))
        for A in self.tensors:
            env = np.einsum("ab,asc,bsd->cd", env, A, A)
        return float(np.sqrt(env[0, 0]))

    def to_statevector(self) -> np.ndarray:
        T = np.ones((1, 1))
        dim = 1
        for A in self.tensors:
            T = np.einsum("pb,bsc->spc", T, A).reshape(2 * dim, A.shape[2])
            dim *= 2
        return T[:, 0].astype(complex)

    def left_canonicalize(self) -> "MPSState":
        ts = [t.copy() for t in self.tensors]
        for i in range(len(ts) - 1):
            dl, d, dr = ts[i].shape
            q, r = np.linalg.qr(ts[i].reshape(dl * d, dr))
            ts[i] = q.reshape(dl, d, q.shape[1])
            ts[i + 1] = np.einsum("ab,bsc->asc", r, ts[i + 1])
        last = ts[-1]
        nrm = np.linalg.norm(last)
        ts[-1] = last / nrm
        return MPSState(ts, center=len(ts) - 1)

    def right_canonicalize(self) -> "MPSState":
        ts = [t.copy() for t in self.tensors]
        for i in range(len(ts) - 1, 0, -1):
            dl, d, dr = ts[i].shape
            q, r = np.linalg.qr(ts[i].reshape(dl, d * dr).T)
            k = q.shape[1]
            ts[i] = q.T.reshape(k, d, dr)
            ts[i - 1] = np.einsum("asb,cb->asc", ts[i - 1], r)
        nrm = np.linalg.norm(ts[0])
        ts[0] = ts[0] / nrm
        return MPSState(ts, center=0)

    def _right_environments(self) -> list[np.ndarray]:
        n = len(self.tensors)
        R = [None] * (n + 1)
        R[n] = np.ones((1, 1))
        for k in range(n - 1, -1, -1):
            A = self.tensors[k]
            R[k] = np.einsum("asb,bc,dsc->ad", A, R[k + 1], A)
        return R

    def single_density_matrix(self, q: int) -> np.ndarray:
        mps = self.left_canonicalize()
        R = mps._right_environments()
        A = mps.tensors[q]
        rho = np.einsum("asb,bc,atc->st", A, R[q + 1], A)
        return rho

    def pair_density_matrix(self, i: int, j: int) -> np.ndarray:
        """2-qubit RDM with index s_i + 2*s_j, by transfer contraction only."""
        if i == j:
            raise MpsError("pair needs two distinct sites")
        if i > j:
            i, j = j, i
        mps = self.left_canonicalize()
        R = mps._right_environments()
        A = mps.tensors[i]
        # E[s, s', b, b'] with identity left environment (left-canonical)
        E = np.einsum("asb,atc->stbc", A, A)
        for k in range(i + 1, j):
            Ak = mps.tensors[k]
            E = np.einsum("stbc,bud,cue->stde", E, Ak, Ak)
        Aj = mps.tensors[j]
        rho4 = np.einsum("stbc,bud,de,cve->sutv", E, Aj, R[j + 1], Aj)
        # index order (s_i, s_j): fastest index is the first site
        return rho4.reshape(4, 4, order="F").astype(complex)


def mpo_expectation(mps: MPSState, mpo: MPO) -> float:
    env = np.ones((1, 1, 1))
    for A, W in zip(mps.tensors, mpo.tensors):
        env = np.einsum("amb,asc,mnst,btd->cnd", env, A, W, A)
    return float(env[0, 0, 0])


def _initial_mps(n: int, chi: int, rng: np.random.Generator, bits=None, noise: float = 0.05):
    tensors = []
    for q in range(n):
        dl = min(chi, 2**q, 2 ** (n - q))
        dr = min(chi, 2 ** (q + 1), 2 ** (n - q - 1))
        T = noise * rng.normal(size=(dl, 2, dr))
        if bits is not None:
            T[0, bits[q], 0] += 1.0
        tensors.append(T)
    return MPSState(tensors).right_canonicalize()


def _solve_local(h_eff_matvec, dim: int, v0: np.ndarray | None, dense_builder):
    if dim <= _DENSE_SOLVE_CUTOFF:
        M = dense_builder()
        evals, evecs = np.linalg.eigh(M)
        return float(evals[0]), evecs[:, 0]
    if v0 is None:
        v0 = np.zeros(dim)
        v0[0] = 1.0  # deterministic fallback start
    op = LinearOperator((dim, dim), matvec=h_eff_matvec, dtype=np.float64)
    evals, evecs = eigsh(op, k=1, which="SA", v0=v0, maxiter=6000)
    return float(evals[0]), evecs[:, 0]


def mps_ground_state(
    H: PauliSum,
    chi: int,
    n_sweeps: int,
    seed: int = 7,
    init_bits=None,
    compression_tol: float = 1e-12,
    sweep_tol: float = 1e-12,
) -> tuple[float, MPSState, list[float]]:
    """Two-site DMRG ground-state search over an MPO form of H.

    Returns the final Rayleigh-quotient energy (variational: never below the
    true ground energy), the state, and the per-sweep energy trace. Fewer
    sweeps or a smaller chi give a controlled de-converged state for MI
    robustness experiments.
    """
    if chi < 1:
        raise MpsError("chi must be at least 1")
    if n_sweeps < 1:
        raise MpsError("need at least one sweep")
    n = H.n_qubits
    mpo = build_mpo(H, compression_tol)
    rng = np.random.default_rng(seed)
    # one extra unit of bond freedom during the search helps chi=1 escape
    # the initial product manifold; truncation enforces chi on the result
    mps = _initial_mps(n, max(chi, 2), rng, bits=init_bits)
    tensors = [t.copy() for t in mps.tensors]

    def right_env_from(k, R_next):
        A, W = tensors[k], mpo.tensors[k]
        return np.einsum("asb,mnst,bnd,ctd->amc", A, W, R_next, A, optimize=True)

    def left_env_from(k, L_prev):
        A, W = tensors[k], mpo.tensors[k]
        return np.einsum("amc,asb,mnst,ctd->bnd", L_prev, A, W, A, optimize=True)

    # R[k] contracts sites k..n-1; L[k] contracts sites 0..k-1
    R = [None] * (n + 1)
    R[n] = np.ones((1, 1, 1))
    for k in range(n - 1, 0, -1):
        R[k] = right_env_from(k, R[k + 1])
    L = [None] * (n + 1)
    L[0] = np.ones((1, 1, 1))

    def solve_bond(i: int, move_right: bool):
        Lenv, Renv = L[i], R[i + 2]
        W1, W2 = mpo.tensors[i], mpo.tensors[i + 1]
        dl, dr = Lenv.shape[0], Renv.shape[0]
        dim = dl * 2 * 2 * dr
        theta0 = np.einsum("asb,btc->astc", tensors[i], tensors[i + 1]).reshape(dim)
        nrm = np.linalg.norm(theta0)
        theta0 = theta0 / nrm if nrm > 0 else None

        # W[m, n, out, in]; environments are indexed (bra bond, mpo bond,
        # ket bond) and are NOT bra/ket symmetric once an antisymmetric
        # site matrix (the real i*Y) sits inside them, so the legs matter
        def matvec(v):
            th = v.reshape(dl, 2, 2, dr)
            out = np.einsum("cma,astb->cmstb", Lenv, th, optimize=True)
            out = np.einsum("cmstb,mnus->cnutb", out, W1, optimize=True)
            out = np.einsum("cnutb,npvt,dpb->cuvd", out, W2, Renv, optimize=True)
            return out.reshape(dim)

        def dense_builder():
            M = np.einsum(
                "cma,mnus,npvt,dpb->cuvdastb", Lenv, W1, W2, Renv, optimize=True
            ).reshape(dim, dim)
            return 0.5 * (M + M.T)

        _, theta = _solve_local(matvec, dim, theta0, dense_builder)
        th = theta.reshape(dl * 2, 2 * dr)
        u, s, vt = np.linalg.svd(th, full_matrices=False)
        rank = int((s > s[0] * 1e-14).sum()) if s[0] > 0 else 1
        keep = max(1, min(chi, rank))
        u, s, vt = u[:, :keep], s[:keep], vt[:keep]
        s = s / np.linalg.norm(s)
        if move_right:
            tensors[i] = u.reshape(dl, 2, keep)
            tensors[i + 1] = (s[:, None] * vt).reshape(keep, 2, dr)
            L[i + 1] = left_env_from(i, L[i])
        else:
            tensors[i] = (u * s).reshape(dl, 2, keep)
            tensors[i + 1] = vt.reshape(keep, 2, dr)
            R[i + 1] = right_env_from(i + 1, R[i + 2])

    energies: list[float] = []
    for _sweep in range(n_sweeps):
        for i in range(n - 1):
            solve_bond(i, move_right=True)
        for i in range(n - 2, -1, -1):
            solve_bond(i, move_right=False)
        state = MPSState([t.copy() for t in tensors], center=0)
        nrm2 = state.norm() ** 2
        energies.append(mpo_expectation(state, mpo) / nrm2)
        if len(energies) > 1 and abs(energies[-2] - energies[-1]) < sweep_tol:
            break

    final = MPSState([t.copy() for t in tensors], center=0)
    return energies[-1], final, energies
