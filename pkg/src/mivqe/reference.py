"""Classically approximated ground states and qubit-pair mutual information.

The exact backend is a Lanczos eigensolver with full reorthogonalization whose
matrix-vector product is the PauliSum action (no dense matrix). Mutual
information is I_ij = (S_i + S_j - S_ij) / 2 in bits, so a maximally
entangled pair scores exactly 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pauli import PauliSum
from .simulator import compile_sum_action, rdm

ENTROPY_EIGENVALUE_FLOOR = 1e-12


class ReferenceError(RuntimeError):
    pass


class LanczosConvergenceError(ReferenceError):
    def __init__(self, residual: float, iterations: int):
        super().__init__(
            f"Lanczos did not converge after {iterations} iterations "
            f"(residual {residual:.3e})"
        )
        self.residual = residual
        self.iterations = iterations


def exact_ground_state(
    H: PauliSum,
    tol: float = 1e-9,
    max_iterations: int = 2000,
    seed: int = 7,
) -> tuple[float, np.ndarray]:
    """Lowest eigenpair of H by Lanczos with full reorthogonalization.

    The matvec is the PauliSum action; the returned state satisfies
    ||H v - E v|| < tol. Raises LanczosConvergenceError otherwise.
    """
    n = H.n_qubits
    if n > 16:
        raise ReferenceError("exact backend limited to 16 qubits")
    dim = 2**n
    action, real_valued = compile_sum_action(H)
    dtype = np.float64 if real_valued else np.complex128

    rng = np.random.default_rng(seed)
    v = rng.normal(size=dim).astype(dtype)
    if not real_valued:
        v = v + 1j * rng.normal(size=dim)
    v /= np.linalg.norm(v)

    max_krylov = min(dim, 120)
    iterations = 0
    residual = np.inf
    for _restart in range(max_iterations // max_krylov + 1):
        basis = [v]
        alphas: list[float] = []
        betas: list[float] = []
        w = action(v)
        while True:
            iterations += 1
            alpha = float(np.real(np.vdot(basis[-1], w)))
            alphas.append(alpha)
            if len(basis) == max_krylov:
                break
            w = w - alpha * basis[-1]
            if len(basis) > 1:
                w = w - betas[-1] * basis[-2]
            # full reorthogonalization, two passes
            for _pass in range(2):
                for b in basis:
                    w = w - np.vdot(b, w) * b
            beta = float(np.linalg.norm(w))
            if beta < 1e-13:
                break
            betas.append(beta)
            basis.append(w / beta)
            w = action(basis[-1])

        tri = np.diag(alphas)
        for i, b in enumerate(betas[: len(alphas) - 1]):
            tri[i, i + 1] = tri[i + 1, i] = b
        evals, evecs = np.linalg.eigh(tri)
        ground = evecs[:, 0]
        v_new = np.zeros(dim, dtype=dtype)
        for c, b in zip(ground, basis[: len(alphas)]):
            v_new += c * b
        v_new /= np.linalg.norm(v_new)
        energy = float(evals[0])
        residual = float(np.linalg.norm(action(v_new) - energy * v_new))
        v = v_new
        if residual < tol:
            state = v.astype(np.complex128)
            # deterministic global phase: largest amplitude real positive
            pivot = int(np.argmax(np.abs(state)))
            phase = state[pivot] / abs(state[pivot])
            state = state / phase
            return energy, state
        if iterations >= max_iterations:
            break
    raise LanczosConvergenceError(residual, iterations)


def entropy(rho: np.ndarray, trace_tol: float = 1e-8) -> float:
    """Von Neumann entropy in bits; eigenvalues at or below 1e-12 contribute 0."""
    if not np.allclose(rho, rho.conj().T, atol=1e-8):
        raise ReferenceError("density matrix is not Hermitian")
    tr = float(np.trace(rho).real)
    if abs(tr - 1.0) > trace_tol:
        raise ReferenceError(f"density matrix trace {tr} deviates from 1")
    eigs = np.linalg.eigvalsh(rho)
    if eigs.min() < -1e-8:
        raise ReferenceError(f"density matrix has negative eigenvalue {eigs.min()}")
    eigs = np.clip(eigs, 0.0, 1.0)
    keep = eigs > ENTROPY_EIGENVALUE_FLOOR
    p = eigs[keep]
    return float(-(p * np.log2(p)).sum())


@dataclass
class MIMatrix:
    """Pairwise qubit mutual information in bits: symmetric, zero diagonal."""

    entries: np.ndarray

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=float)
        n = self.entries.shape[0]
        if self.entries.shape != (n, n):
            raise ReferenceError("MI matrix must be square")
        if not np.allclose(self.entries, self.entries.T, atol=1e-9):
            raise ReferenceError("MI matrix must be symmetric")
        if np.abs(np.diag(self.entries)).max(initial=0.0) > 1e-12:
            raise ReferenceError("MI matrix diagonal must be zero")
        if self.entries.min(initial=0.0) < -1e-9 or self.entries.max(initial=0.0) > 1.0 + 1e-9:
            raise ReferenceError("MI entries must lie in [0, 1] bits")
        self.entries = np.clip(0.5 * (self.entries + self.entries.T), 0.0, 1.0)
        np.fill_diagonal(self.entries, 0.0)

    @property
    def n_qubits(self) -> int:
        return self.entries.shape[0]

    def __getitem__(self, key):
        return self.entries[key]

    def embedded(self, index_map: dict[int, int], n_total: int) -> "MIMatrix":
        """Lift into a larger register; absent qubits get zero MI everywhere."""
        big = np.zeros((n_total, n_total))
        for old_i, new_i in index_map.items():
            for old_j, new_j in index_map.items():
                big[old_i, old_j] = self.entries[new_i, new_j]
        return MIMatrix(big)

    def to_csv(self) -> str:
        n = self.n_qubits
        lines = ["qubit," + ",".join(str(q) for q in range(n))]
        for i in range(n):
            lines.append(
                f"{i}," + ",".join(f"{self.entries[i, j]:.12g}" for j in range(n))
            )
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "MIMatrix":
        rows = [r.strip() for r in text.strip().splitlines() if r.strip()]
        header = rows[0].split(",")
        if header[0] != "qubit":
            raise ReferenceError("MI CSV must start with a 'qubit' header row")
        n = len(header) - 1
        entries = np.zeros((n, n))
        if len(rows) != n + 1:
            raise ReferenceError("MI CSV row count does not match header")
        for row in rows[1:]:
            parts = row.split(",")
            i = int(parts[0])
            entries[i] = [float(x) for x in parts[1:]]
        return cls(entries)


def mutual_information(state) -> MIMatrix:
    """MI matrix of a StateVector (numpy array) or MPSState."""
    if hasattr(state, "pair_density_matrix"):
        return _mutual_information_mps(state)
    return _mutual_information_dense(np.asarray(state))


def _mutual_information_dense(state: np.ndarray) -> MIMatrix:
    n = int(np.log2(len(state)))
    singles = [entropy(rdm(state, [q])) for q in range(n)]
    entries = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            s_ij = entropy(rdm(state, [i, j]))
            mi = 0.5 * (singles[i] + singles[j] - s_ij)
            entries[i, j] = entries[j, i] = max(mi, 0.0)
    return MIMatrix(entries)


def _mutual_information_mps(state) -> MIMatrix:
    n = state.n_qubits
    singles = [entropy(state.single_density_matrix(q)) for q in range(n)]
    entries = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            s_ij = entropy(state.pair_density_matrix(i, j))
            mi = 0.5 * (singles[i] + singles[j] - s_ij)
            entries[i, j] = entries[j, i] = max(mi, 0.0)
    return MIMatrix(entries)
