"""Adaptive ansatz construction: per-step entangler trials, the 30%-descent
acceptance rule, joint basin-hopping reoptimization, and screening-rate stats.

Because every entangler generator P satisfies P^2 = I, the single-layer
energy is an exact sinusoid E(tau) = A + B cos 2tau + C sin 2tau, so a trial
costs three energy evaluations and no 1-D optimizer. The pool scorer below
goes one step further: it tabulates <s|W|s> for every Pauli word W at once
via a Walsh-Hadamard transform, after which each of the 32k pool words costs
a handful of table gathers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import basinhopping

from .pauli import PauliSum, PauliWord, format_pauli_factors
from .screening import EntanglerPool
from .simulator import (
    Ansatz,
    apply_pauli_exponential,
    apply_pauli_word,
    compile_sum_action,
    expectation,
)

_SCORER_TABLE_LIMIT = 10  # qubits; above this the table would not fit


class AdaptiveError(RuntimeError):
    pass


class NoImprovingEntangler(AdaptiveError):
    """Every pool word has non-positive descent at the current state."""


@dataclass(frozen=True)
class OptimizerConfig:
    """Basin-hopping knobs: hop count, Metropolis temperature, step size."""

    hops: int = 10
    temperature: float = 0.5
    step_size: float = 1e-6
    local_tolerance: float = 1e-8

    def __post_init__(self):
        if self.hops < 0:
            raise AdaptiveError("hops must be non-negative")
        if self.temperature <= 0:
            raise AdaptiveError("temperature must be positive")


@dataclass
class StepRecord:
    step: int
    word: PauliWord
    tau: float
    energy: float
    descent: float
    percentile: float
    acceptable_count: int

    def as_dict(self) -> dict:
        return {
            "step": self.step,
            "word": format_pauli_factors(self.word),
            "tau": self.tau,
            "energy": self.energy,
            "descent": self.descent,
            "percentile": self.percentile,
            "acceptable_count": self.acceptable_count,
        }


@dataclass
class RunReport:
    steps: list[StepRecord]
    converged: bool
    stop_reason: str
    reference_energy: float | None
    hf_energy: float
    final_energy: float
    pool_provenance: str
    baseline_pool_size: int

    @property
    def n_ent(self) -> int:
        return len(self.steps)

    @property
    def p_max(self) -> float | None:
        return max((s.percentile for s in self.steps), default=None)

    @property
    def p_avg(self) -> float | None:
        if not self.steps:
            return None
        return sum(s.percentile for s in self.steps) / len(self.steps)

    @property
    def energies(self) -> list[float]:
        return [s.energy for s in self.steps]


@dataclass
class AdaptiveConfig:
    descent_fraction: float = 0.3
    max_steps: int = 30
    convergence_tol: float = 1e-3  # hartree against the reference energy
    descent_floor: float = 1e-6  # stall threshold when no reference exists
    descent_floor_window: int = 3
    seed: int = 7
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)


def score_entangler(state: np.ndarray, H: PauliSum, word: PauliWord) -> tuple[float, float]:
    """(descent, tau*) of one entangler trial via the exact sinusoid fit.

    Three evaluations pin E(tau) = A + B cos 2tau + C sin 2tau:
    A = (E(pi/4) + E(-pi/4)) / 2, C = (E(pi/4) - E(-pi/4)) / 2, B = E(0) - A.
    """
    e0 = expectation(state, H)
    e_plus = expectation(apply_pauli_exponential(state, word, np.pi / 4), H)
    e_minus = expectation(apply_pauli_exponential(state, word, -np.pi / 4), H)
    a = 0.5 * (e_plus + e_minus)
    c = 0.5 * (e_plus - e_minus)
    b = e0 - a
    minimum = a - np.hypot(b, c)
    return e0 - minimum, _tau_minimum(b, c)


def _tau_minimum(b, c):
    """Minimizing angle in (-pi/2, pi/2]: 2 tau = atan2(C, B) + pi.

    Written so the degenerate C = 0 case lands on +pi/2, independent of the
    sign of a floating-point zero.
    """
    tau = 0.5 * np.arctan2(c, b) + np.pi / 2
    return np.where(tau > np.pi / 2, tau - np.pi, tau)[()]


class PoolScorer:
    """Vectorized sinusoid fits for every pool word against a frozen state.

    For the frozen state s, T[x, z] = sum_k (-1)^{|k & z|} conj(s[k^x]) s[k]
    holds every <s|W|s> up to the i^y phase; one 2^n x 2^n Walsh-Hadamard
    product per step replaces per-word state preparation entirely. The
    anticommuting split of H against each word then gives B and C exactly.
    """

    def __init__(self, H: PauliSum, pool: EntanglerPool, chunk: int = 4096):
        if H.n_qubits != pool.n_qubits:
            raise AdaptiveError("Hamiltonian and pool qubit counts differ")
        if H.n_qubits > _SCORER_TABLE_LIMIT:
            raise AdaptiveError("pool scorer limited to 10 qubits")
        self.n = H.n_qubits
        self.chunk = chunk
        self.coeffs = np.array([c for c, _ in H.terms])
        self.tx = np.array([w.x_mask for _, w in H.terms], dtype=np.uint64)
        self.tz = np.array([w.z_mask for _, w in H.terms], dtype=np.uint64)
        self.ty = np.array([w.y_count for _, w in H.terms])
        if np.any(self.ty % 2):
            raise AdaptiveError("pool scorer requires an even-Y (real) Hamiltonian")
        self.px = np.array([w.x_mask for w in pool.words], dtype=np.uint64)
        self.pz = np.array([w.z_mask for w in pool.words], dtype=np.uint64)
        self.py = np.array([w.y_count for w in pool.words])
        if np.any(self.py % 2 == 0):
            raise AdaptiveError("pool words must have odd Y count")
        dim = 1 << self.n
        k = np.arange(dim, dtype=np.uint64)
        # Hadamard sign matrix (-1)^{|k & z|}
        self._signs = 1.0 - 2.0 * (
            np.bitwise_count(k[:, None] & k[None, :]) & np.uint64(1)
        ).astype(np.float64)
        self._kx = (k[:, None] ^ k[None, :]).astype(np.intp)

    def _word_table(self, state: np.ndarray) -> np.ndarray:
        s = state
        if np.abs(s.imag).max() > 1e-13:
            raise AdaptiveError(
                "frozen state has imaginary amplitudes; odd-Y layers preserve "
                "real states, so this indicates a non-real reference"
            )
        s = s.real
        u = s[self._kx] * s[None, :]
        return u @ self._signs

    def scores(self, state: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
        """(descents, tau_stars, e0) for every pool word."""
        T = self._word_table(state)
        # <P_i> for the Hamiltonian terms; i^y is +-1 here (even y)
        term_signs = np.where(self.ty % 4 == 0, 1.0, -1.0)
        t_vals = term_signs * T[self.tx.astype(np.intp), self.tz.astype(np.intp)]
        weighted = self.coeffs * t_vals
        e0 = float(weighted.sum())

        n_pool = len(self.px)
        descents = np.zeros(n_pool)
        taus = np.zeros(n_pool)
        for start in range(0, n_pool, self.chunk):
            px = self.px[start : start + self.chunk]
            pz = self.pz[start : start + self.chunk]
            py = self.py[start : start + self.chunk]
            anti = (
                (
                    np.bitwise_count(self.tx[:, None] & pz[None, :])
                    + np.bitwise_count(self.tz[:, None] & px[None, :])
                )
                & np.uint64(1)
            ).astype(bool)
            b = np.where(anti, weighted[:, None], 0.0).sum(axis=0)
            # <P_i P> = i^{y_i + y_P + 2|z_i & x_P|} T[x_i^x_P, z_i^z_P];
            # the exponent is odd here, so -i * <P_i P> = +-T[...]
            pc = np.bitwise_count(self.tz[:, None] & px[None, :]).astype(np.int64)
            exponent = (self.ty[:, None] + py[None, :] + 2 * pc) % 4
            signs = np.where(exponent == 1, 1.0, -1.0)
            gx = (self.tx[:, None] ^ px[None, :]).astype(np.intp)
            gz = (self.tz[:, None] ^ pz[None, :]).astype(np.intp)
            prod_vals = T[gx, gz]
            c = np.where(anti, self.coeffs[:, None] * signs * prod_vals, 0.0).sum(axis=0)
            # E(0) - E_min = B + sqrt(B^2 + C^2)
            descents[start : start + self.chunk] = b + np.hypot(b, c)
            taus[start : start + self.chunk] = _tau_minimum(b, c)
        return descents, taus, e0


def select_entangler(
    descents: np.ndarray,
    strengths: np.ndarray,
    descent_fraction: float = 0.3,
) -> tuple[int, int]:
    """Index of the chosen word and the acceptable-set size.

    Acceptable words reach the descent fraction of the best descent; among
    them the largest correlation strength wins, ties broken by larger
    descent, then by canonical (pool) order.
    """
    descents = np.asarray(descents, dtype=float)
    strengths = np.asarray(strengths, dtype=float)
    max_descent = descents.max()
    if max_descent <= 0.0:
        raise NoImprovingEntangler("all descents are non-positive")
    acceptable = np.flatnonzero(descents >= descent_fraction * max_descent)
    order = np.lexsort(
        (acceptable, -descents[acceptable], -strengths[acceptable])
    )
    return int(acceptable[order[0]]), int(len(acceptable))


def joint_optimize(
    ansatz: Ansatz,
    H: PauliSum,
    cfg: OptimizerConfig,
    rng: np.random.Generator | None = None,
    h_action=None,
) -> tuple[np.ndarray, float]:
    """Basin-hopping reoptimization of all layer parameters.

    A quasi-Newton descent with the analytic adjoint gradient runs from the
    incoming parameters, then cfg.hops uniform perturbations of magnitude
    cfg.step_size with Metropolis acceptance at cfg.temperature. The best
    energy found is returned and never exceeds the incoming energy.
    """
    if len(ansatz) == 0:
        raise AdaptiveError("joint optimization needs at least one layer")
    if rng is None:
        rng = np.random.default_rng(0)
    if h_action is None:
        h_action, _ = compile_sum_action(H)
    words = ansatz.words
    reference = ansatz.reference_state()

    def objective(params):
        psi = reference
        for word, tau in zip(words, params):
            psi = apply_pauli_exponential(psi, word, tau)
        lam = h_action(psi)
        energy = float(np.real(np.vdot(psi, lam)))
        grads = np.zeros(len(params))
        for k in range(len(params) - 1, -1, -1):
            grads[k] = 2.0 * np.imag(np.vdot(lam, apply_pauli_word(psi, words[k])))
            psi = apply_pauli_exponential(psi, words[k], -params[k])
            lam = apply_pauli_exponential(lam, words[k], -params[k])
        return energy, grads

    x0 = np.array(ansatz.parameters, dtype=float)
    e_in = objective(x0)[0]
    result = basinhopping(
        objective,
        x0,
        niter=cfg.hops,
        T=cfg.temperature,
        stepsize=cfg.step_size,
        minimizer_kwargs={
            "method": "BFGS",
            "jac": True,
            "options": {"gtol": cfg.local_tolerance},
        },
        rng=rng,
    )
    if result.fun > e_in:
        return x0, e_in
    return np.asarray(result.x, dtype=float), float(result.fun)


def run_adaptive(
    H: PauliSum,
    pool: EntanglerPool,
    strengths: np.ndarray,
    percentiles: np.ndarray,
    reference_bits,
    config: AdaptiveConfig,
    reference_energy: float | None = None,
    pool_provenance: str | None = None,
    baseline_pool_size: int | None = None,
) -> tuple[RunReport, Ansatz]:
    """Adaptive construction loop: score, select, append, jointly reoptimize.

    strengths/percentiles are per-pool-word arrays computed by the caller
    against the declared baseline pool; the percentile of each adopted word
    feeds the p_max / p_avg screening rates.
    """
    if len(strengths) != len(pool) or len(percentiles) != len(pool):
        raise AdaptiveError("strengths/percentiles must match the pool")
    scorer = PoolScorer(H, pool)
    h_action, _ = compile_sum_action(H)
    ansatz = Ansatz(H.n_qubits, list(reference_bits))
    state = ansatz.reference_state()
    hf_energy = expectation(state, H)
    energy = hf_energy

    def is_converged(e: float) -> bool:
        return reference_energy is not None and abs(e - reference_energy) <= config.convergence_tol

    steps: list[StepRecord] = []
    converged = False
    stop_reason = "max_steps"
    if is_converged(energy):
        converged, stop_reason = True, "reference state within tolerance"
    else:
        recent_descents: list[float] = []
        for step in range(1, config.max_steps + 1):
            descents, taus, e0 = scorer.scores(state)
            if abs(e0 - energy) > 1e-8:
                raise AdaptiveError(
                    f"scorer energy {e0} disagrees with tracked energy {energy}"
                )
            try:
                chosen, acceptable_count = select_entangler(
                    descents, strengths, config.descent_fraction
                )
            except NoImprovingEntangler:
                stop_reason = "no improving entangler"
                converged = is_converged(energy) if reference_energy is not None else True
                break
            word = pool.words[chosen]
            ansatz = ansatz.with_layer(word, float(taus[chosen]))
            rng = np.random.default_rng(np.random.SeedSequence((config.seed, step)))
            params, e_new = joint_optimize(
                ansatz, H, config.optimizer, rng=rng, h_action=h_action
            )
            ansatz = Ansatz(H.n_qubits, list(reference_bits), list(ansatz.words), list(params))
            descent_achieved = energy - e_new
            steps.append(
                StepRecord(
                    step=step,
                    word=word,
                    tau=float(params[-1]),
                    energy=e_new,
                    descent=descent_achieved,
                    percentile=float(percentiles[chosen]),
                    acceptable_count=acceptable_count,
                )
            )
            energy = e_new
            state = ansatz.prepare()
            if is_converged(energy):
                converged, stop_reason = True, "chemical accuracy reached"
                break
            if reference_energy is None:
                recent_descents.append(descent_achieved)
                window = recent_descents[-config.descent_floor_window :]
                if (
                    len(window) == config.descent_floor_window
                    and max(window) < config.descent_floor
                ):
                    converged, stop_reason = True, "descent stalled"
                    break

    report = RunReport(
        steps=steps,
        converged=converged,
        stop_reason=stop_reason,
        reference_energy=reference_energy,
        hf_energy=hf_energy,
        final_energy=energy,
        pool_provenance=pool_provenance or pool.provenance,
        baseline_pool_size=baseline_pool_size if baseline_pool_size is not None else len(pool),
    )
    return report, ansatz
