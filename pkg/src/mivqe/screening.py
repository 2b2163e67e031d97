"""Entangler pools and mutual-information screening.

The pool is every Pauli word with an odd number of Y factors (the even-Y
words commute with a real Hamiltonian and can never lower the energy), in
the canonical (z_mask, x_mask) order. A word's correlation strength is the
average pair MI over its support, and its percentile is the fraction of the
baseline pool at least as strong, ties counted inclusively.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pauli import PauliWord, parse_pauli_factors, format_pauli_factors


class ScreeningError(ValueError):
    pass


def pool_size(n_qubits: int) -> int:
    """Closed form (4^n - 2^n) / 2 for the odd-Y pool."""
    return (4**n_qubits - 2**n_qubits) // 2


@dataclass(frozen=True)
class EntanglerPool:
    n_qubits: int
    words: tuple[PauliWord, ...]
    provenance: str = "original"

    def __len__(self) -> int:
        return len(self.words)

    def __iter__(self):
        return iter(self.words)

    def to_text(self) -> str:
        lines = [f"# pool provenance: {self.provenance}", f"qubits: {self.n_qubits}"]
        lines += [format_pauli_factors(w) for w in self.words]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, provenance: str = "imported") -> "EntanglerPool":
        n_qubits = None
        words = []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.lower().startswith("qubits:"):
                n_qubits = int(line.split(":", 1)[1])
                continue
            if n_qubits is None:
                raise ScreeningError("missing 'qubits: <n>' header")
            word = parse_pauli_factors(line, n_qubits)
            if word.y_count % 2 == 0:
                raise ScreeningError(f"pool word {line!r} has an even Y count")
            words.append(word)
        if n_qubits is None:
            raise ScreeningError("missing 'qubits: <n>' header")
        if len(set(words)) != len(words):
            raise ScreeningError("pool contains duplicate words")
        return cls(n_qubits, tuple(words), provenance)


def generate_pool(n_qubits: int) -> EntanglerPool:
    """All odd-Y Pauli words on n qubits in canonical order."""
    if n_qubits < 1:
        raise ScreeningError("n_qubits must be positive")
    n = n_qubits
    size = 1 << n
    z = np.repeat(np.arange(size, dtype=np.uint64), size)
    x = np.tile(np.arange(size, dtype=np.uint64), size)
    odd = (np.bitwise_count(x & z) & np.uint64(1)).astype(bool)
    words = tuple(
        PauliWord(n, int(xm), int(zm)) for xm, zm in zip(x[odd], z[odd])
    )
    return EntanglerPool(n, words, "original")


def _mi_entries(mi) -> np.ndarray:
    entries = getattr(mi, "entries", mi)
    return np.asarray(entries, dtype=float)


def correlation_strength(word: PauliWord, mi) -> float:
    """Average MI over ordered qubit pairs in the word's support.

    Single-qubit words have no pairs; their strength is defined as 0 so they
    rank last.
    """
    entries = _mi_entries(mi)
    support = [q for q in range(word.n_qubits) if (word.support >> q) & 1]
    if max(support, default=-1) >= entries.shape[0]:
        raise ScreeningError("word support outside MI matrix range")
    L = len(support)
    if L < 2:
        return 0.0
    total = 0.0
    for a in range(L):
        for b in range(a + 1, L):
            total += entries[support[a], support[b]]
    return 2.0 * total / (L * (L - 1))


def pool_strengths(pool: EntanglerPool, mi) -> np.ndarray:
    """Correlation strengths for a whole pool via a per-support-mask table."""
    entries = _mi_entries(mi)
    n = pool.n_qubits
    if entries.shape[0] < n:
        raise ScreeningError("MI matrix smaller than pool qubit count")
    table = np.zeros(1 << n)
    for mask in range(1 << n):
        support = [q for q in range(n) if (mask >> q) & 1]
        L = len(support)
        if L < 2:
            continue
        total = 0.0
        for a in range(L):
            for b in range(a + 1, L):
                total += entries[support[a], support[b]]
        table[mask] = 2.0 * total / (L * (L - 1))
    supports = np.fromiter((w.support for w in pool.words), dtype=np.int64, count=len(pool))
    return table[supports]


@dataclass(frozen=True)
class ScoredEntangler:
    word: PauliWord
    correlation_strength: float
    percentile: float


def percentile_of_strengths(
    strengths: np.ndarray, baseline_strengths: np.ndarray, baseline_size: int | None = None
) -> np.ndarray:
    """percentile(c) = |{baseline strength >= c}| / N(baseline), ties inclusive."""
    baseline = np.sort(np.asarray(baseline_strengths, dtype=float))
    n = baseline_size if baseline_size is not None else len(baseline)
    # count of baseline entries >= c  ==  len - first index where entry >= c
    counts = len(baseline) - np.searchsorted(baseline, strengths, side="left")
    return counts / n


def percentiles(pool: EntanglerPool, mi, baseline: EntanglerPool | None = None) -> list[ScoredEntangler]:
    """Score every pool word against a baseline pool (the pool itself by default)."""
    strengths = pool_strengths(pool, mi)
    if baseline is None or baseline is pool:
        base = strengths
    else:
        base = pool_strengths(baseline, mi)
    pct = percentile_of_strengths(strengths, base)
    return [
        ScoredEntangler(w, float(c), float(p))
        for w, c, p in zip(pool.words, strengths, pct)
    ]


def screen_pool(pool: EntanglerPool, mi, p_cut: float) -> EntanglerPool:
    """Keep the words with percentile <= p_cut; boundary ties are all kept."""
    if not (0.0 < p_cut <= 1.0):
        raise ScreeningError("p_cut must lie in (0, 1]")
    scored = percentiles(pool, mi)
    kept = tuple(s.word for s in scored if s.percentile <= p_cut)
    if not kept:
        raise ScreeningError(
            f"screening at p_cut={p_cut} leaves an empty pool "
            f"(minimum achievable percentile is {min(s.percentile for s in scored):.3g})"
        )
    return EntanglerPool(pool.n_qubits, kept, f"screened(p_cut={p_cut:.12g})")


def screening_report_csv(scored: list[ScoredEntangler], p_cut: float | None = None) -> str:
    lines = ["word,strength,percentile,kept"]
    for s in scored:
        kept = "" if p_cut is None else str(int(s.percentile <= p_cut))
        lines.append(
            f"{format_pauli_factors(s.word)},{s.correlation_strength:.12g},{s.percentile:.12g},{kept}"
        )
    return "\n".join(lines) + "\n"
