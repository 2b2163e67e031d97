"""Independent dense-matrix oracles shared by the test suite.

Everything here builds explicit numpy matrices from first principles (kron
products, occupation-number ladder action) so that library code paths are
checked against a redundant construction, not against themselves.
"""

import numpy as np

from mivqe.pauli import PauliSum, PauliWord

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def dense_word(word: PauliWord) -> np.ndarray:
    """Dense matrix of a Pauli word via explicit kron products.

    Qubit 0 is the least-significant bit of the basis index, so it is the
    rightmost kron factor.
    """
    out = np.array([[1.0 + 0j]])
    for q in range(word.n_qubits):
        out = np.kron(_SINGLE[word.factor(q)], out)
    return out


def dense_sum(H: PauliSum) -> np.ndarray:
    dim = 2**H.n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for coeff, word in H.terms:
        out += coeff * dense_word(word)
    return out


def random_word(rng, n_qubits: int, nontrivial: bool = False) -> PauliWord:
    while True:
        x = int(rng.integers(0, 1 << n_qubits))
        z = int(rng.integers(0, 1 << n_qubits))
        if nontrivial and x == 0 and z == 0:
            continue
        return PauliWord(n_qubits, x, z)


def random_state(rng, n_qubits: int) -> np.ndarray:
    v = rng.normal(size=2**n_qubits) + 1j * rng.normal(size=2**n_qubits)
    return v / np.linalg.norm(v)


def fermion_dense(op, n_modes: int) -> np.ndarray:
    """Occupation-number-basis matrix of a FermionOperator.

    Basis index k has bit q equal to the occupation of mode q. Ladder
    operators act with the textbook (-1)^(number of occupied modes below)
    sign. This is deliberately independent of any qubit encoding.
    """
    dim = 2**n_modes
    out = np.zeros((dim, dim), dtype=complex)
    for ladder, coeff in op.terms.items():
        for ket in range(dim):
            occ = ket
            sign = 1.0
            dead = False
            # rightmost ladder factor acts first
            for mode, creation in reversed(ladder):
                bit = (occ >> mode) & 1
                if creation == (bit == 1):
                    dead = True
                    break
                below = occ & ((1 << mode) - 1)
                if below.bit_count() % 2:
                    sign = -sign
                occ ^= 1 << mode
            if not dead:
                out[occ, ket] += coeff * sign
    return out
