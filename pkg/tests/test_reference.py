"""Lanczos ground states, entropy, and mutual-information matrices."""

import numpy as np
import pytest

from mivqe.pauli import PauliSum, PauliWord
from mivqe.reference import (
    LanczosConvergenceError,
    MIMatrix,
    ReferenceError,
    entropy,
    exact_ground_state,
    mutual_information,
)
from mivqe.simulator import basis_state

from helpers import dense_sum, random_state, random_word


def test_ground_state_minus_z():
    H = PauliSum(1, [(-1.0, PauliWord.from_label("Z"))])
    energy, state = exact_ground_state(H)
    assert abs(energy + 1.0) < 1e-10
    assert abs(abs(state[0]) - 1.0) < 1e-9


def test_ground_state_x():
    H = PauliSum(1, [(1.0, PauliWord.from_label("X"))])
    energy, state = exact_ground_state(H)
    assert abs(energy + 1.0) < 1e-10
    target = np.array([1.0, -1.0]) / np.sqrt(2)
    overlap = abs(np.vdot(target, state))
    assert abs(overlap - 1.0) < 1e-9


def test_ground_state_matches_dense_random():
    rng = np.random.default_rng(51)
    for _ in range(10):
        n = int(rng.integers(2, 6))
        H = PauliSum(
            n,
            [(rng.normal(), random_word(rng, n)) for _ in range(12)],
        )
        if len(H) == 0:
            continue
        energy, state = exact_ground_state(H)
        dense_min = np.linalg.eigvalsh(dense_sum(H)).min()
        assert abs(energy - dense_min) < 1e-9
        residual = np.linalg.norm(dense_sum(H) @ state - energy * state)
        assert residual < 1e-8


def test_lanczos_residual_contract():
    H = PauliSum(3, [(1.0, PauliWord.from_label("ZZI")), (0.5, PauliWord.from_label("IXX"))])
    energy, state = exact_ground_state(H, tol=1e-9)
    M = dense_sum(H)
    assert np.linalg.norm(M @ state - energy * state) < 1e-9


def test_lanczos_nonconvergence_reports_residual():
    H = PauliSum(3, [(1.0, PauliWord.from_label("XZY")), (0.4, PauliWord.from_label("ZXI"))])
    with pytest.raises(LanczosConvergenceError) as err:
        exact_ground_state(H, tol=0.0)  # unreachable tolerance
    assert err.value.residual >= 0.0
    assert err.value.iterations > 0


def test_entropy_pure_and_mixed():
    pure = np.array([[1.0, 0.0], [0.0, 0.0]])
    assert entropy(pure) == 0.0
    assert abs(entropy(np.eye(2) / 2) - 1.0) < 1e-12
    rho = np.diag([0.75, 0.25])
    expected = -(0.75 * np.log2(0.75) + 0.25 * np.log2(0.25))
    assert abs(entropy(rho) - expected) < 1e-12
    assert abs(expected - 0.8113) < 5e-5


def test_entropy_rejects_bad_trace():
    with pytest.raises(ReferenceError):
        entropy(np.diag([0.7, 0.2]))


def test_mi_bell_pair():
    bell = np.zeros(4, dtype=complex)
    bell[0] = bell[3] = 1 / np.sqrt(2)
    mi = mutual_information(bell)
    assert abs(mi[0, 1] - 1.0) < 1e-10


def test_mi_product_state():
    state = basis_state(3, [1, 0, 1])
    mi = mutual_information(state)
    assert np.abs(mi.entries).max() < 1e-12


def test_mi_ghz_pairs():
    ghz = np.zeros(8, dtype=complex)
    ghz[0] = ghz[7] = 1 / np.sqrt(2)
    mi = mutual_information(ghz)
    for i in range(3):
        for j in range(i + 1, 3):
            assert abs(mi[i, j] - 0.5) < 1e-10


def test_mi_matrix_invariants_random_states():
    rng = np.random.default_rng(52)
    for _ in range(300):
        n = int(rng.integers(2, 5))
        mi = mutual_information(random_state(rng, n))
        e = mi.entries
        assert np.allclose(e, e.T, atol=1e-12)
        assert np.abs(np.diag(e)).max() < 1e-15
        assert e.min() >= 0.0
        assert e.max() <= 1.0 + 1e-12


def test_subadditivity_random_states():
    from mivqe.simulator import rdm

    rng = np.random.default_rng(53)
    for _ in range(100):
        n = int(rng.integers(2, 5))
        state = random_state(rng, n)
        i, j = rng.choice(n, size=2, replace=False)
        s_i = entropy(rdm(state, [int(i)]))
        s_j = entropy(rdm(state, [int(j)]))
        s_ij = entropy(rdm(state, [int(i), int(j)]))
        assert s_ij <= s_i + s_j + 1e-9


def test_mi_csv_round_trip():
    rng = np.random.default_rng(54)
    mi = mutual_information(random_state(rng, 4))
    back = MIMatrix.from_csv(mi.to_csv())
    assert np.allclose(back.entries, mi.entries, atol=1e-10)


def test_mi_matrix_validation():
    with pytest.raises(ReferenceError):
        MIMatrix(np.array([[0.0, 0.5], [0.4, 0.0]]))  # asymmetric
    with pytest.raises(ReferenceError):
        MIMatrix(np.array([[0.3, 0.0], [0.0, 0.0]]))  # nonzero diagonal
    with pytest.raises(ReferenceError):
        MIMatrix(np.array([[0.0, 1.5], [1.5, 0.0]]))  # above one bit
