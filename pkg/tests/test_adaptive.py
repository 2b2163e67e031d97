"""Entangler scoring, selection rule, joint optimization, adaptive loop."""

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from mivqe.adaptive import (
    AdaptiveConfig,
    NoImprovingEntangler,
    OptimizerConfig,
    PoolScorer,
    joint_optimize,
    run_adaptive,
    score_entangler,
    select_entangler,
)
from mivqe.encodings import EncodingSpec, encode, hf_reference
from mivqe.fermion import build_hamiltonian, hf_occupations
from mivqe.pauli import PauliSum, PauliWord
from mivqe.reference import exact_ground_state, mutual_information
from mivqe.screening import generate_pool, percentile_of_strengths, pool_strengths
from mivqe.simulator import Ansatz, apply_pauli_exponential, basis_state, expectation

from helpers import random_state, random_word
from test_encodings import hydrogen_like_integrals


def random_even_sum(rng, n, n_terms):
    terms = []
    while len(terms) < n_terms:
        w = random_word(rng, n)
        if w.y_count % 2 == 0:
            terms.append((float(rng.normal()), w))
    return PauliSum(n, terms)


def real_random_state(rng, n):
    v = rng.normal(size=2**n)
    return (v / np.linalg.norm(v)).astype(complex)


def test_score_commuting_word_zero_descent():
    H = PauliSum(2, [(0.7, PauliWord.from_label("ZZ"))])
    state = basis_state(2, [0, 0])
    word = PauliWord.from_label("YX")  # commutes with ZZ
    descent, _ = score_entangler(state, H, word)
    assert abs(descent) < 1e-12


def test_score_z_hamiltonian_y_word():
    H = PauliSum(1, [(1.0, PauliWord.from_label("Z"))])
    descent, tau = score_entangler(basis_state(1, [0]), H, PauliWord.from_label("Y"))
    assert abs(descent - 2.0) < 1e-12
    assert abs(tau - np.pi / 2) < 1e-12


def test_score_matches_grid_scan_oracle():
    """Sinusoid-fit minimum vs a 1e4-point grid scan plus local refinement."""
    rng = np.random.default_rng(81)
    grid = np.linspace(-np.pi / 2, np.pi / 2, 10_001)
    for _ in range(60):
        n = int(rng.integers(1, 5))
        H = PauliSum(n, [(rng.normal(), random_word(rng, n)) for _ in range(6)])
        if len(H) == 0:
            continue
        state = random_state(rng, n)
        word = random_word(rng, n, nontrivial=True)
        descent, tau_star = score_entangler(state, H, word)

        def energy_at(t):
            return expectation(apply_pauli_exponential(state, word, t), H)

        e0 = energy_at(0.0)
        grid_vals = np.array([energy_at(t) for t in grid])
        k = int(np.argmin(grid_vals))
        lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
        refined = minimize_scalar(energy_at, bounds=(lo, hi), method="bounded",
                                  options={"xatol": 1e-12})
        fitted_min = e0 - descent
        assert fitted_min <= grid_vals[k] + 1e-9
        assert abs(fitted_min - refined.fun) < 1e-9
        assert abs(energy_at(tau_star) - fitted_min) < 1e-9


def test_pool_scorer_matches_score_entangler():
    rng = np.random.default_rng(82)
    for n in (3, 4):
        H = random_even_sum(rng, n, 10)
        pool = generate_pool(n)
        scorer = PoolScorer(H, pool)
        state = real_random_state(rng, n)
        descents, taus, e0 = scorer.scores(state)
        assert abs(e0 - expectation(state, H)) < 1e-10
        for idx in rng.choice(len(pool), size=25, replace=False):
            d_ref, t_ref = score_entangler(state, H, pool.words[idx])
            assert abs(descents[idx] - d_ref) < 1e-9
            assert abs(taus[idx] - t_ref) < 1e-9


def test_select_entangler_rule():
    descents = np.array([1.0, 0.4, 0.2])
    strengths = np.array([0.1, 0.9, 0.99])
    chosen, count = select_entangler(descents, strengths, 0.3)
    assert chosen == 1  # 0.2 < 0.3 excludes the strongest word
    assert count == 2


def test_select_single_acceptable():
    chosen, count = select_entangler(np.array([1.0, 0.1]), np.array([0.2, 0.9]), 0.3)
    assert chosen == 0 and count == 1


def test_select_tie_breaking():
    # equal strengths: larger descent wins
    chosen, _ = select_entangler(
        np.array([0.5, 0.8, 0.8]), np.array([0.7, 0.7, 0.5]), 0.3
    )
    assert chosen == 1
    # full tie on strength and descent: canonical (lowest index) order
    chosen, _ = select_entangler(
        np.array([0.8, 0.8]), np.array([0.7, 0.7]), 0.3
    )
    assert chosen == 0


def test_select_brute_force_oracle():
    rng = np.random.default_rng(83)
    for _ in range(200):
        m = int(rng.integers(2, 40))
        descents = rng.normal(size=m)
        strengths = rng.uniform(0, 1, size=m)
        if descents.max() <= 0:
            with pytest.raises(NoImprovingEntangler):
                select_entangler(descents, strengths, 0.3)
            continue
        chosen, count = select_entangler(descents, strengths, 0.3)
        acceptable = [i for i in range(m) if descents[i] >= 0.3 * descents.max()]
        assert count == len(acceptable)
        best = max(acceptable, key=lambda i: (strengths[i], descents[i], -i))
        assert chosen == best


def test_select_raises_without_positive_descent():
    with pytest.raises(NoImprovingEntangler):
        select_entangler(np.array([0.0, -0.5]), np.array([0.3, 0.4]), 0.3)


def test_joint_optimize_single_layer_closed_form():
    rng = np.random.default_rng(84)
    n = 3
    H = random_even_sum(rng, n, 8)
    state = basis_state(n, [1, 0, 1])
    pool = generate_pool(n)
    scorer = PoolScorer(H, pool)
    descents, taus, e0 = scorer.scores(state)
    idx = int(np.argmax(descents))
    ansatz = Ansatz(n, [1, 0, 1], [pool.words[idx]], [taus[idx]])
    params, energy = joint_optimize(
        ansatz, H, OptimizerConfig(), rng=np.random.default_rng(1)
    )
    assert abs(energy - (e0 - descents[idx])) < 1e-8


def test_joint_optimize_zero_hops_plain_descent():
    rng = np.random.default_rng(85)
    n = 3
    H = random_even_sum(rng, n, 8)
    ansatz = Ansatz(n, [0, 1, 0])
    for _ in range(3):
        w = random_word(rng, n)
        while w.y_count % 2 == 0:
            w = random_word(rng, n)
        ansatz = ansatz.with_layer(w, float(rng.normal() * 0.1))
    e_start = expectation(ansatz.prepare(), H)
    cfg = OptimizerConfig(hops=0)
    params, energy = joint_optimize(ansatz, H, cfg, rng=np.random.default_rng(2))
    assert energy <= e_start + 1e-12


def test_joint_optimize_deterministic():
    rng = np.random.default_rng(86)
    n = 3
    H = random_even_sum(rng, n, 8)
    w = next(w for w in generate_pool(n).words if w.weight > 1)
    ansatz = Ansatz(n, [0, 1, 0], [w], [0.3])
    out1 = joint_optimize(ansatz, H, OptimizerConfig(), rng=np.random.default_rng(5))
    out2 = joint_optimize(ansatz, H, OptimizerConfig(), rng=np.random.default_rng(5))
    assert np.array_equal(out1[0], out2[0])
    assert out1[1] == out2[1]


def _molecule_problem(grouping="abab", mapping="jordan_wigner"):
    ints = hydrogen_like_integrals()
    op = build_hamiltonian(ints)
    spec = EncodingSpec(mapping, grouping)
    H = encode(op, spec)
    occ = hf_occupations(ints.n_orbitals, ints.n_electrons, ints.ms2, grouping)
    bits = hf_reference(spec, occ)
    e_ref, state = exact_ground_state(H)
    mi = mutual_information(state)
    pool = generate_pool(H.n_qubits)
    strengths = pool_strengths(pool, mi)
    pct = percentile_of_strengths(strengths, strengths)
    return H, pool, strengths, pct, bits, e_ref, mi


def test_run_adaptive_converges_and_monotone():
    H, pool, strengths, pct, bits, e_ref, _ = _molecule_problem()
    report, ansatz = run_adaptive(
        H, pool, strengths, pct, bits, AdaptiveConfig(seed=11), reference_energy=e_ref
    )
    assert report.converged
    assert abs(report.final_energy - e_ref) <= 1e-3
    energies = [report.hf_energy] + report.energies
    assert all(b <= a + 1e-12 for a, b in zip(energies, energies[1:]))
    assert all(s.descent > 0 for s in report.steps)
    assert report.p_avg <= report.p_max <= 1.0
    assert 0.0 < report.p_avg
    # recorded taus match the returned ansatz
    assert [s.tau for s in report.steps] == ansatz.parameters


def test_run_adaptive_zero_steps_when_reference_is_ground():
    # diagonal H: the basis reference already is the ground state
    n = 3
    H = PauliSum(n, [(1.0, PauliWord(n, 0, 1 << q)) for q in range(n)])
    pool = generate_pool(n)
    strengths = np.zeros(len(pool))
    pct = np.ones(len(pool))
    e_ref, _ = exact_ground_state(H)
    report, ansatz = run_adaptive(
        H, pool, strengths, pct, [1, 1, 1], AdaptiveConfig(), reference_energy=e_ref
    )
    assert report.converged
    assert report.n_ent == 0
    assert report.p_max is None and report.p_avg is None
    assert report.stop_reason == "reference state within tolerance"


def test_run_adaptive_no_improving_entangler():
    # the only pool word commutes with H: zero descent everywhere, and the
    # reference sits far from the ground energy
    from mivqe.screening import EntanglerPool

    n = 2
    H = PauliSum(n, [(1.0, PauliWord(n, 0, 0b01))])  # Z0
    pool = EntanglerPool(n, (PauliWord.from_label("IY"),), "custom")
    report, _ = run_adaptive(
        H,
        pool,
        np.zeros(len(pool)),
        np.ones(len(pool)),
        [0, 0],
        AdaptiveConfig(),
        reference_energy=exact_ground_state(H)[0],
    )
    assert report.stop_reason == "no improving entangler"
    assert not report.converged


def test_run_adaptive_deterministic():
    H, pool, strengths, pct, bits, e_ref, _ = _molecule_problem("aabb", "parity")
    kwargs = dict(reference_energy=e_ref)
    r1, a1 = run_adaptive(H, pool, strengths, pct, bits, AdaptiveConfig(seed=4), **kwargs)
    r2, a2 = run_adaptive(H, pool, strengths, pct, bits, AdaptiveConfig(seed=4), **kwargs)
    assert [s.as_dict() for s in r1.steps] == [s.as_dict() for s in r2.steps]
    assert a1.parameters == a2.parameters


def test_run_adaptive_descent_stall_without_reference():
    H, pool, strengths, pct, bits, e_ref, _ = _molecule_problem()
    cfg = AdaptiveConfig(seed=11, max_steps=30)
    report, _ = run_adaptive(H, pool, strengths, pct, bits, cfg, reference_energy=None)
    assert report.converged
    assert report.stop_reason in ("descent stalled", "no improving entangler")
    # it should have reached (essentially) the ground state anyway
    assert report.final_energy - e_ref < 1e-4


def test_screening_equivalence_small_molecule():
    """Rerun with the screened pool at p_cut = p_max: identical step sequence."""
    from mivqe.screening import screen_pool

    H, pool, strengths, pct, bits, e_ref, mi = _molecule_problem()
    cfg = AdaptiveConfig(seed=9)
    full_report, _ = run_adaptive(
        H, pool, strengths, pct, bits, cfg, reference_energy=e_ref
    )
    assert full_report.converged
    p_cut = full_report.p_max + 1e-9
    screened = screen_pool(pool, mi, p_cut)
    index_of = {w: i for i, w in enumerate(pool.words)}
    kept = np.array([index_of[w] for w in screened.words])
    scr_report, _ = run_adaptive(
        H, screened, strengths[kept], pct[kept], bits, cfg, reference_energy=e_ref
    )
    assert [s.as_dict()["word"] for s in full_report.steps] == [
        s.as_dict()["word"] for s in scr_report.steps
    ]
    for a, b in zip(full_report.steps, scr_report.steps):
        assert abs(a.energy - b.energy) < 1e-8
        assert abs(a.tau - b.tau) < 1e-6
