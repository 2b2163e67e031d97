"""End-to-end orchestration: parse -> build -> encode -> reduce -> pool ->
reference/MI -> screen -> adaptive run -> artifacts on disk.

Artifacts per run: report.json (full), steps.csv, mi.csv, pool file when
screening, and manifest.json with the config echo, input checksums and tool
version. All floating-point output is capped at 12 significant digits so
reruns with the same seed are byte-identical.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.stats import spearmanr

from . import __version__
from .adaptive import RunReport, run_adaptive
from .config import MpsBackend, RunConfig, parse_reference
from .encodings import EncodingSpec, encode, hf_reference, reduce_stationary_qubits
from .fcidump import load_fcidump
from .fermion import build_hamiltonian, hf_occupations, s_squared_operator
from .mps import mps_ground_state
from .pauli import PauliSum, format_pauli_sum, parse_pauli_sum
from .reference import (
    LanczosConvergenceError,
    MIMatrix,
    exact_ground_state,
    mutual_information,
)
from .screening import (
    EntanglerPool,
    generate_pool,
    percentile_of_strengths,
    pool_strengths,
    screen_pool,
)
from .simulator import Ansatz


class PipelineError(RuntimeError):
    def __init__(self, stage: str, cause: Exception | str):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage


def _fmt(x: float) -> float:
    """Round through 12 significant digits for deterministic artifacts."""
    return float(f"{x:.12g}")


def _sha256(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class Problem:
    """Everything the adaptive driver needs, assembled from a RunConfig."""

    config: RunConfig
    hamiltonian: PauliSum
    reference_bits: list[int]
    pool: EntanglerPool
    full_pool_size: int
    mi: MIMatrix
    strengths: np.ndarray
    percentiles: np.ndarray
    reference_energy: float | None
    removed_qubits: list[tuple[int, int]]
    n_qubits_encoded: int
    baseline_pool_size: int
    reference_note: str
    mps_energy_gap: float | None = None
    warnings: list[str] | None = None


def _load_hamiltonian(cfg: RunConfig):
    """Returns (encoded PauliSum, reference bits, n encoded qubits)."""
    if cfg.fcidump is not None:
        try:
            ints = load_fcidump(cfg.fcidump)
        except Exception as exc:
            raise PipelineError("parse", exc) from exc
        try:
            op = build_hamiltonian(ints)
            if cfg.spin_penalty is not None:
                op = op + cfg.spin_penalty * s_squared_operator(ints.n_orbitals)
            spec = EncodingSpec(cfg.mapping, cfg.grouping, cfg.reduce_stationary)
            H = encode(op, spec)
            occ = hf_occupations(
                ints.n_orbitals, ints.n_electrons, ints.ms2, cfg.grouping
            )
            bits = hf_reference(spec, occ)
        except Exception as exc:
            raise PipelineError("encode", exc) from exc
        return H, bits
    try:
        H = parse_pauli_sum(Path(cfg.pauli_sum).read_text())
    except Exception as exc:
        raise PipelineError("parse", exc) from exc
    # imported Hamiltonians start from |0...0> unless stationary bits say otherwise
    return H, [0] * H.n_qubits


def prepare_problem(cfg: RunConfig) -> Problem:
    H_full, bits_full = _load_hamiltonian(cfg)
    n_encoded = H_full.n_qubits

    if cfg.reduce_stationary:
        try:
            H, removed, index_map = reduce_stationary_qubits(H_full, bits_full)
        except Exception as exc:
            raise PipelineError("reduce", exc) from exc
        survivors = sorted(index_map, key=index_map.get)
        bits = [bits_full[q] for q in survivors]
    else:
        H, removed, index_map = H_full, [], {q: q for q in range(n_encoded)}
        bits = list(bits_full)

    try:
        pool = generate_pool(H.n_qubits)
        if removed:
            pool = EntanglerPool(pool.n_qubits, pool.words, "stationary_reduced")
    except Exception as exc:
        raise PipelineError("pool", exc) from exc

    reference = parse_reference(cfg.reference)
    reference_energy = None
    reference_note = ""
    warnings: list[str] = []
    mps_gap = None
    try:
        # the convergence reference is always the exact backend when it
        # converges; the MI source (exact / MPS / import) is independent
        try:
            reference_energy, exact_state = exact_ground_state(H, seed=cfg.seed)
        except LanczosConvergenceError as exc:
            warnings.append(f"exact reference unavailable: {exc}")
            exact_state = None
        if isinstance(reference, MpsBackend):
            e_mps, mps_state, _trace = mps_ground_state(
                H,
                chi=reference.chi,
                n_sweeps=reference.sweeps,
                seed=cfg.seed,
                init_bits=bits,
            )
            mi = mutual_information(mps_state)
            if reference_energy is not None:
                mps_gap = e_mps - reference_energy
            reference_note = reference.tag()
        elif reference == "exact":
            if exact_state is None:
                raise PipelineError("reference", warnings[-1])
            mi = mutual_information(exact_state)
            reference_note = "exact"
        else:
            _, mi_path = reference
            mi = MIMatrix.from_csv(Path(mi_path).read_text())
            if mi.n_qubits != H.n_qubits:
                raise ValueError(
                    f"imported MI is for {mi.n_qubits} qubits, run needs {H.n_qubits}"
                )
            reference_note = f"mi import: {mi_path}"
            if reference_energy is None:
                reference_note += " (descent-stall convergence)"
        if removed and reference_energy is not None:
            # HF-sector sanity: the reduced ground energy must match the
            # full-register one, otherwise the ground state lives in another
            # stationary sector
            e_full, _ = exact_ground_state(H_full, seed=cfg.seed)
            if reference_energy - e_full > 1e-9:
                warnings.append(
                    f"stationary-qubit sector from the HF reference misses the "
                    f"true ground state: full-register ground {e_full:.12g} vs "
                    f"reduced-sector {reference_energy:.12g}"
                )
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError("reference", exc) from exc

    try:
        strengths = pool_strengths(pool, mi)
        if cfg.baseline == "reduced" or not removed:
            baseline_strengths = strengths
            baseline_size = len(pool)
        else:
            mi_embedded = mi.embedded(index_map, n_encoded)
            baseline_pool = generate_pool(n_encoded)
            baseline_strengths = pool_strengths(baseline_pool, mi_embedded)
            baseline_size = len(baseline_pool)
        percentiles = percentile_of_strengths(
            strengths, baseline_strengths, baseline_size
        )

        if cfg.p_cut is not None:
            screened = screen_pool(pool, mi, cfg.p_cut)
            kept = {w: i for i, w in enumerate(pool.words)}
            kept_idx = np.array([kept[w] for w in screened.words])
            pool = screened
            strengths = strengths[kept_idx]
            percentiles = percentiles[kept_idx]
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError("screen", exc) from exc

    return Problem(
        config=cfg,
        hamiltonian=H,
        reference_bits=bits,
        pool=pool,
        full_pool_size=(4**H.n_qubits - 2**H.n_qubits) // 2,
        mi=mi,
        strengths=strengths,
        percentiles=percentiles,
        reference_energy=reference_energy,
        removed_qubits=removed,
        n_qubits_encoded=n_encoded,
        baseline_pool_size=baseline_size,
        reference_note=reference_note,
        mps_energy_gap=mps_gap,
        warnings=warnings,
    )


def report_to_dict(problem: Problem, report: RunReport, ansatz: Ansatz) -> dict:
    cfg = problem.config
    return {
        "tool": {"name": "mivqe", "version": __version__},
        "config": cfg.to_text().strip().splitlines(),
        "n_qubits_encoded": problem.n_qubits_encoded,
        "n_qubits": problem.hamiltonian.n_qubits,
        "removed_qubits": [[q, eig] for q, eig in problem.removed_qubits],
        "pool": {
            "provenance": problem.pool.provenance,
            "size": len(problem.pool),
            "baseline": cfg.baseline,
            "baseline_size": problem.baseline_pool_size,
        },
        "reference": {
            "note": problem.reference_note,
            "energy": None
            if problem.reference_energy is None
            else _fmt(problem.reference_energy),
            "mps_energy_gap": None
            if problem.mps_energy_gap is None
            else _fmt(problem.mps_energy_gap),
        },
        "warnings": list(problem.warnings or []),
        "hf_energy": _fmt(report.hf_energy),
        "final_energy": _fmt(report.final_energy),
        "converged": report.converged,
        "stop_reason": report.stop_reason,
        "n_ent": report.n_ent,
        "p_max": None if report.p_max is None else _fmt(report.p_max),
        "p_avg": None if report.p_avg is None else _fmt(report.p_avg),
        "steps": [
            {
                "step": s.step,
                "word": s.as_dict()["word"],
                "tau": _fmt(s.tau),
                "energy": _fmt(s.energy),
                "descent": _fmt(s.descent),
                "percentile": _fmt(s.percentile),
                "acceptable_count": s.acceptable_count,
            }
            for s in report.steps
        ],
        "ansatz": [
            {"word": w_dict, "tau": _fmt(t)}
            for w_dict, t in zip(
                (s.as_dict()["word"] for s in report.steps), ansatz.parameters
            )
        ],
    }


def steps_csv(report: RunReport) -> str:
    lines = ["step,word,tau,energy,descent,percentile,acceptable_count"]
    for s in report.steps:
        d = s.as_dict()
        lines.append(
            f"{s.step},{d['word']},{s.tau:.12g},{s.energy:.12g},"
            f"{s.descent:.12g},{s.percentile:.12g},{s.acceptable_count}"
        )
    return "\n".join(lines) + "\n"


def _manifest(cfg: RunConfig, extra: dict | None = None) -> dict:
    checksums = {}
    for key in ("fcidump", "pauli_sum"):
        path = getattr(cfg, key)
        if path is not None:
            checksums[key] = _sha256(path)
    ref = parse_reference(cfg.reference)
    if isinstance(ref, tuple) and ref[0] == "mi":
        checksums["mi"] = _sha256(ref[1])
    out = {
        "tool": {"name": "mivqe", "version": __version__},
        "config": cfg.to_text().strip().splitlines(),
        "input_checksums": checksums,
        "seed": cfg.seed,
    }
    if extra:
        out.update(extra)
    return out


def _write_json(path: Path, obj: dict) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def run_pipeline(cfg: RunConfig) -> tuple[RunReport, Problem]:
    problem = prepare_problem(cfg)
    try:
        report, ansatz = run_adaptive(
            problem.hamiltonian,
            problem.pool,
            problem.strengths,
            problem.percentiles,
            problem.reference_bits,
            cfg.adaptive_config(),
            reference_energy=problem.reference_energy,
            baseline_pool_size=problem.baseline_pool_size,
        )
    except Exception as exc:
        raise PipelineError("adapt", exc) from exc

    if cfg.output is not None:
        try:
            out = Path(cfg.output)
            out.mkdir(parents=True, exist_ok=True)
            _write_json(out / "report.json", report_to_dict(problem, report, ansatz))
            (out / "steps.csv").write_text(steps_csv(report))
            (out / "mi.csv").write_text(problem.mi.to_csv())
            if cfg.p_cut is not None:
                (out / "pool_screened.txt").write_text(problem.pool.to_text())
            # manifest written last: its presence marks a complete artifact set,
            # so an interrupted write leaves the partial set flagged
            _write_json(out / "manifest.json", _manifest(cfg))
        except PipelineError:
            raise
        except Exception as exc:
            raise PipelineError("artifacts", exc) from exc
    return report, problem


def _sweep_row(args):
    tag, cfg = args
    try:
        report, _problem = run_pipeline(cfg)
        return {
            "tag": tag,
            "p_max": "" if report.p_max is None else f"{report.p_max:.12g}",
            "p_avg": "" if report.p_avg is None else f"{report.p_avg:.12g}",
            "n_ent": str(report.n_ent),
            "converged": str(report.converged).lower(),
            "error": "",
        }
    except Exception as exc:  # a failed geometry must not abort the sweep
        return {
            "tag": tag,
            "p_max": "",
            "p_avg": "",
            "n_ent": "",
            "converged": "false",
            "error": str(exc).replace("\n", " ")[:200],
        }


def sweep(tagged_configs: list[tuple[str, RunConfig]], workers: int = 1) -> str:
    """Run independent configs and aggregate (tag, p_max, p_avg, N_ent, converged)."""
    if not tagged_configs:
        raise PipelineError("sweep", "no configs given")
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_row, tagged_configs))
    else:
        rows = [_sweep_row(tc) for tc in tagged_configs]
    lines = ["tag,p_max,p_avg,n_ent,converged,error"]
    for r in rows:
        lines.append(
            f"{r['tag']},{r['p_max']},{r['p_avg']},{r['n_ent']},{r['converged']},{r['error']}"
        )
    return "\n".join(lines) + "\n"


def mi_report(cfg: RunConfig, settings: list[MpsBackend]) -> dict:
    """De-convergence study: percentile traces of one run under degraded MI.

    Runs the adaptive construction once with the configured (exact by
    default) reference, then re-scores the adopted entanglers under each
    (chi, sweeps) MI estimate: achieved energy gap, per-entangler percentile
    trace, p_max lift, and the Spearman rank correlation of pool strengths.
    """
    report, problem = run_pipeline(cfg)
    chosen = [s.word for s in report.steps]
    pool = problem.pool
    word_index = {w: i for i, w in enumerate(pool.words)}
    chosen_idx = np.array([word_index[w] for w in chosen], dtype=int)

    exact_strengths = problem.strengths
    exact_pct = problem.percentiles
    columns = {
        "exact": {
            "energy_gap": 0.0,
            "percentiles": [_fmt(float(exact_pct[i])) for i in chosen_idx],
            "p_max": None if report.p_max is None else _fmt(report.p_max),
            "spearman_vs_exact": 1.0,
        }
    }
    for setting in settings:
        e_mps, mps_state, _ = mps_ground_state(
            problem.hamiltonian,
            chi=setting.chi,
            n_sweeps=setting.sweeps,
            seed=cfg.seed,
            init_bits=problem.reference_bits,
        )
        mi_chi = mutual_information(mps_state)
        strengths_chi = pool_strengths(pool, mi_chi)
        pct_chi = percentile_of_strengths(strengths_chi, strengths_chi)
        # quantize before ranking so exactly degenerate strengths stay tied
        # instead of being permuted by sub-1e-10 backend noise
        qa = np.round(exact_strengths, 10)
        qb = np.round(strengths_chi, 10)
        if np.ptp(qa) == 0.0 or np.ptp(qb) == 0.0:
            rho = None  # rank correlation undefined for constant strengths
        else:
            rho = float(spearmanr(qa, qb).statistic)
        gap = (
            None
            if problem.reference_energy is None
            else e_mps - problem.reference_energy
        )
        columns[setting.tag()] = {
            "energy_gap": None if gap is None else _fmt(gap),
            "percentiles": [_fmt(float(pct_chi[i])) for i in chosen_idx],
            "p_max": _fmt(float(pct_chi[chosen_idx].max())) if len(chosen_idx) else None,
            "spearman_vs_exact": None if rho is None else _fmt(rho),
            "mi_csv": mi_chi.to_csv(),
        }

    out = {
        "n_ent": len(chosen),
        "entanglers": [s.as_dict()["word"] for s in report.steps],
        "columns": {
            tag: {k: v for k, v in col.items() if k != "mi_csv"}
            for tag, col in columns.items()
        },
    }
    if cfg.output is not None:
        out_dir = Path(cfg.output)
        out_dir.mkdir(parents=True, exist_ok=True)
        header = ["index", "word"] + list(out["columns"].keys())
        lines = [",".join(header)]
        for i, word in enumerate(out["entanglers"]):
            row = [str(i + 1), word]
            for tag in out["columns"]:
                row.append(f"{out['columns'][tag]['percentiles'][i]:.12g}")
            lines.append(",".join(row))
        (out_dir / "mi_compare.csv").write_text("\n".join(lines) + "\n")
        for tag, col in columns.items():
            if "mi_csv" in col:
                safe = tag.replace(":", "_").replace(",", "_").replace("=", "")
                (out_dir / f"mi_{safe}.csv").write_text(col["mi_csv"])
        _write_json(out_dir / "mi_report.json", out)
    return out


def encode_fcidump_to_text(cfg: RunConfig) -> str:
    """The 'encode' verb: FCIDUMP -> canonical Pauli-sum text (post-reduction)."""
    H, bits = _load_hamiltonian(cfg)
    removed = []
    if cfg.reduce_stationary:
        H, removed, _ = reduce_stationary_qubits(H, bits)
    comment = (
        f"encoded from {cfg.fcidump} mapping={cfg.mapping} grouping={cfg.grouping} "
        f"reduced={[q for q, _ in removed]}"
    )
    return format_pauli_sum(H, comment=comment)
