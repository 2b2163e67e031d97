"""Command-line surface.

Verbs: run (full pipeline), sweep (bond-length series), mi-report
(de-convergence comparison), encode (FCIDUMP -> Pauli text), pool
(generate/screen entangler pools). Exit codes: 0 success, 2 the run finished
without reaching convergence, 3 input error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, MpsBackend, RunConfig, parse_config, parse_reference
from .pipeline import (
    PipelineError,
    encode_fcidump_to_text,
    mi_report,
    run_pipeline,
    sweep,
)

EXIT_OK = 0
EXIT_NOT_CONVERGED = 2
EXIT_INPUT_ERROR = 3


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value config file; flags override it")
    p.add_argument("--fcidump", help="FCIDUMP input path")
    p.add_argument("--pauli-sum", dest="pauli_sum", help="Pauli-sum text input path")
    p.add_argument("--mapping", help="jordan_wigner | parity | bravyi_kitaev (jw/bk ok)")
    p.add_argument("--grouping", help="abab | aabb")
    p.add_argument("--reduce-stationary", dest="reduce_stationary",
                   choices=["true", "false"], help="drop Z-only qubits (default true)")
    p.add_argument("--p-cut", dest="p_cut", type=float, help="screening cutoff in (0,1]")
    p.add_argument("--reference", help="exact | mps:chi=<n>,sweeps=<n> | mi:<csv path>")
    p.add_argument("--descent-fraction", dest="descent_fraction", type=float)
    p.add_argument("--spin-penalty", dest="spin_penalty", type=float,
                   help="S^2 penalty weight in hartree")
    p.add_argument("--max-steps", dest="max_steps", type=int)
    p.add_argument("--convergence-tol", dest="convergence_tol", type=float)
    p.add_argument("--baseline", choices=["reduced", "unreduced"],
                   help="pool for percentile denominators")
    p.add_argument("--seed", type=int)
    p.add_argument("--hops", type=int, help="basin-hopping iterations")
    p.add_argument("--temperature", type=float)
    p.add_argument("--step-size", dest="step_size", type=float)
    p.add_argument("--local-tol", dest="local_tol", type=float)
    p.add_argument("--output", help="artifact directory")


def _config_from_args(args, **extra) -> RunConfig:
    text = ""
    if args.config:
        text = Path(args.config).read_text()
    keys = [
        "fcidump", "pauli_sum", "mapping", "grouping", "p_cut", "reference",
        "descent_fraction", "spin_penalty", "max_steps", "convergence_tol",
        "baseline", "seed", "hops", "temperature", "step_size", "local_tol",
        "output",
    ]
    overrides = {k: getattr(args, k, None) for k in keys}
    if getattr(args, "reduce_stationary", None) is not None:
        overrides["reduce_stationary"] = args.reduce_stationary == "true"
    overrides.update(extra)
    return parse_config(text, **overrides)


def _cmd_run(args) -> int:
    cfg = _config_from_args(args)
    report, problem = run_pipeline(cfg)
    ref = ("" if problem.reference_energy is None
           else f" reference={problem.reference_energy:.12g}")
    print(
        f"run: qubits={problem.hamiltonian.n_qubits} pool={len(problem.pool)}"
        f" steps={report.n_ent} final={report.final_energy:.12g}{ref}"
        f" converged={report.converged} ({report.stop_reason})"
    )
    if report.p_max is not None:
        print(f"screening rates: p_max={report.p_max:.12g} p_avg={report.p_avg:.12g}")
    for warning in problem.warnings or []:
        print(f"warning: {warning}", file=sys.stderr)
    if cfg.output:
        print(f"artifacts in {cfg.output}")
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


def _cmd_sweep(args) -> int:
    base = _config_from_args(args, fcidump=args.fcidumps[0])
    tagged = []
    for path in args.fcidumps:
        cfg_kwargs = {"fcidump": path}
        out = None
        if base.output:
            out = str(Path(base.output) / Path(path).stem)
        tag = Path(path).stem
        cfg = parse_config(base.to_text(), fcidump=path, output=out)
        tagged.append((tag, cfg))
    table = sweep(tagged, workers=args.workers)
    if base.output:
        out_dir = Path(base.output)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "sweep.csv").write_text(table)
        print(f"wrote {out_dir / 'sweep.csv'}")
    print(table, end="")
    not_conv = sum(1 for line in table.splitlines()[1:] if ",false," in line)
    return EXIT_NOT_CONVERGED if not_conv else EXIT_OK


def _cmd_mi_report(args) -> int:
    cfg = _config_from_args(args)
    settings = []
    for spec in args.mps or []:
        backend = parse_reference(f"mps:{spec}")
        if not isinstance(backend, MpsBackend):
            raise ConfigError(f"bad --mps setting {spec!r}")
        settings.append(backend)
    out = mi_report(cfg, settings)
    print(f"mi-report over {out['n_ent']} entanglers:")
    for tag, col in out["columns"].items():
        print(
            f"  {tag}: p_max={col['p_max']} energy_gap={col['energy_gap']}"
            f" spearman={col['spearman_vs_exact']}"
        )
    return EXIT_OK


def _cmd_encode(args) -> int:
    cfg = _config_from_args(args)
    text = encode_fcidump_to_text(cfg)
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return EXIT_OK


def _cmd_pool(args) -> int:
    from .reference import MIMatrix
    from .screening import generate_pool, percentiles, screen_pool, screening_report_csv

    pool = generate_pool(args.n_qubits)
    if args.mi:
        mi = MIMatrix.from_csv(Path(args.mi).read_text())
        scored = percentiles(pool, mi)
        if args.p_cut is not None:
            pool = screen_pool(pool, mi, args.p_cut)
        if args.report:
            Path(args.report).write_text(screening_report_csv(scored, args.p_cut))
            print(f"wrote {args.report}")
    elif args.p_cut is not None:
        raise ConfigError("--p-cut requires --mi")
    if args.out:
        Path(args.out).write_text(pool.to_text())
        print(f"wrote {args.out} ({len(pool)} words)")
    else:
        print(f"pool size: {len(pool)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mivqe",
        description="MI-assisted adaptive VQE on a classical simulator",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="full pipeline on one Hamiltonian")
    _add_config_flags(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="series of runs, aggregate CSV")
    _add_config_flags(p_sweep)
    p_sweep.add_argument("fcidumps", nargs="+", help="FCIDUMP files, one run each")
    p_sweep.add_argument("--workers", type=int, default=1)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_mi = sub.add_parser("mi-report", help="MI de-convergence comparison")
    _add_config_flags(p_mi)
    p_mi.add_argument("--mps", action="append", metavar="chi=<n>,sweeps=<n>",
                      help="repeatable de-converged DMRG setting")
    p_mi.set_defaults(func=_cmd_mi_report)

    p_enc = sub.add_parser("encode", help="FCIDUMP -> canonical Pauli text")
    _add_config_flags(p_enc)
    p_enc.add_argument("--out", help="output path (stdout if omitted)")
    p_enc.set_defaults(func=_cmd_encode)

    p_pool = sub.add_parser("pool", help="generate/screen entangler pools")
    p_pool.add_argument("--n-qubits", dest="n_qubits", type=int, required=True)
    p_pool.add_argument("--mi", help="MI CSV for strengths")
    p_pool.add_argument("--p-cut", dest="p_cut", type=float)
    p_pool.add_argument("--out", help="pool text output path")
    p_pool.add_argument("--report", help="screening CSV output path")
    p_pool.set_defaults(func=_cmd_pool)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
