"""Command-line front end: compile, simulate, verify, sweep.

Exit codes: 0 success, 1 validation failure (bad input document, bad flags,
non-symplectic target), 2 verification failure, 3 I/O error.
"""

import argparse
import json
import sys

import numpy as np

from . import multimode, serialize, simulator
from .errors import SchemaError
from .executor import exact_replay
from .simulator import PINNED_ZERO, db_to_r, run_program, sampled, vacuum

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_VERIFICATION = 2
EXIT_IO = 3

DEFAULT_VERIFY_DB = 130.0     # makes finite-squeezing map error negligible
DEFAULT_REALISTIC_DB = 10.0   # strong lab squeezing, for simulation runs
DEFAULT_VERIFY_TOL = 1e-4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cvcluster",
        description=(
            "Compile n-mode Gaussian unitaries to cluster-state homodyne "
            "programs and simulate them at finite squeezing."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_compile = sub.add_parser("compile", help="compile a symplectic target file")
    p_compile.add_argument("--target", required=True, help="target JSON file")
    p_compile.add_argument("--out", required=True, help="program JSON output file")
    p_compile.add_argument(
        "--free-param",
        type=float,
        default=None,
        help="pin the free kappa1 of a one-mode four-step synthesis",
    )

    p_sim = sub.add_parser("simulate", help="run a program on vacuum inputs")
    p_sim.add_argument("--program", required=True)
    p_sim.add_argument("--db", type=float, default=DEFAULT_REALISTIC_DB,
                       help="ancilla squeezing in dB (default 10, strong lab squeezing)")
    p_sim.add_argument("--policy", choices=["pinned", "sampled"], default="pinned")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--shots", type=int, default=1)
    p_sim.add_argument("--out", default=None, help="result JSON (default stdout)")

    p_verify = sub.add_parser("verify", help="check a program against its target")
    p_verify.add_argument("--program", required=True)
    p_verify.add_argument("--db", type=float, default=DEFAULT_VERIFY_DB)
    p_verify.add_argument("--tol", type=float, default=DEFAULT_VERIFY_TOL)
    p_verify.add_argument("--out", default=None, help="report JSON (default stdout)")

    p_sweep = sub.add_parser("sweep", help="squeezing sweep of map error and excess")
    p_sweep.add_argument("--program", required=True)
    p_sweep.add_argument("--db", required=True,
                         help="comma-separated squeezing list in dB")
    p_sweep.add_argument("--out", default=None, help="CSV output (default stdout)")
    return parser


def cmd_compile(args) -> int:
    target = serialize.load_target(args.target)
    try:
        program, report = multimode.compile(target, kappa1=args.free_param)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    serialize.save_program(program, args.out)
    serialize.save(serialize.report_to_dict(report), args.out + ".report.json")
    print(
        f"compiled {target.n}-mode target: {report.ancilla_count} ancillas, "
        f"noise proxy {report.noise_proxy:.6g}, "
        f"replay residual {report.replay_residual:.3e}"
    )
    print(f"program written to {args.out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    program = serialize.load_program(args.program)
    if args.policy == "sampled" and args.shots < 1:
        print("error: sampled policy requires shots >= 1", file=sys.stderr)
        return EXIT_VALIDATION
    # Pre-flight on the exact linear algebra: rejects degenerate teleport
    # angles and schedules that leave antisqueezed noise on an output.
    exact_replay(program)
    r = db_to_r(args.db)
    n = program.n
    result = {
        "version": serialize.RESULT_VERSION,
        "db": args.db,
        "policy": args.policy,
        "seed": args.seed if args.policy == "sampled" else None,
        "shots": args.shots if args.policy == "sampled" else 1,
    }
    if args.policy == "pinned":
        state, outcomes = run_program(program, vacuum(n), r, PINNED_ZERO)
        result["outcomes"] = [{str(k): v for k, v in outcomes.items()}]
        result["output"] = serialize.state_to_dict(state)
    else:
        records = []
        means = []
        cov = None
        for shot in range(args.shots):
            state, outcomes = run_program(
                program, vacuum(n), r, sampled(args.seed + shot)
            )
            records.append({str(k): v for k, v in outcomes.items()})
            means.append(state.mean)
            cov = state.cov
        mean = np.mean(means, axis=0)
        result["outcomes"] = records
        result["perShotMeans"] = [m.tolist() for m in means]
        result["output"] = serialize.state_to_dict(
            simulator.GaussianState(mean, cov)
        )
    text = serialize.dumps(result)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text + "\n")
        print(f"simulation result written to {args.out}")
    else:
        print(text)
    return EXIT_OK


def cmd_verify(args) -> int:
    program = serialize.load_program(args.program)
    r = db_to_r(args.db)
    effective, excess = simulator.extract_effective_map(program, r)
    diff = np.abs(effective.matrix - program.target.matrix)
    error = float(diff.max())
    worst = tuple(int(i) for i in np.unravel_index(int(np.argmax(diff)), diff.shape))
    excess_trace = float(np.trace(excess))
    passed = error < args.tol
    report = {
        "version": "verification-report/1",
        "db": args.db,
        "tolerance": args.tol,
        "effectiveMapError": error,
        "worstEntry": list(worst),
        "excessTrace": excess_trace,
        "pass": passed,
    }
    text = serialize.dumps(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text + "\n")
    else:
        print(text)
    status = "PASS" if passed else "FAIL"
    print(
        f"{status}: effective-map error {error:.3e} at entry {worst} "
        f"(tolerance {args.tol:.1e}, {args.db} dB)",
        file=sys.stderr if not passed else sys.stdout,
    )
    return EXIT_OK if passed else EXIT_VERIFICATION


def cmd_sweep(args) -> int:
    program = serialize.load_program(args.program)
    try:
        db_values = [float(tok) for tok in args.db.split(",") if tok.strip()]
    except ValueError:
        print(f"error: cannot parse squeezing list {args.db!r}", file=sys.stderr)
        return EXIT_VALIDATION
    if not db_values:
        print("error: empty squeezing list", file=sys.stderr)
        return EXIT_VALIDATION
    rows = []
    for db in db_values:
        effective, excess = simulator.extract_effective_map(program, db_to_r(db))
        error = float(np.max(np.abs(effective.matrix - program.target.matrix)))
        rows.append((db, error, float(np.trace(excess))))
    if args.out:
        serialize.write_sweep_csv(rows, args.out)
        print(f"sweep written to {args.out}")
    else:
        serialize.write_sweep_csv(rows, sys.stdout)
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_VALIDATION
    handlers = {
        "compile": cmd_compile,
        "simulate": cmd_simulate,
        "verify": cmd_verify,
        "sweep": cmd_sweep,
    }
    try:
        return handlers[args.command](args)
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as exc:
        print(f"i/o error: cannot parse JSON: {exc}", file=sys.stderr)
        return EXIT_IO
    except SchemaError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValueError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
