"""Command-line entry point: ``somdsa gen|solve|simulate|bench``.

Exit codes: 0 ok, 1 error (including usage errors), 2 SOM did not converge.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__, oracle, sim, som
from .model import InstanceError, canonical_json, load_instance, save_instance
from .scenario import ConfigError, EventStreamError, generate_instance, load_events

log = logging.getLogger("somdsa")

EXIT_OK, EXIT_ERROR, EXIT_NONCONVERGED = 0, 1, 2
METHODS = ("som", "exact", "greedy", "random")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _density(text: str) -> float:
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"density must lie in [0, 1], got {v}")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {v}")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {v}")
    return v


def _add_solver_flags(p):
    p.add_argument("-i", "--instance", required=True, type=Path)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-epochs", type=_positive_int, default=som.SolverConfig.n_epochs)
    p.add_argument("--tol", type=_positive_float, default=som.SolverConfig.delta_w_tol)
    p.add_argument("--max-outer", type=_positive_int, default=som.SolverConfig.max_outer_steps)
    p.add_argument("--order", choices=("shuffled", "fixed"), default="shuffled")
    p.add_argument("--warm-start", action="store_true")
    p.add_argument("--no-timing", action="store_true", help="write elapsed_ms as 0 for byte-stable output")
    p.add_argument("-o", "--output", type=Path)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="somdsa", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a random instance")
    g.add_argument("--s", type=_positive_int, required=True)
    g.add_argument("--c", type=_positive_int, required=True)
    g.add_argument("--density", type=_density, default=0.3)
    g.add_argument("--rmin", type=int, default=1)
    g.add_argument("--rmax", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output", type=Path, required=True)

    s = sub.add_parser("solve", help="solve one instance")
    _add_solver_flags(s)
    s.add_argument("--method", choices=METHODS, default="som")
    s.add_argument("--trace", type=Path, help="trace CSV path (som only)")

    m = sub.add_parser("simulate", help="run the dynamic re-allocation simulator")
    _add_solver_flags(m)
    m.add_argument("-e", "--events", type=Path, required=True)
    m.add_argument("--metrics", type=Path, help="metrics CSV path")

    b = sub.add_parser("bench", help="compare solvers on an instance family")
    b.add_argument("--s", type=_positive_int, nargs="+", required=True)
    b.add_argument("--c", type=_positive_int, nargs="+", required=True)
    b.add_argument("--density", type=_density, nargs="+", default=[0.3])
    b.add_argument("--rmin", type=int, default=1)
    b.add_argument("--rmax", type=int, default=1)
    b.add_argument("--seeds", type=_positive_int, default=10)
    b.add_argument("--no-timing", action="store_true")
    b.add_argument("-o", "--output", type=Path)
    return parser


def _config(args) -> som.SolverConfig:
    return som.SolverConfig(
        seed=args.seed,
        n_epochs=args.n_epochs,
        delta_w_tol=args.tol,
        max_outer_steps=args.max_outer,
        presentation_order=args.order,
        warm_start=args.warm_start,
    )


def _sibling(path: Path, suffix: str) -> Path:
    return path.with_name(path.stem + suffix)


def _write_manifest(output: Path, command: str, config: dict, seed, fingerprint: str | None) -> None:
    manifest = {
        "command": command,
        "config": config,
        "seed": seed,
        "version": __version__,
        "fingerprint": fingerprint,
    }
    _sibling(output, ".manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")


def _jsonable(args) -> dict:
    return {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items() if k != "func"}


def cmd_gen(args) -> int:
    inst = generate_instance(args.s, args.c, args.density, (args.rmin, args.rmax), args.seed)
    save_instance(inst, args.output)
    fp = inst.fingerprint()
    _write_manifest(args.output, "gen", _jsonable(args), args.seed, fp)
    print(fp)
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    config = _config(args)
    trace_csv = None
    if args.method == "som":
        t0 = time.perf_counter()
        res = som.solve(inst, config)
        report = oracle.make_report(inst, res.assignment, "som", t0, res.converged, res.outer_steps)
        trace_csv = res.trace_csv()
    elif args.method == "exact":
        report = oracle.exact_solve(inst)
    elif args.method == "greedy":
        report = oracle.greedy_solve(inst)
    else:
        report = oracle.random_solve(inst, args.seed)
    text = report.to_json(timing=not args.no_timing)
    if args.output is None:
        sys.stdout.write(text)
    else:
        args.output.write_text(text)
        _write_manifest(args.output, "solve", {**_jsonable(args), **asdict(config)}, args.seed, inst.fingerprint())
    if trace_csv is not None:
        trace_path = args.trace or (None if args.output is None else _sibling(args.output, ".trace.csv"))
        if trace_path is not None:
            trace_path.write_text(trace_csv)
    log.info("%s cost=%s converged=%s", args.method, report.cost, report.converged)
    return EXIT_OK if report.converged else EXIT_NONCONVERGED


def cmd_simulate(args) -> int:
    inst = load_instance(args.instance)
    events = load_events(args.events)
    config = _config(args)
    rows, final = sim.run_simulation(inst, events, config)
    table = sim.metrics_to_csv(rows)
    if args.output is None:
        sys.stdout.write(table)
    else:
        args.output.write_text(final.to_json())
        (args.metrics or _sibling(args.output, ".metrics.csv")).write_text(table)
        _write_manifest(args.output, "simulate", {**_jsonable(args), **asdict(config)}, args.seed, inst.fingerprint())
    if args.metrics is not None and args.output is None:
        args.metrics.write_text(table)
    return EXIT_OK


def bench_rows(sizes_s, sizes_c, densities, rmin, rmax, seeds, timing=True):
    """One row per (instance, method), in deterministic order."""
    rows = []
    for S in sizes_s:
        for C in sizes_c:
            for density in densities:
                for seed in range(seeds):
                    inst = generate_instance(S, C, density, (rmin, min(rmax, C)), seed)
                    if oracle.search_space(inst) > oracle.SEARCH_GUARD:
                        log.warning("skipping S=%d C=%d seed=%d: over the exact-solve guard", S, C, seed)
                        continue
                    name = f"s{S}_c{C}_d{density}_seed{seed}"
                    reports = [
                        oracle.exact_solve(inst),
                        oracle.greedy_solve(inst),
                        oracle.random_solve(inst, seed),
                        oracle.som_solve(inst, som.SolverConfig(seed=seed)),
                    ]
                    best = reports[0].cost
                    for r in reports:
                        rows.append({
                            "instance": name,
                            "method": r.method,
                            "cost": r.cost,
                            "optimal_gap": r.cost - best,
                            "elapsed_ms": round(r.elapsed_ms, 3) if timing else 0.0,
                        })
    return rows


def bench_summary(rows) -> dict:
    out = {}
    for method in METHODS:
        gaps = [r["optimal_gap"] for r in rows if r["method"] == method]
        if gaps:
            out[method] = {
                "instances": len(gaps),
                "mean_gap": float(np.mean(gaps)),
                "optimum_match_rate": float(np.mean([g == 0 for g in gaps])),
            }
    return out


def cmd_bench(args) -> int:
    rows = bench_rows(args.s, args.c, args.density, args.rmin, args.rmax, args.seeds, not args.no_timing)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["instance", "method", "cost", "optimal_gap", "elapsed_ms"], lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    summary = bench_summary(rows)
    if args.output is None:
        sys.stdout.write(buf.getvalue())
    else:
        args.output.write_text(buf.getvalue())
        _sibling(args.output, ".summary.json").write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n")
        _write_manifest(args.output, "bench", _jsonable(args), None, None)
    print(canonical_json(summary), file=sys.stderr if args.output is None else sys.stdout)
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "solve": cmd_solve, "simulate": cmd_simulate, "bench": cmd_bench}


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("SOMDSA_LOG", "WARNING").upper(), format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_ERROR
    except (InstanceError, ConfigError, EventStreamError, sim.SimulationError,
            oracle.SearchSpaceTooLarge, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
