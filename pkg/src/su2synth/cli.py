"""Command-line front end: ``su2synth {solve,slice,trace,synth,oracle,bounds}``.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time

import numpy as np

from . import _accel
from .errors import InvalidInputError, NumericalError, SU2SynthError, UnreachableError
from .oracle import dijkstra_min_time
from .solver import (
    SolverConfig,
    kruskov_inverse,
    load_field,
    save_field,
    slice_export,
    solve,
    write_slice_csv,
)
from .su2 import as_group_element, exp_map, log_map
from .synthesis import (
    bounds_report,
    compile_gates,
    reverse_to_forward,
    trace_trajectory,
    write_trajectory_csv,
)

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3

log = logging.getLogger("su2synth")

_FLAG_TO_CONFIG = {
    "grid_h": "h",
    "grid_extent": "R",
    "target_radius": "eps_target",
    "dirs": "n_dir",
    "tol": "tol",
    "max_iters": "max_iters",
}


def parse_matrix(text: str) -> np.ndarray:
    """Four row-major complex entries written as ``re+imi`` tokens."""
    tokens = text.replace(",", " ").split()
    if len(tokens) != 4:
        raise InvalidInputError("expected 4 complex entries, got %d" % len(tokens))
    try:
        vals = [complex(t.strip().replace("i", "j")) for t in tokens]
    except ValueError as exc:
        raise InvalidInputError("bad complex entry in %r" % text) from exc
    return as_group_element(np.array(vals).reshape(2, 2))


def parse_point(text: str) -> np.ndarray:
    parts = text.replace(",", " ").split()
    if len(parts) != 3:
        raise InvalidInputError("expected chart point 'a,b,c', got %r" % text)
    try:
        return np.array([float(p) for p in parts])
    except ValueError as exc:
        raise InvalidInputError("bad chart point %r" % text) from exc


def _start_element(args) -> np.ndarray:
    if getattr(args, "matrix", None):
        return parse_matrix(args.matrix)
    if getattr(args, "start", None):
        return exp_map(parse_point(args.start))
    raise InvalidInputError("give a chart point (--start) or a matrix (--matrix)")


def solver_config(args) -> SolverConfig:
    """Defaults, then the JSON config file, then explicit flags."""
    values = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            values.update(json.load(fh))
    for flag, key in _FLAG_TO_CONFIG.items():
        v = getattr(args, flag, None)
        if v is not None:
            values[key] = v
    unknown = set(values) - set(SolverConfig.__dataclass_fields__)
    if unknown:
        raise InvalidInputError("unknown config keys: %s" % sorted(unknown))
    return SolverConfig(**values)


def cmd_solve(args) -> int:
    cfg = solver_config(args)
    t0 = time.perf_counter()
    field = solve(cfg, record_history=False)
    wall = time.perf_counter() - t0
    save_field(field, args.out, extra={"seed": args.seed})
    print("iterations=%d residual=%.3e converged=%s wall=%.2fs out=%s"
          % (field.iterations, field.residual, field.converged, wall, args.out))
    if not field.converged:
        print("NO_CONVERGENCE: max_iters=%d residual=%.3e" % (field.iterations, field.residual),
              file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_slice(args) -> int:
    field = load_field(args.field)
    rows = slice_export(field, args.plane, args.offset)
    write_slice_csv(rows, args.out, args.plane)
    print("wrote %d rows to %s" % (len(rows), args.out))
    return EXIT_OK


def cmd_trace(args) -> int:
    field = load_field(args.field)
    traj = trace_trajectory(_start_element(args), field, dt=args.dt)
    write_trajectory_csv(traj, args.out)
    print("duration=%.6f steps=%d terminal=%s distance=%.3e"
          % (traj.duration, len(traj), traj.terminal, traj.terminal_distance))
    if not traj.terminal:
        print("TIME_CAP_EXCEEDED", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_synth(args) -> int:
    field = load_field(args.field)
    traj = trace_trajectory(_start_element(args), field, dt=args.dt)
    seq = reverse_to_forward(compile_gates(traj))
    with open(args.out, "w") as fh:
        fh.write(seq.to_json())
    print("gates=%d error=%.3e duration=%.6f" % (len(seq.gates), seq.error, traj.duration))
    return EXIT_OK


def cmd_oracle(args) -> int:
    U = _start_element(args)
    res = dijkstra_min_time(U, h_o=args.h_o, tau=args.tau, n_dir=args.dirs or 16)
    line = "oracle=%.6f bound=%.3f nodes=%d" % (res.time, res.bound, res.settled_nodes)
    if args.field:
        field = load_field(args.field)
        try:
            C = kruskov_inverse(field, log_map(U))
        except UnreachableError:
            C = float("inf")
        line += " solver=%.6f gap=%.6f" % (C, abs(C - res.time))
    print(line)
    return EXIT_OK


def cmd_bounds(args) -> int:
    rep = bounds_report(args.C, args.n, args.eps)
    for key in ("C", "n_qubits", "epsilon", "scale", "upper_bound", "lower_bound", "disclaimer"):
        val = rep[key]
        print("%s: %s" % (key, "%.12g" % val if isinstance(val, float) else val))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="su2synth", description=__doc__.splitlines()[0])
    p.add_argument("--no-numba", action="store_true", help="use the pure-numpy kernels")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, grid=False):
        sp.add_argument("--seed", type=int, default=0)
        if grid:
            sp.add_argument("--config", help="JSON file with solver settings")
            sp.add_argument("--grid-h", type=float)
            sp.add_argument("--grid-extent", type=float)
            sp.add_argument("--target-radius", type=float)
            sp.add_argument("--dirs", type=int)
            sp.add_argument("--tol", type=float)
            sp.add_argument("--max-iters", type=int)

    def start(sp):
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--start", "--target", dest="start", help="chart point 'a,b,c'")
        g.add_argument("--matrix", help="4 entries 're+imi', row-major")

    sp = sub.add_parser("solve", help="solve the value field")
    common(sp, grid=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("slice", help="export C over a coordinate plane as CSV")
    common(sp)
    sp.add_argument("--field", required=True)
    sp.add_argument("--plane", default="ab")
    sp.add_argument("--offset", type=float, default=0.0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_slice)

    sp = sub.add_parser("trace", help="trace the optimal path to the identity")
    common(sp)
    sp.add_argument("--field", required=True)
    start(sp)
    sp.add_argument("--dt", type=float)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_trace)

    sp = sub.add_parser("synth", help="compile a gate sequence for a target")
    common(sp)
    sp.add_argument("--field", required=True)
    start(sp)
    sp.add_argument("--dt", type=float)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("oracle", help="lattice shortest-path minimum time")
    common(sp)
    start(sp)
    sp.add_argument("--h-o", type=float, default=0.05)
    sp.add_argument("--tau", type=float, default=0.05)
    sp.add_argument("--dirs", type=int)
    sp.add_argument("--field", help="value field to compare against")
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("bounds", help="gate-complexity scale report")
    common(sp)
    sp.add_argument("--C", type=float, required=True)
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--eps", type=float, required=True)
    sp.set_defaults(func=cmd_bounds)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.no_numba:
        _accel.USE_NUMBA = False
    try:
        return args.func(args)
    except InvalidInputError as exc:
        print("%s: %s" % (exc.code, exc), file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print("%s: %s" % (exc.code, exc), file=sys.stderr)
        return EXIT_NUMERIC
    except (OSError, json.JSONDecodeError) as exc:
        print("INVALID_INPUT: %s" % exc, file=sys.stderr)
        return EXIT_INPUT
    except SU2SynthError as exc:  # pragma: no cover
        print("%s: %s" % (exc.code, exc), file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
