"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 input validation error,
3 solver failure.
"""
from __future__ import annotations

import argparse
import json
import sys
import time

from .analytic import IkFailure, ik_solve
from .dls import DlsConfig
from .fk import fk
from .harness import (
    ParseError,
    UnreachableWaypoint,
    ValidationError,
    emit_scatter,
    load_params,
    load_pose,
    load_waypoints,
    pose_to_dict,
    run_bench,
    run_roundtrip,
    run_trajectory,
    solution_to_dict,
    write_trajectory,
)
from .model import DegenerateAxes, JointAngles

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(s: str) -> int:
    v = int(s)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="geomik", description="Closed-form IK for a 6R arm with lateral offset.")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="solve IK for one pose")
    s.add_argument("--params", required=True)
    s.add_argument("--pose", required=True, help="pose JSON file or inline JSON")
    s.add_argument("--all-branches", action="store_true")
    s.add_argument("--json", action="store_true")

    f = sub.add_parser("fk", help="forward kinematics")
    f.add_argument("--params", required=True)
    f.add_argument("--angles", required=True, nargs=6, type=float, metavar="THETA")

    v = sub.add_parser("validate", help="randomized FK/IK round-trip experiment")
    v.add_argument("--params", required=True)
    v.add_argument("--n", required=True, type=_positive_int)
    v.add_argument("--seed", required=True, type=int)
    v.add_argument("--exclusion", type=float, default=0.05)
    v.add_argument("--out", required=True)
    v.add_argument("--svg")

    b = sub.add_parser("bench", help="analytic vs damped-least-squares timing")
    b.add_argument("--params", required=True)
    b.add_argument("--n", required=True, type=_positive_int)
    b.add_argument("--seed", required=True, type=int)
    b.add_argument("--damping", type=float, default=DlsConfig.damping)
    b.add_argument("--max-iters", type=_positive_int, default=DlsConfig.max_iters)

    t = sub.add_parser("traj", help="solve a waypoint list with branch continuity")
    t.add_argument("--params", required=True)
    t.add_argument("--waypoints", required=True)
    t.add_argument("--out", required=True)
    return p


def _solve(args) -> int:
    params = load_params(args.params)
    pose = load_pose(args.pose)
    try:
        sols = ik_solve(pose, params)
    except IkFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    if not args.all_branches:
        sols = sols[:1]
    if args.json:
        print(json.dumps([solution_to_dict(s) for s in sols]))
    else:
        for s in sols:
            angles = " ".join(f"{t: .9f}" for t in s.angles)
            print(f"{s.branch}  {angles}  pos_res={s.pos_residual:.2e} ori_res={s.ori_residual:.2e}")
    return EXIT_OK


def _fk(args) -> int:
    params = load_params(args.params)
    print(json.dumps(pose_to_dict(fk(JointAngles(*args.angles), params))))
    return EXIT_OK


def _validate(args) -> int:
    if not 0 <= args.exclusion < 1:
        raise UsageError("--exclusion must be in [0, 1)")
    params = load_params(args.params)
    t0 = time.perf_counter()
    report = run_roundtrip(args.n, args.seed, params, args.exclusion)
    elapsed = time.perf_counter() - t0
    emit_scatter(report, args.out, args.svg)
    print(json.dumps(report.summary()))
    print(f"elapsed {elapsed:.2f} s", file=sys.stderr)
    for idx, msg in report.failures:
        print(f"sample {idx}: {msg}", file=sys.stderr)
    return EXIT_SOLVER if report.failures else EXIT_OK


def _bench(args) -> int:
    params = load_params(args.params)
    cfg = DlsConfig(damping=args.damping, max_iters=args.max_iters)
    report = run_bench(args.n, args.seed, params, cfg)
    print(json.dumps(report.as_dict()))
    return EXIT_OK


def _traj(args) -> int:
    params = load_params(args.params)
    waypoints = load_waypoints(args.waypoints)
    try:
        result = run_trajectory(waypoints, params)
    except UnreachableWaypoint as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    write_trajectory(result, args.out)
    print(json.dumps({"n_waypoints": len(waypoints), "max_jump": result.max_jump}))
    return EXIT_OK


COMMANDS = {"solve": _solve, "fk": _fk, "validate": _validate, "bench": _bench, "traj": _traj}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.cmd](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, ValidationError, DegenerateAxes, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
