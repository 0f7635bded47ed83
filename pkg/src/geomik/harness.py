"""Parameter/pose I/O, round-trip validation, trajectories and benchmarking."""
from __future__ import annotations

import csv
import json
import math
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analytic import IkFailure, ik_solve, ik_solve_batch, pose_errors
from .dls import DlsConfig, ik_dls
from .fk import fk
from .model import (
    DEFAULT_LIMITS,
    ArmParams,
    BranchLabel,
    IkSolution,
    JointAngles,
    Pose,
    angle_diff,
    pose_from_axes,
    pose_from_rotation,
)

PARAM_KEYS = ("a2", "a3", "d4", "d5", "d6")
CSV_HEADER = [
    "idx", "target_x", "target_y", "target_z", "achieved_x", "achieved_y", "achieved_z",
    "pos_err", "ori_err", "shoulder", "elbow", "wrist",
]


class ParseError(ValueError):
    pass


class ValidationError(ValueError):
    pass


class UnreachableWaypoint(Exception):
    def __init__(self, index: int, failure: IkFailure):
        super().__init__(f"waypoint {index}: {failure}")
        self.index = index
        self.failure = failure


def fmt(x: float) -> str:
    """17 significant digits: lossless for doubles."""
    return format(x, ".17g")


# --------------------------------------------------------------------- I/O


def _read_json(source, what: str):
    try:
        return json.loads(source)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{what}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def params_from_dict(data) -> ArmParams:
    if not isinstance(data, dict):
        raise ParseError("params: top level must be a JSON object")
    missing = [k for k in PARAM_KEYS if k not in data]
    if missing:
        raise ValidationError(f"params: missing field(s) {', '.join(missing)}")
    extra = sorted(set(data) - set(PARAM_KEYS) - {"joint_limits"})
    if extra:
        warnings.warn(f"params: ignoring unknown field(s) {', '.join(extra)}", stacklevel=2)
    values = {}
    for k in PARAM_KEYS:
        v = data[k]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ValidationError(f"params: field {k} must be a number, got {v!r}")
        values[k] = float(v)
    limits = data.get("joint_limits", DEFAULT_LIMITS)
    try:
        limits = tuple((float(lo), float(hi)) for lo, hi in limits)
    except (TypeError, ValueError):
        raise ValidationError("params: joint_limits must be 6 [lo, hi] pairs") from None
    try:
        return ArmParams(**values, joint_limits=limits)
    except ValueError as exc:
        raise ValidationError(f"params: {exc}") from None


def load_params(path) -> ArmParams:
    text = Path(path).read_text()
    return params_from_dict(_read_json(text, str(path)))


def params_to_dict(params: ArmParams) -> dict:
    d = {k: getattr(params, k) for k in PARAM_KEYS}
    d["joint_limits"] = [list(p) for p in params.joint_limits]
    return d


def pose_from_dict(data) -> Pose:
    if not isinstance(data, dict) or "p" not in data:
        raise ParseError('pose: expected an object with "p" and either axes or "rotation"')
    try:
        if "rotation" in data:
            return pose_from_rotation(data["p"], data["rotation"])
        if "x_axis" in data and "z_axis" in data:
            return pose_from_axes(data["p"], data["x_axis"], data["z_axis"])
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"pose: {exc}") from None
    raise ParseError('pose: need "x_axis" and "z_axis", or "rotation"')


def pose_to_dict(pose: Pose) -> dict:
    return {"p": list(pose.p), "x_axis": list(pose.x_axis), "z_axis": list(pose.z_axis)}


def load_pose(source: str) -> Pose:
    """Pose from a file path or an inline JSON string."""
    text = source if source.lstrip().startswith("{") else Path(source).read_text()
    return pose_from_dict(_read_json(text, "pose"))


def load_waypoints(path) -> list[Pose]:
    data = _read_json(Path(path).read_text(), str(path))
    if isinstance(data, dict):
        data = data.get("waypoints")
    if not isinstance(data, list):
        raise ParseError("waypoints: expected a list of poses")
    return [pose_from_dict(d) for d in data]


def solution_to_dict(sol: IkSolution) -> dict:
    return {
        "theta": list(sol.angles),
        "branch": str(sol.branch),
        "pos_residual": sol.pos_residual,
        "ori_residual": sol.ori_residual,
    }


# -------------------------------------------------------------- sampling


def sample_configurations(n: int, rng: np.random.Generator, params: ArmParams) -> list[JointAngles]:
    lo = np.array([l for l, _ in params.joint_limits])
    hi = np.array([h for _, h in params.joint_limits])
    raw = rng.uniform(lo, hi, size=(n, 6))
    return [JointAngles(*map(float, row)) for row in raw]


# ------------------------------------------------------------ round trip


@dataclass
class SampleRecord:
    idx: int
    target: Pose
    achieved: Pose
    pos_err: float
    ori_err: float
    branch: BranchLabel


@dataclass
class ValidationReport:
    n_samples: int
    n_solved: int
    n_singular_skipped: int
    max_pos_err: float
    mean_pos_err: float
    max_ori_err: float
    records: list[SampleRecord] = field(default_factory=list)
    failures: list[tuple[int, str]] = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "n_solved": self.n_solved,
            "n_singular_skipped": self.n_singular_skipped,
            "n_failed": len(self.failures),
            "max_pos_err": self.max_pos_err,
            "mean_pos_err": self.mean_pos_err,
            "max_ori_err": self.max_ori_err,
        }


def run_roundtrip(n: int, rng_seed: int, params: ArmParams, exclusion: float = 0.05,
                  workers: int | None = None) -> ValidationReport:
    """Sample joint space, map through fk, solve IK and record the best error.

    Samples with ``|sin(theta5)| < exclusion`` are counted as singular and
    skipped.
    """
    if n <= 0:
        raise ValueError("n must be > 0")
    if not 0 <= exclusion < 1:
        raise ValueError("exclusion must be in [0, 1)")
    rng = np.random.default_rng(rng_seed)
    configs = sample_configurations(n, rng, params)
    keep = [i for i, q in enumerate(configs) if abs(math.sin(q.theta5)) >= exclusion]
    targets = [fk(configs[i], params) for i in keep]
    results = ik_solve_batch(targets, params, workers=workers)

    records, failures = [], []
    for i, target, res in zip(keep, targets, results):
        if isinstance(res, IkFailure):
            failures.append((i, str(res)))
            continue
        best = min(res, key=lambda s: (s.pos_residual, s.ori_residual))
        achieved = fk(best.angles, params)
        pos, ori = pose_errors(achieved, target)
        records.append(SampleRecord(i, target, achieved, pos, ori, best.branch))

    pos_errs = [r.pos_err for r in records]
    return ValidationReport(
        n_samples=n,
        n_solved=len(records),
        n_singular_skipped=n - len(keep),
        max_pos_err=max(pos_errs, default=0.0),
        mean_pos_err=float(np.mean(pos_errs)) if pos_errs else 0.0,
        max_ori_err=max((r.ori_err for r in records), default=0.0),
        records=records,
        failures=failures,
    )


def emit_scatter(report: ValidationReport, path, svg_path=None) -> None:
    """Write the per-sample CSV and, optionally, a target-vs-achieved SVG."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in report.records:
            w.writerow(
                [r.idx, *map(fmt, r.target.p), *map(fmt, r.achieved.p), fmt(r.pos_err),
                 fmt(r.ori_err), *r.branch]
            )
    if svg_path is not None:
        _scatter_svg(report, svg_path)


def read_scatter(path) -> list[dict]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise ParseError(f"{path}: unexpected header {reader.fieldnames}")
        for row in reader:
            out = {"idx": int(row["idx"])}
            for k in CSV_HEADER[1:9]:
                out[k] = float(row[k])
            out["branch"] = BranchLabel(row["shoulder"], row["elbow"], row["wrist"])
            rows.append(out)
    return rows


def _scatter_svg(report: ValidationReport, path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "geomik"
    tgt = np.array([r.target.p for r in report.records]).reshape(-1, 3)
    ach = np.array([r.achieved.p for r in report.records]).reshape(-1, 3)
    fig, axes = plt.subplots(1, 3, figsize=(13, 4.5))
    for ax, (i, j), names in zip(axes, [(0, 1), (0, 2), (1, 2)], ["xy", "xz", "yz"]):
        ax.scatter(tgt[:, i], tgt[:, j], s=30, facecolors="none", edgecolors="tab:blue",
                   label="target")
        ax.scatter(ach[:, i], ach[:, j], s=14, marker="x", color="tab:red", linewidths=0.8,
                   label="from IK")
        ax.set_xlabel(f"{names[0]} [m]")
        ax.set_ylabel(f"{names[1]} [m]")
        ax.set_aspect("equal", adjustable="datalim")
    axes[0].legend(loc="upper right")
    fig.suptitle(f"IK round trip: {report.n_solved} samples, max error {report.max_pos_err:.2e} m")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


# ------------------------------------------------------------ trajectory


def joint_distance(a, b) -> float:
    """Max per-joint angular distance (mod 2pi)."""
    return max(angle_diff(x, y) for x, y in zip(a, b))


@dataclass
class TrajectoryResult:
    waypoints: list[Pose]
    angles: list[JointAngles]
    branches: list[BranchLabel]
    max_jump: float
    jumps: list[float]
    solution_sets: list[list[IkSolution]]


def run_trajectory(waypoints, params: ArmParams, reference=None) -> TrajectoryResult:
    """Pick one IK solution per waypoint, staying as close as possible to the last."""
    prev = JointAngles(*(reference if reference is not None else [0.0] * 6))
    chosen, branches, jumps, sets = [], [], [], []
    for k, pose in enumerate(waypoints):
        try:
            sols = ik_solve(pose, params)
        except IkFailure as exc:
            raise UnreachableWaypoint(k, exc) from exc
        # solutions are label-sorted and min() keeps the first, so ties go to label order
        best = min(sols, key=lambda s: joint_distance(s.angles, prev))
        if k > 0:
            jumps.append(joint_distance(best.angles, prev))
        chosen.append(best.angles)
        branches.append(best.branch)
        sets.append(sols)
        prev = best.angles
    return TrajectoryResult(list(waypoints), chosen, branches, max(jumps, default=0.0), jumps, sets)


def write_trajectory(result: TrajectoryResult, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["idx", *(f"theta{i}" for i in range(1, 7)), "branch", "jump"])
        for k, (q, b) in enumerate(zip(result.angles, result.branches)):
            jump = result.jumps[k - 1] if k > 0 else 0.0
            w.writerow([k, *map(fmt, q), str(b), fmt(jump)])


# ------------------------------------------------------------- benchmark


@dataclass
class BenchReport:
    n_targets: int
    analytic_median: float
    analytic_p95: float
    dls_median: float
    dls_p95: float
    dls_mean_iterations: float
    n_dls_converged: int
    max_agreement_err: float
    speed_ratio: float

    def as_dict(self, timing: bool = True) -> dict:
        d = {
            "n_targets": self.n_targets,
            "analytic": {"median": self.analytic_median, "p95": self.analytic_p95},
            "dls": {
                "median": self.dls_median,
                "p95": self.dls_p95,
                "mean_iterations": self.dls_mean_iterations,
                "n_converged": self.n_dls_converged,
                "max_agreement_err": self.max_agreement_err,
            },
            "speed_ratio": self.speed_ratio,
        }
        if not timing:
            del d["analytic"], d["speed_ratio"]
            del d["dls"]["median"], d["dls"]["p95"]
        return d


def bench_targets(n: int, rng_seed: int, params: ArmParams, exclusion: float = 0.05):
    """Deterministic non-singular (generator, pose, perturbed seed) triples."""
    rng = np.random.default_rng(rng_seed)
    out = []
    while len(out) < n:
        q = sample_configurations(1, rng, params)[0]
        if abs(math.sin(q.theta5)) < exclusion:
            continue
        seed = JointAngles(*(np.asarray(q) + rng.uniform(-0.1, 0.1, size=6)).tolist())
        out.append((q, fk(q, params), seed))
    return out


def run_bench(n: int, rng_seed: int, params: ArmParams, cfg: DlsConfig = DlsConfig()) -> BenchReport:
    """Time the analytic and DLS solvers on the same targets.

    DLS starts from the generating configuration perturbed by up to 0.1 rad
    per joint. Agreement is the pose-level distance between each converged
    DLS answer and the closest analytic solution.
    """
    if n <= 0:
        raise ValueError("n must be > 0")
    targets = bench_targets(n, rng_seed, params)
    t_an, t_dls, iters = [], [], []
    n_conv, agree = 0, 0.0
    for _, pose, seed in targets:
        t0 = time.perf_counter()
        sols = ik_solve(pose, params)
        t1 = time.perf_counter()
        res = ik_dls(pose, seed, params, cfg)
        t2 = time.perf_counter()
        t_an.append(t1 - t0)
        t_dls.append(t2 - t1)
        iters.append(res.iterations)
        if res.converged:
            n_conv += 1
            got = fk(res.angles, params)
            agree = max(agree, min(max(pose_errors(got, fk(s.angles, params))) for s in sols))
    a_med, d_med = float(np.median(t_an)), float(np.median(t_dls))
    return BenchReport(
        n_targets=n,
        analytic_median=a_med,
        analytic_p95=float(np.percentile(t_an, 95)),
        dls_median=d_med,
        dls_p95=float(np.percentile(t_dls, 95)),
        dls_mean_iterations=float(np.mean(iters)),
        n_dls_converged=n_conv,
        max_agreement_err=agree,
        speed_ratio=d_med / a_med,
    )
