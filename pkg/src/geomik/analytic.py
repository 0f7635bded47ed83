"""Closed-form geometric inverse kinematics with full branch enumeration.

Pipeline for a target pose (p, m6, k6):

1. wrist center ``P5 = p - d6*k6``
2. base angle t1 from ``d4 = x5*sin(t1) - y5*cos(t1)`` (two shoulder roots)
3. arm-plane frame r0, r1; wrist angle t5 and joint-5 axis k5 from r0 and k6
   (two wrist roots, the second being the flip ``(-t5, -k5)``)
4. in-plane wrist-link angle phi from r1 and k5, and planar target (X, Z)
5. shoulder pitch t2 from ``L1*cos(t2) + L2*sin(t2) = L3`` (two elbow roots)
6. t3 from the real part of the planar chain, filtered by the imaginary part
7. t4 from phi, t6 from m5 = k6 x k5 and the target m6

Each candidate is pushed back through forward kinematics and only emitted if
it reproduces the target.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

from .fk import fk, plane_axes
from .model import (
    ArmParams,
    BranchLabel,
    ElbowRealEq,
    IkSolution,
    JointAngles,
    Pose,
    TrigLineEq,
    Vec3,
    angle_between_axes,
    angle_diff,
    normalize_angle,
)

EPS_WRIST = 1e-8
EPS_DISC = 1e-9
EPS_POS = 1e-9
VERIFY_TOL = 1e-8
DEDUP_TOL = 1e-9
# roots closer than this are one (double) root
ROOT_MERGE_TOL = 1e-12


class IkFailure(Exception):
    """Base class for typed IK failures. ``kind`` names the failure."""

    kind = "IkFailure"

    def __init__(self, detail: str = ""):
        super().__init__(f"{self.kind}: {detail}" if detail else self.kind)
        self.detail = detail


class ShoulderSingularity(IkFailure):
    kind = "ShoulderSingularity"


class WristSingularity(IkFailure):
    kind = "WristSingularity"


class OutOfReach(IkFailure):
    kind = "OutOfReach"


class NoConsistentBranch(IkFailure):
    kind = "NoConsistentBranch"


@dataclass(frozen=True)
class PlanarTarget:
    X: float
    Z: float
    phi: float = 0.0


class WristBranch(NamedTuple):
    label: str
    theta5: float
    k5: Vec3
    r0: Vec3
    r1: Vec3


def solve_trig_line(eq: TrigLineEq) -> list[float]:
    """Roots of ``A*cos(t) + B*sin(t) = C`` via the half-angle substitution.

    With ``t = tan(theta/2)`` the equation becomes
    ``(C+A)*t^2 - 2*B*t + (C-A) = 0``. Each root is evaluated as
    ``2*atan2(num, den)`` using whichever of the two equivalent quotients
    ``(B +- sqrt(D))/(C+A)`` and ``(C-A)/(B -+ sqrt(D))`` is better
    conditioned, which also covers ``C+A = 0`` (root at pi).

    Returns the "+" root first. A double root is returned once.
    """
    A, B, C = eq.A, eq.B, eq.C
    if A == 0.0 and B == 0.0:
        raise ValueError("A and B cannot both be zero")
    disc = A * A + B * B - C * C
    if disc < -EPS_DISC * max(1.0, A * A + B * B):
        raise OutOfReach(f"no real root: discriminant {disc:.3e} for A={A}, B={B}, C={C}")
    sq = math.sqrt(disc) if disc > 0.0 else 0.0
    roots: list[float] = []
    for sign in (1.0, -1.0):
        n1, d1 = B + sign * sq, C + A
        n2, d2 = C - A, B - sign * sq
        if math.hypot(n1, d1) >= math.hypot(n2, d2):
            theta = 2.0 * math.atan2(n1, d1)
        else:
            theta = 2.0 * math.atan2(n2, d2)
        theta = normalize_angle(theta)
        if not any(angle_diff(theta, r) < ROOT_MERGE_TOL for r in roots):
            roots.append(theta)
    return roots


def solve_theta1(p5, d4: float) -> list[tuple[float, str]]:
    """Shoulder roots in the arcsin form: ``asin(d4/rho) + atan2(y5, x5)``."""
    x5, y5 = p5[0], p5[1]
    rho2 = x5 * x5 + y5 * y5
    if rho2 < EPS_POS * EPS_POS:
        raise ShoulderSingularity(f"wrist center on the base axis (rho^2={rho2:.3e})")
    scale2 = max(1.0, rho2 + p5[2] * p5[2])
    if rho2 < d4 * d4 - 1e-12 * scale2:
        raise ShoulderSingularity(
            f"wrist center inside the d4 cylinder (rho={math.sqrt(rho2):.6g} < |d4|={abs(d4):.6g})"
        )
    rho = math.sqrt(rho2)
    s = max(-1.0, min(1.0, d4 / rho))
    a = math.asin(s)
    base = math.atan2(y5, x5)
    out = [(normalize_angle(a + base), "A")]
    other = normalize_angle(math.pi - a + base)
    if angle_diff(other, out[0][0]) >= ROOT_MERGE_TOL:
        out.append((other, "B"))
    return out


def solve_theta1_quadratic(p5, d4: float) -> list[float]:
    """Shoulder roots in the half-angle quadratic form (K1=-y5, K2=x5, K3=d4)."""
    return solve_trig_line(TrigLineEq(-p5[1], p5[0], d4))


def wrist_frame(theta1: float, k6) -> list[WristBranch]:
    """Both wrist branches for a base angle; raises WristSingularity if k6 || r0."""
    k6 = Vec3(*k6)
    r0, r1 = plane_axes(theta1)
    c = r0.cross(k6)
    s = c.norm()
    if s < EPS_WRIST:
        raise WristSingularity(f"tool z-axis parallel to the arm-plane normal (|r0 x k6|={s:.3e})")
    theta5 = math.atan2(s, r0.dot(k6))
    k5 = c * (1.0 / s)
    return [
        WristBranch("A", theta5, k5, r0, r1),
        WristBranch("B", -theta5, -k5, r0, r1),
    ]


def signed_phi(r1, k5, r0) -> float:
    """Angle from r1 to k5, signed about r0."""
    r1 = Vec3(*r1)
    return math.atan2(r1.cross(k5).dot(r0), r1.dot(k5))


def project_p5(p5, theta1: float, d4: float, phi: float = 0.0) -> PlanarTarget:
    """Remove the lateral offset and express P5 in the arm plane (signed X)."""
    r0, r1 = plane_axes(theta1)
    p5p = Vec3(*p5) - r0 * d4
    return PlanarTarget(X=r1.dot(p5p), Z=p5p.z, phi=phi)


def shoulder_pitch_equation(target: PlanarTarget, params: ArmParams) -> TrigLineEq:
    """L1*cos(t2) + L2*sin(t2) = L3 from the modulus of the planar chain."""
    X, Z, phi = target.X, target.Z, target.phi
    a2, a3, d5 = params.a2, params.a3, params.d5
    cp, sp = math.cos(phi), math.sin(phi)
    L1 = 2 * a2 * X - 2 * a2 * d5 * cp
    L2 = 2 * a2 * Z - 2 * a2 * d5 * sp
    L3 = X * X + Z * Z + a2 * a2 + d5 * d5 - a3 * a3 - 2 * d5 * Z * sp - 2 * d5 * X * cp
    return TrigLineEq(L1, L2, L3)


def solve_theta2(target: PlanarTarget, params: ArmParams) -> list[tuple[float, str]]:
    eq = shoulder_pitch_equation(target, params)
    if eq.A == 0.0 and eq.B == 0.0:
        # wrist center exactly on the shoulder-pitch axis after the d5 offset
        raise NoConsistentBranch("planar target coincides with the shoulder; t2 undetermined")
    return [(t, "AB"[i]) for i, t in enumerate(solve_trig_line(eq))]


def z_residual(theta2: float, theta3: float, target: PlanarTarget, params: ArmParams) -> float:
    """Imaginary-part (vertical) residual of the planar chain."""
    return (
        params.a2 * math.sin(theta2)
        + params.a3 * math.sin(theta2 + theta3)
        + params.d5 * math.sin(target.phi)
        - target.Z
    )


def elbow_equation(theta2: float, target: PlanarTarget, params: ArmParams) -> ElbowRealEq:
    return ElbowRealEq(
        L4=target.X - params.a2 * math.cos(theta2) - params.d5 * math.cos(target.phi),
        L5=params.a3 * math.cos(theta2),
        L6=params.a3 * math.sin(theta2),
    )


def solve_theta3(theta2: float, target: PlanarTarget, params: ArmParams) -> list[float]:
    """Elbow roots consistent with both planar equations, best first.

    The half-angle quadratic only encodes the horizontal (real) equation
    ``L5*cos(t3) - L6*sin(t3) = L4``; its spurious root is removed by checking
    the vertical one.
    """
    roots = solve_trig_line(elbow_equation(theta2, target, params).as_trig_line())
    tol = 1e-8 * max(1.0, abs(target.Z))
    scored = sorted((abs(z_residual(theta2, t, target, params)), t) for t in roots)
    kept = [t for r, t in scored if r <= tol]
    if not kept:
        raise NoConsistentBranch(
            f"no t3 root satisfies the vertical equation (best residual {scored[0][0]:.3e})"
        )
    return kept


def solve_theta4(phi: float, theta2: float, theta3: float) -> float:
    return normalize_angle(phi - (theta2 + theta3) + math.pi / 2)


def solve_theta6(k5, k6, m6_target) -> float:
    """Angle from m5 = k6 x k5 to the target x-axis, signed about k6."""
    k6 = Vec3(*k6)
    m5 = k6.cross(k5)
    return math.atan2(m5.cross(m6_target).dot(k6), m5.dot(m6_target))


def pose_errors(achieved: Pose, target: Pose) -> tuple[float, float]:
    """(position error, max axis angle error) between two poses."""
    pos = (achieved.p - target.p).norm()
    ori = max(
        angle_between_axes(achieved.x_axis, target.x_axis),
        angle_between_axes(achieved.z_axis, target.z_axis),
    )
    return pos, ori


def _same_config(a, b) -> bool:
    return all(angle_diff(x, y) < DEDUP_TOL for x, y in zip(a, b))


def _enumerate(pose: Pose, params: ArmParams):
    """Yield (IkSolution | IkFailure) for every raw branch candidate."""
    k6, m6 = pose.z_axis, pose.x_axis
    p5 = pose.p - k6 * params.d6
    reach = params.reach
    if p5.norm() > reach + EPS_DISC * max(1.0, reach):
        raise OutOfReach(f"|P5|={p5.norm():.6g} exceeds the reach {reach:.6g}")

    shoulders = solve_theta1(p5, params.d4)
    # singular in any shoulder branch -> the solution set is not finite; refuse
    wrists = {}
    for theta1, sl in shoulders:
        try:
            wrists[sl] = wrist_frame(theta1, k6)
        except WristSingularity as exc:
            raise WristSingularity(f"shoulder branch {sl}: {exc.detail}") from None

    pos_tol = VERIFY_TOL * max(1.0, pose.p.norm())
    for theta1, sl in shoulders:
        planar = project_p5(p5, theta1, params.d4)
        for wb in wrists[sl]:
            phi = signed_phi(wb.r1, wb.k5, wb.r0)
            target = PlanarTarget(planar.X, planar.Z, phi)
            theta6 = solve_theta6(wb.k5, k6, m6)
            try:
                pitches = solve_theta2(target, params)
            except IkFailure as exc:
                yield type(exc)(f"branch {sl}?{wb.label}: {exc.detail}")
                continue
            for theta2, el in pitches:
                label = BranchLabel(sl, el, wb.label)
                try:
                    theta3 = solve_theta3(theta2, target, params)[0]
                except IkFailure as exc:
                    yield type(exc)(f"branch {label}: {exc.detail}")
                    continue
                theta4 = solve_theta4(phi, theta2, theta3)
                angles = JointAngles(theta1, theta2, theta3, theta4, wb.theta5, theta6).normalized()
                pos_err, ori_err = pose_errors(fk(angles, params), pose)
                if pos_err < pos_tol and ori_err < VERIFY_TOL:
                    yield IkSolution(angles, label, pos_err, ori_err)
                else:
                    yield NoConsistentBranch(
                        f"branch {label} fails FK check (pos {pos_err:.3e}, ori {ori_err:.3e})"
                    )


def ik_solve(pose: Pose, params: ArmParams) -> list[IkSolution]:
    """All closed-form solutions for ``pose``, sorted by branch label.

    Raises ShoulderSingularity / WristSingularity when the pose sits on a
    singularity of any branch, OutOfReach when no branch can reach it, and
    NoConsistentBranch when no candidate survives FK verification or the
    joint limits.
    """
    found: list[IkSolution] = []
    failures: list[IkFailure] = []
    for item in _enumerate(pose, params):
        (failures if isinstance(item, IkFailure) else found).append(item)

    found.sort(key=lambda s: s.branch)
    unique: list[IkSolution] = []
    for sol in found:
        if not any(_same_config(sol.angles, u.angles) for u in unique):
            unique.append(sol)

    if not unique:
        reach = [f for f in failures if isinstance(f, OutOfReach)]
        details = "; ".join(f.detail for f in failures)
        if reach:
            raise OutOfReach(details)
        raise NoConsistentBranch(details)

    allowed = [s for s in unique if params.within_limits(s.angles)]
    if not allowed:
        raise NoConsistentBranch(f"all {len(unique)} solutions violate the joint limits")
    return allowed


def ik_solve_batch(poses, params: ArmParams, workers: int | None = None) -> list:
    """Solve many poses; each entry is a solution list or the IkFailure raised.

    Output order follows input order regardless of ``workers``.
    """

    def one(pose):
        try:
            return ik_solve(pose, params)
        except IkFailure as exc:
            return exc

    if workers is None or workers <= 1:
        return [one(p) for p in poses]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, poses))


def branch_residuals(pose: Pose, sol: IkSolution, params: ArmParams) -> dict[str, float]:
    """Scaled residuals of the base, shoulder-pitch and vertical equations."""
    t1, t2, t3, t4, _, _ = sol.angles
    p5 = pose.p - pose.z_axis * params.d6
    eq9 = (p5.x * math.sin(t1) - p5.y * math.cos(t1) - params.d4) / max(1.0, p5.norm())
    phi = t2 + t3 + t4 - math.pi / 2
    target = project_p5(p5, t1, params.d4, phi)
    eq = shoulder_pitch_equation(target, params)
    return {
        "eq9": abs(eq9),
        "eq30": abs(eq.residual(t2)) / eq.scale,
        "zeq": abs(z_residual(t2, t3, target, params)) / max(1.0, abs(target.Z)),
    }
