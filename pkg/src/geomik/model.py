"""Value types, frame conventions and small vector helpers shared by the solvers.

Everything here is immutable. Vectors are plain 3-tuples with arithmetic
operators so the closed-form chain stays in scalar ``math`` calls, which is
considerably faster than numpy for 3-element work.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

TWO_PI = 2.0 * math.pi

DEFAULT_LIMITS = ((-math.pi, math.pi),) * 6


class DegenerateAxes(ValueError):
    """Orientation axes are parallel or (nearly) zero length."""


class Vec3(NamedTuple):
    x: float
    y: float
    z: float

    def __add__(self, o):
        return _new(Vec3, (self[0] + o[0], self[1] + o[1], self[2] + o[2]))

    def __sub__(self, o):
        return _new(Vec3, (self[0] - o[0], self[1] - o[1], self[2] - o[2]))

    def __neg__(self):
        return _new(Vec3, (-self[0], -self[1], -self[2]))

    def __mul__(self, s):
        return _new(Vec3, (self[0] * s, self[1] * s, self[2] * s))

    __rmul__ = __mul__

    def dot(self, o) -> float:
        return self[0] * o[0] + self[1] * o[1] + self[2] * o[2]

    def cross(self, o) -> Vec3:
        x, y, z = self
        return _new(Vec3, (y * o[2] - z * o[1], z * o[0] - x * o[2], x * o[1] - y * o[0]))

    def norm(self) -> float:
        x, y, z = self
        return math.sqrt(x * x + y * y + z * z)

    def unit(self) -> Vec3:
        n = self.norm()
        return _new(Vec3, (self[0] / n, self[1] / n, self[2] / n))

    def is_finite(self) -> bool:
        return all(math.isfinite(c) for c in self)


# skips the generated NamedTuple __new__; hot path in the solver
_new = tuple.__new__

EZ = Vec3(0.0, 0.0, 1.0)


def vec3(v) -> Vec3:
    """Coerce any 3-sequence to a Vec3, rejecting NaN/Inf."""
    x, y, z = (float(c) for c in v)
    out = Vec3(x, y, z)
    if not out.is_finite():
        raise ValueError(f"non-finite vector component in {tuple(v)!r}")
    return out


class JointAngles(NamedTuple):
    """Six joint values in radians."""

    theta1: float
    theta2: float
    theta3: float
    theta4: float
    theta5: float
    theta6: float

    def normalized(self) -> JointAngles:
        return JointAngles(*(normalize_angle(t) for t in self))


@dataclass(frozen=True)
class ArmParams:
    """Link constants of the arm (meters) and per-joint limits (radians)."""

    a2: float
    a3: float
    d4: float
    d5: float
    d6: float
    joint_limits: tuple = field(default=DEFAULT_LIMITS)

    def __post_init__(self):
        for name in ("a2", "a3", "d4", "d5", "d6"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ValueError(f"{name} must be a finite number, got {v!r}")
        if self.a2 <= 0:
            raise ValueError(f"a2 must be > 0, got {self.a2}")
        if self.a3 <= 0:
            raise ValueError(f"a3 must be > 0, got {self.a3}")
        if self.d5 < 0:
            raise ValueError(f"d5 must be >= 0, got {self.d5}")
        if self.d6 < 0:
            raise ValueError(f"d6 must be >= 0, got {self.d6}")
        limits = tuple((float(lo), float(hi)) for lo, hi in self.joint_limits)
        if len(limits) != 6:
            raise ValueError(f"joint_limits needs 6 (lo, hi) pairs, got {len(limits)}")
        for i, (lo, hi) in enumerate(limits, start=1):
            if not lo < hi:
                raise ValueError(f"joint_limits[{i}]: lo must be < hi, got ({lo}, {hi})")
            if lo < -TWO_PI or hi > TWO_PI:
                raise ValueError(f"joint_limits[{i}] must lie within [-2pi, 2pi]")
        object.__setattr__(self, "joint_limits", limits)

    @property
    def reach(self) -> float:
        """Largest possible distance from the shoulder to the wrist center P5."""
        return math.hypot(self.a2 + self.a3 + self.d5, self.d4)

    def within_limits(self, angles, tol: float = 1e-12) -> bool:
        return all(lo - tol <= t <= hi + tol for t, (lo, hi) in zip(angles, self.joint_limits))


# a2, a3, d4, d5, d6 used throughout the tests; not measured hardware values
FIXTURE = ArmParams(a2=0.30, a3=0.25, d4=0.06, d5=0.08, d6=0.10)


@dataclass(frozen=True)
class Pose:
    """End-effector position with tool x- and z-axes (y is implied)."""

    p: Vec3
    x_axis: Vec3
    z_axis: Vec3

    @property
    def y_axis(self) -> Vec3:
        return self.z_axis.cross(self.x_axis)

    def rotation(self):
        """3x3 rotation matrix with columns (x, y, z)."""
        import numpy as np

        return np.column_stack([self.x_axis, self.y_axis, self.z_axis])


@dataclass(frozen=True)
class TrigLineEq:
    """``A*cos(t) + B*sin(t) = C``."""

    A: float
    B: float
    C: float

    def residual(self, theta: float) -> float:
        return self.A * math.cos(theta) + self.B * math.sin(theta) - self.C

    @property
    def scale(self) -> float:
        return max(1.0, abs(self.A) + abs(self.B) + abs(self.C))


@dataclass(frozen=True)
class ElbowRealEq:
    """Real part of the planar chain: ``L5*cos(t3) - L6*sin(t3) = L4``."""

    L4: float
    L5: float
    L6: float

    def as_trig_line(self) -> TrigLineEq:
        return TrigLineEq(self.L5, -self.L6, self.L4)


class BranchLabel(NamedTuple):
    shoulder: str
    elbow: str
    wrist: str

    def __str__(self):
        return self.shoulder + self.elbow + self.wrist

    @classmethod
    def parse(cls, s: str) -> BranchLabel:
        if len(s) != 3 or any(c not in "AB" for c in s):
            raise ValueError(f"bad branch label {s!r}")
        return cls(*s)


@dataclass(frozen=True)
class IkSolution:
    angles: JointAngles
    branch: BranchLabel
    pos_residual: float
    ori_residual: float


def normalize_angle(theta: float) -> float:
    """Wrap to the half-open interval (-pi, pi]."""
    r = math.fmod(theta, TWO_PI)
    if r <= -math.pi:
        r += TWO_PI
    elif r > math.pi:
        r -= TWO_PI
    return r


def angle_diff(a: float, b: float) -> float:
    """Absolute angular distance between a and b modulo 2pi, in [0, pi]."""
    return abs(normalize_angle(a - b))


def angle_between_axes(u, v) -> float:
    """Unsigned angle between two unit vectors, robust near 0 and pi."""
    u = Vec3(*u)
    return math.atan2(u.cross(v).norm(), u.dot(v))


def pose_from_axes(p, x_axis, z_axis) -> Pose:
    """Build a Pose, keeping z exact and Gram-Schmidt'ing x against it."""
    p, x, z = vec3(p), vec3(x_axis), vec3(z_axis)
    nx, nz = x.norm(), z.norm()
    if nx < 1e-9 or nz < 1e-9:
        raise DegenerateAxes("axis of (near) zero length")
    x, z = x * (1.0 / nx), z * (1.0 / nz)
    if x.cross(z).norm() < 1e-9:
        raise DegenerateAxes("x_axis and z_axis are parallel")
    x = (x - z * x.dot(z)).unit()
    return Pose(p, x, z)


def pose_from_rotation(p, rotation) -> Pose:
    """Pose from a position and a row-major 3x3 rotation (9 numbers or nested)."""
    flat = [float(v) for row in rotation for v in (row if hasattr(row, "__len__") else [row])]
    if len(flat) != 9:
        raise ValueError(f"rotation needs 9 entries, got {len(flat)}")
    x_col = (flat[0], flat[3], flat[6])
    z_col = (flat[2], flat[5], flat[8])
    return pose_from_axes(p, x_col, z_col)
