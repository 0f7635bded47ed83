"""Forward kinematics: joint angles -> end-effector pose.

The chain is built from the same frame vectors the inverse solver consumes:

    r0  arm-plane normal           (sin t1, -cos t1, 0)
    r1  in-plane horizontal axis   (cos t1,  sin t1, 0)
    k5  joint-5 axis, in the arm plane at angle phi = t2 + t3 + t4 - pi/2
    k6  tool z-axis, r0 rotated about k5 by t5
    m5  k6 x k5
    m6  tool x-axis, m5 rotated about k6 by t6

The shoulder (joint-2 axis) sits at the origin; Z is measured from it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .model import EZ, ArmParams, Pose, Vec3


@dataclass(frozen=True)
class FrameSet:
    r0: Vec3
    r1: Vec3
    k5: Vec3
    m5: Vec3
    k6: Vec3
    m6: Vec3
    phi: float


def plane_axes(theta1: float) -> tuple[Vec3, Vec3]:
    """(r0, r1) for a given base rotation."""
    s, c = math.sin(theta1), math.cos(theta1)
    return Vec3(s, -c, 0.0), Vec3(c, s, 0.0)


def build_frames(angles) -> FrameSet:
    t1, t2, t3, t4, t5, t6 = angles
    r0, r1 = plane_axes(t1)
    phi = t2 + t3 + t4 - math.pi / 2
    k5 = r1 * math.cos(phi) + EZ * math.sin(phi)
    k6 = r0 * math.cos(t5) + k5.cross(r0) * math.sin(t5)
    m5 = k6.cross(k5)
    m6 = m5 * math.cos(t6) + k6.cross(m5) * math.sin(t6)
    return FrameSet(r0=r0, r1=r1, k5=k5, m5=m5, k6=k6, m6=m6, phi=phi)


def fk_planar(theta2: float, theta3: float, phi: float, params: ArmParams) -> tuple[float, float]:
    """In-plane (X, Z) of the wrist center P5 relative to the shoulder."""
    t23 = theta2 + theta3
    X = params.a2 * math.cos(theta2) + params.a3 * math.cos(t23) + params.d5 * math.cos(phi)
    Z = params.a2 * math.sin(theta2) + params.a3 * math.sin(t23) + params.d5 * math.sin(phi)
    return X, Z


def wrist_center(angles, params: ArmParams, frames: FrameSet | None = None) -> Vec3:
    """P5, the origin of frame 5."""
    if frames is None:
        frames = build_frames(angles)
    X, Z = fk_planar(angles[1], angles[2], frames.phi, params)
    return frames.r1 * X + EZ * Z + frames.r0 * params.d4


def fk(angles, params: ArmParams) -> Pose:
    frames = build_frames(angles)
    p5 = wrist_center(angles, params, frames)
    p6 = p5 + frames.k6 * params.d6
    return Pose(p=p6, x_axis=frames.m6, z_axis=frames.k6)

