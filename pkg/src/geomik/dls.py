"""Iterative damped-least-squares IK, used as a baseline and differential oracle.

Update: ``dtheta = J^T (J J^T + lambda^2 I)^-1 e`` with ``e`` stacking the
position error and the axis-angle vector of the rotation taking the current
tool triad onto the target one. J is a central-difference Jacobian of the
same task coordinates, so it can never drift from ``fk``.

The error norm is not guaranteed to decrease monotonically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analytic import pose_errors
from .fk import fk
from .model import ArmParams, JointAngles, Pose


@dataclass(frozen=True)
class DlsConfig:
    damping: float = 0.01
    max_iters: int = 200
    pos_tol: float = 1e-6
    ori_tol: float = 1e-6
    step_scale: float = 1.0

    def __post_init__(self):
        if self.damping < 0:
            raise ValueError("damping must be >= 0")
        if self.max_iters <= 0:
            raise ValueError("max_iters must be > 0")
        if not 0 < self.step_scale <= 1:
            raise ValueError("step_scale must be in (0, 1]")


@dataclass(frozen=True)
class DlsResult:
    angles: JointAngles
    iterations: int
    converged: bool
    final_pos_residual: float
    final_ori_residual: float


def rotation_log(R: np.ndarray) -> np.ndarray:
    """Axis-angle vector (axis * angle, angle in [0, pi]) of a rotation matrix."""
    w = 0.5 * np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    s = np.linalg.norm(w)
    c = 0.5 * (np.trace(R) - 1.0)
    angle = math.atan2(s, c)
    if s > 1e-6:
        return w * (angle / s)
    if c > 0:
        # small angle: w ~ angle * axis to second order
        return w
    # angle ~ pi: axis from the symmetric part
    B = 0.5 * (R + np.eye(3))
    i = int(np.argmax(np.diag(B)))
    axis = B[:, i] / math.sqrt(max(B[i, i], 1e-300))
    if axis @ w < 0:
        axis = -axis
    return axis / np.linalg.norm(axis) * angle


def task_error(current: Pose, target: Pose) -> np.ndarray:
    """6-vector: target minus current position, then current->target rotation."""
    dp = np.subtract(target.p, current.p)
    dR = target.rotation() @ current.rotation().T
    return np.concatenate([dp, rotation_log(dR)])


def numeric_jacobian(angles, params: ArmParams, h: float = 1e-7) -> np.ndarray:
    """Central-difference Jacobian of (position, orientation) task coordinates.

    Orientation coordinates are the axis-angle of the rotation from the
    reference pose ``fk(angles)``, so columns are spatial angular velocities.
    """
    if h <= 0:
        raise ValueError("h must be > 0")
    ref = fk(angles, params)
    J = np.empty((6, 6))
    theta = list(angles)
    for i in range(6):
        plus = theta.copy()
        minus = theta.copy()
        plus[i] += h
        minus[i] -= h
        # task_error(ref, x) = coords of x relative to ref
        J[:, i] = (task_error(ref, fk(plus, params)) - task_error(ref, fk(minus, params))) / (2 * h)
    return J


def ik_dls(pose: Pose, seed, params: ArmParams, cfg: DlsConfig = DlsConfig()) -> DlsResult:
    theta = np.array(seed, dtype=float)
    if not np.all(np.isfinite(theta)):
        raise ValueError("seed must be finite")
    lam2 = cfg.damping**2
    it = 0
    while True:
        current = fk(theta, params)
        pos_err, ori_err = pose_errors(current, pose)
        if pos_err < cfg.pos_tol and ori_err < cfg.ori_tol:
            converged = True
            break
        if it >= cfg.max_iters:
            converged = False
            break
        e = task_error(current, pose)
        J = numeric_jacobian(theta, params)
        step = J.T @ np.linalg.solve(J @ J.T + lam2 * np.eye(6), e)
        theta = theta + cfg.step_scale * step
        it += 1
    angles = JointAngles(*(float(t) for t in theta)).normalized()
    return DlsResult(angles, it, converged, pos_err, ori_err)
