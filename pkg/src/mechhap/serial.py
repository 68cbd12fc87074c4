"""Planar 2R serial arm: forward/inverse kinematics, Jacobian determinant,
and joint-limit proximity index.

Both joint angles are absolute (measured from the +x axis), so the tool
point is simply

    p = l1 * u(theta1) + l2 * u(theta2),      u(t) = (cos t, sin t)

The inverse problem has two branches (postures) that merge on the
workspace boundary circles |p| = l1 + l2 and |p| = |l1 - l2|.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from .errors import JointLimitViolation, OutOfWorkspace

TWO_PI = 2.0 * math.pi

# Workspace membership tolerance (meters), shared with the atlas module.
EPS_WS = 1e-9

# |sin| below this is treated as an exactly-merged (singular) branch pair.
SINGULAR_TOL = 1e-9

Interval = Tuple[float, float]


class Posture(str, Enum):
    """Inverse-kinematics branch label: sign of sin(theta2 - theta1)."""

    ELBOW_PLUS = "elbow_plus"    # sin(theta2 - theta1) > 0
    ELBOW_MINUS = "elbow_minus"  # sin(theta2 - theta1) < 0


@dataclass(frozen=True)
class SerialGeometry:
    """Link lengths (m) and optional per-joint angle limits (rad).

    ``joint_limits`` is a pair of closed intervals, one per joint; either
    entry may be None for an unlimited joint. Intervals must satisfy
    lo < hi and hi - lo <= 2*pi.
    """

    l1: float
    l2: float
    joint_limits: Optional[Tuple[Optional[Interval], Optional[Interval]]] = None

    def __post_init__(self):
        if not (self.l1 > 0.0 and self.l2 > 0.0):
            raise ValueError("link lengths must be positive")
        if self.joint_limits is not None:
            if len(self.joint_limits) != 2:
                raise ValueError("joint_limits must give one interval per joint")
            for iv in self.joint_limits:
                if iv is None:
                    continue
                lo, hi = iv
                if not lo < hi:
                    raise ValueError("joint limit interval must have lo < hi")
                if hi - lo > TWO_PI + 1e-12:
                    raise ValueError("joint limit span cannot exceed 2*pi")

    @property
    def r_outer(self) -> float:
        return self.l1 + self.l2

    @property
    def r_inner(self) -> float:
        return abs(self.l1 - self.l2)

    def has_limits(self) -> bool:
        return self.joint_limits is not None and any(
            iv is not None for iv in self.joint_limits
        )


@dataclass(frozen=True)
class SerialState:
    """One kinematic configuration: absolute joint angles, branch label,
    tool point, and whether the branch pair is merged (singular)."""

    theta1: float
    theta2: float
    posture: Posture
    p: np.ndarray
    singular: bool = False


def classify_posture(theta1, theta2) -> Tuple[Posture, bool]:
    """Branch label from the sign of sin(theta2 - theta1).

    At a zero sign the two branches coincide; ELBOW_PLUS is returned with
    singular=True (either label is acceptable there).
    """
    s = math.sin(theta2 - theta1)
    singular = abs(s) <= SINGULAR_TOL
    posture = Posture.ELBOW_MINUS if s < -SINGULAR_TOL else Posture.ELBOW_PLUS
    return posture, singular


def fk(geom: SerialGeometry, theta1, theta2) -> np.ndarray:
    """Tool point for absolute joint angles. Broadcasts; returns (..., 2)."""
    t1 = np.asarray(theta1, dtype=float)
    t2 = np.asarray(theta2, dtype=float)
    x = geom.l1 * np.cos(t1) + geom.l2 * np.cos(t2)
    y = geom.l1 * np.sin(t1) + geom.l2 * np.sin(t2)
    return np.stack(np.broadcast_arrays(x, y), axis=-1)


def det_j(geom: SerialGeometry, theta1, theta2):
    """Jacobian determinant l1*l2*sin(theta1 - theta2) (signed, m^2).

    Zero exactly when theta2 - theta1 = k*pi, i.e. on the workspace
    boundary circles where the posture branches merge.
    """
    t1 = np.asarray(theta1, dtype=float)
    t2 = np.asarray(theta2, dtype=float)
    out = geom.l1 * geom.l2 * np.sin(t1 - t2)
    return float(out) if out.ndim == 0 else out


def jacobian(geom: SerialGeometry, theta1: float, theta2: float) -> np.ndarray:
    """2x2 velocity Jacobian, columns ordered so det equals ``det_j``."""
    return np.array(
        [
            [-geom.l2 * math.sin(theta2), -geom.l1 * math.sin(theta1)],
            [geom.l2 * math.cos(theta2), geom.l1 * math.cos(theta1)],
        ]
    )


def wrap_angle(theta):
    """Wrap to (-pi, pi]."""
    t = np.asarray(theta, dtype=float)
    out = -((-t + math.pi) % TWO_PI - math.pi)
    return float(out) if out.ndim == 0 else out


def _wrap_from(theta, lo):
    """Representative of theta in [lo, lo + 2*pi)."""
    return lo + np.mod(np.asarray(theta, dtype=float) - lo, TWO_PI)


def limit_distance(theta, interval: Optional[Interval]):
    """Travel (rad) to the nearest joint stop; negative when outside,
    +inf when the joint is unlimited."""
    t = np.asarray(theta, dtype=float)
    if interval is None:
        out = np.full(t.shape, np.inf)
        return float(out) if out.ndim == 0 else out
    lo, hi = interval
    rep = _wrap_from(t, lo)
    inside = rep <= hi
    dist = np.where(inside, np.minimum(rep - lo, hi - rep), hi - rep)
    return float(dist) if dist.ndim == 0 else dist


def within_limits(geom: SerialGeometry, theta1, theta2, tol: float = 0.0):
    """True where both joints respect the active limits."""
    if not geom.has_limits():
        t = np.broadcast_arrays(np.asarray(theta1, float), np.asarray(theta2, float))[0]
        out = np.ones(t.shape, dtype=bool)
        return bool(out) if out.ndim == 0 else out
    iv1, iv2 = geom.joint_limits
    ok = (limit_distance(theta1, iv1) >= -tol) & (limit_distance(theta2, iv2) >= -tol)
    return bool(ok) if np.ndim(ok) == 0 else ok


def joint_limit_index(geom: SerialGeometry, theta1, theta2, margin: float):
    """Proximity-to-limit index in [0, 1].

    Per joint: 0 at distance >= margin from the nearest stop, rising
    linearly to 1 at the stop, and 1 beyond it. The arm index is the max
    over both joints; 0 everywhere when no limits are set.
    """
    if margin <= 0.0:
        raise ValueError("margin must be positive")
    t1 = np.asarray(theta1, dtype=float)
    t2 = np.asarray(theta2, dtype=float)
    if not geom.has_limits():
        out = np.zeros(np.broadcast_shapes(t1.shape, t2.shape))
        return float(out) if out.ndim == 0 else out
    iv1, iv2 = geom.joint_limits
    d = np.minimum(limit_distance(t1, iv1), limit_distance(t2, iv2))
    out = np.clip(1.0 - d / margin, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def ik_angles(geom: SerialGeometry, p, posture: Posture):
    """Vectorized inverse kinematics for one branch.

    ``p`` is (..., 2). Returns (theta1, theta2) arrays wrapped to
    (-pi, pi], with NaN where |p| falls outside the reachable annulus
    (tolerance EPS_WS; boundary points clamp to the merged solution).
    Joint limits are NOT checked here.
    """
    pt = np.asarray(p, dtype=float)
    px, py = pt[..., 0], pt[..., 1]
    r2 = px * px + py * py
    r = np.sqrt(r2)
    reachable = (r >= geom.r_inner - EPS_WS) & (r <= geom.r_outer + EPS_WS)

    cos_d = (r2 - geom.l1**2 - geom.l2**2) / (2.0 * geom.l1 * geom.l2)
    cos_d = np.clip(cos_d, -1.0, 1.0)
    delta = np.arccos(cos_d)  # in [0, pi]
    if posture is Posture.ELBOW_MINUS:
        delta = -delta
    t1 = np.arctan2(py, px) - np.arctan2(
        geom.l2 * np.sin(delta), geom.l1 + geom.l2 * np.cos(delta)
    )
    t1 = wrap_angle(t1)
    t2 = wrap_angle(t1 + delta)
    t1 = np.where(reachable, t1, np.nan)
    t2 = np.where(reachable, t2, np.nan)
    return t1, t2


def ik(geom: SerialGeometry, p, posture: Posture) -> SerialState:
    """Inverse kinematics for a single point on the requested branch.

    Raises OutOfWorkspace when |p| leaves the annulus by more than
    EPS_WS, and JointLimitViolation (naming the joint) when limits are
    active and the branch breaks them. On the boundary both branches
    coincide and either request yields the merged solution.
    """
    pt = np.asarray(p, dtype=float).reshape(2)
    r = math.hypot(pt[0], pt[1])
    if r > geom.r_outer + EPS_WS:
        raise OutOfWorkspace(
            f"|p|={r:.6g} exceeds outer radius {geom.r_outer:.6g}"
        )
    if r < geom.r_inner - EPS_WS:
        raise OutOfWorkspace(
            f"|p|={r:.6g} is inside the inner hole radius {geom.r_inner:.6g}"
        )
    t1, t2 = ik_angles(geom, pt, posture)
    t1, t2 = float(t1), float(t2)
    if geom.has_limits():
        iv1, iv2 = geom.joint_limits
        if limit_distance(t1, iv1) < 0.0:
            raise JointLimitViolation(
                f"theta1={t1:.6g} outside limits {iv1}", joint=1
            )
        if limit_distance(t2, iv2) < 0.0:
            raise JointLimitViolation(
                f"theta2={t2:.6g} outside limits {iv2}", joint=2
            )
    _, singular = classify_posture(t1, t2)
    return SerialState(
        theta1=t1, theta2=t2, posture=posture, p=fk(geom, t1, t2), singular=singular
    )


def state_from_angles(geom: SerialGeometry, theta1: float, theta2: float) -> SerialState:
    """Build a consistent state (point + branch label) from joint angles."""
    posture, singular = classify_posture(theta1, theta2)
    return SerialState(
        theta1=float(theta1),
        theta2=float(theta2),
        posture=posture,
        p=fk(geom, theta1, theta2),
        singular=singular,
    )


DEFAULT_GEOMETRY = SerialGeometry(l1=1.0, l2=1.0)
