"""Planar five-bar (2-DOF parallel) mechanism.

Fixed pivots sit at A1 = (0, 0) and A2 = (l0, 0). Actuated links l1, l2
rotate about them (absolute angles theta1, theta2); distal links l3, l4
meet at the coupler point P (absolute angles theta3, theta4):

    P = A1 + l1*u(theta1) + l3*u(theta3) = A2 + l2*u(theta2) + l4*u(theta4)

Direct kinematics has two solutions (assembly modes: which intersection
of the two distal circles P takes); inverse kinematics has four (working
modes: elbow choice per leg). The two characteristic determinants are

    det_a = l3*l4*sin(theta4 - theta3)          (parallel-type, interior)
    det_b = l1*l3*sin(theta3 - theta1)
            * l2*l4*sin(theta4 - theta2)        (serial-type, boundary)
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np

from .errors import NoAssembly, OutOfWorkspace
from .serial import EPS_WS, SINGULAR_TOL, wrap_angle


class WorkingMode(str, Enum):
    """Elbow-branch pair: signs of (sin(t3-t1), sin(t4-t2))."""

    WM1 = "wm1"  # (+, +)
    WM2 = "wm2"  # (+, -)
    WM3 = "wm3"  # (-, +)
    WM4 = "wm4"  # (-, -)

    @property
    def signs(self) -> Tuple[int, int]:
        return _WM_SIGNS[self]


_WM_SIGNS = {
    WorkingMode.WM1: (1, 1),
    WorkingMode.WM2: (1, -1),
    WorkingMode.WM3: (-1, 1),
    WorkingMode.WM4: (-1, -1),
}
_WM_FROM_SIGNS = {v: k for k, v in _WM_SIGNS.items()}


class AssemblyMode(str, Enum):
    """Direct-kinematics branch: sign of sin(theta4 - theta3)."""

    AM1 = "am1"  # sin(theta4 - theta3) > 0
    AM2 = "am2"  # sin(theta4 - theta3) < 0

    @property
    def sign(self) -> int:
        return 1 if self is AssemblyMode.AM1 else -1


@dataclass(frozen=True)
class FiveBarGeometry:
    """Five link lengths (m); base l0 spans the fixed pivots."""

    l0: float
    l1: float
    l2: float
    l3: float
    l4: float

    def __post_init__(self):
        if min(self.l0, self.l1, self.l2, self.l3, self.l4) <= 0.0:
            raise ValueError("all link lengths must be positive")

    @property
    def a1(self) -> np.ndarray:
        return np.array([0.0, 0.0])

    @property
    def a2(self) -> np.ndarray:
        return np.array([self.l0, 0.0])


@dataclass(frozen=True)
class FiveBarState:
    """Full configuration: actuated + passive angles, both branch labels,
    coupler point, and a merged-solution flag."""

    theta1: float
    theta2: float
    theta3: float
    theta4: float
    working_mode: WorkingMode
    assembly_mode: AssemblyMode
    p: np.ndarray
    singular: bool = False


def classify_working_mode(theta1, theta2, theta3, theta4) -> Tuple[WorkingMode, bool]:
    s1 = math.sin(theta3 - theta1)
    s2 = math.sin(theta4 - theta2)
    singular = abs(s1) <= SINGULAR_TOL or abs(s2) <= SINGULAR_TOL
    pair = (-1 if s1 < -SINGULAR_TOL else 1, -1 if s2 < -SINGULAR_TOL else 1)
    return _WM_FROM_SIGNS[pair], singular


def classify_assembly(theta3, theta4) -> Tuple[AssemblyMode, bool]:
    s = math.sin(theta4 - theta3)
    singular = abs(s) <= SINGULAR_TOL
    return (AssemblyMode.AM2 if s < -SINGULAR_TOL else AssemblyMode.AM1), singular


def det_a(geom: FiveBarGeometry, theta3, theta4):
    """det of the direct-kinematics matrix: l3*l4*sin(theta4 - theta3)."""
    out = geom.l3 * geom.l4 * np.sin(np.asarray(theta4, float) - np.asarray(theta3, float))
    return float(out) if out.ndim == 0 else out


def matrix_a(geom: FiveBarGeometry, theta3: float, theta4: float) -> np.ndarray:
    return np.array(
        [
            [geom.l3 * math.cos(theta3), geom.l4 * math.cos(theta4)],
            [geom.l3 * math.sin(theta3), geom.l4 * math.sin(theta4)],
        ]
    )


def det_b_factors(geom: FiveBarGeometry, theta1, theta2, theta3, theta4):
    """The two diagonal entries of the inverse-kinematics matrix.

    Entry i vanishes when leg i is fully stretched or folded, so their
    product (det_b) is zero exactly on the Cartesian workspace boundary
    contributions of either leg.
    """
    t1, t2 = np.asarray(theta1, float), np.asarray(theta2, float)
    t3, t4 = np.asarray(theta3, float), np.asarray(theta4, float)
    b1 = geom.l1 * geom.l3 * np.sin(t3 - t1)
    b2 = geom.l2 * geom.l4 * np.sin(t4 - t2)
    return b1, b2


def det_b(geom: FiveBarGeometry, theta1, theta2, theta3, theta4):
    b1, b2 = det_b_factors(geom, theta1, theta2, theta3, theta4)
    out = b1 * b2
    return float(out) if np.ndim(out) == 0 else out


def elbows(geom: FiveBarGeometry, theta1, theta2):
    """Elbow joints E1, E2 for actuated angles; each (..., 2)."""
    t1 = np.asarray(theta1, dtype=float)
    t2 = np.asarray(theta2, dtype=float)
    e1 = np.stack(
        np.broadcast_arrays(geom.l1 * np.cos(t1), geom.l1 * np.sin(t1)), axis=-1
    )
    e2 = np.stack(
        np.broadcast_arrays(geom.l0 + geom.l2 * np.cos(t2), geom.l2 * np.sin(t2)),
        axis=-1,
    )
    return e1, e2


def fk(
    geom: FiveBarGeometry, theta1: float, theta2: float, assembly: AssemblyMode
) -> FiveBarState:
    """Direct kinematics: coupler point for the requested assembly mode.

    Raises NoAssembly (reporting the clearance gap) when the distal
    circles are disjoint or nested by more than EPS_WS. Tangent circles
    yield the unique merged solution for either mode, flagged singular.
    """
    e1, e2 = elbows(geom, theta1, theta2)
    dvec = e2 - e1
    d = float(np.hypot(dvec[0], dvec[1]))
    outer_gap = d - (geom.l3 + geom.l4)
    inner_gap = abs(geom.l3 - geom.l4) - d
    gap = max(outer_gap, inner_gap)
    if gap > EPS_WS:
        kind = "disjoint" if outer_gap > 0 else "nested"
        raise NoAssembly(
            f"distal circles {kind}: gap {gap:.6g} m at elbow distance {d:.6g}",
            gap=gap,
        )
    if d <= EPS_WS:
        # Coincident elbow circles: P is undefined (or a whole circle).
        raise NoAssembly("elbow joints coincide; coupler point undefined", gap=gap)

    singular = abs(gap) <= EPS_WS
    ex, ey = dvec / d
    a = (d * d + geom.l3**2 - geom.l4**2) / (2.0 * d)
    h = math.sqrt(max(geom.l3**2 - a * a, 0.0))
    # Offset along the left normal (-ey, ex); sin(theta4 - theta3) = s*h*d/(l3*l4).
    s = assembly.sign
    p = np.array([e1[0] + a * ex - s * h * ey, e1[1] + a * ey + s * h * ex])
    theta3 = math.atan2(p[1] - e1[1], p[0] - e1[0])
    theta4 = math.atan2(p[1] - e2[1], p[0] - e2[0])
    wm, wm_singular = classify_working_mode(theta1, theta2, theta3, theta4)
    am = assembly if singular else classify_assembly(theta3, theta4)[0]
    return FiveBarState(
        theta1=float(theta1),
        theta2=float(theta2),
        theta3=theta3,
        theta4=theta4,
        working_mode=wm,
        assembly_mode=am,
        p=p,
        singular=singular or wm_singular,
    )


def fk_points(geom: FiveBarGeometry, theta1, theta2, assembly: AssemblyMode):
    """Vectorized coupler points for one assembly mode; NaN where the
    distal circles fail to intersect (beyond EPS_WS)."""
    e1, e2 = elbows(geom, theta1, theta2)
    dvec = e2 - e1
    d = np.hypot(dvec[..., 0], dvec[..., 1])
    ok = (
        (d <= geom.l3 + geom.l4 + EPS_WS)
        & (d >= abs(geom.l3 - geom.l4) - EPS_WS)
        & (d > EPS_WS)
    )
    dsafe = np.where(d > EPS_WS, d, 1.0)
    ex, ey = dvec[..., 0] / dsafe, dvec[..., 1] / dsafe
    a = (dsafe * dsafe + geom.l3**2 - geom.l4**2) / (2.0 * dsafe)
    h = np.sqrt(np.clip(geom.l3**2 - a * a, 0.0, None))
    s = assembly.sign
    px = e1[..., 0] + a * ex - s * h * ey
    py = e1[..., 1] + a * ey + s * h * ex
    px = np.where(ok, px, np.nan)
    py = np.where(ok, py, np.nan)
    return np.stack(np.broadcast_arrays(px, py), axis=-1)


def _leg_ik_angles(p, base, l_prox: float, l_dist: float, sign: int):
    """2R inverse kinematics of one leg; absolute (proximal, distal)
    angles with the elbow branch chosen by ``sign`` of sin(dist - prox).
    NaN where the target leaves the leg's annulus."""
    pt = np.asarray(p, dtype=float)
    dx = pt[..., 0] - base[0]
    dy = pt[..., 1] - base[1]
    r2 = dx * dx + dy * dy
    r = np.sqrt(r2)
    reachable = (r >= abs(l_prox - l_dist) - EPS_WS) & (r <= l_prox + l_dist + EPS_WS)
    cos_d = (r2 - l_prox**2 - l_dist**2) / (2.0 * l_prox * l_dist)
    delta = sign * np.arccos(np.clip(cos_d, -1.0, 1.0))
    prox = np.arctan2(dy, dx) - np.arctan2(
        l_dist * np.sin(delta), l_prox + l_dist * np.cos(delta)
    )
    prox = wrap_angle(prox)
    dist = wrap_angle(prox + delta)
    prox = np.where(reachable, prox, np.nan)
    dist = np.where(reachable, dist, np.nan)
    return prox, dist


def ik_angles(geom: FiveBarGeometry, p, mode: WorkingMode):
    """Vectorized inverse kinematics for one working mode.

    Returns (theta1, theta2, theta3, theta4); NaN in all four where
    either leg cannot reach. Each leg is solved as an independent 2R
    chain, so the loop closes by construction.
    """
    s1, s2 = mode.signs
    t1, t3 = _leg_ik_angles(p, (0.0, 0.0), geom.l1, geom.l3, s1)
    t2, t4 = _leg_ik_angles(p, (geom.l0, 0.0), geom.l2, geom.l4, s2)
    bad = np.isnan(t1) | np.isnan(t2)
    t1, t3 = np.where(bad, np.nan, t1), np.where(bad, np.nan, t3)
    t2, t4 = np.where(bad, np.nan, t2), np.where(bad, np.nan, t4)
    return t1, t2, t3, t4


def ik(geom: FiveBarGeometry, p, mode: WorkingMode) -> FiveBarState:
    """Inverse kinematics for a single coupler point in one working mode.

    Raises OutOfWorkspace naming the failing leg. The assembly-mode label
    is classified from the resulting passive angles.
    """
    pt = np.asarray(p, dtype=float).reshape(2)
    for leg, base, lp, ld in (
        ("leg1", geom.a1, geom.l1, geom.l3),
        ("leg2", geom.a2, geom.l2, geom.l4),
    ):
        r = float(np.hypot(*(pt - base)))
        if r > lp + ld + EPS_WS or r < abs(lp - ld) - EPS_WS:
            raise OutOfWorkspace(
                f"{leg} cannot reach p=({pt[0]:.6g}, {pt[1]:.6g}): "
                f"|p - base|={r:.6g} outside [{abs(lp - ld):.6g}, {lp + ld:.6g}]",
                leg=leg,
            )
    t1, t2, t3, t4 = (float(a) for a in ik_angles(geom, pt, mode))
    _, wm_singular = classify_working_mode(t1, t2, t3, t4)
    am, am_singular = classify_assembly(t3, t4)
    return FiveBarState(
        theta1=t1,
        theta2=t2,
        theta3=t3,
        theta4=t4,
        working_mode=mode,
        assembly_mode=am,
        p=pt.copy(),
        singular=wm_singular or am_singular,
    )


def state_from_actuated(
    geom: FiveBarGeometry, theta1: float, theta2: float, assembly: AssemblyMode
) -> FiveBarState:
    """Alias of ``fk`` kept for symmetry with the serial module."""
    return fk(geom, theta1, theta2, assembly)


def loop_closure_error(geom: FiveBarGeometry, state: FiveBarState) -> float:
    """Max distance (m) by which the two kinematic chains miss the
    coupler point; ~0 for any consistent state."""
    via1 = geom.a1 + geom.l1 * np.array(
        [math.cos(state.theta1), math.sin(state.theta1)]
    ) + geom.l3 * np.array([math.cos(state.theta3), math.sin(state.theta3)])
    via2 = geom.a2 + geom.l2 * np.array(
        [math.cos(state.theta2), math.sin(state.theta2)]
    ) + geom.l4 * np.array([math.cos(state.theta4), math.sin(state.theta4)])
    return float(
        max(np.linalg.norm(via1 - state.p), np.linalg.norm(via2 - state.p))
    )


DEFAULT_GEOMETRY = FiveBarGeometry(l0=2.0, l1=1.0, l2=1.0, l3=math.sqrt(2.0), l4=math.sqrt(2.0))
