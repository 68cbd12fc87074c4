"""Friction-force rendering and the simulated haptic proxy.

The kinetostatic index d in [0, 1] (the "boundary definer": 1 = safe,
0 = singular or at a joint limit) maps to a friction magnitude through a
piecewise law with two knots f2 < f1:

    F(d) = 0                        f1 <  d <= 1
    F(d) = c * (f1 - d)/(f1 - f2)   f2 <  d <= f1
    F(d) = c                        0  <= d <= f2

The force itself is coulombic: it opposes the proxy velocity with this
magnitude. Without a physical device the feel is simulated by a
stick-slip proxy: the pointer drags the rendered end-effector through a
virtual spring, and the proxy only moves once the spring pull exceeds
the friction level, which visibly blocks it in dangerous areas.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Mapping, Optional

import numpy as np

from . import fivebar as fb
from . import serial as sr
from .errors import NoAtlas

V_EPS = 1e-9  # m/s dead-band for sgn(v); avoids chatter at rest

DEFAULT_FRICTION_C = 1.0
DEFAULT_F1 = 0.3
DEFAULT_F2 = 0.05
DEFAULT_K_PULL = 50.0  # N/m virtual spring
DEFAULT_DT = 0.01      # s, 100 Hz tick


class RenderMode(str, Enum):
    INSIDE = "inside"      # only interior (parallel-type) singularities
    OUTSIDE = "outside"    # only workspace-boundary singularities
    COMPOSED = "composed"  # both


@dataclass(frozen=True)
class HapticConfig:
    """Friction constant c (N) and the two friction factors 0<=f2<f1<=1."""

    c: float = DEFAULT_FRICTION_C
    f1: float = DEFAULT_F1
    f2: float = DEFAULT_F2
    render_mode: RenderMode = RenderMode.COMPOSED

    def __post_init__(self):
        if self.c < 0.0:
            raise ValueError("friction constant c must be >= 0")
        if not (0.0 <= self.f2 < self.f1 <= 1.0):
            raise ValueError("friction factors need 0 <= f2 < f1 <= 1")


@dataclass(frozen=True)
class ProxyState:
    """Rendered end-effector chasing the user's pointer target."""

    proxy: np.ndarray
    target: np.ndarray
    stuck: bool = True
    v: np.ndarray = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.v is None:
            object.__setattr__(self, "v", np.zeros(2))


@dataclass(frozen=True)
class ForceSample:
    """Friction force at one instant: boundary definer, magnitude, and
    the unit direction opposing motion (zero vector at rest)."""

    d: float
    magnitude: float
    direction: np.ndarray


def friction_magnitude(cfg: HapticConfig, d) -> float:
    """Piecewise force law F(d); continuous at both knots, range [0, c]."""
    dd = np.asarray(d, dtype=float)
    if np.any((dd < 0.0) | (dd > 1.0)):
        raise ValueError("boundary definer d must lie in [0, 1]")
    ramp = cfg.c * (cfg.f1 - dd) / (cfg.f1 - cfg.f2)
    out = np.where(dd > cfg.f1, 0.0, np.where(dd > cfg.f2, ramp, cfg.c))
    return float(out) if out.ndim == 0 else out


def coulomb_force(v, magnitude: float) -> np.ndarray:
    """-magnitude * v/|v|, with sgn(0) taken as 0 below the dead-band."""
    vv = np.asarray(v, dtype=float)
    speed = float(np.hypot(vv[0], vv[1]))
    if speed <= V_EPS:
        return np.zeros(2)
    return -(magnitude / speed) * vv


def force_sample(cfg: HapticConfig, d: float, v) -> ForceSample:
    mag = friction_magnitude(cfg, d)
    f = coulomb_force(v, mag)
    n = float(np.linalg.norm(f))
    direction = f / n if n > 0.0 else np.zeros(2)
    return ForceSample(d=float(d), magnitude=mag, direction=direction)


def boundary_definer(
    state,
    geom,
    norms: Mapping[str, float],
    render_mode: RenderMode,
    margin: float = 0.2,
) -> float:
    """Normalized kinetostatic index of a state, matching the atlas colors.

    ``norms`` carries the active atlas normalization constants (raw field
    maxima): key "combined" for the serial arm, keys "direct"/"inverse"
    for the five-bar. The composed five-bar value is the product of the
    two normalized components, so Composed d = Inside d * Outside d holds
    exactly. Values clamp to [0, 1] (off-grid states can exceed the grid
    maximum by a hair).
    """
    if isinstance(state, sr.SerialState):
        if "combined" not in norms:
            raise NoAtlas("serial boundary definer needs the 'combined' field max")
        raw = abs(sr.det_j(geom, state.theta1, state.theta2)) * (
            1.0 - sr.joint_limit_index(geom, state.theta1, state.theta2, margin)
        )
        return min(raw / norms["combined"], 1.0)
    if isinstance(state, fb.FiveBarState):
        need = {
            RenderMode.INSIDE: ("direct",),
            RenderMode.OUTSIDE: ("inverse",),
            RenderMode.COMPOSED: ("direct", "inverse"),
        }[render_mode]
        for key in need:
            if key not in norms:
                raise NoAtlas(f"five-bar boundary definer needs the '{key}' field max")
        d_in = abs(fb.det_a(geom, state.theta3, state.theta4)) / norms.get("direct", 1.0)
        d_out = abs(
            fb.det_b(geom, state.theta1, state.theta2, state.theta3, state.theta4)
        ) / norms.get("inverse", 1.0)
        d_in, d_out = min(d_in, 1.0), min(d_out, 1.0)
        if render_mode is RenderMode.INSIDE:
            return d_in
        if render_mode is RenderMode.OUTSIDE:
            return d_out
        return d_in * d_out
    raise TypeError(f"unsupported state type {type(state).__name__}")


def proxy_step(
    state: ProxyState,
    cfg: HapticConfig,
    d: float,
    dt: float = DEFAULT_DT,
    k_pull: float = DEFAULT_K_PULL,
    project: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> ProxyState:
    """Advance the stick-slip proxy by one fixed step.

    The virtual spring pulls the proxy toward the target with
    k_pull * (target - proxy). While the pull stays at or below the
    friction level F(d) the proxy sticks (v = 0). Otherwise it slides
    along the pull by the force excess (|pull| - F)/k_pull, clamped so it
    never overshoots the target. ``project`` (when given) maps the moved
    proxy back into the admissible region; it must be deterministic.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    gap = state.target - state.proxy
    dist = float(np.hypot(gap[0], gap[1]))
    pull = k_pull * dist
    friction = friction_magnitude(cfg, d)
    if pull <= friction or dist == 0.0:
        return replace(state, stuck=True, v=np.zeros(2))
    step = min((pull - friction) / k_pull, dist)
    new_proxy = state.proxy + (step / dist) * gap
    if project is not None:
        new_proxy = np.asarray(project(new_proxy), dtype=float)
    v = (new_proxy - state.proxy) / dt
    moved = bool(np.any(new_proxy != state.proxy))
    return ProxyState(proxy=new_proxy, target=state.target, stuck=not moved, v=v)
