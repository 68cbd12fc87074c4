"""Study cases, trajectory recording, and run evaluation.

Each mechanism ships three built-in cases (origin/target point pairs on
the default geometry): a smooth same-aspect move, a move that passes a
singular or limit region, and a move that can only be completed after a
branch change. A trajectory record arms on case selection, starts its
clock when the proxy captures the origin, finishes on target capture,
and yields duration plus the min/max kinetostatic index along the run.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import NamedTuple, Optional, Tuple

import numpy as np

from .atlas import AspectMap, aspect_of_point
from .errors import NonMonotonicTime, NotFinished, UnknownCase
from .fivebar import WorkingMode

CAPTURE_RADIUS = 0.05  # m

Point = Tuple[float, float]


class Mech(str, Enum):
    SERIAL = "serial"
    FIVEBAR = "fivebar"


class RecState(str, Enum):
    IDLE = "idle"        # no case armed; samples kept for display only
    ARMED = "armed"      # case selected, waiting for origin capture
    RUNNING = "running"  # clock started at origin capture
    FINISHED = "finished"


@dataclass(frozen=True)
class StudyCase:
    id: int
    mech: Mech
    origin: Point   # drawn yellow
    target: Point   # drawn pink
    required_mode_change: bool


# Serial cases (default l1 = l2 = 1, no limits):
#   1 straight move well inside the safe band (index >= ~0.9 throughout).
#   2 the direct segment crosses the folded singularity at the origin,
#     so the index dips to ~0 unless the user detours.
#   3 posture-change case: with SERIAL_CASE3_LIMITS active the origin is
#     reachable only in ElbowPlus and the target only in ElbowMinus, so
#     the run needs a commanded posture switch in between.
_SERIAL_CASES = {
    1: StudyCase(1, Mech.SERIAL, (1.2, 0.35), (0.35, 1.2), False),
    2: StudyCase(2, Mech.SERIAL, (-0.8, 0.25), (0.8, -0.25), False),
    3: StudyCase(
        3,
        Mech.SERIAL,
        (0.46143572601539436, -0.4298718908959503),
        (-0.6433489303053169, -0.06455019733481893),
        True,
    ),
}

# Companion joint limits for serial case 3 (asymmetric on purpose).
SERIAL_CASE3_LIMITS = ((-2.5, 2.5), (-1.5, 3.0))

# Five-bar cases (default geometry, working mode WM1 unless changed):
#   1 smooth move inside the upper aspect (segment index >= ~0.7).
#   2 the target sits close to the leg-2 stretch boundary (index ~0.1),
#     so capturing it means pushing into the high-friction band.
#   3 origin and target lie in different WM1 aspects (the central
#     singular band separates them) but share one WM2 aspect.
_FIVEBAR_CASES = {
    1: StudyCase(1, Mech.FIVEBAR, (0.6, 0.8), (1.4, 0.8), False),
    2: StudyCase(2, Mech.FIVEBAR, (0.6, 0.9), (-0.25, 0.5), False),
    3: StudyCase(3, Mech.FIVEBAR, (1.0, 0.6), (1.0, -0.45), True),
}

FIVEBAR_CASE3_DEFAULT_MODE = WorkingMode.WM1
FIVEBAR_CASE3_ALTERNATE_MODE = WorkingMode.WM2


def load_case(mech: Mech, case_id: int) -> StudyCase:
    table = _SERIAL_CASES if mech is Mech.SERIAL else _FIVEBAR_CASES
    if case_id not in table:
        raise UnknownCase(f"{mech.value} has no study case {case_id}")
    return table[case_id]


class Sample(NamedTuple):
    t: float
    x: float
    y: float
    d: float
    labels: Tuple[str, ...]


@dataclass(frozen=True)
class TrajectoryRecord:
    samples: Tuple[Sample, ...] = ()
    state: RecState = RecState.IDLE
    show: bool = False
    origin: Optional[Point] = None
    target: Optional[Point] = None
    capture_radius: float = CAPTURE_RADIUS
    t_capture: Optional[float] = None


@dataclass(frozen=True)
class TrajectoryMetrics:
    duration: float
    d_min: float
    d_max: float
    mode_changes: int


def arm(rec: TrajectoryRecord, case: StudyCase) -> TrajectoryRecord:
    """Select a case: clear samples and wait for origin capture."""
    return TrajectoryRecord(
        samples=(),
        state=RecState.ARMED,
        show=rec.show,
        origin=case.origin,
        target=case.target,
        capture_radius=rec.capture_radius,
    )


def _captured(p: Point, anchor: Optional[Point], radius: float) -> bool:
    return anchor is not None and float(np.hypot(p[0] - anchor[0], p[1] - anchor[1])) <= radius


def record_step(
    rec: TrajectoryRecord, t: float, p, d: float, labels: Tuple[str, ...]
) -> TrajectoryRecord:
    """Append one sample and run the capture state machine.

    Raises NonMonotonicTime unless t strictly increases. An origin
    capture zeroes the clock; a target capture (possibly in the same
    sample, for overlapping points) finishes the record.
    """
    if rec.state is RecState.FINISHED:
        raise ValueError("trajectory record is finished; clear it first")
    if rec.samples and t <= rec.samples[-1].t:
        raise NonMonotonicTime(
            f"sample time {t:.6g} does not increase past {rec.samples[-1].t:.6g}"
        )
    sample = Sample(float(t), float(p[0]), float(p[1]), float(d), tuple(labels))
    state, t_capture = rec.state, rec.t_capture
    if state is RecState.ARMED and _captured(sample[1:3], rec.origin, rec.capture_radius):
        state, t_capture = RecState.RUNNING, sample.t
    if state is RecState.RUNNING and _captured(sample[1:3], rec.target, rec.capture_radius):
        state = RecState.FINISHED
    return replace(rec, samples=rec.samples + (sample,), state=state, t_capture=t_capture)


def running_samples(rec: TrajectoryRecord) -> Tuple[Sample, ...]:
    if rec.t_capture is None:
        return ()
    return tuple(s for s in rec.samples if s.t >= rec.t_capture)


def metrics(rec: TrajectoryRecord) -> TrajectoryMetrics:
    """Duration and index extrema of a finished run.

    duration = time from origin capture to the final sample; d_min/d_max
    range over the captured stretch; mode_changes counts branch-label
    transitions along it.
    """
    if rec.state is not RecState.FINISHED:
        raise NotFinished(f"trajectory is {rec.state.value}, not finished")
    run = running_samples(rec)
    duration = run[-1].t - rec.t_capture
    ds = [s.d for s in run]
    changes = sum(1 for a, b in zip(run, run[1:]) if a.labels != b.labels)
    return TrajectoryMetrics(
        duration=float(duration),
        d_min=float(min(ds)),
        d_max=float(max(ds)),
        mode_changes=changes,
    )


def feasibility(case: StudyCase, amap: AspectMap) -> bool:
    """True when origin and target share a nonzero aspect of the map."""
    a = aspect_of_point(amap, case.origin)
    b = aspect_of_point(amap, case.target)
    return a == b != 0


def to_csv(rec: TrajectoryRecord) -> str:
    """One line per sample: ``t,x,y,d,labels`` (labels joined with |)."""
    lines = ["t,x,y,d,labels"]
    for s in rec.samples:
        lines.append(f"{s.t:.12g},{s.x:.12g},{s.y:.12g},{s.d:.12g},{'|'.join(s.labels)}")
    return "\n".join(lines) + "\n"
