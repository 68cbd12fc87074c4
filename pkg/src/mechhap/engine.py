"""Deterministic fixed-step simulation engine for both mechanisms.

The engine owns all live state. Clients talk to it exclusively through
posted messages (see ``protocol``); each ``tick()`` drains the inbox in
FIFO order, advances the stick-slip proxies of any active drags, updates
joint states along the current branch, records trajectory samples, and
returns a JSON-able snapshot. Identical message traces therefore yield
bit-identical snapshot streams.

Atlas (re)computation is organized as explicit jobs so a service can run
them off-thread: geometry changes clear ``atlas_ready`` and enqueue a
job; the finished job is posted back as an internal ``_atlas_done``
message. Until it lands, force rendering falls back to the stale
normalization constants.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import atlas as at
from . import fivebar as fb
from . import haptics as hp
from . import serial as sr
from . import session as ss
from .errors import (
    InvalidValue,
    JointLimitViolation,
    NoAssembly,
    OutOfWorkspace,
    UnknownCase,
)
from .session import Mech

DEFAULT_TICK_HZ = 100
DEFAULT_GRID_N = 400
CURSOR_MIN_DIAMETER = 10.0  # px; d=0 doubles it
INBOX_LIMIT = 1000

_FIVEBAR_HOME_CANDIDATES = (
    (math.pi / 2, math.pi / 2),
    (2 * math.pi / 3, math.pi / 3),
    (math.pi / 3, 2 * math.pi / 3),
    (1.2, 1.9),
)


def cursor_color(d: float) -> List[float]:
    """Linear green(safe) -> red(dangerous) blend."""
    return [1.0 - d, d, 0.0]


def cursor_diameter(d: float) -> float:
    """Min diameter at d=1, exactly twice that at d=0."""
    return CURSOR_MIN_DIAMETER * (2.0 - d)


@dataclass
class AtlasJob:
    mech: Mech
    geometry_key: str
    geom: object
    grid: at.GridSpec


@dataclass
class MechSim:
    """Everything the engine keeps per mechanism."""

    mech: Mech
    geom: object
    state: object
    haptic: hp.HapticConfig = field(default_factory=hp.HapticConfig)
    proxy: hp.ProxyState = None  # type: ignore[assignment]
    drag_active: bool = False
    case: Optional[ss.StudyCase] = None
    record: ss.TrajectoryRecord = field(default_factory=ss.TrajectoryRecord)
    fields: Dict[Tuple[str, str], at.IndexField] = field(default_factory=dict)
    aspect_maps: Dict[Tuple[str, str], at.AspectMap] = field(default_factory=dict)
    atlas_ready: bool = False
    # Unit constants keep d well-defined (raw, unnormalized) before the
    # first atlas lands; afterwards they track the active branch's field.
    norms: Dict[str, float] = field(
        default_factory=lambda: {"combined": 1.0, "direct": 1.0, "inverse": 1.0}
    )
    status: str = ""

    def __post_init__(self):
        if self.proxy is None:
            p = np.asarray(self.state.p, dtype=float)
            self.proxy = hp.ProxyState(proxy=p.copy(), target=p.copy())


def _geometry_key(geom) -> str:
    return repr(geom)


def _serial_home(geom: sr.SerialGeometry) -> sr.SerialState:
    return sr.state_from_angles(geom, 0.0, math.pi / 2)


def _fivebar_home(geom: fb.FiveBarGeometry) -> fb.FiveBarState:
    for t1, t2 in _FIVEBAR_HOME_CANDIDATES:
        try:
            probe = fb.fk(geom, t1, t2, fb.AssemblyMode.AM1)
            # Land in WM1 so the default branch matches the study cases.
            return fb.ik(geom, probe.p, fb.WorkingMode.WM1)
        except (NoAssembly, OutOfWorkspace):
            continue
    raise InvalidValue("geometry admits no home configuration")


def compute_atlas(job: AtlasJob) -> dict:
    """Run one atlas job (pure; safe to call off-thread). Returns the
    internal message that delivers the fields back to the engine."""
    fields = {}
    if job.mech is Mech.SERIAL:
        for posture in sr.Posture:
            f = at.sample_index_field(
                job.geom, job.grid, at.FieldKind.SERIAL_COMBINED, posture
            )
            fields[(at.FieldKind.SERIAL_COMBINED.value, posture.value)] = f
    else:
        for wm in fb.WorkingMode:
            for kind in at.FIVEBAR_KINDS:
                fields[(kind.value, wm.value)] = at.sample_index_field(
                    job.geom, job.grid, kind, wm
                )
    return {
        "type": "_atlas_done",
        "mech": job.mech.value,
        "geometry_key": job.geometry_key,
        "fields": fields,
    }


class Engine:
    def __init__(
        self,
        tick_hz: int = DEFAULT_TICK_HZ,
        grid_n: int = DEFAULT_GRID_N,
        aspect_confine: bool = False,
        k_pull: float = hp.DEFAULT_K_PULL,
        sync_atlas: bool = True,
    ):
        self.tick_hz = tick_hz
        self.dt = 1.0 / tick_hz
        self.grid_n = grid_n
        self.aspect_confine = aspect_confine
        self.k_pull = k_pull
        self.tick_count = 0
        self.inbox: List[dict] = []
        self.outbox: List[dict] = []
        self.atlas_jobs: List[AtlasJob] = []
        self.atlas_updated: set = set()
        self.mechs: Dict[Mech, MechSim] = {
            Mech.SERIAL: MechSim(
                mech=Mech.SERIAL,
                geom=sr.DEFAULT_GEOMETRY,
                state=_serial_home(sr.DEFAULT_GEOMETRY),
            ),
            Mech.FIVEBAR: MechSim(
                mech=Mech.FIVEBAR,
                geom=fb.DEFAULT_GEOMETRY,
                state=_fivebar_home(fb.DEFAULT_GEOMETRY),
            ),
        }
        for sim in self.mechs.values():
            self._enqueue_atlas(sim)
        if sync_atlas:
            self.run_pending_atlas()
            self.drain_inbox()
            self.atlas_updated.clear()  # initial build, not an update

    # ------------------------------------------------------------- atlas

    def _grid_for(self, geom) -> at.GridSpec:
        (x0, x1), (y0, y1) = at.default_bounds(geom)
        return at.GridSpec((x0, x1), (y0, y1), self.grid_n, self.grid_n)

    def _enqueue_atlas(self, sim: MechSim) -> None:
        sim.atlas_ready = False
        self.atlas_jobs.append(
            AtlasJob(
                mech=sim.mech,
                geometry_key=_geometry_key(sim.geom),
                geom=sim.geom,
                grid=self._grid_for(sim.geom),
            )
        )

    def take_atlas_jobs(self) -> List[AtlasJob]:
        jobs, self.atlas_jobs = self.atlas_jobs, []
        return jobs

    def run_pending_atlas(self) -> None:
        """Run queued jobs synchronously and post their results."""
        for job in self.take_atlas_jobs():
            self.post(compute_atlas(job))

    def _apply_atlas_done(self, msg: dict) -> None:
        sim = self.mechs[Mech(msg["mech"])]
        if msg["geometry_key"] != _geometry_key(sim.geom):
            return  # stale result for a superseded geometry
        sim.fields = dict(msg["fields"])
        sim.aspect_maps = {}
        sim.atlas_ready = True
        sim.norms = self._norms_for(sim)
        self.atlas_updated.add(sim.mech)

    def _norms_for(self, sim: MechSim) -> Dict[str, float]:
        if not sim.fields:
            return dict(sim.norms)  # keep stale constants until ready
        if sim.mech is Mech.SERIAL:
            f = sim.fields[
                (at.FieldKind.SERIAL_COMBINED.value, sim.state.posture.value)
            ]
            return {"combined": f.raw_max}
        wm = sim.state.working_mode.value
        return {
            "direct": sim.fields[(at.FieldKind.FIVEBAR_DIRECT.value, wm)].raw_max,
            "inverse": sim.fields[(at.FieldKind.FIVEBAR_INVERSE.value, wm)].raw_max,
        }

    def _aspect_map(self, sim: MechSim) -> Optional[at.AspectMap]:
        """Aspect map of the active branch's display field (lazy)."""
        if not sim.fields:
            return None
        if sim.mech is Mech.SERIAL:
            key = (at.FieldKind.SERIAL_COMBINED.value, sim.state.posture.value)
        else:
            key = (at.FieldKind.FIVEBAR_COMPOSED.value, sim.state.working_mode.value)
        if key not in sim.aspect_maps:
            sim.aspect_maps[key] = at.compute_aspects(sim.fields[key])
        return sim.aspect_maps[key]

    def outbox_atlas_messages(self, mech: Mech) -> List[dict]:
        from . import protocol

        sim = self.mechs[mech]
        return [
            protocol.atlas_message(mech.value, kind, mode, f)
            for (kind, mode), f in sorted(sim.fields.items())
        ]

    # ---------------------------------------------------------- messages

    def post(self, msg: dict) -> None:
        """Queue a message for the next tick (FIFO, bounded)."""
        if len(self.inbox) >= INBOX_LIMIT:
            self.outbox.append(
                {"type": "error", "code": "overflow", "detail": "inbox full; message dropped"}
            )
            return
        self.inbox.append(msg)

    def drain_inbox(self) -> None:
        msgs, self.inbox = self.inbox, []
        for msg in msgs:
            self._apply(msg)

    def _error(self, code: str, detail: str) -> None:
        self.outbox.append({"type": "error", "code": code, "detail": detail})

    def _apply(self, msg: dict) -> None:
        from . import protocol

        try:
            kind = msg.get("type")
            if kind == "_atlas_done":
                self._apply_atlas_done(msg)
                return
            protocol.validate_client_message(msg)
            handler = getattr(self, f"_msg_{kind}")
            handler(msg)
        except protocol.BadMessage as exc:
            self._error("bad_message", str(exc))
        except KeyError as exc:
            self._error("bad_message", f"missing field {exc}")
        except InvalidValue as exc:
            self._error("invalid_value", str(exc))
        except (
            OutOfWorkspace,
            NoAssembly,
            UnknownCase,
            JointLimitViolation,
            TypeError,
            ValueError,
        ) as exc:
            self._error("invalid_value", str(exc))

    def _sim(self, msg) -> MechSim:
        return self.mechs[Mech(msg["mech"])]

    def _msg_drag(self, msg: dict) -> None:
        sim = self._sim(msg)
        phase = msg["phase"]
        if phase == "end":
            sim.drag_active = False
            return
        target = np.asarray(msg["pointer"], dtype=float)
        sim.drag_active = True
        sim.proxy = hp.ProxyState(
            proxy=sim.proxy.proxy, target=target, stuck=sim.proxy.stuck, v=sim.proxy.v
        )

    def _msg_set_geometry(self, msg: dict) -> None:
        sim = self._sim(msg)
        if sim.drag_active:
            self._error("drag_active", "cannot change geometry while dragging")
            return
        try:
            if sim.mech is Mech.SERIAL:
                limits = msg.get("joint_limits")
                if limits is not None:
                    limits = tuple(None if iv is None else (float(iv[0]), float(iv[1])) for iv in limits)
                geom = sr.SerialGeometry(float(msg["l1"]), float(msg["l2"]), limits)
                state = _serial_home(geom)
            else:
                if msg.get("joint_limits") is not None:
                    raise InvalidValue("the five-bar model has no joint limits")
                geom = fb.FiveBarGeometry(
                    float(msg["l0"]),
                    float(msg["l1"]),
                    float(msg["l2"]),
                    float(msg["l3"]),
                    float(msg["l4"]),
                )
                state = _fivebar_home(geom)
        except (ValueError, TypeError) as exc:
            raise InvalidValue(f"bad geometry: {exc}") from exc
        sim.geom = geom
        sim.state = state
        p = np.asarray(state.p, dtype=float)
        sim.proxy = hp.ProxyState(proxy=p.copy(), target=p.copy())
        sim.case = None
        sim.record = ss.TrajectoryRecord(show=sim.record.show)
        sim.fields = {}
        sim.aspect_maps = {}
        sim.status = ""
        self._enqueue_atlas(sim)

    def _msg_set_friction(self, msg: dict) -> None:
        sim = self._sim(msg)
        try:
            sim.haptic = hp.HapticConfig(
                c=float(msg["c"]),
                f1=float(msg["f1"]),
                f2=float(msg["f2"]),
                render_mode=sim.haptic.render_mode,
            )
        except (ValueError, TypeError) as exc:
            raise InvalidValue(f"bad friction factors: {exc}") from exc

    def _msg_set_render_mode(self, msg: dict) -> None:
        sim = self._sim(msg)
        try:
            mode = hp.RenderMode(msg["mode"])
        except ValueError as exc:
            raise InvalidValue(f"unknown render mode {msg['mode']!r}") from exc
        sim.haptic = hp.HapticConfig(
            c=sim.haptic.c, f1=sim.haptic.f1, f2=sim.haptic.f2, render_mode=mode
        )

    def _msg_set_mode(self, msg: dict) -> None:
        sim = self._sim(msg)
        if sim.drag_active:
            self._error("drag_active", "mode changes are rejected while dragging")
            return
        if sim.state.singular:
            self._error("singular", "cannot switch branches at a singular pose")
            return
        if sim.mech is Mech.SERIAL:
            if msg.get("posture") is None:
                raise InvalidValue("serial set_mode needs 'posture'")
            posture = sr.Posture(msg["posture"])
            sim.state = sr.ik(sim.geom, sim.state.p, posture)
        else:
            state = sim.state
            if msg.get("working_mode") is not None:
                wm = fb.WorkingMode(msg["working_mode"])
                state = fb.ik(sim.geom, state.p, wm)
            if msg.get("assembly_mode") is not None:
                am = fb.AssemblyMode(msg["assembly_mode"])
                state = fb.fk(sim.geom, state.theta1, state.theta2, am)
            if msg.get("working_mode") is None and msg.get("assembly_mode") is None:
                raise InvalidValue("five-bar set_mode needs a working or assembly mode")
            sim.state = state
        p = np.asarray(sim.state.p, dtype=float)
        sim.proxy = hp.ProxyState(proxy=p.copy(), target=p.copy())
        sim.norms = self._norms_for(sim)

    def _msg_select_case(self, msg: dict) -> None:
        sim = self._sim(msg)
        case = ss.load_case(sim.mech, int(msg["id"]))
        sim.case = case
        sim.record = ss.arm(sim.record, case)

    def _msg_trajectory(self, msg: dict) -> None:
        sim = self._sim(msg)
        action = msg["action"]
        if action == "show":
            sim.record = dataclasses.replace(sim.record, show=True)
        elif action == "hide":
            sim.record = dataclasses.replace(sim.record, show=False)
        else:  # clear
            fresh = ss.TrajectoryRecord(show=sim.record.show)
            sim.record = ss.arm(fresh, sim.case) if sim.case else fresh

    def _msg_dump_trajectory(self, msg: dict) -> None:
        sim = self._sim(msg)
        self.outbox.append(
            {
                "type": "trajectory_csv",
                "mech": sim.mech.value,
                "data": ss.to_csv(sim.record),
            }
        )

    # ------------------------------------------------------------ motion

    def _project_serial(self, sim: MechSim, p: np.ndarray) -> np.ndarray:
        geom = sim.geom
        r = float(np.hypot(p[0], p[1]))
        if r < 1e-12:
            return np.array([geom.r_inner, 0.0]) if geom.r_inner > 0 else p
        r_clamped = min(max(r, geom.r_inner), geom.r_outer)
        return p * (r_clamped / r)

    def _project_fivebar(self, sim: MechSim, p: np.ndarray) -> np.ndarray:
        geom = sim.geom
        legs = (
            (geom.a1, abs(geom.l1 - geom.l3), geom.l1 + geom.l3),
            (geom.a2, abs(geom.l2 - geom.l4), geom.l2 + geom.l4),
        )
        q = p.astype(float).copy()
        for _ in range(16):
            done = True
            for base, rin, rout in legs:
                v = q - base
                r = float(np.hypot(v[0], v[1]))
                if r < 1e-12:
                    q = base + np.array([rin, 0.0])
                    done = False
                    continue
                rc = min(max(r, rin), rout)
                if rc != r:
                    q = base + v * (rc / r)
                    done = False
            if done:
                return q
        return q

    def _project(self, sim: MechSim, p: np.ndarray) -> np.ndarray:
        if sim.mech is Mech.SERIAL:
            return self._project_serial(sim, p)
        return self._project_fivebar(sim, p)

    def _ik_current_branch(self, sim: MechSim, p: np.ndarray):
        if sim.mech is Mech.SERIAL:
            return sr.ik(sim.geom, p, sim.state.posture)
        return fb.ik(sim.geom, p, sim.state.working_mode)

    def _advance_mech(self, sim: MechSim, t: float) -> None:
        if not sim.drag_active:
            return
        d_here = hp.boundary_definer(
            sim.state, sim.geom, sim.norms, sim.haptic.render_mode
        )
        moved = hp.proxy_step(
            sim.proxy,
            sim.haptic,
            d_here,
            dt=self.dt,
            k_pull=self.k_pull,
            project=lambda q: self._project(sim, q),
        )
        if self.aspect_confine and not np.array_equal(moved.proxy, sim.proxy.proxy):
            amap = self._aspect_map(sim)
            if amap is not None:
                here = at.aspect_of_point(amap, sim.proxy.proxy)
                there = at.aspect_of_point(amap, moved.proxy)
                if here != 0 and there != here:
                    moved = hp.ProxyState(
                        proxy=sim.proxy.proxy, target=sim.proxy.target, stuck=True
                    )
        try:
            new_state = self._ik_current_branch(sim, moved.proxy)
        except (OutOfWorkspace, JointLimitViolation) as exc:
            sim.proxy = hp.ProxyState(
                proxy=sim.proxy.proxy, target=sim.proxy.target, stuck=True
            )
            sim.status = type(exc).__name__
            return
        sim.proxy = moved
        sim.state = new_state
        sim.status = ""
        d_now = hp.boundary_definer(
            sim.state, sim.geom, sim.norms, sim.haptic.render_mode
        )
        if sim.record.state is not ss.RecState.FINISHED:
            sim.record = ss.record_step(
                sim.record, t, moved.proxy, d_now, self._labels(sim)
            )

    @staticmethod
    def _labels(sim: MechSim) -> Tuple[str, ...]:
        if sim.mech is Mech.SERIAL:
            return (sim.state.posture.value,)
        return (sim.state.working_mode.value, sim.state.assembly_mode.value)

    # ------------------------------------------------------------- ticks

    def tick(self) -> dict:
        """Apply queued messages, advance one fixed step, snapshot."""
        self.drain_inbox()
        self.tick_count += 1
        t = self.tick_count / self.tick_hz
        for mech in (Mech.SERIAL, Mech.FIVEBAR):
            self._advance_mech(self.mechs[mech], t)
        return self.snapshot()

    def snapshot(self) -> dict:
        t = self.tick_count / self.tick_hz
        snap = {"type": "snapshot", "tick": self.tick_count, "time_s": t}
        for mech in (Mech.SERIAL, Mech.FIVEBAR):
            sim = self.mechs[mech]
            d = hp.boundary_definer(sim.state, sim.geom, sim.norms, sim.haptic.render_mode)
            if sim.mech is Mech.SERIAL:
                angles = [sim.state.theta1, sim.state.theta2]
            else:
                angles = [
                    sim.state.theta1,
                    sim.state.theta2,
                    sim.state.theta3,
                    sim.state.theta4,
                ]
            entry = {
                "angles": angles,
                "p": [float(sim.state.p[0]), float(sim.state.p[1])],
                "proxy": [float(sim.proxy.proxy[0]), float(sim.proxy.proxy[1])],
                "target": [float(sim.proxy.target[0]), float(sim.proxy.target[1])],
                "stuck": bool(sim.proxy.stuck),
                "d": d,
                "color": cursor_color(d),
                "cursor_diameter": cursor_diameter(d),
                "branch_labels": list(self._labels(sim)),
                "singular": bool(sim.state.singular),
                "geometry": self._geometry_echo(sim),
                "friction": {
                    "c": sim.haptic.c,
                    "f1": sim.haptic.f1,
                    "f2": sim.haptic.f2,
                    "render_mode": sim.haptic.render_mode.value,
                },
                "drag_active": sim.drag_active,
                "record_state": sim.record.state.value,
                "trajectory_visible": sim.record.show,
                "atlas_ready": sim.atlas_ready,
                "status": sim.status,
            }
            if sim.record.show:
                entry["trajectory"] = [
                    [s.t, s.x, s.y, s.d] for s in sim.record.samples
                ]
            if sim.case is not None:
                entry["case"] = {
                    "id": sim.case.id,
                    "origin": list(sim.case.origin),
                    "target": list(sim.case.target),
                    "required_mode_change": sim.case.required_mode_change,
                }
            if sim.record.state is ss.RecState.FINISHED:
                m = ss.metrics(sim.record)
                entry["metrics"] = {
                    "duration": m.duration,
                    "d_min": m.d_min,
                    "d_max": m.d_max,
                    "mode_changes": m.mode_changes,
                }
            snap[mech.value] = entry
        return snap

    @staticmethod
    def _geometry_echo(sim: MechSim) -> dict:
        if sim.mech is Mech.SERIAL:
            limits = sim.geom.joint_limits
            return {
                "l1": sim.geom.l1,
                "l2": sim.geom.l2,
                "joint_limits": None
                if limits is None
                else [None if iv is None else list(iv) for iv in limits],
            }
        return {
            "l0": sim.geom.l0,
            "l1": sim.geom.l1,
            "l2": sim.geom.l2,
            "l3": sim.geom.l3,
            "l4": sim.geom.l4,
        }

    def take_outbox(self) -> List[dict]:
        out, self.outbox = self.outbox, []
        return out

    def take_atlas_updates(self) -> List[Mech]:
        out = sorted(self.atlas_updated, key=lambda m: m.value)
        self.atlas_updated = set()
        return out
