#!/usr/bin/env python3
"""Scripted study-case session against the engine: five-bar case 3 is
blocked by an aspect boundary in the default working mode and completes
after switching to the alternate mode. Produces the evaluation metrics
(duration and index extrema) the application reports."""
import math
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from mechhap import atlas, session
from mechhap import fivebar as fb
from mechhap.engine import Engine
from mechhap.session import Mech

OUT = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT, exist_ok=True)

case = session.load_case(Mech.FIVEBAR, 3)
print(f"case 3: origin {case.origin} -> target {case.target}")

engine = Engine(grid_n=300, aspect_confine=True)
sim = engine.mechs[Mech.FIVEBAR]
for wm in (session.FIVEBAR_CASE3_DEFAULT_MODE, session.FIVEBAR_CASE3_ALTERNATE_MODE):
    field = sim.fields[(atlas.FieldKind.FIVEBAR_COMPOSED.value, wm.value)]
    feasible = session.feasibility(case, atlas.compute_aspects(field, 0.02))
    print(f"  feasibility in {wm.value}: {feasible}")


def drag_toward(engine, waypoints, ticks_per_leg=120):
    # Glide the pointer like a real drag: small per-tick moves.
    start = engine.snapshot()["fivebar"]["target"]
    for wp in waypoints:
        for k in range(1, ticks_per_leg + 1):
            t = k / ticks_per_leg
            x = start[0] + (wp[0] - start[0]) * t
            y = start[1] + (wp[1] - start[1]) * t
            engine.post({"type": "drag", "mech": "fivebar", "phase": "move", "pointer": [x, y]})
            engine.tick()
        start = list(wp)


# Attempt in WM1: the proxy stalls at the aspect boundary.
engine.post({"type": "select_case", "mech": "fivebar", "id": 3})
engine.post({"type": "trajectory", "mech": "fivebar", "action": "show"})
engine.post({"type": "drag", "mech": "fivebar", "phase": "start", "pointer": list(case.origin)})
for _ in range(200):
    engine.tick()
drag_toward(engine, [case.target], ticks_per_leg=400)
snap = engine.snapshot()
print(f"\nafter pulling toward the target in wm1: record = {snap['fivebar']['record_state']}")
print(f"  proxy stalled at ({snap['fivebar']['proxy'][0]:+.3f}, {snap['fivebar']['proxy'][1]:+.3f})")
blocked_path = [(s[1], s[2]) for s in snap["fivebar"].get("trajectory", [])]

# Release, switch the working mode, and finish the run.
engine.post({"type": "drag", "mech": "fivebar", "phase": "end", "pointer": list(case.target)})
engine.tick()
engine.post({"type": "set_mode", "mech": "fivebar", "working_mode": "wm2"})
engine.tick()
engine.post({"type": "drag", "mech": "fivebar", "phase": "start", "pointer": list(case.origin)})
for _ in range(300):
    engine.tick()
drag_toward(engine, [(0.55, 0.25), (0.6, -0.2), case.target], ticks_per_leg=250)
snap = engine.snapshot()
print(f"\nafter switching to wm2: record = {snap['fivebar']['record_state']}")
if "metrics" in snap["fivebar"]:
    m = snap["fivebar"]["metrics"]
    print(
        f"  duration {m['duration']:.2f} s, index range [{m['d_min']:.3f}, {m['d_max']:.3f}],"
        f" mode changes {m['mode_changes']}"
    )

field = engine.mechs[Mech.FIVEBAR].fields[(atlas.FieldKind.FIVEBAR_COMPOSED.value, "wm2")]
fig, ax = plt.subplots(figsize=(7, 6))
ax.imshow(
    field.values,
    origin="lower",
    extent=(*field.grid.x_range, *field.grid.y_range),
    cmap="RdYlGn",
)
traj = snap["fivebar"].get("trajectory", [])
if traj:
    xs = [s[1] for s in traj]
    ys = [s[2] for s in traj]
    ax.plot(xs, ys, "b-", lw=1.5, label="executed path (wm2)")
if blocked_path:
    ax.plot(*zip(*blocked_path), "r:", lw=1.5, label="blocked attempt (wm1)")
ax.plot(*case.origin, "o", color="#e8c511", ms=10, label="origin")
ax.plot(*case.target, "o", color="#f268b0", ms=10, label="target")
ax.legend()
ax.set_title("five-bar case 3: mode change makes the run possible")
path = os.path.join(OUT, "study_case3.png")
fig.tight_layout()
fig.savefig(path, dpi=130)
print(f"\nwrote {path}")
