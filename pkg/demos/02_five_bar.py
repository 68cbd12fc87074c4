#!/usr/bin/env python3
"""The five-bar mechanism: four working modes for one coupler point, two
assembly modes for one pair of actuated angles, and the two determinant
indices along a straight coupler path."""
import math
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from mechhap import fivebar as fb
from mechhap.fivebar import AssemblyMode, WorkingMode

OUT = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT, exist_ok=True)

geom = fb.DEFAULT_GEOMETRY


def draw_state(ax, state, color, label=None):
    e1 = geom.l1 * np.array([math.cos(state.theta1), math.sin(state.theta1)])
    e2 = geom.a2 + geom.l2 * np.array([math.cos(state.theta2), math.sin(state.theta2)])
    for a, b in (((0, 0), e1), (e1, state.p), (geom.a2, e2), (e2, state.p)):
        ax.plot([a[0], b[0]], [a[1], b[1]], color=color, lw=2)
    ax.plot(*state.p, "o", color=color, ms=6, label=label)


p = (0.9, 1.5)
print(f"All four working modes reach p = {p}:")
fig, axes = plt.subplots(1, 2, figsize=(11, 4.8))
colors = plt.cm.tab10.colors
for i, wm in enumerate(WorkingMode):
    s = fb.ik(geom, p, wm)
    print(
        f"  {wm.value}: theta1={s.theta1:+.4f} theta2={s.theta2:+.4f} "
        f"det_a={fb.det_a(geom, s.theta3, s.theta4):+.4f} "
        f"det_b={fb.det_b(geom, s.theta1, s.theta2, s.theta3, s.theta4):+.4f}"
    )
    draw_state(axes[0], s, colors[i], wm.value)
axes[0].set_title(f"working modes at p={p}")
axes[0].set_aspect("equal")
axes[0].legend(fontsize=8)

print("\nThe two assembly modes for theta1 = theta2 = pi/2:")
for am in AssemblyMode:
    s = fb.fk(geom, math.pi / 2, math.pi / 2, am)
    print(f"  {am.value}: P = ({s.p[0]:+.4f}, {s.p[1]:+.4f})")
    draw_state(axes[1], s, colors[int(am is AssemblyMode.AM2)], am.value)
axes[1].set_title("assembly modes, theta1 = theta2 = pi/2")
axes[1].set_aspect("equal")
axes[1].legend(fontsize=8)
fig.tight_layout()
fig.savefig(os.path.join(OUT, "five_bar_modes.png"), dpi=130)

# Determinants along a vertical coupler path in WM1: det A changes sign
# through the interior singularity, det B dies at the boundary.
ys = np.linspace(-1.9, 1.9, 600)
det_a, det_b = [], []
for y in ys:
    try:
        s = fb.ik(geom, (1.0, float(y)), WorkingMode.WM1)
        det_a.append(fb.det_a(geom, s.theta3, s.theta4))
        det_b.append(fb.det_b(geom, s.theta1, s.theta2, s.theta3, s.theta4))
    except Exception:
        det_a.append(np.nan)
        det_b.append(np.nan)

fig2, ax = plt.subplots(figsize=(7, 4))
ax.plot(ys, det_a, label="det A (interior singularities)")
ax.plot(ys, det_b, label="det B (workspace boundary)")
ax.axhline(0, color="k", lw=0.8)
ax.set_xlabel("y along the line x = 1")
ax.set_title("index sources along a straight coupler path (WM1)")
ax.legend()
fig2.tight_layout()
path = os.path.join(OUT, "five_bar_determinants.png")
fig2.savefig(path, dpi=130)
print(f"\nwrote {path}")
