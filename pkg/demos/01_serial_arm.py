#!/usr/bin/env python3
"""Tour of the 2R serial arm: the two inverse-kinematics branches, the
workspace boundary singularities, and the joint-limit proximity index."""
import math
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from mechhap import serial as sr
from mechhap.serial import Posture, SerialGeometry

OUT = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT, exist_ok=True)

geom = SerialGeometry(l1=1.0, l2=1.0)

print("A point inside the annulus has two IK branches:")
p = (1.0, 1.0)
for posture in Posture:
    s = sr.ik(geom, p, posture)
    print(
        f"  {posture.value:12s} theta = ({s.theta1:+.4f}, {s.theta2:+.4f})"
        f"  det J = {sr.det_j(geom, s.theta1, s.theta2):+.4f}"
    )

print("\nOn the outer boundary the branches merge (singular):")
s = sr.ik(geom, (2.0, 0.0), Posture.ELBOW_PLUS)
print(f"  theta = ({s.theta1:.4f}, {s.theta2:.4f}), singular = {s.singular}")

# det J over the joint torus: zero lines at theta2 - theta1 = k*pi.
t = np.linspace(-math.pi, math.pi, 400)
T1, T2 = np.meshgrid(t, t)
D = sr.det_j(geom, T1, T2)

fig, axes = plt.subplots(1, 2, figsize=(11, 4.6))
im = axes[0].pcolormesh(T1, T2, D, cmap="RdYlGn", shading="auto")
axes[0].set_title("det J over joint space")
axes[0].set_xlabel("theta1")
axes[0].set_ylabel("theta2")
fig.colorbar(im, ax=axes[0])

# Joint-limit index ramp for a limited first joint (zero away from the
# stops, 1 at them).
limited = SerialGeometry(1.0, 1.0, joint_limits=((-1.0, 2.0), None))
ts = np.linspace(-1.4, 2.4, 500)
for margin in (0.1, 0.3, 0.6):
    axes[1].plot(ts, sr.joint_limit_index(limited, ts, 0.0, margin=margin), label=f"margin {margin}")
axes[1].axvline(-1.0, color="k", lw=0.8)
axes[1].axvline(2.0, color="k", lw=0.8)
axes[1].set_title("joint-limit index along theta1")
axes[1].set_xlabel("theta1 (rad)")
axes[1].set_ylabel("index")
axes[1].legend()

fig.tight_layout()
path = os.path.join(OUT, "serial_arm.png")
fig.savefig(path, dpi=130)
print(f"\nwrote {path}")
