#!/usr/bin/env python3
"""The simulated feel: the piecewise friction law F(d) and a stick-slip
proxy pulled across safe and dangerous index values."""
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from mechhap import haptics as hp
from mechhap.haptics import HapticConfig, ProxyState

OUT = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT, exist_ok=True)

cfg = HapticConfig(c=1.0, f1=0.3, f2=0.05)
ds = np.linspace(0, 1, 500)

fig, axes = plt.subplots(1, 2, figsize=(11, 4.2))
axes[0].plot(ds, hp.friction_magnitude(cfg, ds))
axes[0].axvline(cfg.f2, color="k", lw=0.8, ls=":")
axes[0].axvline(cfg.f1, color="k", lw=0.8, ls=":")
axes[0].annotate("full friction c", (0.0, cfg.c), textcoords="offset points", xytext=(6, -14))
axes[0].set_xlabel("boundary definer d")
axes[0].set_ylabel("friction force (N)")
axes[0].set_title("F(d): flat c below f2, ramp to 0 at f1")

# Drag the proxy to the right while the local index decays: it tracks
# freely in the safe zone, lags in the ramp, and locks once the spring
# pull cannot beat full friction.
def index_at(x):
    return float(np.clip(1.0 - 0.45 * max(x, 0.0), 0.0, 1.0))

state = ProxyState(proxy=np.zeros(2), target=np.zeros(2))
ts, xs, dvals = [], [], []
target_x = 0.0
for k in range(1200):
    target_x += 0.25 * hp.DEFAULT_DT  # pointer glides right at 0.25 m/s
    state = ProxyState(proxy=state.proxy, target=np.array([target_x, 0.0]), stuck=state.stuck, v=state.v)
    d = index_at(state.proxy[0])
    state = hp.proxy_step(state, cfg, d)
    ts.append(k * hp.DEFAULT_DT)
    xs.append(state.proxy[0])
    dvals.append(d)

axes[1].plot(ts, xs, label="proxy x")
axes[1].plot(ts, [0.25 * t for t in ts], ls="--", label="pointer x")
axes[1].plot(ts, dvals, color="gray", lw=1, label="index d at proxy")
axes[1].set_xlabel("time (s)")
axes[1].set_title("stick-slip proxy blocked in the dangerous zone")
axes[1].legend()

fig.tight_layout()
path = os.path.join(OUT, "friction_feel.png")
fig.savefig(path, dpi=130)
print(f"final proxy x = {xs[-1]:.3f} m (pointer reached {0.25 * ts[-1]:.3f} m)")
print(f"wrote {path}")
