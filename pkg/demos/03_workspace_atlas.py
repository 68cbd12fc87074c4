#!/usr/bin/env python3
"""Workspace atlases: normalized index fields and their aspect
decompositions, for the free and joint-limited serial arm and for every
five-bar working mode. Also exports CSV/PGM artifacts via the library
(the `atlas` CLI produces the same files)."""
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from mechhap import atlas
from mechhap import fivebar as fb
from mechhap import serial as sr

OUT = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT, exist_ok=True)

grid = atlas.GridSpec((-2.1, 2.1), (-2.1, 2.1), 300, 300)

free = sr.SerialGeometry(1.0, 1.0)
limited = sr.SerialGeometry(1.0, 1.0, joint_limits=((-2.5, 2.5), (-2.5, 2.5)))

fig, axes = plt.subplots(2, 2, figsize=(10, 9))
for row, (geom, name) in enumerate([(free, "free"), (limited, "joint-limited")]):
    field = atlas.sample_index_field(geom, grid, atlas.FieldKind.SERIAL_COMBINED, sr.Posture.ELBOW_PLUS)
    amap = atlas.compute_aspects(field, 0.02)
    axes[row, 0].imshow(field.values, origin="lower", extent=(-2.1, 2.1, -2.1, 2.1), cmap="RdYlGn")
    axes[row, 0].set_title(f"serial index, {name}")
    axes[row, 1].imshow(amap.labels, origin="lower", extent=(-2.1, 2.1, -2.1, 2.1), cmap="tab20")
    axes[row, 1].set_title(f"aspects: {amap.count}")
    print(f"serial ({name}): {amap.count} aspect(s) at threshold 0.02")
fig.tight_layout()
fig.savefig(os.path.join(OUT, "serial_atlas.png"), dpi=130)

gfb = fb.DEFAULT_GEOMETRY
gridf = atlas.GridSpec(*atlas.default_bounds(gfb), 300, 300)
fig2, axes2 = plt.subplots(2, 4, figsize=(16, 7))
for i, wm in enumerate(fb.WorkingMode):
    field = atlas.sample_index_field(gfb, gridf, atlas.FieldKind.FIVEBAR_COMPOSED, wm)
    amap = atlas.compute_aspects(field, 0.02)
    ext = (*gridf.x_range, *gridf.y_range)
    axes2[0, i].imshow(field.values, origin="lower", extent=ext, cmap="RdYlGn")
    axes2[0, i].set_title(f"{wm.value} composed index")
    axes2[1, i].imshow(amap.labels, origin="lower", extent=ext, cmap="tab20")
    axes2[1, i].set_title(f"{wm.value}: {amap.count} aspects")
    print(f"fivebar {wm.value}: {amap.count} aspects")
fig2.tight_layout()
fig2.savefig(os.path.join(OUT, "five_bar_atlas.png"), dpi=120)

# The same artifacts in the wire-friendly formats.
field = atlas.sample_index_field(gfb, gridf, atlas.FieldKind.FIVEBAR_COMPOSED, fb.WorkingMode.WM1)
atlas.write_field_pgm(field, os.path.join(OUT, "fivebar_wm1_composed.pgm"))
atlas.write_field_csv(field, os.path.join(OUT, "fivebar_wm1_composed.csv"))
amap = atlas.compute_aspects(field, 0.02)
atlas.write_aspects_pgm(amap, os.path.join(OUT, "fivebar_wm1_aspects.pgm"))
print(f"\nwrote PNG/PGM/CSV artifacts under {OUT}")
