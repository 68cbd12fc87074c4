"""Workspace atlas: sampled kinetostatic index fields and their aspects.

A field samples one normalized index over a Cartesian grid for one
branch/mode of a mechanism:

    serial           |det J| * (1 - joint_limit_index)
    fivebar direct   |det A|
    fivebar inverse  |det B|
    fivebar composed |det A| * |det B|

Cells unreachable in the given mode carry an OUTSIDE sentinel (NaN);
all other values are divided by the field's max so the usable range is
exactly [0, 1]. Aspects are the 4-connected components of the cells at
or above a singularity threshold: the maximal regions a branch can
traverse without crossing a singular or joint-limit band.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Tuple, Union

import numpy as np

from . import fivebar as fb
from . import serial as sr
from .errors import DegenerateField, OutOfGrid

OUTSIDE = np.nan

DEFAULT_SINGULAR_THRESHOLD = 0.02
DEFAULT_GRID_N = 400
DEFAULT_LIMIT_MARGIN = 0.2  # rad of travel over which the limit ramp rises

# All raw indices below this are considered identically zero.
DEGENERATE_EPS = 1e-12

Mode = Union[sr.Posture, fb.WorkingMode]


class FieldKind(str, Enum):
    SERIAL_COMBINED = "serial_combined"
    FIVEBAR_DIRECT = "fivebar_direct"
    FIVEBAR_INVERSE = "fivebar_inverse"
    FIVEBAR_COMPOSED = "fivebar_composed"


SERIAL_KINDS = {FieldKind.SERIAL_COMBINED}
FIVEBAR_KINDS = {
    FieldKind.FIVEBAR_DIRECT,
    FieldKind.FIVEBAR_INVERSE,
    FieldKind.FIVEBAR_COMPOSED,
}


@dataclass(frozen=True)
class GridSpec:
    """Regular sampling grid: nodes linspaced over closed x/y ranges."""

    x_range: Tuple[float, float]
    y_range: Tuple[float, float]
    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValueError("grid needs at least 2 cells per axis")
        if not (self.x_range[0] < self.x_range[1] and self.y_range[0] < self.y_range[1]):
            raise ValueError("grid ranges must be non-degenerate")

    def xs(self) -> np.ndarray:
        return np.linspace(self.x_range[0], self.x_range[1], self.nx)

    def ys(self) -> np.ndarray:
        return np.linspace(self.y_range[0], self.y_range[1], self.ny)

    def points(self) -> np.ndarray:
        """Cell-center coordinates, shape (ny, nx, 2)."""
        xg, yg = np.meshgrid(self.xs(), self.ys())
        return np.stack([xg, yg], axis=-1)

    def contains(self, p) -> bool:
        x, y = float(p[0]), float(p[1])
        return (
            self.x_range[0] <= x <= self.x_range[1]
            and self.y_range[0] <= y <= self.y_range[1]
        )

    def nearest_cell(self, p) -> Tuple[int, int]:
        """(iy, ix) of the nearest cell center; caller checks contains()."""
        fx = (p[0] - self.x_range[0]) / (self.x_range[1] - self.x_range[0])
        fy = (p[1] - self.y_range[0]) / (self.y_range[1] - self.y_range[0])
        ix = int(round(fx * (self.nx - 1)))
        iy = int(round(fy * (self.ny - 1)))
        return min(max(iy, 0), self.ny - 1), min(max(ix, 0), self.nx - 1)


@dataclass(frozen=True)
class IndexField:
    """Normalized index samples; values[iy, ix] pairs with grid node
    (xs[ix], ys[iy]); NaN marks OUTSIDE. ``raw_max`` is the pre-division
    maximum, the normalization constant force rendering reuses."""

    grid: GridSpec
    values: np.ndarray
    kind: FieldKind
    mode: str
    raw_max: float


@dataclass(frozen=True)
class AspectMap:
    """Aspect id per cell; 0 = outside or sub-threshold singular band,
    1..k = aspects in row-major discovery order."""

    grid: GridSpec
    labels: np.ndarray
    kind: FieldKind
    mode: str
    singular_threshold: float

    @property
    def count(self) -> int:
        return int(self.labels.max(initial=0))


def serial_workspace_contains(geom: sr.SerialGeometry, p) -> bool:
    """Annulus membership (tolerance EPS_WS); with active joint limits at
    least one posture branch must also respect them."""
    r = float(np.hypot(float(p[0]), float(p[1])))
    if r < geom.r_inner - sr.EPS_WS or r > geom.r_outer + sr.EPS_WS:
        return False
    if not geom.has_limits():
        return True
    for posture in sr.Posture:
        t1, t2 = sr.ik_angles(geom, np.asarray(p, float), posture)
        if sr.within_limits(geom, float(t1), float(t2)):
            return True
    return False


def _serial_raw(geom: sr.SerialGeometry, pts: np.ndarray, mode: sr.Posture, margin: float):
    t1, t2 = sr.ik_angles(geom, pts, mode)
    raw = np.abs(sr.det_j(geom, t1, t2))
    if geom.has_limits():
        with np.errstate(invalid="ignore"):
            ok = sr.within_limits(geom, np.nan_to_num(t1), np.nan_to_num(t2))
            raw = np.where(ok, raw * (1.0 - sr.joint_limit_index(geom, t1, t2, margin)), np.nan)
    return raw


def _fivebar_raw(geom: fb.FiveBarGeometry, pts: np.ndarray, kind: FieldKind, mode: fb.WorkingMode):
    t1, t2, t3, t4 = fb.ik_angles(geom, pts, mode)
    if kind is FieldKind.FIVEBAR_DIRECT:
        return np.abs(fb.det_a(geom, t3, t4))
    if kind is FieldKind.FIVEBAR_INVERSE:
        return np.abs(fb.det_b(geom, t1, t2, t3, t4))
    return np.abs(fb.det_a(geom, t3, t4)) * np.abs(fb.det_b(geom, t1, t2, t3, t4))


def sample_index_field(
    geom,
    grid: GridSpec,
    kind: FieldKind,
    mode: Mode,
    margin: float = DEFAULT_LIMIT_MARGIN,
) -> IndexField:
    """Sample one branch/mode index field and normalize it to [0, 1].

    Raises DegenerateField when no reachable cell carries a raw index
    above DEGENERATE_EPS (including the no-reachable-cell case).
    """
    pts = grid.points()
    if kind in SERIAL_KINDS:
        if not isinstance(mode, sr.Posture):
            raise ValueError("serial fields take a Posture mode")
        raw = _serial_raw(geom, pts, mode, margin)
    elif kind in FIVEBAR_KINDS:
        if not isinstance(mode, fb.WorkingMode):
            raise ValueError("five-bar fields take a WorkingMode mode")
        raw = _fivebar_raw(geom, pts, kind, mode)
    else:
        raise ValueError(f"unknown field kind {kind}")

    finite = np.isfinite(raw)
    if not finite.any() or float(np.nanmax(raw)) < DEGENERATE_EPS:
        raise DegenerateField(
            f"{kind.value}/{getattr(mode, 'value', mode)}: no reachable cell "
            f"above {DEGENERATE_EPS:g}"
        )
    raw_max = float(np.nanmax(raw))
    values = raw / raw_max
    return IndexField(
        grid=grid, values=values, kind=kind, mode=mode.value, raw_max=raw_max
    )


def compute_aspects(field: IndexField, singular_threshold: float = DEFAULT_SINGULAR_THRESHOLD) -> AspectMap:
    """4-connected flood fill over cells with value >= threshold.

    Deterministic labeling: cells are scanned row-major and the first
    cell of each new component gets the next id starting from 1.
    """
    if not (0.0 < singular_threshold < 1.0):
        raise ValueError("singular_threshold must be in (0, 1)")
    vals = field.values
    ny, nx = vals.shape
    with np.errstate(invalid="ignore"):
        mask = vals >= singular_threshold
    labels = np.zeros((ny, nx), dtype=np.int32)
    next_label = 0
    for iy in range(ny):
        for ix in np.flatnonzero(mask[iy] & (labels[iy] == 0)):
            if labels[iy, ix]:
                continue
            next_label += 1
            queue = deque([(iy, int(ix))])
            labels[iy, ix] = next_label
            while queue:
                cy, cx = queue.popleft()
                for dy, dx in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                    y, x = cy + dy, cx + dx
                    if 0 <= y < ny and 0 <= x < nx and mask[y, x] and not labels[y, x]:
                        labels[y, x] = next_label
                        queue.append((y, x))
    return AspectMap(
        grid=field.grid,
        labels=labels,
        kind=field.kind,
        mode=field.mode,
        singular_threshold=singular_threshold,
    )


def aspect_of_point(amap: AspectMap, p) -> int:
    """Aspect id of the cell containing p (nearest-center rule)."""
    if not amap.grid.contains(p):
        raise OutOfGrid(f"point ({p[0]:.6g}, {p[1]:.6g}) outside grid bounds")
    iy, ix = amap.grid.nearest_cell(p)
    return int(amap.labels[iy, ix])


def default_bounds(geom) -> Tuple[Tuple[float, float], Tuple[float, float]]:
    """Bounds enclosing the reachable set with a 5% border."""
    if isinstance(geom, sr.SerialGeometry):
        r = 1.05 * geom.r_outer
        return (-r, r), (-r, r)
    r1 = geom.l1 + geom.l3
    r2 = geom.l2 + geom.l4
    ry = 1.05 * max(r1, r2)
    return (-1.05 * r1, geom.l0 + 1.05 * r2), (-ry, ry)


def write_field_csv(field: IndexField, path: str) -> None:
    """Row-major ``x,y,value`` lines, %.12g, NaN for OUTSIDE cells."""
    xs, ys = field.grid.xs(), field.grid.ys()
    with open(path, "w") as f:
        f.write("x,y,value\n")
        for iy in range(field.grid.ny):
            for ix in range(field.grid.nx):
                v = field.values[iy, ix]
                sval = "NaN" if not np.isfinite(v) else f"{v:.12g}"
                f.write(f"{xs[ix]:.12g},{ys[iy]:.12g},{sval}\n")


def write_field_pgm(field: IndexField, path: str) -> None:
    """8-bit P5 grayscale, round(255*index); OUTSIDE renders as 0.
    Top image row corresponds to the highest y."""
    vals = np.nan_to_num(field.values, nan=0.0)
    img = np.rint(255.0 * vals).astype(np.uint8)[::-1, :]
    with open(path, "wb") as f:
        f.write(f"P5\n{field.grid.nx} {field.grid.ny}\n255\n".encode())
        f.write(img.tobytes())


def write_aspects_csv(amap: AspectMap, path: str) -> None:
    xs, ys = amap.grid.xs(), amap.grid.ys()
    with open(path, "w") as f:
        f.write("x,y,value\n")
        for iy in range(amap.grid.ny):
            for ix in range(amap.grid.nx):
                f.write(f"{xs[ix]:.12g},{ys[iy]:.12g},{int(amap.labels[iy, ix])}\n")


def write_aspects_pgm(amap: AspectMap, path: str) -> None:
    """Labels stretched over the gray range for visual inspection."""
    k = amap.count
    scale = 255.0 / k if k else 0.0
    img = np.rint(amap.labels * scale).astype(np.uint8)[::-1, :]
    with open(path, "wb") as f:
        f.write(f"P5\n{amap.grid.nx} {amap.grid.ny}\n255\n".encode())
        f.write(img.tobytes())
