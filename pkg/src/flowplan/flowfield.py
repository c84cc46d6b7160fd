"""Layered ocean-current flow fields on a regular grid.

A field stores east/north velocity components (m/s) per depth layer on an
nx-by-ny cell grid, plus a land mask marking inaccessible cells. Positions
are meters on a local planar projection: cell (0, 0) is the southwest
corner and the center of cell (ix, iy) sits at
((ix + 0.5) * cell_size, (iy + 0.5) * cell_size). The vertical current
component is zero everywhere, so advection never changes layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

Cell = tuple[int, int, int]  # (ix, iy, layer)


class FieldError(ValueError):
    """Invalid field data or out-of-range cell access."""


class ContinuousPosition(NamedTuple):
    """A metric position within one layer."""

    x: float
    y: float
    layer: int


@dataclass(frozen=True)
class GridGeometry:
    """Grid shape and scale shared by every layer of a flow field.

    layer_depths are meters below the surface, strictly increasing, so
    layer 0 is the shallowest. origin optionally records the (lon, lat)
    of cell (0, 0)'s center; it is metadata only.
    """

    nx: int
    ny: int
    cell_size: float
    layer_depths: tuple[float, ...]
    origin: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if self.nx < 1 or self.ny < 1:
            raise FieldError(f"grid must be at least 1x1, got {self.nx}x{self.ny}")
        if not (float(self.cell_size) > 0.0):
            raise FieldError(f"cell_size must be positive, got {self.cell_size}")
        depths = tuple(float(d) for d in self.layer_depths)
        if not depths:
            raise FieldError("at least one layer is required")
        if any(b <= a for a, b in zip(depths, depths[1:])):
            raise FieldError(f"layer depths must be strictly increasing, got {depths}")
        object.__setattr__(self, "cell_size", float(self.cell_size))
        object.__setattr__(self, "layer_depths", depths)
        if self.origin is not None:
            object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @property
    def num_layers(self) -> int:
        return len(self.layer_depths)

    @property
    def width(self) -> float:
        """East-west extent in meters."""
        return self.nx * self.cell_size

    @property
    def height(self) -> float:
        """South-north extent in meters."""
        return self.ny * self.cell_size

    def in_bounds(self, ix: int, iy: int, layer: int) -> bool:
        return 0 <= ix < self.nx and 0 <= iy < self.ny and 0 <= layer < self.num_layers

    def cell_center(self, ix: int, iy: int) -> tuple[float, float]:
        return (ix + 0.5) * self.cell_size, (iy + 0.5) * self.cell_size


@dataclass
class FlowField:
    """Gridded current velocities plus land mask, immutable once built.

    u is the east component and v the north component, both [L][ny][nx]
    with row index 0 the southernmost row. Velocities must be finite on
    every free cell; land cells may hold anything (callers consult the
    mask). Arrays are locked read-only so a field can be shared across
    threads.
    """

    geometry: GridGeometry
    u: np.ndarray
    v: np.ndarray
    land: np.ndarray

    def __post_init__(self) -> None:
        g = self.geometry
        shape = (g.num_layers, g.ny, g.nx)
        self.u = np.ascontiguousarray(self.u, dtype=np.float64)
        self.v = np.ascontiguousarray(self.v, dtype=np.float64)
        self.land = np.ascontiguousarray(self.land, dtype=bool)
        for name, arr in (("u", self.u), ("v", self.v), ("land", self.land)):
            if arr.shape != shape:
                raise FieldError(f"{name} array has shape {arr.shape}, expected {shape}")
        free = ~self.land
        if not np.isfinite(self.u[free]).all() or not np.isfinite(self.v[free]).all():
            raise FieldError("non-finite velocity on a free cell")
        for arr in (self.u, self.v, self.land):
            arr.setflags(write=False)

    def is_free(self, ix: int, iy: int, layer: int) -> bool:
        return self.geometry.in_bounds(ix, iy, layer) and not self.land[layer, iy, ix]

    def require_free(self, cell: Cell) -> None:
        ix, iy, layer = cell
        if not self.geometry.in_bounds(ix, iy, layer):
            raise FieldError(f"cell {cell} out of bounds")
        if self.land[layer, iy, ix]:
            raise FieldError(f"cell {cell} is land")

    def layer_has_free_cell(self, layer: int) -> bool:
        return bool((~self.land[layer]).any())


def generate_synthetic_field(
    kind: str,
    geometry: GridGeometry,
    *,
    u0: float = 0.0,
    v0: float = 0.0,
    amplitude: float = 0.5,
    omega: float = 1e-3,
) -> FlowField:
    """Build a deterministic test field, identical on every layer.

    Kinds: "uniform" (constant (u0, v0)), "double_gyre" (two-cell
    circulation u = -A sin(pi x/W) cos(pi y/H), v = A cos(pi x/W)
    sin(pi y/H)), and "rotational" (solid-body rotation at rate omega
    about the domain center). All cells are water.
    """
    g = geometry
    xs = (np.arange(g.nx) + 0.5) * g.cell_size
    ys = (np.arange(g.ny) + 0.5) * g.cell_size
    x, y = np.meshgrid(xs, ys)  # [ny][nx]
    if kind == "uniform":
        for val in (u0, v0):
            if not math.isfinite(val):
                raise FieldError(f"uniform velocity must be finite, got ({u0}, {v0})")
        u2d = np.full((g.ny, g.nx), float(u0))
        v2d = np.full((g.ny, g.nx), float(v0))
    elif kind == "double_gyre":
        if not math.isfinite(amplitude):
            raise FieldError(f"amplitude must be finite, got {amplitude}")
        u2d = -amplitude * np.sin(np.pi * x / g.width) * np.cos(np.pi * y / g.height)
        v2d = amplitude * np.cos(np.pi * x / g.width) * np.sin(np.pi * y / g.height)
    elif kind == "rotational":
        if not math.isfinite(omega):
            raise FieldError(f"omega must be finite, got {omega}")
        u2d = -omega * (y - g.height / 2.0)
        v2d = omega * (x - g.width / 2.0)
    else:
        raise FieldError(f"unknown synthetic field kind {kind!r}")
    L = g.num_layers
    return FlowField(
        geometry=g,
        u=np.broadcast_to(u2d, (L, g.ny, g.nx)).copy(),
        v=np.broadcast_to(v2d, (L, g.ny, g.nx)).copy(),
        land=np.zeros((L, g.ny, g.nx), dtype=bool),
    )


def flow_at(field: FlowField, cell: Cell) -> tuple[float, float]:
    """Stored (east, north) velocity at a cell; no interpolation.

    Land cells still return their stored value; the mask is the caller's
    concern.
    """
    ix, iy, layer = cell
    if not field.geometry.in_bounds(ix, iy, layer):
        raise FieldError(f"cell {cell} out of bounds")
    return float(field.u[layer, iy, ix]), float(field.v[layer, iy, ix])


def euler_step(field: FlowField, p: ContinuousPosition, dt: float) -> ContinuousPosition:
    """Advect a position for dt seconds with the containing cell's velocity.

    The field is cell-constant, so the step is p + dt * F(cell(p)); the
    layer never changes (no vertical current).
    """
    if not (dt > 0.0):
        raise FieldError(f"dt must be positive, got {dt}")
    if not (math.isfinite(p.x) and math.isfinite(p.y)):
        raise FieldError(f"position {p} is not finite")
    cs = field.geometry.cell_size
    ix = math.floor(p.x / cs)
    iy = math.floor(p.y / cs)
    if not field.geometry.in_bounds(ix, iy, p.layer):
        raise FieldError(f"position {p} lies outside the grid")
    ux = float(field.u[p.layer, iy, ix])
    vy = float(field.v[p.layer, iy, ix])
    return ContinuousPosition(p.x + dt * ux, p.y + dt * vy, p.layer)


def nearest_free_cell(field: FlowField, layer: int, px: float, py: float) -> tuple[int, int]:
    """Grid cell whose center is nearest to a point, skipping land.

    The nearest in-bounds cell wins when free; otherwise the nearest free
    cell by center distance. Distance ties break toward the smaller row
    index, then the smaller column index.
    """
    g = field.geometry
    cs = g.cell_size
    fx = px / cs - 0.5  # fractional center index
    fy = py / cs - 0.5
    # ceil(f - 0.5) rounds half-integers down so the tie rule holds.
    ix = min(max(int(math.ceil(fx - 0.5)), 0), g.nx - 1)
    iy = min(max(int(math.ceil(fy - 0.5)), 0), g.ny - 1)
    if not field.land[layer, iy, ix]:
        return ix, iy
    xs = (np.arange(g.nx) + 0.5) * cs
    ys = (np.arange(g.ny) + 0.5) * cs
    d2 = (xs[None, :] - px) ** 2 + (ys[:, None] - py) ** 2
    d2 = np.where(field.land[layer], np.inf, d2)
    flat = int(np.argmin(d2))  # C order: smallest iy, then ix, on ties
    if not np.isfinite(d2.flat[flat]):
        raise FieldError(f"layer {layer} has no free cells")
    return flat % g.nx, flat // g.nx


def nearest_free_to_cell(field: FlowField, layer: int, tx: int, ty: int) -> tuple[int, int]:
    """Nearest free cell to the center of integer cell (tx, ty), which may
    be out of bounds or land.

    Distances compare exactly in integer cell units, so the tie rule
    (smaller row, then column) cannot be disturbed by float rounding.
    """
    g = field.geometry
    if g.in_bounds(tx, ty, layer) and not field.land[layer, ty, tx]:
        return tx, ty
    dx2 = (np.arange(g.nx, dtype=np.int64) - tx) ** 2
    dy2 = (np.arange(g.ny, dtype=np.int64) - ty) ** 2
    d2 = dx2[None, :] + dy2[:, None]
    d2 = np.where(field.land[layer], np.iinfo(np.int64).max, d2)
    flat = int(np.argmin(d2))  # C order: smallest iy, then ix, on ties
    if field.land[layer, flat // g.nx, flat % g.nx]:
        raise FieldError(f"layer {layer} has no free cells")
    return flat % g.nx, flat // g.nx


def map_cell(field: FlowField, cell: Cell, dt: float) -> Cell:
    """Where dt seconds of drift carries a cell: advect the center, snap
    to the nearest free cell.

    Total on free in-bounds cells: off-grid endpoints clamp to the grid and
    land endpoints redirect to the nearest free cell, so a valid free cell
    always comes back (possibly the input itself).
    """
    field.require_free(cell)
    ix, iy, layer = cell
    cs = field.geometry.cell_size
    ex = (ix + 0.5) * cs + dt * field.u[layer, iy, ix]
    ey = (iy + 0.5) * cs + dt * field.v[layer, iy, ix]
    mx, my = nearest_free_cell(field, layer, ex, ey)
    return mx, my, layer


def trace_flow_line(field: FlowField, start: Cell, dt: float, max_steps: int) -> list[Cell]:
    """Cell sequence visited by repeated map_cell applications.

    Stops after max_steps applications or at a fixed point (a cell that
    maps to itself). The returned sequence starts with start.
    """
    if max_steps < 1:
        raise FieldError(f"max_steps must be at least 1, got {max_steps}")
    line = [start]
    cur = start
    for _ in range(max_steps):
        nxt = map_cell(field, cur, dt)
        if nxt == cur:
            break
        line.append(nxt)
        cur = nxt
    return line
