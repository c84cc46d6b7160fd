"""Pure-Python/numpy implementation of the planner kernels.

Mirrors ``_core.pyx`` operation for operation; the compiled module must
produce bit-identical outputs. Scalar geometry helpers are shared with
the reference modules so the single-transition and batch paths cannot
drift apart.
"""

from __future__ import annotations

import heapq

import numpy as np

from ..lattice import (
    OCTANT_DX,
    OCTANT_DY,
    angular_distance_deg,
    direction_deg,
    octant_of_deg,
)
from ..transitions import displacement_cells

_INT64_MAX = np.iinfo(np.int64).max

# Action slots, in planner tie-break order (matches transitions.Action).
_DRIFT, _UP, _DOWN, _FORWARD, _ROT_L, _ROT_R = range(6)


def _nearest_free_point(land2d: np.ndarray, xs: np.ndarray, ys: np.ndarray, px: float, py: float) -> int:
    """Flat index of the free cell whose center is nearest to a point;
    ties go to the smaller row, then column (first argmin occurrence)."""
    d2 = (xs[None, :] - px) ** 2 + (ys[:, None] - py) ** 2
    d2 = np.where(land2d, np.inf, d2)
    flat = int(np.argmin(d2))
    if land2d.flat[flat]:
        raise ValueError("layer has no free cells")
    return flat


def _nearest_free_int(land2d: np.ndarray, tx: int, ty: int) -> int:
    """Flat index of the free cell nearest to integer cell (tx, ty),
    distances compared exactly in cell units."""
    ny, nx = land2d.shape
    if 0 <= tx < nx and 0 <= ty < ny and not land2d[ty, tx]:
        return ty * nx + tx
    dx2 = (np.arange(nx, dtype=np.int64) - tx) ** 2
    dy2 = (np.arange(ny, dtype=np.int64) - ty) ** 2
    d2 = np.where(land2d, _INT64_MAX, dx2[None, :] + dy2[:, None])
    flat = int(np.argmin(d2))
    if land2d.flat[flat]:
        raise ValueError("layer has no free cells")
    return flat


def map_cells(u: np.ndarray, v: np.ndarray, land: np.ndarray, cell_size: float, dt: float) -> np.ndarray:
    """Drift mapping of every free cell: advect the center for dt, snap to
    the nearest free cell. Returns within-layer flat ids, -1 on land."""
    L, ny, nx = u.shape
    out = np.full((L, ny, nx), -1, dtype=np.int32)
    xs = (np.arange(nx) + 0.5) * cell_size
    ys = (np.arange(ny) + 0.5) * cell_size
    for l in range(L):
        ex = xs[None, :] + dt * u[l]
        ey = ys[:, None] + dt * v[l]
        fx = ex / cell_size - 0.5
        fy = ey / cell_size - 0.5
        cx = np.minimum(np.maximum(np.ceil(fx - 0.5), 0.0), nx - 1.0).astype(np.int64)
        cy = np.minimum(np.maximum(np.ceil(fy - 0.5), 0.0), ny - 1.0).astype(np.int64)
        mapped = (cy * nx + cx).astype(np.int32)
        redirect = land[l][cy, cx] & ~land[l]
        for iy, ix in zip(*np.nonzero(redirect)):
            mapped[iy, ix] = _nearest_free_point(land[l], xs, ys, ex[iy, ix], ey[iy, ix])
        mapped[land[l]] = -1
        out[l] = mapped
    return out


def step_tables(land: np.ndarray) -> np.ndarray:
    """One-cell step with redirection, for every free cell and octant.
    Returns within-layer flat target ids, -1 on land source cells."""
    L, ny, nx = land.shape
    out = np.full((L, ny, nx, 8), -1, dtype=np.int32)
    iy_grid, ix_grid = np.mgrid[0:ny, 0:nx]
    for l in range(L):
        free = ~land[l]
        for o in range(8):
            tx = ix_grid + OCTANT_DX[o]
            ty = iy_grid + OCTANT_DY[o]
            inb = (tx >= 0) & (tx < nx) & (ty >= 0) & (ty < ny)
            direct = np.zeros((ny, nx), dtype=bool)
            direct[inb] = free[ty[inb], tx[inb]]
            res = np.where(direct, ty * nx + tx, -1).astype(np.int32)
            for iy, ix in zip(*np.nonzero(free & ~direct)):
                res[iy, ix] = _nearest_free_int(land[l], ix + OCTANT_DX[o], iy + OCTANT_DY[o])
            res[~free] = -1
            out[l, :, :, o] = res
    return out


def build_tables(
    u: np.ndarray,
    v: np.ndarray,
    land: np.ndarray,
    cell_size: float,
    dt: float,
    strict_forward: bool,
    dispersal: bool,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Successor tables for every (state, action).

    Returns (valid [N,6] uint8, nominal [N,6] int32, members [N,6,3]
    int32) with states indexed heading-fastest and actions in tie-break
    order. Invalid slots hold -1; member lists are sorted ascending and
    padded with -1.
    """
    L, ny, nx = u.shape
    N = L * ny * nx * 8
    valid = np.zeros((N, 6), dtype=np.uint8)
    nominal = np.full((N, 6), -1, dtype=np.int32)
    members = np.full((N, 6, 3), -1, dtype=np.int32)

    mapped = map_cells(u, v, land, cell_size, dt)
    step = step_tables(land)
    layer_free = [bool((~land[l]).any()) for l in range(L)]

    def chain(ix: int, iy: int, l: int, octant: int, n: int) -> tuple[int, int]:
        for _ in range(n):
            flat = step[l, iy, ix, octant]
            ix, iy = flat % nx, flat // nx
        return ix, iy

    def flow_of(l: int, ix: int, iy: int) -> float | None:
        m = mapped[l, iy, ix]
        return direction_deg(m % nx - ix, m // nx - iy)

    def emit(z: int, a: int, ix: int, iy: int, nix: int, niy: int, nl: int, h: int) -> None:
        nomz = ((nl * ny + niy) * nx + nix) * 8 + h
        ddx = nix - ix
        ddy = niy - iy
        if dispersal and not (ddx == 0 and ddy == 0):
            mem = {nomz}
            o = octant_of_deg(direction_deg(ddx, ddy))
            for perp in ((o + 2) % 8, (o - 2) % 8):
                lx = nix + OCTANT_DX[perp]
                ly = niy + OCTANT_DY[perp]
                if 0 <= lx < nx and 0 <= ly < ny and not land[nl, ly, lx]:
                    mem.add(((nl * ny + ly) * nx + lx) * 8 + h)
            mem = sorted(mem)
        else:
            mem = [nomz]
        valid[z, a] = 1
        nominal[z, a] = nomz
        members[z, a, : len(mem)] = mem

    for l in range(L):
        for iy in range(ny):
            for ix in range(nx):
                if land[l, iy, ix]:
                    continue
                wdeg = flow_of(l, ix, iy)
                woct = -1 if wdeg is None else octant_of_deg(wdeg)
                # Glide arrivals and destination-layer flow do not depend
                # on heading; resolve them once per cell.
                glide: list[tuple[int, int, int, int, float | None, int]] = []
                for a, dest in ((_UP, l - 1), (_DOWN, l + 1)):
                    if not (0 <= dest < L) or not layer_free[dest]:
                        continue
                    aflat = _nearest_free_int(land[dest], ix, iy)
                    ax, ay = aflat % nx, aflat // nx
                    wdeg2 = flow_of(dest, ax, ay)
                    woct2 = -1 if wdeg2 is None else octant_of_deg(wdeg2)
                    glide.append((a, dest, ax, ay, wdeg2, woct2))
                zbase = ((l * ny + iy) * nx + ix) * 8
                for h in range(8):
                    z = zbase + h
                    hdeg = h * 45.0
                    disp = None if wdeg is None else displacement_cells(angular_distance_deg(hdeg, wdeg) / 180.0)

                    # DRIFT: ride the flow, nothing in still water.
                    if wdeg is None:
                        emit(z, _DRIFT, ix, iy, ix, iy, l, h)
                    else:
                        dx_, dy_ = chain(ix, iy, l, woct, disp)
                        emit(z, _DRIFT, ix, iy, dx_, dy_, l, h)

                    # UP / DOWN: change layer, then drift with the
                    # destination layer's flow.
                    for a, dest, ax, ay, wdeg2, woct2 in glide:
                        if wdeg2 is None:
                            gx, gy = ax, ay
                        else:
                            s2 = angular_distance_deg(hdeg, wdeg2) / 180.0
                            gx, gy = chain(ax, ay, dest, woct2, displacement_cells(s2))
                        emit(z, a, ix, iy, gx, gy, dest, h)

                    # FORWARD: along the heading; unavailable when pinned.
                    if wdeg is None:
                        n_steps = 1
                    elif strict_forward:
                        n_steps = disp
                    else:
                        n_steps = max(1, disp)
                    fx_, fy_ = chain(ix, iy, l, h, n_steps)
                    if (fx_, fy_) != (ix, iy):
                        emit(z, _FORWARD, ix, iy, fx_, fy_, l, h)

                    # Rotations: stay put, turn 45 degrees.
                    for a, turn in ((_ROT_L, 1), (_ROT_R, -1)):
                        nz = zbase + (h + turn) % 8
                        valid[z, a] = 1
                        nominal[z, a] = nz
                        members[z, a, 0] = nz

    return valid, nominal, members


def sweep(
    valid: np.ndarray,
    members: np.ndarray,
    costs: np.ndarray,
    goal_mask: np.ndarray,
    optimistic: bool,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Goal-rooted cost-to-go over the hyperedge graph.

    Dijkstra on the reverse incidence: optimistic semantics relax a
    state-action edge when its first (cheapest) outcome member finalizes,
    worst-case semantics when the last one does. Priority ties expand in
    increasing state index so finalization order is reproducible.

    Returns (cost_to_go int64 with -1 for unreachable, action int8 with
    -1 for goal/unreachable, best_next int32 with -1 likewise). The
    chosen action is the first in tie-break order among those attaining
    the optimum, preferring actions whose best member strictly descends;
    best_next is the member minimizing (cost_to_go, finalization rank),
    which guarantees greedy execution terminates even across zero-cost
    plateaus.
    """
    N = valid.shape[0]
    n_edges = N * 6
    mem_flat = members.reshape(-1).astype(np.int64)
    edge_of = np.repeat(np.arange(n_edges, dtype=np.int64), 3)
    present = mem_flat >= 0
    mm = mem_flat[present]
    ee = edge_of[present]
    order = np.argsort(mm, kind="stable")
    rdat = ee[order].tolist()
    roff = np.zeros(N + 1, dtype=np.int64)
    np.cumsum(np.bincount(mm, minlength=N), out=roff[1:])
    roff = roff.tolist()

    remaining = (members >= 0).sum(axis=2).reshape(-1).tolist()
    cost_table = [int(c) for c in costs]

    INF = _INT64_MAX
    dist = [INF] * N
    rank = [-1] * N
    n_finalized = 0
    heap: list[tuple[int, int]] = []
    for g in np.nonzero(goal_mask)[0].tolist():
        dist[g] = 0
        heapq.heappush(heap, (0, g))
    while heap:
        d, m = heapq.heappop(heap)
        if rank[m] >= 0 or d > dist[m]:
            continue
        rank[m] = n_finalized
        n_finalized += 1
        for i in range(roff[m], roff[m + 1]):
            e = rdat[i]
            r = remaining[e]
            if r <= 0:
                continue
            remaining[e] = 0 if optimistic else r - 1
            if not optimistic and r > 1:
                continue  # worst case: wait for the last member
            z = e // 6
            cand = cost_table[e % 6] + d
            if cand < dist[z]:
                dist[z] = cand
                heapq.heappush(heap, (cand, z))

    out_dist = np.full(N, -1, dtype=np.int64)
    out_action = np.full(N, -1, dtype=np.int8)
    out_next = np.full(N, -1, dtype=np.int32)
    goal = goal_mask.astype(bool)
    mem_list = members.tolist()
    valid_list = valid.tolist()
    for z in range(N):
        dz = dist[z]
        if dz == INF:
            continue
        out_dist[z] = dz
        if goal[z]:
            continue
        first_opt = -1
        first_desc = -1
        for a in range(6):
            if not valid_list[z][a]:
                continue
            lo = INF
            hi = -1
            for m in mem_list[z][a]:
                if m < 0:
                    break
                dm = dist[m]
                if dm < lo:
                    lo = dm
                if dm > hi:
                    hi = dm
            if optimistic:
                if lo == INF:
                    continue
                val = cost_table[a] + lo
            else:
                if hi == INF or hi < 0:
                    continue
                val = cost_table[a] + hi
            if val != dz:
                continue
            if first_opt < 0:
                first_opt = a
            if lo < dz and first_desc < 0:
                first_desc = a
                break  # earlier actions already inspected; this one wins
        chosen = first_desc if first_desc >= 0 else first_opt
        out_action[z] = chosen
        best_m = -1
        best_key = (INF, INF)
        for m in mem_list[z][chosen]:
            if m < 0:
                break
            key = (dist[m], rank[m])
            if key < best_key:
                best_key = key
                best_m = m
        out_next[z] = best_m
    return out_dist, out_action, out_next
