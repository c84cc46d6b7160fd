# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled planner kernels.

Must produce bit-identical arrays to ``flowplan._kernels.pure``; the
test suite enforces it. Float expressions mirror the pure backend
operation for operation (the build compiles with -ffp-contract=off so
no FMA contraction can perturb results).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport M_PI, atan2, ceil, fabs, floor, fmod

cnp.import_array()

ctypedef cnp.int64_t i64
ctypedef cnp.int32_t i32
ctypedef cnp.int8_t i8
ctypedef cnp.uint8_t u8

cdef i64 _I64_MAX = np.iinfo(np.int64).max

# Unit cell step per octant, counterclockwise from east.
cdef int[8] _ODX = [1, 1, 0, -1, -1, -1, 0, 1]
cdef int[8] _ODY = [0, 1, 1, 1, 0, -1, -1, -1]

# Action slots, in planner tie-break order.
cdef enum:
    A_DRIFT = 0
    A_UP = 1
    A_DOWN = 2
    A_FORWARD = 3
    A_ROT_L = 4
    A_ROT_R = 5


cdef double _dir_deg(long ddx, long ddy) noexcept nogil:
    """Direction of an integer displacement in [0, 360) degrees; exact
    multiples of 45 on the axes/diagonals; -1.0 for no motion."""
    cdef double deg
    if ddx == 0 and ddy == 0:
        return -1.0
    if ddx == 0:
        return 90.0 if ddy > 0 else 270.0
    if ddy == 0:
        return 0.0 if ddx > 0 else 180.0
    if ddx == ddy:
        return 45.0 if ddx > 0 else 225.0
    if ddx == -ddy:
        return 135.0 if ddy > 0 else 315.0
    deg = atan2(<double> ddy, <double> ddx) * (180.0 / M_PI)
    deg = fmod(deg, 360.0)
    if deg < 0.0:
        deg += 360.0
    return deg


cdef long _octant(double deg) noexcept nogil:
    return (<long> floor((deg + 22.5) / 45.0)) % 8


cdef double _align(double hdeg, double wdeg) noexcept nogil:
    """Alignment score: circular distance in degrees over 180."""
    cdef double d = fabs(hdeg - wdeg)
    if d > 180.0:
        d = 360.0 - d
    return d / 180.0


cdef int _disp(double s) noexcept nogil:
    if s <= 0.2:
        return 2
    if s <= 0.5:
        return 1
    return 0


cdef long _nearest_free_point(const u8[:, ::1] land, const double[::1] xs, const double[::1] ys,
                              double px, double py) except -2:
    """Flat index of the free cell nearest to a point; first minimum in
    row-major order wins ties (smaller iy, then ix)."""
    cdef Py_ssize_t ny = land.shape[0], nx = land.shape[1], iy, ix
    cdef double best = -1.0, dx, dy, d
    cdef long idx = -1
    for iy in range(ny):
        dy = ys[iy] - py
        for ix in range(nx):
            if land[iy, ix]:
                continue
            dx = xs[ix] - px
            d = dx * dx + dy * dy
            if idx < 0 or d < best:
                best = d
                idx = iy * nx + ix
    if idx < 0:
        raise ValueError("layer has no free cells")
    return idx


cdef long _nearest_free_int(const u8[:, ::1] land, long tx, long ty) except -2:
    """Flat index of the free cell nearest to integer cell (tx, ty),
    exact integer distances."""
    cdef Py_ssize_t ny = land.shape[0], nx = land.shape[1], iy, ix
    cdef i64 best = -1, dx, dy, d
    cdef long idx = -1
    if 0 <= tx < nx and 0 <= ty < ny and not land[ty, tx]:
        return ty * nx + tx
    for iy in range(ny):
        dy = <i64> iy - ty
        for ix in range(nx):
            if land[iy, ix]:
                continue
            dx = <i64> ix - tx
            d = dx * dx + dy * dy
            if idx < 0 or d < best:
                best = d
                idx = iy * nx + ix
    if idx < 0:
        raise ValueError("layer has no free cells")
    return idx


def map_cells(object u_arr, object v_arr, object land_arr, double cell_size, double dt):
    """Drift mapping of every free cell; -1 on land. See pure.map_cells."""
    cdef const double[:, :, ::1] u = np.ascontiguousarray(u_arr, dtype=np.float64)
    cdef const double[:, :, ::1] v = np.ascontiguousarray(v_arr, dtype=np.float64)
    land8 = np.ascontiguousarray(land_arr, dtype=bool).view(np.uint8)
    cdef const u8[:, :, ::1] land = land8
    cdef Py_ssize_t L = u.shape[0], ny = u.shape[1], nx = u.shape[2], l, iy, ix
    out_arr = np.full((L, ny, nx), -1, dtype=np.int32)
    cdef i32[:, :, ::1] out = out_arr
    xs_arr = (np.arange(nx) + 0.5) * cell_size
    ys_arr = (np.arange(ny) + 0.5) * cell_size
    cdef const double[::1] xs = xs_arr
    cdef const double[::1] ys = ys_arr
    cdef double ex, ey, fx, fy, cxd, cyd
    cdef long cx, cy
    for l in range(L):
        for iy in range(ny):
            for ix in range(nx):
                if land[l, iy, ix]:
                    continue
                ex = xs[ix] + dt * u[l, iy, ix]
                ey = ys[iy] + dt * v[l, iy, ix]
                fx = ex / cell_size - 0.5
                fy = ey / cell_size - 0.5
                cxd = ceil(fx - 0.5)
                if cxd < 0.0:
                    cxd = 0.0
                if cxd > nx - 1.0:
                    cxd = nx - 1.0
                cyd = ceil(fy - 0.5)
                if cyd < 0.0:
                    cyd = 0.0
                if cyd > ny - 1.0:
                    cyd = ny - 1.0
                cx = <long> cxd
                cy = <long> cyd
                if land[l, cy, cx]:
                    out[l, iy, ix] = <i32> _nearest_free_point(land[l], xs, ys, ex, ey)
                else:
                    out[l, iy, ix] = <i32> (cy * nx + cx)
    return out_arr


def step_tables(object land_arr):
    """One-cell redirected step per free cell and octant; -1 on land."""
    land8 = np.ascontiguousarray(land_arr, dtype=bool).view(np.uint8)
    cdef const u8[:, :, ::1] land = land8
    cdef Py_ssize_t L = land.shape[0], ny = land.shape[1], nx = land.shape[2], l, iy, ix
    cdef int o
    cdef long tx, ty
    out_arr = np.full((L, ny, nx, 8), -1, dtype=np.int32)
    cdef i32[:, :, :, ::1] out = out_arr
    for l in range(L):
        for iy in range(ny):
            for ix in range(nx):
                if land[l, iy, ix]:
                    continue
                for o in range(8):
                    tx = ix + _ODX[o]
                    ty = iy + _ODY[o]
                    if 0 <= tx < nx and 0 <= ty < ny and not land[l, ty, tx]:
                        out[l, iy, ix, o] = <i32> (ty * nx + tx)
                    else:
                        out[l, iy, ix, o] = <i32> _nearest_free_int(land[l], tx, ty)
    return out_arr


cdef void _emit(u8[:, ::1] valid, i32[:, ::1] nominal, i32[:, :, ::1] members,
                const u8[:, :, ::1] land, bint dispersal,
                long z, int a, long ix, long iy, long nix, long niy, long nl, long h,
                Py_ssize_t ny, Py_ssize_t nx) noexcept nogil:
    """Record one hyperedge: nominal successor plus lateral dispersal."""
    cdef long nomz = ((nl * ny + niy) * nx + nix) * 8 + h
    cdef long ddx = nix - ix, ddy = niy - iy
    cdef long mem0, mem1, mem2, n_mem, o, perp, lx, ly, cand, tmp
    cdef int i, j
    valid[z, a] = 1
    nominal[z, a] = <i32> nomz
    mem0 = nomz
    n_mem = 1
    mem1 = -1
    mem2 = -1
    if dispersal and not (ddx == 0 and ddy == 0):
        o = _octant(_dir_deg(ddx, ddy))
        for i in range(2):
            perp = (o + 2) % 8 if i == 0 else (o + 6) % 8
            lx = nix + _ODX[perp]
            ly = niy + _ODY[perp]
            if 0 <= lx < nx and 0 <= ly < ny and not land[nl, ly, lx]:
                cand = ((nl * ny + ly) * nx + lx) * 8 + h
                if n_mem == 1:
                    mem1 = cand
                    n_mem = 2
                else:
                    mem2 = cand
                    n_mem = 3
        # insertion sort ascending over the up-to-3 members
        if n_mem >= 2 and mem1 < mem0:
            tmp = mem0; mem0 = mem1; mem1 = tmp
        if n_mem == 3:
            if mem2 < mem1:
                tmp = mem1; mem1 = mem2; mem2 = tmp
            if mem1 < mem0:
                tmp = mem0; mem0 = mem1; mem1 = tmp
    members[z, a, 0] = <i32> mem0
    if n_mem >= 2:
        members[z, a, 1] = <i32> mem1
    if n_mem == 3:
        members[z, a, 2] = <i32> mem2


def build_tables(object u_arr, object v_arr, object land_arr, double cell_size, double dt,
                 bint strict_forward, bint dispersal):
    """Successor tables for every (state, action); see pure.build_tables."""
    land8 = np.ascontiguousarray(land_arr, dtype=bool).view(np.uint8)
    cdef const u8[:, :, ::1] land = land8
    cdef Py_ssize_t L = land.shape[0], ny = land.shape[1], nx = land.shape[2]
    cdef long N = L * ny * nx * 8

    mapped_arr = map_cells(u_arr, v_arr, land_arr, cell_size, dt)
    step_arr = step_tables(land_arr)
    cdef const i32[:, :, ::1] mapped = mapped_arr
    cdef const i32[:, :, :, ::1] step = step_arr

    valid_arr = np.zeros((N, 6), dtype=np.uint8)
    nominal_arr = np.full((N, 6), -1, dtype=np.int32)
    members_arr = np.full((N, 6, 3), -1, dtype=np.int32)
    cdef u8[:, ::1] valid = valid_arr
    cdef i32[:, ::1] nominal = nominal_arr
    cdef i32[:, :, ::1] members = members_arr

    layer_free_arr = np.zeros(L, dtype=np.uint8)
    cdef u8[::1] layer_free = layer_free_arr
    cdef Py_ssize_t l, iy, ix
    for l in range(L):
        layer_free[l] = 0
        for iy in range(ny):
            for ix in range(nx):
                if not land[l, iy, ix]:
                    layer_free[l] = 1
                    break
            if layer_free[l]:
                break

    cdef long m, woct, zbase, z, h, disp, disp2, n_steps, cx, cy, flat, k
    cdef double wdeg, hdeg, wdeg2
    cdef int gi, n_glide, a
    cdef long[2] g_a
    cdef long[2] g_dest, g_ax, g_ay, g_oct
    cdef double[2] g_wdeg
    cdef long dest, aflat, ax, ay, gx, gy

    for l in range(L):
        for iy in range(ny):
            for ix in range(nx):
                if land[l, iy, ix]:
                    continue
                m = mapped[l, iy, ix]
                wdeg = _dir_deg(m % nx - ix, m // nx - iy)
                woct = -1 if wdeg < 0.0 else _octant(wdeg)

                n_glide = 0
                for gi in range(2):
                    a = A_UP if gi == 0 else A_DOWN
                    dest = l - 1 if gi == 0 else l + 1
                    if dest < 0 or dest >= L or not layer_free[dest]:
                        continue
                    aflat = _nearest_free_int(land[dest], ix, iy)
                    ax = aflat % nx
                    ay = aflat // nx
                    m = mapped[dest, ay, ax]
                    wdeg2 = _dir_deg(m % nx - ax, m // nx - ay)
                    g_a[n_glide] = a
                    g_dest[n_glide] = dest
                    g_ax[n_glide] = ax
                    g_ay[n_glide] = ay
                    g_wdeg[n_glide] = wdeg2
                    g_oct[n_glide] = -1 if wdeg2 < 0.0 else _octant(wdeg2)
                    n_glide += 1

                zbase = ((l * ny + iy) * nx + ix) * 8
                for h in range(8):
                    z = zbase + h
                    hdeg = h * 45.0
                    disp = -1 if wdeg < 0.0 else _disp(_align(hdeg, wdeg))

                    # DRIFT
                    if wdeg < 0.0:
                        _emit(valid, nominal, members, land, dispersal, z, A_DRIFT,
                              ix, iy, ix, iy, l, h, ny, nx)
                    else:
                        cx = ix
                        cy = iy
                        for k in range(disp):
                            flat = step[l, cy, cx, woct]
                            cx = flat % nx
                            cy = flat // nx
                        _emit(valid, nominal, members, land, dispersal, z, A_DRIFT,
                              ix, iy, cx, cy, l, h, ny, nx)

                    # UP / DOWN
                    for gi in range(n_glide):
                        if g_wdeg[gi] < 0.0:
                            gx = g_ax[gi]
                            gy = g_ay[gi]
                        else:
                            disp2 = _disp(_align(hdeg, g_wdeg[gi]))
                            gx = g_ax[gi]
                            gy = g_ay[gi]
                            for k in range(disp2):
                                flat = step[g_dest[gi], gy, gx, g_oct[gi]]
                                gx = flat % nx
                                gy = flat // nx
                        _emit(valid, nominal, members, land, dispersal, z, <int> g_a[gi],
                              ix, iy, gx, gy, g_dest[gi], h, ny, nx)

                    # FORWARD
                    if wdeg < 0.0:
                        n_steps = 1
                    elif strict_forward:
                        n_steps = disp
                    else:
                        n_steps = disp if disp > 1 else 1
                    cx = ix
                    cy = iy
                    for k in range(n_steps):
                        flat = step[l, cy, cx, h]
                        cx = flat % nx
                        cy = flat // nx
                    if cx != ix or cy != iy:
                        _emit(valid, nominal, members, land, dispersal, z, A_FORWARD,
                              ix, iy, cx, cy, l, h, ny, nx)

                    # Rotations
                    valid[z, A_ROT_L] = 1
                    nominal[z, A_ROT_L] = <i32> (zbase + (h + 1) % 8)
                    members[z, A_ROT_L, 0] = nominal[z, A_ROT_L]
                    valid[z, A_ROT_R] = 1
                    nominal[z, A_ROT_R] = <i32> (zbase + (h + 7) % 8)
                    members[z, A_ROT_R, 0] = nominal[z, A_ROT_R]

    return valid_arr, nominal_arr, members_arr


cdef inline void _heap_push(i64[::1] hd, i32[::1] hn, Py_ssize_t* size, i64 d, i32 n) noexcept nogil:
    cdef Py_ssize_t i = size[0], parent
    cdef i64 td
    cdef i32 tn
    hd[i] = d
    hn[i] = n
    size[0] = i + 1
    while i > 0:
        parent = (i - 1) >> 1
        if hd[parent] > hd[i] or (hd[parent] == hd[i] and hn[parent] > hn[i]):
            td = hd[parent]; hd[parent] = hd[i]; hd[i] = td
            tn = hn[parent]; hn[parent] = hn[i]; hn[i] = tn
            i = parent
        else:
            break


cdef inline void _heap_pop(i64[::1] hd, i32[::1] hn, Py_ssize_t* size, i64* d, i32* n) noexcept nogil:
    cdef Py_ssize_t i = 0, child, last = size[0] - 1
    cdef i64 td
    cdef i32 tn
    d[0] = hd[0]
    n[0] = hn[0]
    hd[0] = hd[last]
    hn[0] = hn[last]
    size[0] = last
    while True:
        child = 2 * i + 1
        if child >= last:
            break
        if child + 1 < last and (hd[child + 1] < hd[child] or
                                 (hd[child + 1] == hd[child] and hn[child + 1] < hn[child])):
            child += 1
        if hd[child] < hd[i] or (hd[child] == hd[i] and hn[child] < hn[i]):
            td = hd[child]; hd[child] = hd[i]; hd[i] = td
            tn = hn[child]; hn[child] = hn[i]; hn[i] = tn
            i = child
        else:
            break


def sweep(object valid_arr, object members_arr, object costs_arr, object goal_arr, bint optimistic):
    """Goal-rooted cost-to-go sweep; see pure.sweep for semantics."""
    valid_c = np.ascontiguousarray(valid_arr, dtype=np.uint8)
    members_c = np.ascontiguousarray(members_arr, dtype=np.int32)
    costs_c = np.ascontiguousarray(costs_arr, dtype=np.int64)
    goal_c = np.ascontiguousarray(goal_arr, dtype=np.uint8)
    cdef const u8[:, ::1] valid = valid_c
    cdef const i32[:, :, ::1] members = members_c
    cdef const i64[::1] costs = costs_c
    cdef const u8[::1] goal = goal_c
    cdef Py_ssize_t N = valid.shape[0]
    cdef long n_edges = N * 6

    # Reverse incidence (member -> hyperedge) in CSR form.
    cdef long total = 0
    cdef Py_ssize_t z
    cdef int a, s
    cdef long m, e, i
    remaining_arr = np.zeros(n_edges, dtype=np.int8)
    cdef i8[::1] remaining = remaining_arr
    for z in range(N):
        for a in range(6):
            for s in range(3):
                if members[z, a, s] >= 0:
                    total += 1
                    remaining[z * 6 + a] += 1
    roff_arr = np.zeros(N + 1, dtype=np.int64)
    cdef i64[::1] roff = roff_arr
    for z in range(N):
        for a in range(6):
            for s in range(3):
                m = members[z, a, s]
                if m >= 0:
                    roff[m + 1] += 1
    for z in range(N):
        roff[z + 1] += roff[z]
    rdat_arr = np.zeros(total, dtype=np.int64)
    cdef i64[::1] rdat = rdat_arr
    fill_arr = np.zeros(N, dtype=np.int64)
    cdef i64[::1] fill = fill_arr
    for z in range(N):
        for a in range(6):
            for s in range(3):
                m = members[z, a, s]
                if m >= 0:
                    rdat[roff[m] + fill[m]] = z * 6 + a
                    fill[m] += 1

    dist_arr = np.full(N, _I64_MAX, dtype=np.int64)
    rank_arr = np.full(N, -1, dtype=np.int32)
    cdef i64[::1] dist = dist_arr
    cdef i32[::1] rank = rank_arr
    heap_d_arr = np.zeros(total + N + 8, dtype=np.int64)
    heap_n_arr = np.zeros(total + N + 8, dtype=np.int32)
    cdef i64[::1] heap_d = heap_d_arr
    cdef i32[::1] heap_n = heap_n_arr
    cdef Py_ssize_t heap_size = 0
    cdef i32 node, n_finalized = 0
    cdef i64 d, cand
    cdef i8 r

    for z in range(N):
        if goal[z]:
            dist[z] = 0
            _heap_push(heap_d, heap_n, &heap_size, 0, <i32> z)
    while heap_size > 0:
        _heap_pop(heap_d, heap_n, &heap_size, &d, &node)
        if rank[node] >= 0 or d > dist[node]:
            continue
        rank[node] = n_finalized
        n_finalized += 1
        for i in range(roff[node], roff[node + 1]):
            e = rdat[i]
            r = remaining[e]
            if r <= 0:
                continue
            remaining[e] = 0 if optimistic else r - 1
            if not optimistic and r > 1:
                continue
            z = e // 6
            cand = costs[e % 6] + d
            if cand < dist[z]:
                dist[z] = cand
                _heap_push(heap_d, heap_n, &heap_size, cand, <i32> z)

    out_dist_arr = np.full(N, -1, dtype=np.int64)
    out_action_arr = np.full(N, -1, dtype=np.int8)
    out_next_arr = np.full(N, -1, dtype=np.int32)
    cdef i64[::1] out_dist = out_dist_arr
    cdef i8[::1] out_action = out_action_arr
    cdef i32[::1] out_next = out_next_arr
    cdef long first_opt, first_desc, chosen, best_m
    cdef i64 dz, lo, hi, val, bk_d
    cdef i32 bk_r
    for z in range(N):
        dz = dist[z]
        if dz == _I64_MAX:
            continue
        out_dist[z] = dz
        if goal[z]:
            continue
        first_opt = -1
        first_desc = -1
        for a in range(6):
            if not valid[z, a]:
                continue
            lo = _I64_MAX
            hi = -1
            for s in range(3):
                m = members[z, a, s]
                if m < 0:
                    break
                if dist[m] < lo:
                    lo = dist[m]
                if dist[m] > hi:
                    hi = dist[m]
            if optimistic:
                if lo == _I64_MAX:
                    continue
                val = costs[a] + lo
            else:
                if hi == _I64_MAX or hi < 0:
                    continue
                val = costs[a] + hi
            if val != dz:
                continue
            if first_opt < 0:
                first_opt = a
            if lo < dz and first_desc < 0:
                first_desc = a
                break
        chosen = first_desc if first_desc >= 0 else first_opt
        out_action[z] = <i8> chosen
        best_m = -1
        bk_d = _I64_MAX
        bk_r = 2147483647
        for s in range(3):
            m = members[z, chosen, s]
            if m < 0:
                break
            if dist[m] < bk_d or (dist[m] == bk_d and rank[m] < bk_r):
                bk_d = dist[m]
                bk_r = rank[m]
                best_m = m
        out_next[z] = <i32> best_m
    return out_dist_arr, out_action_arr, out_next_arr
