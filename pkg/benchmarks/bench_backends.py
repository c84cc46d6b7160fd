"""Compare the compiled kernels against the pure-Python fallback.

Times graph construction (build_tables) and the cost-to-go sweep on the
default double-gyre instance and on a 3x-refined grid, checking that
both backends return identical arrays. Run:

    python benchmarks/bench_backends.py
"""

from __future__ import annotations

import time

import numpy as np

from flowplan import CostSet, GoalSpec, GridGeometry, Lattice, State, generate_synthetic_field
from flowplan._kernels import pure

try:
    from flowplan._kernels import _core
except ImportError:
    _core = None


def _instance(nx, ny, layers, cell=1000.0):
    g = GridGeometry(nx=nx, ny=ny, cell_size=cell, layer_depths=tuple(5.0 * i for i in range(layers)))
    field = generate_synthetic_field("double_gyre", g, amplitude=0.5)
    lat = Lattice(field)
    goal = GoalSpec(int(0.7 * nx), int(0.75 * ny), 0)
    goal_mask = np.zeros(lat.num_states, dtype=np.uint8)
    for h in range(8):
        goal_mask[lat.encode(State(goal.ix, goal.iy, goal.layer, h))] = 1
    return field, goal_mask


def _time(fn, *args, repeat=3):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def bench(nx, ny, layers):
    field, goal_mask = _instance(nx, ny, layers)
    n = goal_mask.size
    costs = np.array(CostSet().as_table(), dtype=np.int64)
    dt = 2000.0
    print(f"\n{nx}x{ny}x{layers} layers ({n} states)")
    print(f"{'kernel':<14}{'pure':>12}{'compiled':>12}{'speedup':>10}")

    rows = []
    t_pure, tables_pure = _time(
        pure.build_tables, field.u, field.v, field.land, field.geometry.cell_size, dt, False, True
    )
    if _core is not None:
        t_core, tables_core = _time(
            _core.build_tables, field.u, field.v, field.land, field.geometry.cell_size, dt, False, True
        )
        for a, b in zip(tables_pure, tables_core):
            assert np.array_equal(a, b), "backend outputs diverged"
        rows.append(("build_tables", t_pure, t_core))
    else:
        rows.append(("build_tables", t_pure, None))

    valid, _, members = tables_pure
    t_pure, sweep_pure = _time(pure.sweep, valid, members, costs, goal_mask, True)
    if _core is not None:
        t_core, sweep_core = _time(_core.sweep, valid, members, costs, goal_mask, True)
        for a, b in zip(sweep_pure, sweep_core):
            assert np.array_equal(a, b), "backend outputs diverged"
        rows.append(("sweep", t_pure, t_core))
    else:
        rows.append(("sweep", t_pure, None))

    for name, tp, tc in rows:
        if tc is None:
            print(f"{name:<14}{tp * 1e3:>10.1f}ms{'n/a':>12}{'n/a':>10}")
        else:
            print(f"{name:<14}{tp * 1e3:>10.1f}ms{tc * 1e3:>10.1f}ms{tp / tc:>9.1f}x")


if __name__ == "__main__":
    if _core is None:
        print("compiled backend not available; timing the pure fallback only")
    bench(21, 29, 4)  # default instance
    bench(63, 87, 4)  # 3x refined, ~175k states
