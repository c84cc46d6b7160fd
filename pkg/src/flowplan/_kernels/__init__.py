"""Batch kernels behind the planner: compiled core with pure fallback.

The Cython extension and the pure numpy implementation expose the same
four functions (map_cells, step_tables, build_tables, sweep) and produce
bit-identical arrays; the extension is just faster. Set
FLOWPLAN_BACKEND=pure to force the fallback (e.g. for benchmarking).
"""

from __future__ import annotations

import os

if os.environ.get("FLOWPLAN_BACKEND", "").lower() == "pure":
    from . import pure as _impl

    BACKEND = "pure"
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import pure as _impl

        BACKEND = "pure"

map_cells = _impl.map_cells
step_tables = _impl.step_tables
build_tables = _impl.build_tables
sweep = _impl.sweep
