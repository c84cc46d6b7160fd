"""Per-start forward shortest-path oracle.

The literal formulation of the plan: one forward Dijkstra per start
state over the expanded arc graph (one arc per outcome member, weighted
by the action cost), stopping when a goal state finalizes. It shares no
code with the reverse sweep in ``flowplan._kernels`` and exists to
cross-check it; it is O(N) slower and meant for tests and spot audits,
not production planning.
"""

from __future__ import annotations

import heapq

from .lattice import GoalSpec
from .planner import PlanningGraph
from .transitions import Action


def _forward_arcs(graph: PlanningGraph) -> list[list[tuple[int, int]]]:
    """Per-state (weight, successor) arcs, cached on the graph."""
    arcs = getattr(graph, "_forward_arcs", None)
    if arcs is None:
        costs = graph.costs.as_table()
        valid = graph.valid.tolist()
        members = graph.members.tolist()
        arcs = []
        for z in range(graph.num_states):
            row = []
            for a in range(len(Action)):
                if not valid[z][a]:
                    continue
                w = costs[a]
                for m in members[z][a]:
                    if m < 0:
                        break
                    row.append((w, m))
            arcs.append(row)
        graph._forward_arcs = arcs
    return arcs


def _forward_cost(graph: PlanningGraph, start: int, goal_set: frozenset[int]) -> int | None:
    """Single-pair forward Dijkstra, early-stopped at the goal set.
    Priority ties expand in increasing state index."""
    if start in goal_set:
        return 0
    arcs = _forward_arcs(graph)
    dist = {start: 0}
    heap = [(0, start)]
    done = set()
    while heap:
        d, z = heapq.heappop(heap)
        if z in done or d > dist[z]:
            continue
        if z in goal_set:
            return d
        done.add(z)
        for w, m in arcs[z]:
            nd = d + w
            if nd < dist.get(m, _INF):
                dist[m] = nd
                heapq.heappush(heap, (nd, m))
    return None


_INF = float("inf")


def per_state_dijkstra_oracle(
    graph: PlanningGraph,
    start: int,
    goal: GoalSpec,
    *,
    cost_cache: dict[int, int | None] | None = None,
) -> tuple[int | None, Action | None]:
    """Cost-to-go and tie-broken first action for one start state.

    Returns (None, None) when the goal is unreachable and (0, None) at
    goal states. The action rule matches the planner: first action in
    Action order whose cost plus cheapest-member cost attains the
    optimum, preferring a strictly descending one. Pass a shared
    cost_cache when querying many starts; each state's forward search
    then runs once.
    """
    goal_set = frozenset(graph.lattice.goal_states(goal))
    if cost_cache is None:
        cost_cache = {}

    def cost_of(z: int) -> int | None:
        if z not in cost_cache:
            cost_cache[z] = _forward_cost(graph, z, goal_set)
        return cost_cache[z]

    if start in goal_set:
        return 0, None
    c0 = cost_of(start)
    if c0 is None:
        return None, None

    costs = graph.costs.as_table()
    first_opt: Action | None = None
    first_desc: Action | None = None
    for a in Action:
        if not graph.valid[start, a]:
            continue
        lo: int | None = None
        for m in graph.members[start, a]:
            if m < 0:
                break
            cm = cost_of(int(m))
            if cm is not None and (lo is None or cm < lo):
                lo = cm
        if lo is None or costs[a] + lo != c0:
            continue
        if first_opt is None:
            first_opt = a
        if lo < c0 and first_desc is None:
            first_desc = a
            break
    return c0, first_desc if first_desc is not None else first_opt
