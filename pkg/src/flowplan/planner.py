"""Goal-rooted feedback planning over the state lattice.

build_graph enumerates every state-action hyperedge (outcome sets with
the action's energy cost as weight); compute_feedback_plan then runs one
Dijkstra sweep from the goal set over the reverse graph, yielding the
optimal action and exact integer cost-to-go for every reachable state.
A per-start forward search lives in ``flowplan.oracle`` as the
independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .config import config_hash, fingerprint_items
from .flowfield import FieldError, FlowField
from .lattice import GoalSpec, Lattice, State
from .transitions import Action, CostSet, OutcomeSet, UncertaintyConfig

# Unreachable sentinel for internal arithmetic; far below int64 overflow
# even after adding action costs.
_BIG = np.int64(2) ** 62


class PlanError(ValueError):
    """Planning request that cannot be satisfied (e.g. goal on land)."""


@dataclass
class PlanningGraph:
    """Weighted directed hypergraph over all states.

    Array-backed: valid[z, a] flags each available action, nominal[z, a]
    its nominal successor, members[z, a, :] the outcome set (sorted,
    -1 padded). Actions index in tie-break order (Action values).
    """

    field: FlowField
    lattice: Lattice
    costs: CostSet
    dt: float
    uncertainty: UncertaintyConfig
    strict_paper_displacement: bool
    valid: np.ndarray
    nominal: np.ndarray
    members: np.ndarray

    @property
    def num_states(self) -> int:
        return self.lattice.num_states

    def outcome_set(self, z: int, action: Action) -> OutcomeSet:
        if not self.valid[z, action]:
            raise PlanError(f"action {action.name} unavailable from state {z}")
        row = self.members[z, action]
        return OutcomeSet(int(self.nominal[z, action]), tuple(int(m) for m in row if m >= 0))

    def edges_from(self, z: int) -> list[tuple[Action, OutcomeSet, int]]:
        """Available actions with outcome sets and weights, tie-break order."""
        out = []
        for a in Action:
            if self.valid[z, a]:
                out.append((a, self.outcome_set(z, a), self.costs.cost_of(a)))
        return out


def build_graph(
    field: FlowField,
    costs: CostSet,
    dt: float,
    uncertainty: UncertaintyConfig = UncertaintyConfig(),
    *,
    strict_paper_displacement: bool = False,
) -> PlanningGraph:
    """Enumerate successor sets for every free state and available action."""
    if not (dt > 0 and math.isfinite(dt)):
        raise PlanError(f"dt must be positive and finite, got {dt}")
    valid, nominal, members = _kernels.build_tables(
        field.u,
        field.v,
        field.land,
        field.geometry.cell_size,
        dt,
        strict_paper_displacement,
        uncertainty.dispersal,
    )
    return PlanningGraph(
        field=field,
        lattice=Lattice(field),
        costs=costs,
        dt=dt,
        uncertainty=uncertainty,
        strict_paper_displacement=strict_paper_displacement,
        valid=valid,
        nominal=nominal,
        members=members,
    )


@dataclass
class FeedbackPlan:
    """Optimal action and cost-to-go for every state, plus provenance.

    cost_to_go_raw holds -1 for unreachable states (land slots included);
    action_raw holds -1 for goal and unreachable states. best_next is the
    cheapest-to-go member of the chosen action's outcome set, the
    successor a disturbance-free execution realizes.
    """

    goal: GoalSpec
    goal_indices: tuple[int, ...]
    lattice: Lattice
    costs: CostSet
    dt: float
    uncertainty: UncertaintyConfig
    strict_paper_displacement: bool
    semantics: str
    cost_to_go_raw: np.ndarray
    action_raw: np.ndarray
    best_next: np.ndarray
    config_hash: str

    def __post_init__(self) -> None:
        self._goal_set = frozenset(int(z) for z in self.goal_indices)

    @property
    def num_states(self) -> int:
        return self.lattice.num_states

    def is_goal(self, z: int) -> bool:
        return z in self._goal_set

    def cost_to_go(self, z: int) -> int | None:
        """Minimum energy to the goal set, None when unreachable."""
        c = int(self.cost_to_go_raw[z])
        return None if c < 0 else c

    def action_of(self, z: int) -> Action | None:
        a = int(self.action_raw[z])
        return None if a < 0 else Action(a)

    @property
    def reachable(self) -> np.ndarray:
        return self.cost_to_go_raw >= 0


def compute_feedback_plan(graph: PlanningGraph, goal: GoalSpec, semantics: str = "optimistic") -> FeedbackPlan:
    """Cost-to-go and optimal first action for every state, rooted at the
    goal set.

    Optimistic semantics price an action at its cost plus the cheapest
    outcome member (exactly the edge set the graph defines); worst_case
    prices against the costliest member instead. Ties among equal-cost
    actions resolve in Action order, preferring actions that strictly
    descend in cost-to-go so greedy execution cannot stall on zero-cost
    cycles.
    """
    if semantics not in ("optimistic", "worst_case"):
        raise PlanError(f"unknown outcome semantics {semantics!r}")
    try:
        goal_indices = graph.lattice.goal_states(goal)
    except FieldError as exc:
        raise PlanError(str(exc)) from exc
    goal_mask = np.zeros(graph.num_states, dtype=np.uint8)
    goal_mask[list(goal_indices)] = 1
    cost_table = np.array(graph.costs.as_table(), dtype=np.int64)
    dist, action, best_next = _kernels.sweep(
        graph.valid, graph.members, cost_table, goal_mask, semantics == "optimistic"
    )
    items = fingerprint_items(
        graph.field,
        graph.costs,
        graph.dt,
        graph.uncertainty.dispersal,
        graph.strict_paper_displacement,
        semantics,
        goal,
    )
    return FeedbackPlan(
        goal=goal,
        goal_indices=goal_indices,
        lattice=graph.lattice,
        costs=graph.costs,
        dt=graph.dt,
        uncertainty=graph.uncertainty,
        strict_paper_displacement=graph.strict_paper_displacement,
        semantics=semantics,
        cost_to_go_raw=dist,
        action_raw=action,
        best_next=best_next,
        config_hash=config_hash(items),
    )


def plan_action(plan: FeedbackPlan, state: State) -> Action | None:
    """Constant-time policy lookup. None for goal states (at goal) and
    unreachable states; distinguish via plan.is_goal / plan.cost_to_go."""
    z = plan.lattice.require_free_state(state)
    return plan.action_of(z)


def _state_values(graph: PlanningGraph, cost_to_go: np.ndarray, semantics: str) -> np.ndarray:
    """Bellman right-hand side per state: min over actions of action cost
    plus best member cost-to-go (_BIG where no action applies)."""
    mem = graph.members
    present = mem >= 0
    dist = np.where(cost_to_go >= 0, cost_to_go, _BIG)
    md = dist[np.where(present, mem, 0)]  # [N, 6, 3]
    if semantics == "optimistic":
        best = np.where(present, md, _BIG).min(axis=2)
    else:
        best = np.where(present, md, -1).max(axis=2)
    usable = graph.valid.astype(bool) & (best >= 0) & (best < _BIG)
    costs = np.array(graph.costs.as_table(), dtype=np.int64)
    values = np.where(usable, best + costs[None, :], _BIG)
    return values.min(axis=1)


def check_bellman(graph: PlanningGraph, plan: FeedbackPlan) -> list[tuple[int, int, int]]:
    """Exact integer Bellman-consistency check of a plan against a graph.

    Returns (state index, stored cost, recomputed cost) triples for every
    violation: reachable non-goal states must equal the Bellman optimum
    and their stored action must attain it; goal states must cost 0;
    unreachable states must truly have no usable action.
    """
    n = graph.num_states
    stored = plan.cost_to_go_raw
    rhs = _state_values(graph, stored, plan.semantics)
    goal_mask = np.zeros(n, dtype=bool)
    goal_mask[list(plan.goal_indices)] = True

    violations: list[tuple[int, int, int]] = []
    reachable = stored >= 0
    active = reachable & ~goal_mask
    bad = active & (np.where(rhs < _BIG, rhs, -1) != stored)
    for z in np.nonzero(bad)[0]:
        violations.append((int(z), int(stored[z]), int(rhs[z]) if rhs[z] < _BIG else -1))
    for z in np.nonzero(goal_mask & (stored != 0))[0]:
        violations.append((int(z), int(stored[z]), 0))
    phantom = ~reachable & (rhs < _BIG)
    for z in np.nonzero(phantom)[0]:
        violations.append((int(z), -1, int(rhs[z])))

    # The stored action must attain the stored cost.
    costs = np.array(graph.costs.as_table(), dtype=np.int64)
    for z in np.nonzero(active & ~bad)[0]:
        a = int(plan.action_raw[z])
        if a < 0:
            violations.append((int(z), int(stored[z]), -1))
            continue
        row = graph.members[z, a]
        mem = row[row >= 0]
        md = stored[mem]
        if plan.semantics == "optimistic":
            best = md[md >= 0].min() if (md >= 0).any() else None
        else:
            best = md.max() if (md >= 0).all() else None
        if best is None or costs[a] + int(best) != int(stored[z]):
            violations.append((int(z), int(stored[z]), -1))
    return sorted(set(violations))
