"""Rollout of a feedback plan under seeded disturbance.

Each step executes the plan's action at the current state; the realized
successor is the cheapest-to-go outcome member with probability 1 - p,
otherwise a uniformly random other member. Every rollout owns a random
stream derived from (seed, start index), so runs are reproducible
individually and in any batch order.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .flowfield import FlowField
from .lattice import HEADING_CONVENTION, State, heading_deg
from .planner import FeedbackPlan, PlanError, PlanningGraph, build_graph
from .transitions import Action


class Terminal(Enum):
    REACHED_GOAL = "reached_goal"
    STEP_LIMIT = "step_limit"
    STUCK = "stuck"


@dataclass(frozen=True)
class DisturbanceConfig:
    """Dispersal probability p and the base seed for rollout streams."""

    p: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"dispersal probability must be in [0, 1], got {self.p}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")


class TrajectoryStep(NamedTuple):
    index: int
    state: State
    action: Action
    successor: State
    energy_after: int


@dataclass
class Trajectory:
    start: State
    steps: list[TrajectoryStep]
    terminal: Terminal
    energy: int

    @property
    def num_steps(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class ReachabilitySummary:
    """Aggregate over one rollout per reachable state; means are over the
    runs that reached the goal. Zero runs flags an empty reachable set."""

    runs: int
    reached: int
    mean_energy: float | None
    mean_steps: float | None

    @property
    def fraction_reached(self) -> float | None:
        return None if self.runs == 0 else self.reached / self.runs

    @property
    def empty(self) -> bool:
        return self.runs == 0


def _check_field(plan: FeedbackPlan, field: FlowField) -> None:
    if field.geometry != plan.lattice.geometry:
        raise PlanError("field geometry does not match the plan's lattice")


def _ensure_graph(plan: FeedbackPlan, field: FlowField, graph: PlanningGraph | None) -> PlanningGraph:
    if graph is not None:
        if graph.num_states != plan.num_states:
            raise PlanError("graph does not match the plan's lattice")
        return graph
    return build_graph(
        field,
        plan.costs,
        plan.dt,
        plan.uncertainty,
        strict_paper_displacement=plan.strict_paper_displacement,
    )


def _goal_test(plan: FeedbackPlan):
    """Predicate over state indices: cell membership for any-heading
    goals, exact state match otherwise."""
    if plan.goal.heading is None:
        cell_flat = plan.goal_indices[0] // 8
        return lambda z: z // 8 == cell_flat
    target = plan.goal_indices[0]
    return lambda z: z == target


def rollout(
    plan: FeedbackPlan,
    field: FlowField,
    start: State,
    disturbance: DisturbanceConfig = DisturbanceConfig(),
    max_steps: int | None = None,
    *,
    graph: PlanningGraph | None = None,
) -> Trajectory:
    """Execute the plan from one start state until goal, step limit, or a
    stuck (unreachable) state. Deterministic given the disturbance seed."""
    _check_field(plan, field)
    if max_steps is None:
        max_steps = plan.num_states
    if max_steps < 1:
        raise ValueError(f"max_steps must be at least 1, got {max_steps}")
    z = plan.lattice.require_free_state(start)
    p = disturbance.p
    rng = np.random.default_rng((disturbance.seed, z)) if p > 0.0 else None
    members = _ensure_graph(plan, field, graph).members if p > 0.0 else None

    attained = _goal_test(plan)
    decode = plan.lattice.decode
    steps: list[TrajectoryStep] = []
    energy = 0
    terminal = None
    cur = z
    for k in range(max_steps):
        if attained(cur):
            terminal = Terminal.REACHED_GOAL
            break
        a = int(plan.action_raw[cur])
        if a < 0:
            terminal = Terminal.STUCK
            break
        nxt = int(plan.best_next[cur])
        if rng is not None:
            mem = [int(m) for m in members[cur, a] if m >= 0]
            if rng.random() < p and len(mem) > 1:
                others = [m for m in mem if m != nxt]
                nxt = others[int(rng.integers(len(others)))]
        energy += plan.costs.cost_of(Action(a))
        steps.append(TrajectoryStep(k, decode(cur), Action(a), decode(nxt), energy))
        cur = nxt
    if terminal is None:
        terminal = Terminal.REACHED_GOAL if attained(cur) else Terminal.STEP_LIMIT
    return Trajectory(start=start, steps=steps, terminal=terminal, energy=energy)


def batch_reachability(
    plan: FeedbackPlan,
    field: FlowField,
    disturbance: DisturbanceConfig = DisturbanceConfig(),
    max_steps: int | None = None,
    *,
    graph: PlanningGraph | None = None,
) -> ReachabilitySummary:
    """One rollout from every reachable state, aggregated.

    Equivalent to looping rollout() but avoids per-step bookkeeping, so
    it stays fast at full-lattice scale.
    """
    _check_field(plan, field)
    if max_steps is None:
        max_steps = plan.num_states
    p = disturbance.p
    seed = disturbance.seed
    mem_list = None
    if p > 0.0:
        mem_list = _ensure_graph(plan, field, graph).members.tolist()

    attained = _goal_test(plan)
    action_list = plan.action_raw.tolist()
    next_list = plan.best_next.tolist()
    cost_table = plan.costs.as_table()
    step_cost = [cost_table[a] if a >= 0 else 0 for a in action_list]

    starts = np.nonzero(plan.cost_to_go_raw >= 0)[0].tolist()
    runs = reached = 0
    energy_sum = 0
    steps_sum = 0
    for z0 in starts:
        runs += 1
        cur = z0
        energy = 0
        taken = 0
        rng = np.random.default_rng((seed, z0)) if p > 0.0 else None
        ok = False
        for _ in range(max_steps):
            if attained(cur):
                ok = True
                break
            a = action_list[cur]
            if a < 0:
                break
            nxt = next_list[cur]
            if rng is not None:
                mem = [m for m in mem_list[cur][a] if m >= 0]
                if rng.random() < p and len(mem) > 1:
                    others = [m for m in mem if m != nxt]
                    nxt = others[int(rng.integers(len(others)))]
            energy += step_cost[cur]
            taken += 1
            cur = nxt
        else:
            ok = attained(cur)
        if ok:
            reached += 1
            energy_sum += energy
            steps_sum += taken
    if runs == 0:
        return ReachabilitySummary(0, 0, None, None)
    if reached == 0:
        return ReachabilitySummary(runs, 0, None, None)
    return ReachabilitySummary(runs, reached, energy_sum / reached, steps_sum / reached)


def write_trajectory(traj: Trajectory, plan: FeedbackPlan, disturbance: DisturbanceConfig, stream) -> None:
    """Tabular trajectory export; the terminal marker is the action token
    of the final row."""
    stream.write("# trajectory-v1\n")
    stream.write(f"# heading_convention {HEADING_CONVENTION}\n")
    stream.write(f"# config_hash {plan.config_hash}\n")
    stream.write(f"# p {disturbance.p!r}\n")
    stream.write(f"# seed {disturbance.seed}\n")
    stream.write(f"# terminal {traj.terminal.value}\n")
    stream.write("# columns step ix iy layer heading_deg action energy_cum\n")
    final_state = traj.steps[-1].successor if traj.steps else traj.start
    for st in traj.steps:
        s = st.state
        stream.write(
            f"{st.index} {s.ix} {s.iy} {s.layer} {heading_deg(s.heading):g} {st.action.name} {st.energy_after}\n"
        )
    s = final_state
    stream.write(
        f"{len(traj.steps)} {s.ix} {s.iy} {s.layer} {heading_deg(s.heading):g} "
        f"{traj.terminal.name} {traj.energy}\n"
    )
