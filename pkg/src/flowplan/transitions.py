"""Vehicle kinematics: actions, energy costs, and successor states.

The six actions move a state over the lattice. How far the
position-changing actions carry the vehicle depends on its alignment with
the local flow: the angular distance between heading and flow direction,
normalized to [0, 1], gates displacement to 2, 1, or 0 cells. Each
state-action pair yields an outcome set: the nominal successor plus,
when dispersal is enabled, the cells one lateral step to either side of
the nominal displacement.

This module is the single-transition reference; the batch kernels in
``flowplan._kernels`` replicate it array-wide and are cross-checked
against it in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

from .flowfield import FlowField, map_cell, nearest_free_to_cell
from .lattice import (
    NUM_HEADINGS,
    OCTANT_DX,
    OCTANT_DY,
    Lattice,
    State,
    angular_distance_deg,
    direction_deg,
    heading_deg,
    octant_of,
    octant_of_deg,
)

__all__ = [
    "Action",
    "ActionUnavailable",
    "CostSet",
    "UncertaintyConfig",
    "OutcomeSet",
    "angular_distance",
    "alignment_score",
    "flow_direction",
    "displacement_cells",
    "successors",
    "available_actions",
    "action_cost",
]


class Action(IntEnum):
    """The six vehicle actions.

    Numeric order doubles as the planner's tie-break order among
    equal-cost alternatives, cheap-and-passive first.
    """

    DRIFT = 0
    UP = 1
    DOWN = 2
    FORWARD = 3
    ROTATE_LEFT = 4
    ROTATE_RIGHT = 5


class ActionUnavailable(Exception):
    """The action cannot be taken from this state (e.g. UP at the surface)."""


@dataclass(frozen=True)
class CostSet:
    """Energy cost per action class, ordered drift < glide < forward < rotate.

    UP and DOWN charge the glide cost; both rotations charge the rotate
    cost.
    """

    drift: int = 0
    glide: int = 2
    forward: int = 4
    rotate: int = 10

    def __post_init__(self) -> None:
        costs = (self.drift, self.glide, self.forward, self.rotate)
        if any(c < 0 or c != int(c) for c in costs):
            raise ValueError(f"costs must be non-negative integers, got {costs}")
        if not (self.drift < self.glide < self.forward < self.rotate):
            raise ValueError(f"costs must satisfy drift < glide < forward < rotate, got {costs}")

    def cost_of(self, action: Action) -> int:
        return _COST_FIELD[action](self)

    def as_table(self) -> tuple[int, ...]:
        """Cost per action, indexed by Action value."""
        return tuple(self.cost_of(Action(a)) for a in range(len(Action)))


_COST_FIELD = {
    Action.DRIFT: lambda c: c.drift,
    Action.UP: lambda c: c.glide,
    Action.DOWN: lambda c: c.glide,
    Action.FORWARD: lambda c: c.forward,
    Action.ROTATE_LEFT: lambda c: c.rotate,
    Action.ROTATE_RIGHT: lambda c: c.rotate,
}


def action_cost(action: Action, costs: CostSet) -> int:
    return costs.cost_of(action)


@dataclass(frozen=True)
class UncertaintyConfig:
    """Whether outcome sets include lateral dispersal around the nominal."""

    dispersal: bool = True


@dataclass(frozen=True)
class OutcomeSet:
    """Successor states of one action: nominal plus dispersal, as indices."""

    nominal: int
    members: tuple[int, ...]  # sorted ascending, includes nominal

    def __post_init__(self) -> None:
        if self.nominal not in self.members:
            raise ValueError("nominal successor missing from members")


def angular_distance(theta: float, theta_w: float) -> float:
    """Circular distance between two angles in [0, 2*pi), result in [0, pi]."""
    d = abs(theta - theta_w)
    return min(d, 2.0 * math.pi - d)


def alignment_score(theta: float, theta_w: float) -> float:
    """Heading-to-flow alignment in [0, 1]: angular distance in degrees
    over 180. 0 means aligned with the flow, 1 means opposed."""
    return math.degrees(angular_distance(theta, theta_w)) / 180.0


def displacement_cells(s: float) -> int:
    """Cells of displacement granted at alignment score s: 2 when
    s <= 0.2, 1 when 0.2 < s <= 0.5, else 0."""
    if s <= 0.2:
        return 2
    if s <= 0.5:
        return 1
    return 0


def flow_direction(field: FlowField, cell: tuple[int, int, int], dt: float) -> float | None:
    """Direction (radians, ccw from east) the flow carries this cell, from
    the cell-to-mapped-cell displacement; None in still water (the cell
    maps to itself)."""
    mx, my, _ = map_cell(field, cell, dt)
    deg = direction_deg(mx - cell[0], my - cell[1])
    return None if deg is None else math.radians(deg)


def _flow_dir_deg(field: FlowField, cell: tuple[int, int, int], dt: float) -> float | None:
    mx, my, _ = map_cell(field, cell, dt)
    return direction_deg(mx - cell[0], my - cell[1])


def _step_toward(field: FlowField, ix: int, iy: int, layer: int, octant: int) -> tuple[int, int]:
    """One unit step along an octant, with map_cell-style redirection: the
    neighbor cell is the target, snapped to the nearest free cell when it
    is land or off the grid."""
    tx = ix + OCTANT_DX[octant]
    ty = iy + OCTANT_DY[octant]
    return nearest_free_to_cell(field, layer, tx, ty)


def _chain_steps(field: FlowField, ix: int, iy: int, layer: int, octant: int, n: int) -> tuple[int, int]:
    for _ in range(n):
        ix, iy = _step_toward(field, ix, iy, layer, octant)
    return ix, iy


def _dispersal_members(
    field: FlowField,
    lattice: Lattice,
    start_xy: tuple[int, int],
    nominal: State,
    dispersal: bool,
) -> OutcomeSet:
    nom_z = lattice.encode(nominal)
    ddx = nominal.ix - start_xy[0]
    ddy = nominal.iy - start_xy[1]
    if not dispersal or (ddx == 0 and ddy == 0):
        return OutcomeSet(nom_z, (nom_z,))
    o = octant_of(ddx, ddy)
    members = {nom_z}
    for perp in ((o + 2) % 8, (o - 2) % 8):
        lx = nominal.ix + OCTANT_DX[perp]
        ly = nominal.iy + OCTANT_DY[perp]
        if field.is_free(lx, ly, nominal.layer):
            members.add(lattice.encode(State(lx, ly, nominal.layer, nominal.heading)))
    return OutcomeSet(nom_z, tuple(sorted(members)))


def successors(
    state: State,
    action: Action,
    field: FlowField,
    dt: float,
    uncertainty: UncertaintyConfig = UncertaintyConfig(),
    *,
    strict_paper_displacement: bool = False,
) -> OutcomeSet:
    """Outcome set of one action from one state.

    DRIFT rides the flow for displacement_cells(s) unit steps along the
    flow octant (nothing in still water). FORWARD advances along the
    vehicle heading: max(1, displacement_cells(s)) steps, or exactly
    displacement_cells(s) under strict_paper_displacement; still water
    grants 1 step. Rotations turn 45 degrees in place. UP/DOWN move one
    layer toward/away from the surface, then drift along the destination
    layer's flow per the same displacement rule.

    Raises ActionUnavailable for UP at the surface, DOWN at the deepest
    layer, gliding onto a layer with no free cell, and FORWARD pinned in
    place (no net motion possible along its heading).
    """
    lattice = Lattice(field)
    z = lattice.require_free_state(state)
    ix, iy, layer, h = state

    if action is Action.ROTATE_LEFT or action is Action.ROTATE_RIGHT:
        turn = 1 if action is Action.ROTATE_LEFT else -1
        nominal = State(ix, iy, layer, (h + turn) % NUM_HEADINGS)
        nz = lattice.encode(nominal)
        return OutcomeSet(nz, (nz,))

    if action is Action.DRIFT:
        wdeg = _flow_dir_deg(field, (ix, iy, layer), dt)
        if wdeg is None:
            return OutcomeSet(z, (z,))
        s = angular_distance_deg(heading_deg(h), wdeg) / 180.0
        o = octant_of_deg(wdeg)
        nx_, ny_ = _chain_steps(field, ix, iy, layer, o, displacement_cells(s))
        nominal = State(nx_, ny_, layer, h)
        return _dispersal_members(field, lattice, (ix, iy), nominal, uncertainty.dispersal)

    if action is Action.FORWARD:
        wdeg = _flow_dir_deg(field, (ix, iy, layer), dt)
        if wdeg is None:
            n_steps = 1
        else:
            s = angular_distance_deg(heading_deg(h), wdeg) / 180.0
            n_steps = displacement_cells(s) if strict_paper_displacement else max(1, displacement_cells(s))
        nx_, ny_ = _chain_steps(field, ix, iy, layer, h, n_steps)
        if (nx_, ny_) == (ix, iy):
            raise ActionUnavailable(f"FORWARD cannot make way from {state}")
        nominal = State(nx_, ny_, layer, h)
        return _dispersal_members(field, lattice, (ix, iy), nominal, uncertainty.dispersal)

    if action is Action.UP or action is Action.DOWN:
        dest = layer - 1 if action is Action.UP else layer + 1
        if not 0 <= dest < field.geometry.num_layers:
            raise ActionUnavailable(f"{action.name} leaves the water column from layer {layer}")
        if not field.layer_has_free_cell(dest):
            raise ActionUnavailable(f"layer {dest} has no free cells")
        ax, ay = nearest_free_to_cell(field, dest, ix, iy)
        wdeg = _flow_dir_deg(field, (ax, ay, dest), dt)
        if wdeg is None:
            nx_, ny_ = ax, ay
        else:
            s = angular_distance_deg(heading_deg(h), wdeg) / 180.0
            o = octant_of_deg(wdeg)
            nx_, ny_ = _chain_steps(field, ax, ay, dest, o, displacement_cells(s))
        nominal = State(nx_, ny_, dest, h)
        return _dispersal_members(field, lattice, (ix, iy), nominal, uncertainty.dispersal)

    raise ValueError(f"unknown action {action!r}")


def available_actions(
    state: State,
    field: FlowField,
    dt: float,
    uncertainty: UncertaintyConfig = UncertaintyConfig(),
    *,
    strict_paper_displacement: bool = False,
) -> list[tuple[Action, OutcomeSet]]:
    """Every action available from a state with its outcome set, in
    tie-break order."""
    out = []
    for action in Action:
        try:
            out.append(
                (
                    action,
                    successors(
                        state,
                        action,
                        field,
                        dt,
                        uncertainty,
                        strict_paper_displacement=strict_paper_displacement,
                    ),
                )
            )
        except ActionUnavailable:
            continue
    return out
