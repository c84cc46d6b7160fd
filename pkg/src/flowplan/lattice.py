"""Discrete vehicle state space: grid cell x depth layer x heading.

Headings are 8 compass octants, 45 degrees apart, measured
counterclockwise from east: h = 0 is east, h = 2 is north. States pack
into a dense integer index with heading varying fastest, then ix, iy,
layer; land cells occupy index slots but are invalid for planning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .flowfield import FieldError, FlowField

NUM_HEADINGS = 8
HEADING_STEP_DEG = 45.0

# Stamped into every export header so consumers cannot misread angles.
HEADING_CONVENTION = "heading 0 = east, counterclockwise, 8 x 45deg"

# Unit cell step per octant, counterclockwise from east.
OCTANT_DX = (1, 1, 0, -1, -1, -1, 0, 1)
OCTANT_DY = (0, 1, 1, 1, 0, -1, -1, -1)


class LatticeError(ValueError):
    """State or index outside the lattice."""


class State(NamedTuple):
    """One lattice state: position cell, depth layer, heading octant."""

    ix: int
    iy: int
    layer: int
    heading: int


@dataclass(frozen=True)
class GoalSpec:
    """Goal cell plus heading requirement (None means any heading)."""

    ix: int
    iy: int
    layer: int
    heading: int | None = None

    def __post_init__(self) -> None:
        if self.heading is not None and not 0 <= self.heading < NUM_HEADINGS:
            raise LatticeError(f"goal heading {self.heading} outside [0, {NUM_HEADINGS})")

    @property
    def cell(self) -> tuple[int, int, int]:
        return self.ix, self.iy, self.layer


def heading_deg(h: int) -> float:
    """Heading octant as degrees counterclockwise from east."""
    return h * HEADING_STEP_DEG


def direction_deg(ddx: int, ddy: int) -> float | None:
    """Direction of an integer cell displacement, degrees in [0, 360).

    Axis-aligned and diagonal displacements return exact multiples of 45
    so downstream threshold comparisons stay exact; None for no motion.
    """
    if ddx == 0 and ddy == 0:
        return None
    if ddx == 0:
        return 90.0 if ddy > 0 else 270.0
    if ddy == 0:
        return 0.0 if ddx > 0 else 180.0
    if ddx == ddy:
        return 45.0 if ddx > 0 else 225.0
    if ddx == -ddy:
        return 135.0 if ddy > 0 else 315.0
    return math.degrees(math.atan2(ddy, ddx)) % 360.0


def octant_of_deg(deg: float) -> int:
    """Nearest compass octant to an angle in [0, 360) degrees; half-way
    ties round counterclockwise."""
    return int(math.floor((deg + 22.5) / 45.0)) % 8


def octant_of(ddx: int, ddy: int) -> int | None:
    """Nearest compass octant for a displacement; half-way ties round
    counterclockwise. None for no motion."""
    deg = direction_deg(ddx, ddy)
    if deg is None:
        return None
    return octant_of_deg(deg)


def angular_distance_deg(a: float, b: float) -> float:
    """Circular distance between two angles in [0, 360) degrees, result
    in [0, 180]."""
    d = abs(a - b)
    return 360.0 - d if d > 180.0 else d


class Lattice:
    """Bijection between State tuples and dense indices over one field.

    encode/decode are pure index arithmetic and round-trip over the whole
    index range, land cells included; validity (free cell) is a separate
    check because planners must still be able to name invalid slots in
    exports.
    """

    def __init__(self, field: FlowField):
        self.field = field
        self.geometry = field.geometry
        g = self.geometry
        self.num_states = g.nx * g.ny * g.num_layers * NUM_HEADINGS

    def encode(self, state: State) -> int:
        ix, iy, layer, heading = state
        g = self.geometry
        if not g.in_bounds(ix, iy, layer):
            raise LatticeError(f"state {state} out of bounds")
        if not 0 <= heading < NUM_HEADINGS:
            raise LatticeError(f"heading {heading} outside [0, {NUM_HEADINGS})")
        return (((layer * g.ny + iy) * g.nx) + ix) * NUM_HEADINGS + heading

    def decode(self, z: int) -> State:
        if not 0 <= z < self.num_states:
            raise LatticeError(f"state index {z} outside [0, {self.num_states})")
        heading = z % NUM_HEADINGS
        rest = z // NUM_HEADINGS
        ix = rest % self.geometry.nx
        rest //= self.geometry.nx
        iy = rest % self.geometry.ny
        layer = rest // self.geometry.ny
        return State(ix, iy, layer, heading)

    def is_free(self, z: int) -> bool:
        s = self.decode(z)
        return not self.field.land[s.layer, s.iy, s.ix]

    def require_free_state(self, state: State) -> int:
        z = self.encode(state)
        if self.field.land[state.layer, state.iy, state.ix]:
            raise LatticeError(f"state {state} sits on a land cell")
        return z

    def goal_states(self, goal: GoalSpec) -> tuple[int, ...]:
        """Indices of the states satisfying a goal spec, ascending."""
        g = self.geometry
        if not g.in_bounds(goal.ix, goal.iy, goal.layer):
            raise LatticeError(f"goal cell {goal.cell} out of bounds")
        if self.field.land[goal.layer, goal.iy, goal.ix]:
            raise FieldError(f"goal cell {goal.cell} is land")
        headings = range(NUM_HEADINGS) if goal.heading is None else (goal.heading,)
        return tuple(self.encode(State(goal.ix, goal.iy, goal.layer, h)) for h in headings)
