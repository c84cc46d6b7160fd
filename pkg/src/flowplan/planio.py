"""Text export/import of feedback plans and quiver (arrow) slices.

Plan files carry a '#'-prefixed header (geometry, heading convention,
planner knobs, config hash) and one row per state: index, ix, iy, layer,
heading_deg, action, cost_to_go. AT_GOAL marks goal states and
UNREACHABLE marks states with no path (land slots included); their cost
column is 0 and '-' respectively. Quiver files are plot-ready action
glyphs for one layer/heading slice.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import fingerprint_items
from .lattice import HEADING_CONVENTION, NUM_HEADINGS, GoalSpec, heading_deg
from .planner import FeedbackPlan, PlanningGraph
from .transitions import Action

PLAN_MAGIC = "feedbackplan-v1"
QUIVER_MAGIC = "quiver-v1"

AT_GOAL = "AT_GOAL"
UNREACHABLE = "UNREACHABLE"


class PlanFormatError(ValueError):
    """Malformed plan document."""


def write_plan(plan: FeedbackPlan, stream) -> None:
    g = plan.lattice.geometry
    stream.write(f"# {PLAN_MAGIC}\n")
    items = fingerprint_items(
        plan.lattice.field,
        plan.costs,
        plan.dt,
        plan.uncertainty.dispersal,
        plan.strict_paper_displacement,
        plan.semantics,
        plan.goal,
    )
    for key, value in items:
        stream.write(f"# {key} {value}\n")
    stream.write(f"# config_hash {plan.config_hash}\n")
    stream.write(f"# states {plan.num_states}\n")
    stream.write("# columns index ix iy layer heading_deg action cost_to_go\n")
    cost = plan.cost_to_go_raw
    act = plan.action_raw
    decode = plan.lattice.decode
    for z in range(plan.num_states):
        s = decode(z)
        if plan.is_goal(z):
            token, cost_s = AT_GOAL, "0"
        elif cost[z] < 0:
            token, cost_s = UNREACHABLE, "-"
        else:
            token, cost_s = Action(int(act[z])).name, str(int(cost[z]))
        stream.write(f"{z} {s.ix} {s.iy} {s.layer} {heading_deg(s.heading):g} {token} {cost_s}\n")


@dataclass
class PlanDocument:
    """Parsed plan file: header key-values plus the per-state columns."""

    header: dict[str, str]
    cost_to_go: np.ndarray  # int64, -1 unreachable
    action: np.ndarray  # int8, -1 for AT_GOAL / UNREACHABLE
    at_goal: np.ndarray  # bool

    @property
    def num_states(self) -> int:
        return len(self.cost_to_go)

    @property
    def config_hash(self) -> str:
        return self.header["config_hash"]

    def goal_spec(self) -> GoalSpec:
        h = self.header
        tok = h["goal_heading"]
        heading = None if tok == "any" else int(float(tok) / 45.0) % NUM_HEADINGS
        return GoalSpec(ix=int(h["goal_ix"]), iy=int(h["goal_iy"]), layer=int(h["goal_layer"]), heading=heading)


def read_plan(source) -> PlanDocument:
    if hasattr(source, "read"):
        text = source.read()
    elif isinstance(source, str) and "\n" in source:
        text = source
    else:
        with open(source) as fh:
            text = fh.read()

    header: dict[str, str] = {}
    rows: list[tuple[int, str]] = []
    lines = text.splitlines()
    if not lines or lines[0].strip() != f"# {PLAN_MAGIC}":
        raise PlanFormatError(f"not a {PLAN_MAGIC} document")
    for no, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].strip().split(None, 1)
            if len(parts) == 2:
                header[parts[0]] = parts[1]
            continue
        rows.append((no, line))
    if "states" not in header:
        raise PlanFormatError("missing 'states' header")
    n = int(header["states"])
    if len(rows) != n:
        raise PlanFormatError(f"expected {n} state rows, found {len(rows)}")

    cost = np.full(n, -1, dtype=np.int64)
    action = np.full(n, -1, dtype=np.int8)
    at_goal = np.zeros(n, dtype=bool)
    action_values = {a.name: int(a) for a in Action}
    seen = np.zeros(n, dtype=bool)
    for no, line in rows:
        toks = line.split()
        if len(toks) != 7:
            raise PlanFormatError(f"line {no}: expected 7 columns, found {len(toks)}")
        z = int(toks[0])
        if not 0 <= z < n or seen[z]:
            raise PlanFormatError(f"line {no}: bad or duplicate state index {z}")
        seen[z] = True
        token, cost_s = toks[5], toks[6]
        if token == AT_GOAL:
            at_goal[z] = True
            cost[z] = int(cost_s)
        elif token == UNREACHABLE:
            if cost_s != "-":
                raise PlanFormatError(f"line {no}: unreachable rows carry cost '-'")
        else:
            if token not in action_values:
                raise PlanFormatError(f"line {no}: unknown action {token!r}")
            action[z] = action_values[token]
            cost[z] = int(cost_s)
    return PlanDocument(header=header, cost_to_go=cost, action=action, at_goal=at_goal)


_QUIVER_CODE = {
    Action.DRIFT: "arrow",
    Action.FORWARD: "arrow",
    Action.UP: "ascend",
    Action.DOWN: "descend",
    Action.ROTATE_LEFT: "curl_ccw",
    Action.ROTATE_RIGHT: "curl_cw",
}


def write_quiver(plan: FeedbackPlan, graph: PlanningGraph, layer: int, heading: int, stream) -> None:
    """One record per free cell of a layer at a fixed heading: the planned
    action as a glyph code plus the nominal motion in cell units."""
    g = plan.lattice.geometry
    if not 0 <= layer < g.num_layers:
        raise ValueError(f"layer {layer} outside [0, {g.num_layers})")
    if not 0 <= heading < NUM_HEADINGS:
        raise ValueError(f"heading {heading} outside [0, {NUM_HEADINGS})")
    stream.write(f"# {QUIVER_MAGIC}\n")
    stream.write(f"# heading_convention {HEADING_CONVENTION}\n")
    stream.write(f"# config_hash {plan.config_hash}\n")
    stream.write(f"# layer {layer}\n")
    stream.write(f"# heading_deg {heading_deg(heading):g}\n")
    stream.write("# columns ix iy x_m y_m code dx dy action cost_to_go\n")
    lat = plan.lattice
    field = lat.field
    for iy in range(g.ny):
        for ix in range(g.nx):
            if field.land[layer, iy, ix]:
                continue
            z = lat.encode((ix, iy, layer, heading))
            x, y = g.cell_center(ix, iy)
            if plan.is_goal(z):
                code, dx, dy, act_s, cost_s = "goal", 0, 0, "-", "0"
            elif plan.cost_to_go_raw[z] < 0:
                code, dx, dy, act_s, cost_s = "unreachable", 0, 0, "-", "-"
            else:
                a = Action(int(plan.action_raw[z]))
                nom = lat.decode(int(graph.nominal[z, a]))
                code = _QUIVER_CODE[a]
                dx, dy = nom.ix - ix, nom.iy - iy
                act_s = a.name
                cost_s = str(int(plan.cost_to_go_raw[z]))
            stream.write(f"{ix} {iy} {x:g} {y:g} {code} {dx} {dy} {act_s} {cost_s}\n")
