"""Planner configuration document and artifact fingerprinting.

A config is a flat key-value text file; command-line flags override file
values. Every exported artifact is stamped with a config hash computed
over the resolved planning inputs plus the field digest, so a consumer
can detect plan/field/config mismatches.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .fieldio import field_digest
from .flowfield import FlowField
from .lattice import HEADING_CONVENTION, NUM_HEADINGS, GoalSpec
from .transitions import CostSet

SEMANTICS = ("optimistic", "worst_case")


class ConfigError(ValueError):
    """Invalid planner configuration."""


@dataclass(frozen=True)
class PlannerConfig:
    """Resolvable planning parameters.

    dt_s and v_ref_mps are mutually exclusive; when only v_ref_mps is
    given, dt resolves to cell_size / v_ref (the time to pass a cell).
    """

    dt_s: float | None = None
    v_ref_mps: float | None = None
    costs: CostSet = CostSet()
    dispersal: bool = True
    strict_paper_displacement: bool = False
    outcome_semantics: str = "optimistic"
    goal: GoalSpec | None = None
    initial_heading_deg: float = 0.0

    DEFAULT_V_REF = 0.5

    def __post_init__(self) -> None:
        if self.dt_s is not None and self.v_ref_mps is not None:
            raise ConfigError("give either dt_s or v_ref_mps, not both")
        if self.dt_s is not None and not self.dt_s > 0:
            raise ConfigError(f"dt_s must be positive, got {self.dt_s}")
        if self.v_ref_mps is not None and not self.v_ref_mps > 0:
            raise ConfigError(f"v_ref_mps must be positive, got {self.v_ref_mps}")
        if self.outcome_semantics not in SEMANTICS:
            raise ConfigError(f"outcome_semantics must be one of {SEMANTICS}, got {self.outcome_semantics!r}")
        if self.initial_heading_deg % 45.0 != 0.0:
            raise ConfigError(f"initial_heading_deg must be a multiple of 45, got {self.initial_heading_deg}")

    def resolved_dt(self, field: FlowField) -> float:
        if self.dt_s is not None:
            return float(self.dt_s)
        v_ref = self.v_ref_mps if self.v_ref_mps is not None else self.DEFAULT_V_REF
        return field.geometry.cell_size / v_ref

    @property
    def initial_heading(self) -> int:
        return int(self.initial_heading_deg / 45.0) % NUM_HEADINGS


_BOOL_TOKENS = {"on": True, "off": False, "true": True, "false": False, "1": True, "0": False}


def _parse_bool(key: str, tok: str) -> bool:
    try:
        return _BOOL_TOKENS[tok.lower()]
    except KeyError:
        raise ConfigError(f"{key} must be on/off, got {tok!r}") from None


def _parse_heading(tok: str) -> int | None:
    if tok.lower() == "any":
        return None
    try:
        deg = float(tok)
    except ValueError:
        raise ConfigError(f"goal_heading must be 'any' or degrees, got {tok!r}") from None
    if deg % 45.0 != 0.0:
        raise ConfigError(f"goal_heading must be a multiple of 45 degrees, got {tok!r}")
    return int(deg / 45.0) % NUM_HEADINGS


def parse_config(text: str) -> PlannerConfig:
    """Parse a flat key-value config document."""
    kv: dict[str, str] = {}
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(None, 1)
        if len(parts) != 2:
            raise ConfigError(f"line {no}: expected 'key value', got {line!r}")
        key, value = parts
        if key in kv:
            raise ConfigError(f"line {no}: duplicate key {key!r}")
        kv[key] = value
    return config_from_items(kv)


def config_from_items(kv: dict[str, str]) -> PlannerConfig:
    kv = dict(kv)

    def pop_float(key: str) -> float | None:
        if key not in kv:
            return None
        tok = kv.pop(key)
        try:
            return float(tok)
        except ValueError:
            raise ConfigError(f"{key} must be a number, got {tok!r}") from None

    def pop_int(key: str, default: int | None = None) -> int | None:
        if key not in kv:
            return default
        tok = kv.pop(key)
        try:
            return int(tok)
        except ValueError:
            raise ConfigError(f"{key} must be an integer, got {tok!r}") from None

    dt_s = pop_float("dt_s")
    v_ref = pop_float("v_ref_mps")
    costs = CostSet(
        drift=pop_int("c_drift", 0),
        glide=pop_int("c_glide", 2),
        forward=pop_int("c_forward", 4),
        rotate=pop_int("c_rotate", 10),
    )
    dispersal = _parse_bool("dispersal", kv.pop("dispersal")) if "dispersal" in kv else True
    strict = (
        _parse_bool("strict_paper_displacement", kv.pop("strict_paper_displacement"))
        if "strict_paper_displacement" in kv
        else False
    )
    semantics = kv.pop("outcome_semantics", "optimistic")
    goal = None
    if any(k in kv for k in ("goal_ix", "goal_iy", "goal_layer")):
        gix = pop_int("goal_ix")
        giy = pop_int("goal_iy")
        if gix is None or giy is None:
            raise ConfigError("goal needs both goal_ix and goal_iy")
        goal = GoalSpec(
            ix=gix,
            iy=giy,
            layer=pop_int("goal_layer", 0),
            heading=_parse_heading(kv.pop("goal_heading", "any")),
        )
    elif "goal_heading" in kv:
        raise ConfigError("goal_heading given without goal_ix/goal_iy")
    heading_deg = pop_float("initial_heading_deg")
    if kv:
        raise ConfigError(f"unknown config keys: {sorted(kv)}")
    return PlannerConfig(
        dt_s=dt_s,
        v_ref_mps=v_ref,
        costs=costs,
        dispersal=dispersal,
        strict_paper_displacement=strict,
        outcome_semantics=semantics,
        goal=goal,
        initial_heading_deg=heading_deg if heading_deg is not None else 0.0,
    )


def goal_heading_token(goal: GoalSpec) -> str:
    return "any" if goal.heading is None else repr(goal.heading * 45.0)


def fingerprint_items(
    field: FlowField,
    costs: CostSet,
    dt: float,
    dispersal: bool,
    strict: bool,
    semantics: str,
    goal: GoalSpec,
) -> list[tuple[str, str]]:
    """Canonical key-value pairs hashed into the config hash; also the
    config section of plan file headers."""
    g = field.geometry
    return [
        ("heading_convention", HEADING_CONVENTION),
        ("nx", str(g.nx)),
        ("ny", str(g.ny)),
        ("cell_size_m", repr(g.cell_size)),
        ("layer_depths_m", " ".join(repr(d) for d in g.layer_depths)),
        ("field_digest", field_digest(field)),
        ("dt_s", repr(float(dt))),
        ("c_drift", str(costs.drift)),
        ("c_glide", str(costs.glide)),
        ("c_forward", str(costs.forward)),
        ("c_rotate", str(costs.rotate)),
        ("dispersal", "on" if dispersal else "off"),
        ("strict_paper_displacement", "on" if strict else "off"),
        ("outcome_semantics", semantics),
        ("goal_ix", str(goal.ix)),
        ("goal_iy", str(goal.iy)),
        ("goal_layer", str(goal.layer)),
        ("goal_heading", goal_heading_token(goal)),
    ]


def config_hash(items: list[tuple[str, str]]) -> str:
    payload = "\n".join(f"{k} {v}" for k, v in items)
    return hashlib.sha256(payload.encode()).hexdigest()
