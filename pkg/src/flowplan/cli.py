"""Command-line pipeline: gen-field, plan, rollout, verify, batch.

Exit codes: 0 success, 2 usage error, 3 validation failure (bad inputs,
mismatched artifacts), 4 verification failure (plan inconsistencies, or
a rollout that did not reach the goal).
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from contextlib import contextmanager

import numpy as np

from .config import ConfigError, PlannerConfig, config_from_items, parse_config
from .fieldio import field_digest, load_flow_field, save_flow_field
from .flowfield import FieldError, FlowField, GridGeometry, generate_synthetic_field
from .lattice import NUM_HEADINGS, LatticeError, State
from .oracle import per_state_dijkstra_oracle
from .planner import PlanError, build_graph, check_bellman, compute_feedback_plan
from .planio import PlanFormatError, read_plan, write_plan, write_quiver
from .simulator import DisturbanceConfig, Terminal, batch_reachability, rollout, write_trajectory
from .transitions import CostSet, UncertaintyConfig

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_VERIFICATION = 4

_INPUT_ERRORS = (FieldError, ConfigError, LatticeError, PlanError, PlanFormatError, ValueError, OSError)


@contextmanager
def _out_stream(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w") as fh:
            yield fh


def _heading_index(deg: float, what: str) -> int:
    if deg % 45.0 != 0.0:
        raise ConfigError(f"{what} must be a multiple of 45 degrees, got {deg}")
    return int(deg / 45.0) % NUM_HEADINGS


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flowplan", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-field", help="write a synthetic flow field document")
    p.add_argument("--kind", required=True, choices=["uniform", "double_gyre", "rotational"])
    p.add_argument("--nx", required=True, type=int)
    p.add_argument("--ny", required=True, type=int)
    p.add_argument("--layers", type=int, default=1)
    p.add_argument("--depths", type=float, nargs="+", help="layer depths in m (default 0, 5, 10, ...)")
    p.add_argument("--cell-size", type=float, default=1000.0, help="cell edge in m")
    p.add_argument("--u", type=float, default=0.0, help="uniform east velocity (m/s)")
    p.add_argument("--v", type=float, default=0.0, help="uniform north velocity (m/s)")
    p.add_argument("--amplitude", type=float, default=0.5, help="double-gyre amplitude (m/s)")
    p.add_argument("--omega", type=float, default=1e-3, help="rotational rate (rad/s)")
    p.add_argument("--origin", type=float, nargs=2, metavar=("LON", "LAT"))
    p.add_argument("--out", help="output path (default stdout)")

    p = sub.add_parser("plan", help="compute a feedback plan and quiver slice")
    p.add_argument("--field", required=True)
    p.add_argument("--config", help="planner config file")
    p.add_argument("--out", required=True, help="plan file path")
    p.add_argument("--quiver", help="quiver file path (default: <out>.quiver)")
    p.add_argument("--layer", type=int, help="quiver slice layer (default 0)")
    p.add_argument("--heading-deg", type=float, help="quiver slice heading (default: config initial heading)")
    p.add_argument("--goal-ix", type=int)
    p.add_argument("--goal-iy", type=int)
    p.add_argument("--goal-layer", type=int)
    p.add_argument("--goal-heading", help="'any' or degrees, multiple of 45")
    p.add_argument("--dt-s", type=float)
    p.add_argument("--v-ref", type=float, help="reference speed (m/s); dt = cell_size / v_ref")
    p.add_argument("--c-drift", type=int)
    p.add_argument("--c-glide", type=int)
    p.add_argument("--c-forward", type=int)
    p.add_argument("--c-rotate", type=int)
    p.add_argument("--dispersal", choices=["on", "off"])
    p.add_argument("--strict-paper-displacement", choices=["on", "off"])
    p.add_argument("--outcome-semantics", choices=["optimistic", "worst_case"])

    p = sub.add_parser("rollout", help="execute a plan from one start state")
    p.add_argument("--plan", required=True)
    p.add_argument("--field", required=True)
    p.add_argument("--start-ix", required=True, type=int)
    p.add_argument("--start-iy", required=True, type=int)
    p.add_argument("--start-layer", type=int, default=0)
    p.add_argument("--start-heading-deg", type=float, default=0.0)
    p.add_argument("--p", type=float, default=0.0, help="dispersal probability")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-steps", type=int)
    p.add_argument("--out", help="trajectory file path (default stdout)")

    p = sub.add_parser("verify", help="re-check a plan file against its field")
    p.add_argument("--plan", required=True)
    p.add_argument("--field", required=True)
    p.add_argument("--oracle-samples", type=int, default=50, help="forward-search starts to audit")
    p.add_argument("--seed", type=int, default=0, help="sampling seed")

    p = sub.add_parser("batch", help="roll out from every reachable state and summarize")
    p.add_argument("--plan", required=True)
    p.add_argument("--field", required=True)
    p.add_argument("--p", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-steps", type=int, help="default 4N")
    return parser


def _cmd_gen_field(args) -> int:
    if args.depths is not None:
        depths = tuple(args.depths)
        if args.layers != 1 and len(depths) != args.layers:
            raise ConfigError(f"--depths lists {len(depths)} layers but --layers is {args.layers}")
    else:
        depths = tuple(5.0 * i for i in range(args.layers))
    geometry = GridGeometry(
        nx=args.nx,
        ny=args.ny,
        cell_size=args.cell_size,
        layer_depths=depths,
        origin=tuple(args.origin) if args.origin else None,
    )
    field = generate_synthetic_field(
        args.kind, geometry, u0=args.u, v0=args.v, amplitude=args.amplitude, omega=args.omega
    )
    with _out_stream(args.out) as fh:
        save_flow_field(field, fh)
    return EXIT_OK


def _config_from_args(args) -> PlannerConfig:
    cfg = PlannerConfig()
    if args.config:
        with open(args.config) as fh:
            cfg = parse_config(fh.read())
    overrides: dict[str, str] = {}
    for key, val in (
        ("dt_s", args.dt_s),
        ("v_ref_mps", args.v_ref),
        ("c_drift", args.c_drift),
        ("c_glide", args.c_glide),
        ("c_forward", args.c_forward),
        ("c_rotate", args.c_rotate),
        ("dispersal", args.dispersal),
        ("strict_paper_displacement", args.strict_paper_displacement),
        ("outcome_semantics", args.outcome_semantics),
        ("goal_ix", args.goal_ix),
        ("goal_iy", args.goal_iy),
        ("goal_layer", args.goal_layer),
        ("goal_heading", args.goal_heading),
        ("initial_heading_deg", args.heading_deg),
    ):
        if val is not None:
            overrides[key] = str(val)
    if not overrides:
        return cfg
    # Re-parse with overrides layered over the file's values.
    items: dict[str, str] = {}
    if cfg.dt_s is not None:
        items["dt_s"] = repr(cfg.dt_s)
    if cfg.v_ref_mps is not None:
        items["v_ref_mps"] = repr(cfg.v_ref_mps)
    items.update(
        c_drift=str(cfg.costs.drift),
        c_glide=str(cfg.costs.glide),
        c_forward=str(cfg.costs.forward),
        c_rotate=str(cfg.costs.rotate),
        dispersal="on" if cfg.dispersal else "off",
        strict_paper_displacement="on" if cfg.strict_paper_displacement else "off",
        outcome_semantics=cfg.outcome_semantics,
        initial_heading_deg=repr(cfg.initial_heading_deg),
    )
    if cfg.goal is not None:
        items["goal_ix"] = str(cfg.goal.ix)
        items["goal_iy"] = str(cfg.goal.iy)
        items["goal_layer"] = str(cfg.goal.layer)
        items["goal_heading"] = "any" if cfg.goal.heading is None else str(cfg.goal.heading * 45)
    items.update(overrides)
    if "dt_s" in overrides and "v_ref_mps" in items and "v_ref_mps" not in overrides:
        del items["v_ref_mps"]
    if "v_ref_mps" in overrides and "dt_s" in items and "dt_s" not in overrides:
        del items["dt_s"]
    return config_from_items(items)


def _cmd_plan(args) -> int:
    field = load_flow_field(args.field)
    cfg = _config_from_args(args)
    if cfg.goal is None:
        raise ConfigError("no goal: set goal_ix/goal_iy in the config or pass --goal-ix/--goal-iy")
    dt = cfg.resolved_dt(field)
    graph = build_graph(
        field,
        cfg.costs,
        dt,
        UncertaintyConfig(dispersal=cfg.dispersal),
        strict_paper_displacement=cfg.strict_paper_displacement,
    )
    plan = compute_feedback_plan(graph, cfg.goal, cfg.outcome_semantics)
    with open(args.out, "w") as fh:
        write_plan(plan, fh)
    layer = args.layer if args.layer is not None else 0
    slice_deg = args.heading_deg if args.heading_deg is not None else cfg.initial_heading_deg
    heading = _heading_index(slice_deg, "--heading-deg")
    quiver_path = args.quiver if args.quiver else args.out + ".quiver"
    with open(quiver_path, "w") as fh:
        write_quiver(plan, graph, layer, heading, fh)
    n_reach = int((plan.cost_to_go_raw >= 0).sum())
    print(f"plan written to {args.out} ({plan.num_states} states, {n_reach} reachable); quiver to {quiver_path}")
    print(f"config_hash {plan.config_hash}")
    return EXIT_OK


def _recompute_plan(doc, field: FlowField):
    """Rebuild graph and plan from a plan document's header; verifies the
    field digest (and thus the config hash inputs) first."""
    h = doc.header
    if h.get("field_digest") != field_digest(field):
        raise PlanError("field digest mismatch: this is not the field the plan was computed on")
    costs = CostSet(
        drift=int(h["c_drift"]), glide=int(h["c_glide"]), forward=int(h["c_forward"]), rotate=int(h["c_rotate"])
    )
    graph = build_graph(
        field,
        costs,
        float(h["dt_s"]),
        UncertaintyConfig(dispersal=h["dispersal"] == "on"),
        strict_paper_displacement=h["strict_paper_displacement"] == "on",
    )
    plan = compute_feedback_plan(graph, doc.goal_spec(), h["outcome_semantics"])
    if plan.config_hash != doc.config_hash:
        raise PlanError("config hash mismatch: plan header was altered")
    return graph, plan


def _cmd_rollout(args) -> int:
    field = load_flow_field(args.field)
    doc = read_plan(args.plan)
    graph, plan = _recompute_plan(doc, field)
    if not (np.array_equal(doc.cost_to_go, plan.cost_to_go_raw) and np.array_equal(doc.action, plan.action_raw)):
        raise PlanError("plan rows do not match a fresh computation; run 'flowplan verify'")
    start = State(
        ix=args.start_ix,
        iy=args.start_iy,
        layer=args.start_layer,
        heading=_heading_index(args.start_heading_deg, "--start-heading-deg"),
    )
    disturbance = DisturbanceConfig(p=args.p, seed=args.seed)
    traj = rollout(plan, field, start, disturbance, args.max_steps, graph=graph)
    with _out_stream(args.out) as fh:
        write_trajectory(traj, plan, disturbance, fh)
    z = plan.lattice.encode(start)
    cost = plan.cost_to_go(z)
    print(
        f"terminal={traj.terminal.value} steps={traj.num_steps} energy={traj.energy} "
        f"cost_to_go={'-' if cost is None else cost}",
        file=sys.stderr,
    )
    return EXIT_OK if traj.terminal is Terminal.REACHED_GOAL else EXIT_VERIFICATION


def _cmd_verify(args) -> int:
    field = load_flow_field(args.field)
    doc = read_plan(args.plan)
    graph, plan = _recompute_plan(doc, field)

    failures = 0

    loaded = dataclasses.replace(plan, cost_to_go_raw=doc.cost_to_go, action_raw=doc.action)
    violations = check_bellman(graph, loaded)
    if violations:
        failures += len(violations)
        for z, stored, expect in violations[:20]:
            print(f"FAIL bellman state={z} stored={stored} expected={expect}")
    print(f"{'FAIL' if violations else 'ok'} bellman-consistency violations={len(violations)}")

    goal_rows = np.nonzero(doc.at_goal)[0]
    goal_expect = np.zeros(plan.num_states, dtype=bool)
    goal_expect[list(plan.goal_indices)] = True
    goal_ok = np.array_equal(doc.at_goal, goal_expect)
    if not goal_ok:
        failures += 1
    print(f"{'ok' if goal_ok else 'FAIL'} goal-rows count={len(goal_rows)}")

    if plan.semantics != "optimistic":
        # The forward oracle is the literal per-start shortest path, an
        # optimistic construction; it cannot audit worst-case plans.
        print(f"skip oracle-equivalence (outcome_semantics {plan.semantics})")
        return EXIT_VERIFICATION if failures else EXIT_OK

    rng = np.random.default_rng(args.seed)
    candidates = np.nonzero(graph.valid.any(axis=1))[0]
    k = min(args.oracle_samples, len(candidates))
    sample = rng.choice(candidates, size=k, replace=False) if k else np.array([], dtype=int)
    cache: dict[int, int | None] = {}
    oracle_bad = 0
    for z in sorted(int(z) for z in sample):
        cost, action = per_state_dijkstra_oracle(graph, z, plan.goal, cost_cache=cache)
        stored_cost = None if doc.cost_to_go[z] < 0 else int(doc.cost_to_go[z])
        stored_action = None if doc.action[z] < 0 else int(doc.action[z])
        want_action = None if plan.is_goal(z) or action is None else int(action)
        if cost != stored_cost or want_action != stored_action:
            oracle_bad += 1
            print(
                f"FAIL oracle state={z} cost={cost} stored={stored_cost} "
                f"action={action} stored_action={stored_action}"
            )
    failures += oracle_bad
    print(f"{'FAIL' if oracle_bad else 'ok'} oracle-equivalence sampled={k} violations={oracle_bad}")
    return EXIT_VERIFICATION if failures else EXIT_OK


def _cmd_batch(args) -> int:
    field = load_flow_field(args.field)
    doc = read_plan(args.plan)
    graph, plan = _recompute_plan(doc, field)
    max_steps = args.max_steps if args.max_steps is not None else 4 * plan.num_states
    summary = batch_reachability(
        plan, field, DisturbanceConfig(p=args.p, seed=args.seed), max_steps, graph=graph
    )
    if summary.empty:
        print("no reachable states")
        return EXIT_VALIDATION
    line = f"runs={summary.runs} reached={summary.reached} fraction_reached={summary.fraction_reached:.3f}"
    if summary.reached:
        line += f" mean_energy={summary.mean_energy:.3f} mean_steps={summary.mean_steps:.3f}"
    print(line)
    return EXIT_OK


_COMMANDS = {
    "gen-field": _cmd_gen_field,
    "plan": _cmd_plan,
    "rollout": _cmd_rollout,
    "verify": _cmd_verify,
    "batch": _cmd_batch,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
